use std::collections::{BTreeSet, HashMap};

use log::debug;

use super::{ExpressionTree, Path, Provenance};
use crate::equiv::{RankType, TypeSession};
use crate::error::{Error, Result};
use crate::shrink::{shrink_tree, shrink_word_marked, SigmaTree};
use crate::structures::{check_embedding, tree_of_structures, word_of_structures, Element, Structure};
use crate::wqo::{first_embedding_pair, to_sk_pred};

/// Shrinks a single leaf: returns a set of its elements, containing
/// `marks`, whose induced substructure is m-equivalent to the leaf and still
/// belongs to the leaf class.
pub trait LeafShrinker: Sync {
    fn shrink(&self, leaf: &Structure, marks: &BTreeSet<Element>, m: usize) -> Result<BTreeSet<Element>>;
}

impl<F> LeafShrinker for F
where
    F: Fn(&Structure, &BTreeSet<Element>, usize) -> Result<BTreeSet<Element>> + Sync,
{
    fn shrink(&self, leaf: &Structure, marks: &BTreeSet<Element>, m: usize) -> Result<BTreeSet<Element>> {
        self(leaf, marks, m)
    }
}

/// Keeps every leaf whole.
#[derive(Debug, Clone, Copy, Default)]
pub struct KeepWhole;

impl LeafShrinker for KeepWhole {
    fn shrink(&self, leaf: &Structure, _: &BTreeSet<Element>, _: usize) -> Result<BTreeSet<Element>> {
        Ok(leaf.elements().collect())
    }
}

/// Leaves are words over a finite alphabet; shrinks them as marked words.
#[derive(Debug, Clone, Copy, Default)]
pub struct WordLeaves;

impl LeafShrinker for WordLeaves {
    fn shrink(&self, leaf: &Structure, marks: &BTreeSet<Element>, m: usize) -> Result<BTreeSet<Element>> {
        let w = SigmaTree::from_structure(leaf)?;
        Ok(shrink_word_marked(&w, marks, m)?.origin.into_iter().collect())
    }
}

/// Leaves are labeled trees; shrinks them with the marks kept.
#[derive(Debug, Clone, Copy, Default)]
pub struct TreeLeaves;

impl LeafShrinker for TreeLeaves {
    fn shrink(&self, leaf: &Structure, marks: &BTreeSet<Element>, m: usize) -> Result<BTreeSet<Element>> {
        let t = SigmaTree::from_structure(leaf)?;
        Ok(shrink_tree(&t, marks, m, marks.len())?.0.origin.into_iter().collect())
    }
}

fn check_w(size: usize, w: &BTreeSet<Element>, k: usize) -> Result<()> {
    if w.len() > k {
        return Err(Error::TooManyMarks {
            given: w.len(),
            limit: k,
        });
    }
    if let Some(&x) = w.iter().find(|&&x| x >= size) {
        return Err(Error::InvalidElement(x));
    }
    Ok(())
}

fn element_index(prov: &Provenance) -> HashMap<(usize, Element), Element> {
    prov.iter().enumerate().map(|(e, &p)| (p, e)).collect()
}

/// Leaves of a complemented leaf `(! L)` are not split from their `!`.
fn is_unit_interior(t: &ExpressionTree, path: &[usize]) -> bool {
    match path.split_last() {
        Some((_, parent)) => t.at(parent).and_then(ExpressionTree::op) == Some(super::Op::Complement),
        None => false,
    }
}

// ---------------------------------------------------------------------------
// Height

#[derive(Debug, Clone)]
pub struct HeightReduction {
    pub tree: ExpressionTree,
    /// `leaf_origin[i]` is the input leaf index of output leaf `i`.
    pub leaf_origin: Vec<usize>,
    /// `origin[e]` is the input element of output element `e`.
    pub origin: Vec<Element>,
    pub steps: usize,
}

/// Repeatedly replaces a subtree `s_a` by a proper subtree `s_b` of it when
/// both evaluate to m-equivalent structures and contain the same number of
/// leaves meeting `w`. `b` is chosen deepest, then `a` shallowest.
pub fn reduce_expression_height(
    s: &ExpressionTree,
    w: &BTreeSet<Element>,
    m: usize,
    k: usize,
) -> Result<HeightReduction> {
    height_impl(&mut TypeSession::new(), s, w, m, k)
}

fn height_impl(
    session: &mut TypeSession,
    s: &ExpressionTree,
    w: &BTreeSet<Element>,
    m: usize,
    k: usize,
) -> Result<HeightReduction> {
    if !s.is_pushed() {
        return Err(Error::Unsupported(
            "height reduction needs a tree over u and bw with complements only at leaves".into(),
        ));
    }
    let (full, prov) = s.eval_with_provenance()?;
    check_w(full.size(), w, k)?;
    let w_leaves: BTreeSet<usize> = w.iter().map(|&x| prov[x].0).collect();

    let mut tree = s.clone();
    let mut leaf_ids: Vec<usize> = (0..s.leaf_count()).collect();
    let mut steps = 0;
    loop {
        let paths: Vec<Path> = tree
            .paths()
            .into_iter()
            .filter(|p| !is_unit_interior(&tree, p))
            .collect();
        let mut g: HashMap<Path, (RankType, usize)> = HashMap::new();
        for p in &paths {
            let sub = tree.at(p).expect("listed path");
            let class = session.rank_type(&sub.eval()?, &[], m)?;
            let range = tree.leaf_range(p).expect("listed path");
            let hits = leaf_ids[range].iter().filter(|id| w_leaves.contains(id)).count();
            g.insert(p.clone(), (class, hits));
        }
        let mut pick: Option<(&Path, &Path)> = None;
        for b in &paths {
            if pick.is_some_and(|(_, pb)| pb.len() >= b.len()) {
                continue;
            }
            let a = (0..b.len()).map(|d| &b[..d]).find(|a| g.get(*a) == g.get(b.as_slice()));
            if let Some(a) = a {
                let a = paths.iter().find(|p| p.as_slice() == a).expect("ancestor listed");
                pick = Some((a, b));
            }
        }
        let Some((a, b)) = pick else { break };
        let ra = tree.leaf_range(a).expect("path");
        let rb = tree.leaf_range(b).expect("path");
        let mut ids = leaf_ids[..ra.start].to_vec();
        ids.extend_from_slice(&leaf_ids[rb]);
        ids.extend_from_slice(&leaf_ids[ra.end..]);
        tree = tree.splice(a, b)?;
        leaf_ids = ids;
        steps += 1;
    }
    debug!(
        "expression height {} -> {} in {steps} splices",
        s.height(),
        tree.height()
    );

    let index = element_index(&prov);
    let (_, new_prov) = tree.eval_with_provenance()?;
    let origin = new_prov.iter().map(|&(leaf, e)| index[&(leaf_ids[leaf], e)]).collect();
    Ok(HeightReduction {
        tree,
        leaf_origin: leaf_ids,
        origin,
        steps,
    })
}

// ---------------------------------------------------------------------------
// Leaves

#[derive(Debug, Clone)]
pub struct LeafShrink {
    pub tree: ExpressionTree,
    pub origin: Vec<Element>,
}

/// Replaces each leaf by the substructure its shrinker keeps, routing to
/// each leaf the elements of `w` it contains. A complemented leaf `!B` is
/// handled by shrinking `B`.
pub fn shrink_leaves(
    t: &ExpressionTree,
    w: &BTreeSet<Element>,
    m: usize,
    shrinker: &dyn LeafShrinker,
) -> Result<LeafShrink> {
    let (full, prov) = t.eval_with_provenance()?;
    check_w(full.size(), w, w.len())?;
    let leaves = t.leaves();
    let mut marks: Vec<BTreeSet<Element>> = vec![BTreeSet::new(); leaves.len()];
    for &x in w {
        let (leaf, e) = prov[x];
        marks[leaf].insert(e);
    }
    let mut new_leaves = Vec::with_capacity(leaves.len());
    let mut local_origin = Vec::with_capacity(leaves.len());
    for (leaf, mk) in leaves.iter().zip(&marks) {
        let kept = shrinker.shrink(leaf, mk, m)?;
        if kept.is_empty() || !mk.is_subset(&kept) {
            return Err(Error::VerificationFailed(
                "leaf shrinker dropped a marked element".into(),
            ));
        }
        let r = leaf.induced_substructure(&kept)?;
        new_leaves.push(r.structure);
        local_origin.push(r.origin);
    }
    let tree = t.with_leaves(&mut new_leaves.into_iter());
    let index = element_index(&prov);
    let (_, new_prov) = tree.eval_with_provenance()?;
    let origin = new_prov
        .iter()
        .map(|&(leaf, e)| index[&(leaf, local_origin[leaf][e])])
        .collect();
    Ok(LeafShrink { tree, origin })
}

// ---------------------------------------------------------------------------
// Whole pipeline

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlgebraVerdicts {
    pub contains_w: bool,
    pub substructure: bool,
    pub equivalent: bool,
    /// The {u, !} certificate evaluates to the output.
    pub in_class: bool,
}

impl AlgebraVerdicts {
    pub fn all(&self) -> bool {
        self.contains_w && self.substructure && self.equivalent && self.in_class
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraReport {
    pub input_size: usize,
    pub output_size: usize,
    pub input_height: usize,
    pub reduced_height: usize,
    pub splices: usize,
    pub m: usize,
    pub verdicts: AlgebraVerdicts,
}

#[derive(Debug, Clone)]
pub struct AlgebraicShrink {
    pub structure: Structure,
    pub origin: Vec<Element>,
    /// The reduced tree over u and bw with shrunk leaves.
    pub expression: ExpressionTree,
    /// The same structure as a tree over u and !.
    pub certificate: ExpressionTree,
    pub report: AlgebraReport,
}

/// Shrinks the structure of a {u, !}-tree to a substructure that contains
/// `w`, is m-equivalent to it, and is again produced by a {u, !}-tree over
/// the leaf class.
pub fn shrink_algebraic(
    s: &ExpressionTree,
    w: &BTreeSet<Element>,
    m: usize,
    k: usize,
    shrinker: &dyn LeafShrinker,
) -> Result<AlgebraicShrink> {
    if let Some(op) = s
        .ops_used()
        .into_iter()
        .find(|o| !matches!(o, super::Op::Union | super::Op::Complement))
    {
        return Err(Error::Unsupported(format!(
            "shrinking trees that use `{}`",
            op.symbol()
        )));
    }
    s.vocabulary()?;
    let full = s.eval()?;
    check_w(full.size(), w, k)?;
    let mut session = TypeSession::new();

    let pushed = s.push_complement()?;
    if pushed.eval()? != full {
        return Err(Error::VerificationFailed(
            "complement push-down changed the structure".into(),
        ));
    }
    let h = height_impl(&mut session, &pushed, w, m, k)?;
    let w1: BTreeSet<Element> = h
        .origin
        .iter()
        .enumerate()
        .filter(|(_, o)| w.contains(o))
        .map(|(i, _)| i)
        .collect();
    let l = shrink_leaves(&h.tree, &w1, m, shrinker)?;
    let origin: Vec<Element> = l.origin.iter().map(|&e| h.origin[e]).collect();
    let structure = l.tree.eval()?;
    let certificate = l.tree.expand_bowtie();

    let kept: BTreeSet<Element> = origin.iter().copied().collect();
    let verdicts = AlgebraVerdicts {
        contains_w: w.is_subset(&kept),
        substructure: check_embedding(&structure, &full, &origin),
        equivalent: session.m_equivalent(&structure, &full, m)?,
        in_class: certificate.eval()? == structure,
    };
    let report = AlgebraReport {
        input_size: full.size(),
        output_size: structure.size(),
        input_height: s.height(),
        reduced_height: h.tree.height(),
        splices: h.steps,
        m,
        verdicts,
    };
    if !verdicts.all() {
        return Err(Error::VerificationFailed(format!("algebraic shrink: {verdicts:?}")));
    }
    Ok(AlgebraicShrink {
        structure,
        origin,
        expression: l.tree,
        certificate,
        report,
    })
}

// ---------------------------------------------------------------------------
// Words and trees of structures

#[derive(Debug, Clone)]
pub struct ComposedShrink {
    /// Indices of the surviving blocks in the input.
    pub blocks: Vec<usize>,
    /// Parent block of each surviving block, by output index.
    pub parents: Vec<Option<usize>>,
    /// The shrunk surviving blocks.
    pub parts: Vec<Structure>,
    pub structure: Structure,
    pub origin: Vec<Element>,
    pub verdicts: AlgebraVerdicts,
}

struct Blocks {
    shrunk: Vec<Structure>,
    /// Element of the composite for each element of each shrunk block.
    global: Vec<Vec<Element>>,
    carries_w: BTreeSet<usize>,
}

fn shrink_blocks(parts: &[Structure], w: &BTreeSet<Element>, m: usize, shrinker: &dyn LeafShrinker) -> Result<Blocks> {
    let mut offset = 0;
    let mut shrunk = Vec::with_capacity(parts.len());
    let mut global = Vec::with_capacity(parts.len());
    let mut carries_w = BTreeSet::new();
    for (i, p) in parts.iter().enumerate() {
        let marks: BTreeSet<Element> = w
            .iter()
            .filter(|&&x| x >= offset && x < offset + p.size())
            .map(|&x| x - offset)
            .collect();
        if !marks.is_empty() {
            carries_w.insert(i);
        }
        let kept = shrinker.shrink(p, &marks, m)?;
        if kept.is_empty() || !marks.is_subset(&kept) {
            return Err(Error::VerificationFailed(
                "block shrinker dropped a marked element".into(),
            ));
        }
        let r = p.induced_substructure(&kept)?;
        global.push(r.origin.iter().map(|&e| e + offset).collect());
        shrunk.push(r.structure);
        offset += p.size();
    }
    Ok(Blocks {
        shrunk,
        global,
        carries_w,
    })
}

/// Letters naming the rank-`m` classes of the blocks, in order of first use.
fn block_letters(session: &mut TypeSession, blocks: &[Structure], m: usize) -> Result<(Vec<String>, Vec<usize>)> {
    let mut codes: HashMap<RankType, usize> = HashMap::new();
    let mut labels = Vec::with_capacity(blocks.len());
    for b in blocks {
        let t = session.rank_type(b, &[], m)?;
        let next = codes.len();
        labels.push(*codes.entry(t).or_insert(next));
    }
    let alphabet = (0..codes.len().max(1)).map(|i| format!("t{i}")).collect();
    Ok((alphabet, labels))
}

fn finish_composed(
    session: &mut TypeSession,
    full: &Structure,
    w: &BTreeSet<Element>,
    m: usize,
    blocks: &Blocks,
    kept: Vec<usize>,
    parents: Vec<Option<usize>>,
) -> Result<ComposedShrink> {
    let parts: Vec<Structure> = kept.iter().map(|&i| blocks.shrunk[i].clone()).collect();
    let structure = tree_of_structures(&parents, &parts)?;
    let origin: Vec<Element> = kept.iter().flat_map(|&i| blocks.global[i].iter().copied()).collect();
    let kept_set: BTreeSet<Element> = origin.iter().copied().collect();
    let verdicts = AlgebraVerdicts {
        contains_w: w.is_subset(&kept_set),
        substructure: check_embedding(&structure, full, &origin),
        equivalent: session.m_equivalent(&structure, full, m)?,
        in_class: kept.len() == parts.len(),
    };
    if !verdicts.all() {
        return Err(Error::VerificationFailed(format!("composed shrink: {verdicts:?}")));
    }
    Ok(ComposedShrink {
        blocks: kept,
        parents,
        parts,
        structure,
        origin,
        verdicts,
    })
}

/// Shrinks a word of structures: each block is shrunk by `shrinker`, then
/// the sequence of blocks is shrunk as a word whose letters are the blocks'
/// rank-`m` classes, keeping every block that meets `w`.
pub fn shrink_word_of_structures(
    parts: &[Structure],
    w: &BTreeSet<Element>,
    m: usize,
    k: usize,
    shrinker: &dyn LeafShrinker,
) -> Result<ComposedShrink> {
    let full = word_of_structures(parts)?;
    check_w(full.size(), w, k)?;
    let mut session = TypeSession::new();
    let blocks = shrink_blocks(parts, w, m, shrinker)?;
    let (alphabet, labels) = block_letters(&mut session, &blocks.shrunk, m)?;
    let word = SigmaTree::word(alphabet, labels)?;
    let kept = shrink_word_marked(&word, &blocks.carries_w, m)?.origin;
    let parents = (0..kept.len()).map(|i| i.checked_sub(1)).collect();
    finish_composed(&mut session, &full, w, m, &blocks, kept, parents)
}

/// Shrinks a tree of structures: blocks first, then the block tree labeled
/// by block classes, keeping every block that meets `w`.
pub fn shrink_tree_of_structures(
    parents: &[Option<usize>],
    parts: &[Structure],
    w: &BTreeSet<Element>,
    m: usize,
    k: usize,
    shrinker: &dyn LeafShrinker,
) -> Result<ComposedShrink> {
    let full = tree_of_structures(parents, parts)?;
    check_w(full.size(), w, k)?;
    let mut session = TypeSession::new();
    let blocks = shrink_blocks(parts, w, m, shrinker)?;
    let (alphabet, labels) = block_letters(&mut session, &blocks.shrunk, m)?;
    let shape = SigmaTree::new(alphabet, parents.to_vec(), labels)?;
    let (shrunk, _) = shrink_tree(&shape, &blocks.carries_w, m, k)?;
    let new_parents = shrunk.tree.parents().to_vec();
    finish_composed(&mut session, &full, w, m, &blocks, shrunk.origin, new_parents)
}

/// First pair `(i, j)`, `i < j`, such that the `i`-th marked word of
/// structures embeds into the `j`-th with marks mapped to marks.
pub fn wqo_scan_marked_words(seq: &[(Vec<Structure>, BTreeSet<Element>)]) -> Result<Option<(usize, usize)>> {
    let encoded = seq
        .iter()
        .map(|(parts, marks)| to_sk_pred(&word_of_structures(parts)?, marks))
        .collect::<Result<Vec<_>>>()?;
    first_embedding_pair(&encoded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_expression;
    use crate::equiv::m_equivalent;
    use crate::structures::Vocabulary;

    fn vertex() -> Structure {
        Structure::new(Vocabulary::graph(), 1, vec![vec![]], vec![]).unwrap()
    }

    fn balanced(depth: usize) -> ExpressionTree {
        if depth == 0 {
            ExpressionTree::leaf("v", vertex())
        } else {
            ExpressionTree::union(balanced(depth - 1), balanced(depth - 1))
        }
    }

    #[test]
    fn balanced_union_collapses() {
        let t = balanced(4);
        let r = reduce_expression_height(&t, &BTreeSet::new(), 1, 0).unwrap();
        assert!(r.tree.height() < t.height());
        assert!(m_equivalent(&r.tree.eval().unwrap(), &t.eval().unwrap(), 1).unwrap());
        assert!(check_embedding(&r.tree.eval().unwrap(), &t.eval().unwrap(), &r.origin));
    }

    #[test]
    fn height_one_tree_is_unchanged() {
        let t = balanced(1);
        let r = reduce_expression_height(&t, &BTreeSet::new(), 2, 0).unwrap();
        assert_eq!(r.tree, t);
        assert_eq!(r.steps, 0);
        // One and two isolated vertices agree on sentences of rank 1.
        let r = reduce_expression_height(&t, &BTreeSet::new(), 1, 0).unwrap();
        assert_eq!(r.tree.height(), 0);
    }

    #[test]
    fn marked_leaves_survive() {
        let t = balanced(4);
        let w: BTreeSet<Element> = [5, 11].into_iter().collect();
        let r = reduce_expression_height(&t, &w, 1, 2).unwrap();
        assert!(w.iter().all(|x| r.origin.contains(x)));
    }

    #[test]
    fn cograph_shrinks() {
        let lib: HashMap<String, Structure> = [("v".to_string(), vertex())].into_iter().collect();
        let text = "(! (u (! (u v (u v v))) (! (u (! (u v v)) (u v (u v v))))))";
        let t = parse_expression(text, &lib).unwrap();
        let w: BTreeSet<Element> = [2].into_iter().collect();
        let r = shrink_algebraic(&t, &w, 2, 1, &KeepWhole).unwrap();
        assert!(r.report.verdicts.all());
        assert!(r
            .certificate
            .ops_used()
            .iter()
            .all(|o| matches!(o, crate::algebra::Op::Union | crate::algebra::Op::Complement)));
    }

    #[test]
    fn identical_blocks_word() {
        let parts = vec![vertex(); 20];
        let r = shrink_word_of_structures(&parts, &BTreeSet::new(), 2, 0, &KeepWhole).unwrap();
        assert!(r.parts.len() < 20);
        assert!(r.verdicts.all());
        let w: BTreeSet<Element> = [9].into_iter().collect();
        let r = shrink_word_of_structures(&parts, &w, 2, 1, &KeepWhole).unwrap();
        assert!(r.blocks.contains(&9));
    }

    #[test]
    fn scan_constant_sequence() {
        let item = (vec![vertex(), vertex()], BTreeSet::new());
        assert_eq!(wqo_scan_marked_words(&[item.clone(), item]).unwrap(), Some((0, 1)));
    }
}
