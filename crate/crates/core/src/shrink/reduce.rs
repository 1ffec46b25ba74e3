use std::collections::{BTreeSet, HashMap};

use log::debug;

use super::{Node, Shrunk, SigmaTree, MARK_PREDICATE};
use crate::equiv::{RankType, TypeSession};
use crate::error::{Error, Result};
use crate::structures::{check_embedding, Structure, Vocabulary, ORDER_PREDICATE};

fn check_marks(s: &SigmaTree, w: &BTreeSet<Node>, k: usize) -> Result<()> {
    if w.len() > k {
        return Err(Error::TooManyMarks {
            given: w.len(),
            limit: k,
        });
    }
    if let Some(&n) = w.iter().find(|&&n| n >= s.len()) {
        return Err(Error::InvalidElement(n));
    }
    Ok(())
}

/// Rank-`m` class of the subtree rooted at each node.
fn subtree_classes(session: &mut TypeSession, s: &SigmaTree, m: usize) -> Result<Vec<RankType>> {
    (0..s.len())
        .map(|a| session.rank_type(&s.subtree_at(a).tree.to_structure(), &[], m))
        .collect()
}

fn complement_of(all: usize, removed: &BTreeSet<Node>) -> BTreeSet<Node> {
    (0..all).filter(|n| !removed.contains(n)).collect()
}

// ---------------------------------------------------------------------------
// Degree

/// Keeps, below every node and for every realized class of child subtrees, at
/// most `m + k` children, preferring children whose subtree meets `w`, then
/// smaller subtrees, then smaller indices.
pub fn reduce_degree(s: &SigmaTree, w: &BTreeSet<Node>, m: usize, k: usize) -> Result<Shrunk> {
    check_marks(s, w, k)?;
    degree_impl(&mut TypeSession::new(), s, w, m, k).map(|(r, _)| r)
}

fn degree_impl(
    session: &mut TypeSession,
    s: &SigmaTree,
    w: &BTreeSet<Node>,
    m: usize,
    k: usize,
) -> Result<(Shrunk, usize)> {
    let classes = subtree_classes(session, s, m)?;
    let children = s.children_lists();
    let sizes: Vec<usize> = (0..s.len()).map(|a| s.subtree_nodes(a).len()).collect();
    let covers: Vec<bool> = (0..s.len()).map(|a| w.iter().any(|&x| s.is_ancestor(a, x))).collect();
    let quota = m + k;
    let mut kept = BTreeSet::new();
    let mut stack = vec![s.root()];
    let mut dropped = 0;
    while let Some(a) = stack.pop() {
        kept.insert(a);
        let mut groups: Vec<(RankType, Vec<Node>)> = Vec::new();
        for &c in &children[a] {
            match groups.iter_mut().find(|(t, _)| *t == classes[c]) {
                Some((_, g)) => g.push(c),
                None => groups.push((classes[c], vec![c])),
            }
        }
        for (_, mut group) in groups {
            group.sort_by_key(|&c| (!covers[c], sizes[c], c));
            let keep = group.len().min(quota.max(group.iter().filter(|&&c| covers[c]).count()));
            dropped += group.len() - keep;
            stack.extend(&group[..keep]);
        }
    }
    Ok((s.restrict(&kept)?, dropped))
}

// ---------------------------------------------------------------------------
// Height without marks

/// Repeatedly replaces `s_{>=a}` by `s_{>=b}` for an ancestor `a` of `b`
/// whose subtrees are m-equivalent, until no root-to-leaf path repeats a
/// class. Among candidate pairs the deepest `b` wins, then the shallowest `a`.
pub fn reduce_height_no_w(s: &SigmaTree, m: usize) -> Result<Shrunk> {
    height_impl(&mut TypeSession::new(), s, m).map(|(r, _)| r)
}

fn height_impl(session: &mut TypeSession, s: &SigmaTree, m: usize) -> Result<(Shrunk, usize)> {
    let mut cur = Shrunk::identity(s);
    let mut steps = 0;
    loop {
        let t = &cur.tree;
        let classes = subtree_classes(session, t, m)?;
        let depth: Vec<usize> = (0..t.len()).map(|n| t.depth(n)).collect();
        let mut best: Option<(Node, Node)> = None;
        let mut order: Vec<Node> = (0..t.len()).collect();
        order.sort_by_key(|&b| (std::cmp::Reverse(depth[b]), b));
        for b in order {
            let path = t.path(t.root(), b).expect("root is an ancestor");
            if let Some(&a) = path[..path.len() - 1].iter().find(|&&a| classes[a] == classes[b]) {
                best = Some((a, b));
                break;
            }
        }
        let Some((a, b)) = best else { break };
        let removed: BTreeSet<Node> = t.subtree_nodes(a).difference(&t.subtree_nodes(b)).copied().collect();
        debug!("height step: splice subtree of {b} in place of {a}");
        let next = t.restrict(&complement_of(t.len(), &removed))?;
        cur = cur.then(next);
        steps += 1;
    }
    Ok((cur, steps))
}

// ---------------------------------------------------------------------------
// Words

/// Shrinks a sequence of abstract letters. Positions in `marks` are never
/// removed. Returns the kept positions in order.
///
/// With `g(i)` the rank-`m` type of the suffix starting at `i` (marks
/// included), an interval `[a, b)` free of marks with `g(a) = g(b)` is cut
/// out, choosing the largest `b` and then the smallest `a`, until no such
/// interval exists.
fn shrink_letters<L: Eq + std::hash::Hash + Clone>(
    session: &mut TypeSession,
    letters: &[L],
    marks: &BTreeSet<usize>,
    m: usize,
) -> Result<(Vec<usize>, usize)> {
    let mut codes: HashMap<L, usize> = HashMap::new();
    let coded: Vec<usize> = letters
        .iter()
        .map(|l| {
            let next = codes.len();
            *codes.entry(l.clone()).or_insert(next)
        })
        .collect();
    let mut vocab = Vocabulary::single(ORDER_PREDICATE, 2);
    for c in 0..codes.len() {
        vocab = vocab.with_predicate(format!("Q{c}"), 1)?;
    }
    vocab = vocab.with_predicate(MARK_PREDICATE, 1)?;
    let build = |positions: &[usize]| -> Result<Structure> {
        let n = positions.len();
        let mut relations = vec![(0..n).flat_map(|i| (i..n).map(move |j| vec![i, j])).collect::<Vec<_>>()];
        for c in 0..codes.len() {
            relations.push((0..n).filter(|&i| coded[positions[i]] == c).map(|i| vec![i]).collect());
        }
        relations.push(
            (0..n)
                .filter(|&i| marks.contains(&positions[i]))
                .map(|i| vec![i])
                .collect(),
        );
        Structure::new(vocab.clone(), n, relations, Vec::new())
    };

    let mut cur: Vec<usize> = (0..letters.len()).collect();
    let mut steps = 0;
    loop {
        let n = cur.len();
        let mut g = Vec::with_capacity(n);
        for i in 0..n {
            g.push(session.rank_type(&build(&cur[i..])?, &[], m)?);
        }
        let mut cut = None;
        'outer: for b in (1..n).rev() {
            for a in 0..b {
                let free = cur[a..b].iter().all(|p| !marks.contains(p));
                if free && g[a] == g[b] {
                    cut = Some((a, b));
                    break 'outer;
                }
            }
        }
        let Some((a, b)) = cut else { break };
        cur.drain(a..b);
        steps += 1;
    }
    Ok((cur, steps))
}

fn chain_order(w: &SigmaTree) -> Result<Vec<Node>> {
    if !w.is_word() {
        return Err(Error::Unsupported("input is not a word".into()));
    }
    let children = w.children_lists();
    let mut order = vec![w.root()];
    while let Some(&c) = children[*order.last().expect("nonempty")].first() {
        order.push(c);
    }
    Ok(order)
}

/// A subword that is m-equivalent to `w`.
pub fn shrink_word(w: &SigmaTree, m: usize) -> Result<Shrunk> {
    shrink_word_marked(w, &BTreeSet::new(), m)
}

/// A subword containing `marks` that is m-equivalent to `w` expanded by the
/// marks as a unary predicate.
pub fn shrink_word_marked(w: &SigmaTree, marks: &BTreeSet<Node>, m: usize) -> Result<Shrunk> {
    check_marks(w, marks, w.len())?;
    let order = chain_order(w)?;
    let letters: Vec<usize> = order.iter().map(|&n| w.label(n)).collect();
    let positions: BTreeSet<usize> = order
        .iter()
        .enumerate()
        .filter(|(_, n)| marks.contains(n))
        .map(|(i, _)| i)
        .collect();
    let (kept, _) = shrink_letters(&mut TypeSession::new(), &letters, &positions, m)?;
    w.restrict(&kept.iter().map(|&i| order[i]).collect())
}

// ---------------------------------------------------------------------------
// Distance from the root

/// Nodes of `z_i` along `path`: the subtree at `path[i]` minus the subtree at
/// `path[i + 1]`; the last one is the whole subtree at the end of the path.
fn path_blocks(s: &SigmaTree, path: &[Node]) -> Vec<BTreeSet<Node>> {
    let subtrees: Vec<BTreeSet<Node>> = path.iter().map(|&c| s.subtree_nodes(c)).collect();
    (0..path.len())
        .map(|i| match subtrees.get(i + 1) {
            Some(next) => subtrees[i].difference(next).copied().collect(),
            None => subtrees[i].clone(),
        })
        .collect()
}

/// A subtree containing the root and `b` that is m-equivalent to `s` with `b`
/// distinguished, and in which `b` is no farther from the root.
///
/// The path from the root to `b` splits `s` into blocks `z_0, ..., z_n`, each
/// rooted on the path. Each block becomes a letter: the rank-`m` type of the
/// block with its root distinguished, tagged 1 for the first block, 2 for the
/// last and 0 otherwise. The letter word is shrunk with both ends kept, and
/// the surviving blocks form the result.
pub fn reduce_root_distance(s: &SigmaTree, b: Node, m: usize) -> Result<Shrunk> {
    root_distance_impl(&mut TypeSession::new(), s, b, m).map(|(r, _)| r)
}

fn root_distance_impl(session: &mut TypeSession, s: &SigmaTree, b: Node, m: usize) -> Result<(Shrunk, usize)> {
    if b >= s.len() {
        return Err(Error::InvalidElement(b));
    }
    let path = s.path(s.root(), b).expect("root is an ancestor");
    let n = path.len() - 1;
    if n <= 1 {
        return Ok((Shrunk::identity(s), 0));
    }
    let blocks = path_blocks(s, &path);
    let mut letters = Vec::with_capacity(n + 1);
    for (i, block) in blocks.iter().enumerate() {
        let z = s.restrict(block)?;
        let root = z.image_of(path[i]).expect("block contains its path node");
        let ty = session.rank_type(&z.tree.to_structure(), &[root], m)?;
        let tag = match i {
            0 => 1u8,
            _ if i == n => 2,
            _ => 0,
        };
        letters.push((ty, tag));
    }
    let ends: BTreeSet<usize> = [0, n].into_iter().collect();
    let (kept, steps) = shrink_letters(session, &letters, &ends, m)?;
    let nodes: BTreeSet<Node> = kept.iter().flat_map(|&i| blocks[i].iter().copied()).collect();
    Ok((s.restrict(&nodes)?, steps))
}

// ---------------------------------------------------------------------------
// Distances between consecutive marks

fn consecutive_pairs(s: &SigmaTree, w: &BTreeSet<Node>) -> Vec<(Node, Node)> {
    let mut out = Vec::new();
    for &a in w {
        for &b in w {
            if a != b
                && s.is_ancestor(a, b)
                && !w
                    .iter()
                    .any(|&x| x != a && x != b && s.is_ancestor(a, x) && s.is_ancestor(x, b))
            {
                out.push((a, b));
            }
        }
    }
    out
}

/// Shortens the paths between consecutive marked nodes. For consecutive
/// marks `a < b`, the path blocks meeting `w` split the path into segments;
/// each segment with at least one unmarked block strictly inside is replaced
/// through [`reduce_root_distance`] whenever that shortens it. Runs to a
/// fixpoint.
pub fn reduce_w_distances(s: &SigmaTree, w: &BTreeSet<Node>, m: usize, k: usize) -> Result<Shrunk> {
    check_marks(s, w, k)?;
    w_distances_impl(&mut TypeSession::new(), s, w, m).map(|(r, _)| r)
}

fn w_distances_impl(session: &mut TypeSession, s: &SigmaTree, w: &BTreeSet<Node>, m: usize) -> Result<(Shrunk, usize)> {
    let mut cur = Shrunk::identity(s);
    let mut steps = 0;
    'restart: loop {
        let t = cur.tree.clone();
        let marks = cur.map_marks(w)?;
        for (a, b) in consecutive_pairs(&t, &marks) {
            let path = t.path(a, b).expect("a is an ancestor of b");
            let blocks = path_blocks(&t, &path);
            let hit: Vec<usize> = (0..blocks.len())
                .filter(|&i| blocks[i].iter().any(|x| marks.contains(x)))
                .collect();
            for win in hit.windows(2) {
                let (i0, j0) = (win[0], win[1]);
                if j0 - i0 < 3 {
                    continue;
                }
                let (i, j) = (i0 + 1, j0 - 1);
                let z_nodes: BTreeSet<Node> = t
                    .subtree_nodes(path[i])
                    .difference(&t.subtree_nodes(path[j0]))
                    .copied()
                    .collect();
                let z = t.restrict(&z_nodes)?;
                let cj = z.image_of(path[j]).expect("segment end is in z");
                let (y, _) = root_distance_impl(session, &z.tree, cj, m)?;
                let new_cj = y.image_of(cj).expect("end kept");
                let new_len = y.tree.depth(new_cj);
                if new_len < j - i {
                    let kept_in_z: BTreeSet<Node> = y.origin.iter().map(|&n| z.origin[n]).collect();
                    let removed: BTreeSet<Node> = z_nodes.difference(&kept_in_z).copied().collect();
                    debug!(
                        "distance step: path {}..{} shortened from {} to {}",
                        a,
                        b,
                        j - i,
                        new_len
                    );
                    let next = t.restrict(&complement_of(t.len(), &removed))?;
                    cur = cur.then(next);
                    steps += 1;
                    continue 'restart;
                }
            }
        }
        break;
    }
    Ok((cur, steps))
}

// ---------------------------------------------------------------------------
// Pipeline

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdicts {
    pub contains_w: bool,
    pub is_subtree: bool,
    pub equivalent: bool,
}

impl Verdicts {
    pub fn all(&self) -> bool {
        self.contains_w && self.is_subtree && self.equivalent
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseLog {
    pub name: &'static str,
    pub before: usize,
    pub after: usize,
    pub steps: usize,
    pub verdicts: Verdicts,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShrinkReport {
    pub input_size: usize,
    pub output_size: usize,
    pub m: usize,
    pub phases: Vec<PhaseLog>,
    pub verdicts: Verdicts,
}

fn verify(
    session: &mut TypeSession,
    before: &SigmaTree,
    after: &Shrunk,
    w: &BTreeSet<Node>,
    m: usize,
) -> Result<Verdicts> {
    let contains_w = w.iter().all(|x| after.origin.contains(x));
    let big = before.to_structure();
    let small = after.tree.to_structure();
    let is_subtree = check_embedding(&small, &big, &after.origin);
    let equivalent = session.m_equivalent(&small, &big, m)?;
    Ok(Verdicts {
        contains_w,
        is_subtree,
        equivalent,
    })
}

type PhaseFn<'a> = dyn FnMut(&mut TypeSession, &SigmaTree, &BTreeSet<Node>) -> Result<(Shrunk, usize)> + 'a;

/// Shrinks `s` to a subtree that contains `w` and is m-equivalent to `s`:
/// first the paths between consecutive nodes of `w` and the root are
/// shortened, then every maximal hanging subtree free of those nodes has its
/// height reduced, and finally degrees are reduced. Each phase is verified;
/// a failed check is reported as [`Error::VerificationFailed`].
pub fn shrink_tree(s: &SigmaTree, w: &BTreeSet<Node>, m: usize, k: usize) -> Result<(Shrunk, ShrinkReport)> {
    check_marks(s, w, k)?;
    let mut session = TypeSession::new();
    let mut phases = Vec::new();
    let mut cur = Shrunk::identity(s);

    let mut w1 = w.clone();
    w1.insert(s.root());
    let mut run_phase =
        |name: &'static str, cur: Shrunk, session: &mut TypeSession, f: &mut PhaseFn| -> Result<Shrunk> {
            let marks = cur.map_marks(w)?;
            let (next, steps) = f(session, &cur.tree, &marks)?;
            let verdicts = verify(session, &cur.tree, &next, &marks, m)?;
            phases.push(PhaseLog {
                name,
                before: cur.tree.len(),
                after: next.tree.len(),
                steps,
                verdicts,
            });
            if !verdicts.all() {
                return Err(Error::VerificationFailed(format!("{name} phase: {verdicts:?}")));
            }
            Ok(cur.then(next))
        };

    let root = s.root();
    cur = run_phase("distance", cur, &mut session, &mut |sess, t, _marks| {
        let mut marks1 = BTreeSet::new();
        for &x in &w1 {
            marks1.insert(x);
        }
        // `t` is the input tree here, so original indices apply.
        w_distances_impl(sess, t, &marks1, m)
    })?;
    let root_now = cur.image_of(root).expect("root kept");
    let w1_now: BTreeSet<Node> = cur.map_marks(&w1)?;
    debug_assert_eq!(cur.tree.root(), root_now);

    cur = run_phase("height", cur, &mut session, &mut |sess, t, _marks| {
        let skeleton: BTreeSet<Node> = (0..t.len())
            .filter(|&a| w1_now.iter().any(|&x| t.is_ancestor(a, x)))
            .collect();
        let mut removed = BTreeSet::new();
        let mut steps = 0;
        for &a in &skeleton {
            for c in t.children(a) {
                if skeleton.contains(&c) {
                    continue;
                }
                let sub = t.subtree_at(c);
                let (h, n) = height_impl(sess, &sub.tree, m)?;
                steps += n;
                let kept: BTreeSet<Node> = h.origin.iter().map(|&i| sub.origin[i]).collect();
                removed.extend(sub.origin.iter().filter(|x| !kept.contains(x)));
            }
        }
        Ok((t.restrict(&complement_of(t.len(), &removed))?, steps))
    })?;

    cur = run_phase("degree", cur, &mut session, &mut |sess, t, marks| {
        degree_impl(sess, t, marks, m, k)
    })?;

    let verdicts = verify(&mut session, s, &cur, w, m)?;
    if !verdicts.all() {
        return Err(Error::VerificationFailed(format!("overall: {verdicts:?}")));
    }
    let report = ShrinkReport {
        input_size: s.len(),
        output_size: cur.tree.len(),
        m,
        phases,
        verdicts,
    };
    Ok((cur, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equiv::m_equivalent_marked;

    fn unary() -> Vec<String> {
        vec!["a".into()]
    }

    fn star(leaves: usize) -> SigmaTree {
        let parent = std::iter::once(None).chain((0..leaves).map(|_| Some(0))).collect();
        SigmaTree::new(unary(), parent, vec![0; leaves + 1]).unwrap()
    }

    fn chain(n: usize) -> SigmaTree {
        SigmaTree::word(unary(), vec![0; n]).unwrap()
    }

    fn heap(n: usize) -> SigmaTree {
        let parent = (0..n).map(|i| if i == 0 { None } else { Some((i - 1) / 2) }).collect();
        SigmaTree::new(unary(), parent, vec![0; n]).unwrap()
    }

    fn equivalent(a: &SigmaTree, b: &SigmaTree, m: usize) -> bool {
        crate::equiv::m_equivalent(&a.to_structure(), &b.to_structure(), m).unwrap()
    }

    #[test]
    fn star_degree() {
        let s = star(10);
        let r = reduce_degree(&s, &BTreeSet::new(), 1, 0).unwrap();
        assert_eq!(r.tree.len(), 2);
        assert!(equivalent(&r.tree, &s, 1));
        let w: BTreeSet<Node> = [7].into_iter().collect();
        let r = reduce_degree(&s, &w, 1, 1).unwrap();
        assert!(r.origin.contains(&7));
        assert!(equivalent(&r.tree, &s, 1));
        assert!(matches!(reduce_degree(&s, &w, 1, 0), Err(Error::TooManyMarks { .. })));
    }

    #[test]
    fn chain_height() {
        let s = chain(30);
        let r = reduce_height_no_w(&s, 1).unwrap();
        assert!(r.tree.len() < 30);
        assert!(equivalent(&r.tree, &s, 1));
        assert_eq!(reduce_height_no_w(&chain(1), 1).unwrap().tree.len(), 1);
    }

    #[test]
    fn word_of_twenty() {
        let w = chain(20);
        let r = shrink_word(&w, 2).unwrap();
        // Linear orders with at least 2^m - 1 elements are m-equivalent.
        assert_eq!(r.tree.len(), 3);
        assert!(equivalent(&r.tree, &w, 2));
    }

    #[test]
    fn root_distance_on_chain() {
        let s = chain(20);
        let r = reduce_root_distance(&s, 19, 1).unwrap();
        let b = r.image_of(19).unwrap();
        assert!(r.tree.depth(b) < 19);
        assert!(m_equivalent_marked(&r.tree.to_structure(), &[b], &s.to_structure(), &[19], 1).unwrap());
    }

    #[test]
    fn w_distances_on_chain() {
        let s = chain(25);
        let w: BTreeSet<Node> = [0, 24].into_iter().collect();
        let r = reduce_w_distances(&s, &w, 1, 2).unwrap();
        assert!(r.tree.len() < 25);
        assert!(r.origin.contains(&0) && r.origin.contains(&24));
        assert!(equivalent(&r.tree, &s, 1));
    }

    #[test]
    fn heap_pipeline() {
        let w: BTreeSet<Node> = [3].into_iter().collect();
        let mut sizes = Vec::new();
        for n in [10, 20, 40, 60] {
            let (r, report) = shrink_tree(&heap(n), &w, 1, 1).unwrap();
            assert!(report.verdicts.all());
            sizes.push(r.tree.len());
        }
        eprintln!("{sizes:?}");
    }
}
