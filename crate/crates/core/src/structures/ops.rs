//! Structure-building operations: disjoint union, complement, products,
//! the bowtie composition, and words/trees of structures.
//!
//! Element layouts are fixed so callers can recover provenance:
//! - `A ⊔ B`: elements of `A` keep their index, `b` becomes `|A| + b`.
//! - `A × B`, `A ⊗ B`: the pair `(a, b)` becomes `a * |B| + b`.
//! - words and trees of structures: blocks are laid out consecutively in
//!   part order.

use std::collections::BTreeSet;

use super::{advance, Element, Structure, Vocabulary, DENSE_LIMIT};
use crate::error::{Error, Result};

/// Name of the block pre-order predicate in words and trees of structures.
pub const ORDER_PREDICATE: &str = "le";

fn same_vocab(a: &Structure, b: &Structure, op: &'static str) -> Result<()> {
    a.require_no_constants(op)?;
    b.require_no_constants(op)?;
    if a.vocab != b.vocab {
        return Err(Error::VocabularyMismatch);
    }
    Ok(())
}

pub fn disjoint_union(a: &Structure, b: &Structure) -> Result<Structure> {
    same_vocab(a, b, "disjoint union")?;
    let off = a.size;
    let relations = a
        .relations
        .iter()
        .zip(&b.relations)
        .map(|(ra, rb)| {
            ra.tuples
                .iter()
                .cloned()
                .chain(rb.tuples.iter().map(|t| t.iter().map(|&e| e + off).collect()))
                .collect()
        })
        .collect();
    Structure::new(a.vocab.clone(), a.size + b.size, relations, Vec::new())
}

/// Flips membership of every tuple, including tuples with repeated components.
pub fn complement(a: &Structure) -> Result<Structure> {
    a.require_no_constants("complement")?;
    let n = a.size;
    let mut relations = Vec::with_capacity(a.relations.len());
    for (p, r) in a.vocab.predicates.iter().zip(&a.relations) {
        let cells = n
            .checked_pow(p.arity as u32)
            .filter(|&c| c <= DENSE_LIMIT)
            .ok_or_else(|| Error::GuardExceeded {
                what: format!("complement of `{}` over {} elements", p.name, n),
                limit: DENSE_LIMIT,
            })?;
        let mut flipped = Vec::with_capacity(cells - r.tuples.len());
        let mut tuple = vec![0; p.arity];
        for _ in 0..cells {
            if !r.contains(&tuple, n) {
                flipped.push(tuple.clone());
            }
            advance(&mut tuple, n);
        }
        relations.push(flipped);
    }
    Structure::new(a.vocab.clone(), n, relations, Vec::new())
}

/// The product where a tuple of pairs holds iff it is constant in one
/// coordinate and related in the other.
pub fn cartesian_product(a: &Structure, b: &Structure) -> Result<Structure> {
    same_vocab(a, b, "cartesian product")?;
    let nb = b.size;
    let relations = a
        .relations
        .iter()
        .zip(&b.relations)
        .map(|(ra, rb)| {
            let mut out = BTreeSet::new();
            for x in 0..a.size {
                for t in &rb.tuples {
                    out.insert(t.iter().map(|&y| x * nb + y).collect::<Vec<_>>());
                }
            }
            for y in 0..nb {
                for t in &ra.tuples {
                    out.insert(t.iter().map(|&x| x * nb + y).collect::<Vec<_>>());
                }
            }
            out.into_iter().collect()
        })
        .collect();
    Structure::new(a.vocab.clone(), a.size * nb, relations, Vec::new())
}

/// The product where a tuple of pairs holds iff it holds in both coordinates.
pub fn tensor_product(a: &Structure, b: &Structure) -> Result<Structure> {
    same_vocab(a, b, "tensor product")?;
    let nb = b.size;
    let relations = a
        .relations
        .iter()
        .zip(&b.relations)
        .map(|(ra, rb)| {
            let mut out = Vec::with_capacity(ra.tuples.len() * rb.tuples.len());
            for ta in &ra.tuples {
                for tb in &rb.tuples {
                    out.push(ta.iter().zip(tb).map(|(&x, &y)| x * nb + y).collect());
                }
            }
            out
        })
        .collect();
    Structure::new(a.vocab.clone(), a.size * nb, relations, Vec::new())
}

/// `!((!A) ⊔ (!B))`.
pub fn bowtie(a: &Structure, b: &Structure) -> Result<Structure> {
    same_vocab(a, b, "bowtie")?;
    complement(&disjoint_union(&complement(a)?, &complement(b)?)?)
}

/// Word of structures: blocks in order, with `le` relating every element of
/// block `i` to every element of block `j` whenever `i <= j`.
pub fn word_of_structures(parts: &[Structure]) -> Result<Structure> {
    let parents: Vec<Option<usize>> = (0..parts.len()).map(|i| i.checked_sub(1)).collect();
    tree_of_structures(&parents, parts)
}

/// Tree of structures: `parents[i]` is the parent block of block `i`, with
/// exactly one root. `le` relates every element of a block to every element
/// of each descendant-or-same block.
pub fn tree_of_structures(parents: &[Option<usize>], parts: &[Structure]) -> Result<Structure> {
    let first = parts
        .first()
        .ok_or_else(|| Error::InvalidStructure("no parts given".into()))?;
    if parents.len() != parts.len() {
        return Err(Error::InvalidStructure("shape and part count differ".into()));
    }
    for p in parts {
        p.require_no_constants("tree of structures")?;
        if p.vocab != first.vocab {
            return Err(Error::VocabularyMismatch);
        }
    }
    if first.vocab.contains_name(ORDER_PREDICATE) {
        return Err(Error::InvalidVocabulary(format!(
            "`{ORDER_PREDICATE}` is reserved for the block order"
        )));
    }
    let ancestors = block_ancestors(parents)?;

    let mut offsets = Vec::with_capacity(parts.len());
    let mut total = 0;
    for p in parts {
        offsets.push(total);
        total += p.size;
    }

    let mut le = Vec::new();
    for (j, anc) in ancestors.iter().enumerate() {
        for &i in anc {
            for x in 0..parts[i].size {
                for y in 0..parts[j].size {
                    le.push(vec![offsets[i] + x, offsets[j] + y]);
                }
            }
        }
    }
    let mut relations = vec![le];
    for (pi, _) in first.vocab.predicates.iter().enumerate() {
        let mut rel = Vec::new();
        for (part, &off) in parts.iter().zip(&offsets) {
            rel.extend(
                part.relations[pi]
                    .tuples
                    .iter()
                    .map(|t| t.iter().map(|&e| e + off).collect::<Vec<_>>()),
            );
        }
        relations.push(rel);
    }
    let mut vocab = Vocabulary::default().with_predicate(ORDER_PREDICATE, 2)?;
    for p in &first.vocab.predicates {
        vocab = vocab.with_predicate(p.name.clone(), p.arity)?;
    }
    Structure::new(vocab, total, relations, Vec::new())
}

/// For each block, its ancestors including itself. Fails unless the parent
/// map is a single rooted tree.
fn block_ancestors(parents: &[Option<usize>]) -> Result<Vec<Vec<usize>>> {
    let roots = parents.iter().filter(|p| p.is_none()).count();
    if roots != 1 {
        return Err(Error::InvalidStructure(format!(
            "tree shape must have exactly one root, found {roots}"
        )));
    }
    let mut out = Vec::with_capacity(parents.len());
    for start in 0..parents.len() {
        let mut chain = vec![start];
        let mut cur = start;
        while let Some(p) = parents[cur] {
            if p >= parents.len() {
                return Err(Error::InvalidElement(p));
            }
            if chain.len() > parents.len() {
                return Err(Error::InvalidStructure("tree shape has a cycle".into()));
            }
            chain.push(p);
            cur = p;
        }
        out.push(chain);
    }
    Ok(out)
}

/// Every structure over `vocab` with universe `0..n`, in a fixed order.
/// Guarded to at most 2^20 results.
pub fn all_structures(vocab: &Vocabulary, n: usize) -> Result<Vec<Structure>> {
    if n == 0 {
        return Err(Error::InvalidStructure("empty universe".into()));
    }
    const LIMIT: usize = 1 << 20;
    let mut cells = Vec::new();
    let mut total_bits = 0usize;
    for p in &vocab.predicates {
        let c = n.checked_pow(p.arity as u32).unwrap_or(usize::MAX);
        total_bits = total_bits.saturating_add(c);
        cells.push(c);
    }
    let const_choices = n.checked_pow(vocab.constants.len() as u32).unwrap_or(usize::MAX);
    let count = if total_bits >= usize::BITS as usize {
        usize::MAX
    } else {
        (1usize << total_bits).saturating_mul(const_choices)
    };
    if count > LIMIT {
        return Err(Error::GuardExceeded {
            what: format!("enumeration of structures of size {n}"),
            limit: LIMIT,
        });
    }
    let tuples_of = |arity: usize| -> Vec<Vec<Element>> {
        let mut all = vec![Vec::new()];
        for _ in 0..arity {
            all = all
                .into_iter()
                .flat_map(|t| {
                    (0..n).map(move |e| {
                        let mut t = t.clone();
                        t.push(e);
                        t
                    })
                })
                .collect();
        }
        all
    };
    let per_pred: Vec<Vec<Vec<Element>>> = vocab.predicates.iter().map(|p| tuples_of(p.arity)).collect();
    let const_tuples = tuples_of(vocab.constants.len());

    let mut out = Vec::with_capacity(count);
    for mask in 0..(1usize << total_bits) {
        let mut bit = 0;
        let mut relations = Vec::with_capacity(per_pred.len());
        for all in &per_pred {
            let rel = all
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> (bit + i) & 1 == 1)
                .map(|(_, t)| t.clone())
                .collect();
            bit += all.len();
            relations.push(rel);
        }
        for consts in &const_tuples {
            out.push(Structure::new(vocab.clone(), n, relations.clone(), consts.clone())?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge() -> Structure {
        Structure::new(Vocabulary::graph(), 2, vec![vec![vec![0, 1]]], vec![]).unwrap()
    }

    fn vertex() -> Structure {
        Structure::new(Vocabulary::graph(), 1, vec![vec![]], vec![]).unwrap()
    }

    #[test]
    fn union_has_no_cross_tuples() {
        let u = disjoint_union(&edge(), &vertex()).unwrap();
        assert_eq!(u.size(), 3);
        assert!(u.holds(0, &[0, 1]));
        assert!(!u.holds(0, &[0, 2]));
    }

    #[test]
    fn complement_flips_loops() {
        let c = complement(&vertex()).unwrap();
        assert!(c.holds(0, &[0, 0]));
        let two = Structure::new(Vocabulary::graph(), 2, vec![vec![]], vec![]).unwrap();
        assert_eq!(complement(&two).unwrap().tuple_count(0), 4);
    }

    #[test]
    fn bowtie_of_two_vertices() {
        let b = bowtie(&vertex(), &vertex()).unwrap();
        assert_eq!(b.size(), 2);
        assert!(b.holds(0, &[0, 1]) && b.holds(0, &[1, 0]));
        assert!(!b.holds(0, &[0, 0]) && !b.holds(0, &[1, 1]));
    }

    #[test]
    fn cartesian_rule() {
        let p = cartesian_product(&vertex(), &edge()).unwrap();
        assert_eq!(p.size(), 2);
        assert!(p.holds(0, &[0, 1]));
        let q = cartesian_product(&edge(), &edge()).unwrap();
        // (0,0) -> (0,1) via B, (0,0) -> (1,0) via A, but not (0,0) -> (1,1).
        assert!(q.holds(0, &[0, 1]));
        assert!(q.holds(0, &[0, 2]));
        assert!(!q.holds(0, &[0, 3]));
    }

    #[test]
    fn tensor_rule() {
        let q = tensor_product(&edge(), &edge()).unwrap();
        assert_eq!(q.tuple_count(0), 1);
        assert!(q.holds(0, &[0, 3]));
    }

    #[test]
    fn constants_are_rejected() {
        let vocab = Vocabulary::new([("E", 2)], ["c"]).unwrap();
        let a = Structure::new(vocab, 1, vec![vec![]], vec![0]).unwrap();
        assert!(matches!(complement(&a), Err(Error::ConstantsPresent(_))));
        assert!(matches!(disjoint_union(&a, &a), Err(Error::ConstantsPresent(_))));
    }

    #[test]
    fn word_block_preorder() {
        let w = word_of_structures(&[edge(), vertex()]).unwrap();
        assert_eq!(w.size(), 3);
        let le = 0;
        assert!(w.holds(le, &[0, 1]) && w.holds(le, &[1, 0]));
        assert!(w.holds(le, &[0, 2]) && !w.holds(le, &[2, 0]));
        assert!(w.holds(1, &[0, 1]));
    }

    #[test]
    fn tree_children_incomparable() {
        let parts = vec![vertex(), vertex(), vertex()];
        let t = tree_of_structures(&[None, Some(0), Some(0)], &parts).unwrap();
        assert!(t.holds(0, &[0, 1]) && t.holds(0, &[0, 2]));
        assert!(!t.holds(0, &[1, 2]) && !t.holds(0, &[2, 1]));
    }

    #[test]
    fn tree_shape_validation() {
        let parts = vec![vertex(), vertex()];
        assert!(tree_of_structures(&[None, None], &parts).is_err());
        assert!(tree_of_structures(&[Some(1), Some(0)], &parts).is_err());
        assert!(word_of_structures(&[]).is_err());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(all_structures(&Vocabulary::graph(), 2).unwrap().len(), 16);
        assert_eq!(all_structures(&Vocabulary::graph(), 3).unwrap().len(), 512);
        let v = Vocabulary::new([("P", 1)], ["c"]).unwrap();
        assert_eq!(all_structures(&v, 2).unwrap().len(), 8);
        assert!(all_structures(&Vocabulary::graph(), 5).is_err());
    }
}
