//! Finite embedding-pair searches, marked expansions, and the path/cycle
//! classes used as examples and counterexamples for well-quasi-ordering.

mod classes;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::shrink::MARK_PREDICATE;
use crate::structures::{find_embedding, Element, Structure, ORDER_PREDICATE};

pub use classes::{
    graph_components, make_cycle, make_gn, make_grid, make_hn, make_hn_gn_unguarded, make_linear_order, make_path,
    recognize_hn_gn, shrink_cycle_with_w, shrink_path_with_w, witness_hn_gn, Component, ComponentKind, Witness,
    HN_GN_LIMIT,
};

/// First pair `(i, j)` with `i < j` and `tuples[i] <= tuples[j]`
/// componentwise, ordered by smallest `j` and then smallest `i`.
pub fn dickson_pair(tuples: &[Vec<usize>]) -> Result<Option<(usize, usize)>> {
    if let Some(first) = tuples.first() {
        if tuples.iter().any(|t| t.len() != first.len()) {
            return Err(Error::InvalidStructure("tuples differ in dimension".into()));
        }
    }
    for j in 1..tuples.len() {
        for i in 0..j {
            if tuples[i].iter().zip(&tuples[j]).all(|(a, b)| a <= b) {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

/// First pair `(i, j)` with `i < j` such that `items[i]` embeds into
/// `items[j]`, ordered by smallest `j` and then smallest `i`.
pub fn first_embedding_pair(items: &[Structure]) -> Result<Option<(usize, usize)>> {
    for j in 1..items.len() {
        let hits: Vec<Result<bool>> = (0..j)
            .into_par_iter()
            .map(|i| Ok(find_embedding(&items[i], &items[j])?.is_some()))
            .collect();
        for (i, hit) in hits.into_iter().enumerate() {
            if hit? {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AntichainCheck {
    pub antichain: bool,
    /// A pair `(i, j)`, `i != j`, with `items[i]` embedding into `items[j]`.
    pub failing: Option<(usize, usize)>,
}

/// Checks that no item embeds into another, in either direction.
pub fn antichain_certificate(items: &[Structure]) -> Result<AntichainCheck> {
    let pairs: Vec<(usize, usize)> = (0..items.len())
        .flat_map(|i| (0..items.len()).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let found: Vec<Result<Option<(usize, usize)>>> = pairs
        .par_iter()
        .map(|&(i, j)| Ok(find_embedding(&items[i], &items[j])?.map(|_| (i, j))))
        .collect();
    for f in found {
        if let Some(pair) = f? {
            return Ok(AntichainCheck {
                antichain: false,
                failing: Some(pair),
            });
        }
    }
    Ok(AntichainCheck {
        antichain: true,
        failing: None,
    })
}

// ---------------------------------------------------------------------------
// Marked structures

/// Names of the constants `c1, ..., ck` used for marks, avoiding clashes
/// with `a`'s vocabulary.
fn mark_constants(a: &Structure, k: usize) -> Vec<String> {
    (1..=k).map(|i| a.vocab().fresh_name(&format!("c{i}"))).collect()
}

/// Expands `a` by one constant per mark, in order.
pub fn to_sk(a: &Structure, marks: &[Element]) -> Result<Structure> {
    a.expand_constants(&mark_constants(a, marks.len()), marks)
}

/// Expands `a` by the unary predicate `R` holding exactly on `marks`.
pub fn to_sk_pred(a: &Structure, marks: &BTreeSet<Element>) -> Result<Structure> {
    let tuples: Vec<Vec<Element>> = marks.iter().map(|&e| vec![e]).collect();
    a.expand_predicate(MARK_PREDICATE, 1, tuples)
}

/// Replaces the constants of `a` by the unary predicate `R` holding on their
/// values.
pub fn constants_to_mark_predicate(a: &Structure) -> Result<Structure> {
    let marks: BTreeSet<Element> = a.constant_values().iter().copied().collect();
    to_sk_pred(&a.forget_constants(), &marks)
}

// ---------------------------------------------------------------------------
// Marked linear orders

/// A marked linear order up to isomorphism: `pattern[i]` is the rank of mark
/// `i` among the distinct marked positions, and `gaps` counts the unmarked
/// elements before the first marked position, between consecutive ones, and
/// after the last.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderTypeTuple {
    pub pattern: Vec<usize>,
    pub gaps: Vec<usize>,
}

/// Position of every element of a linear order over `le`.
fn positions(a: &Structure) -> Result<Vec<usize>> {
    let le = a
        .vocab()
        .predicate_index(ORDER_PREDICATE)
        .ok_or_else(|| Error::UnknownPredicate(ORDER_PREDICATE.into()))?;
    let n = a.size();
    let mut pos = vec![0; n];
    for t in a.tuples(le) {
        if t[0] != t[1] {
            pos[t[1]] += 1;
        }
    }
    let distinct: BTreeSet<usize> = pos.iter().copied().collect();
    if distinct.len() != n || a.tuple_count(le) != n * (n + 1) / 2 || (0..n).any(|x| !a.holds(le, &[x, x])) {
        return Err(Error::InvalidStructure("not a reflexive linear order".into()));
    }
    Ok(pos)
}

impl OrderTypeTuple {
    pub fn of(order: &Structure, marks: &[Element]) -> Result<Self> {
        let pos = positions(order)?;
        if let Some(&bad) = marks.iter().find(|&&e| e >= pos.len()) {
            return Err(Error::InvalidElement(bad));
        }
        let marked: Vec<usize> = marks.iter().map(|&e| pos[e]).collect();
        let distinct: Vec<usize> = marked.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let pattern = marked
            .iter()
            .map(|p| distinct.binary_search(p).expect("present"))
            .collect();
        let mut gaps = Vec::with_capacity(distinct.len() + 1);
        let mut prev: Option<usize> = None;
        for &q in &distinct {
            gaps.push(match prev {
                None => q,
                Some(p) => q - p - 1,
            });
            prev = Some(q);
        }
        gaps.push(match prev {
            None => pos.len(),
            Some(p) => pos.len() - p - 1,
        });
        Ok(OrderTypeTuple { pattern, gaps })
    }
}

/// First embedding pair in a sequence of marked linear orders, found by
/// grouping on mark patterns and comparing gap tuples. The pair is confirmed
/// by an explicit embedding of the constant expansions.
pub fn linear_order_embedding_pair(seq: &[(Structure, Vec<Element>)]) -> Result<Option<(usize, usize)>> {
    let mut groups: BTreeMap<Vec<usize>, Vec<(usize, Vec<usize>)>> = BTreeMap::new();
    for (idx, (order, marks)) in seq.iter().enumerate() {
        let t = OrderTypeTuple::of(order, marks)?;
        groups.entry(t.pattern).or_default().push((idx, t.gaps));
    }
    let mut best: Option<(usize, usize)> = None;
    for members in groups.values() {
        let tuples: Vec<Vec<usize>> = members.iter().map(|(_, g)| g.clone()).collect();
        // Within a group the first pair by (j, i) is also first globally
        // among pairs of that group, so one Dickson scan per group suffices.
        let mut local = None;
        for j in 1..tuples.len() {
            if let Some(i) = (0..j).find(|&i| tuples[i].iter().zip(&tuples[j]).all(|(a, b)| a <= b)) {
                local = Some((members[i].0, members[j].0));
                break;
            }
        }
        if let Some((i, j)) = local {
            if best.is_none_or(|(bi, bj)| (j, i) < (bj, bi)) {
                best = Some((i, j));
            }
        }
    }
    if let Some((i, j)) = best {
        let a = to_sk(&seq[i].0, &seq[i].1)?;
        let b = to_sk(&seq[j].0, &seq[j].1)?;
        if find_embedding(&a, &b)?.is_none() {
            return Err(Error::VerificationFailed(format!("pair ({i}, {j}) does not embed")));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dickson_examples() {
        let t = |v: &[[usize; 2]]| v.iter().map(|x| x.to_vec()).collect::<Vec<_>>();
        assert_eq!(
            dickson_pair(&t(&[[3, 1], [2, 2], [1, 3], [4, 4]])).unwrap(),
            Some((0, 3))
        );
        assert_eq!(dickson_pair(&t(&[[1, 2], [2, 1]])).unwrap(), None);
        assert_eq!(dickson_pair(&t(&[[5, 5], [5, 5], [5, 5]])).unwrap(), Some((0, 1)));
        assert!(dickson_pair(&[vec![1], vec![1, 2]]).is_err());
    }

    #[test]
    fn order_type_tuple() {
        let l = make_linear_order(6).unwrap();
        let t = OrderTypeTuple::of(&l, &[4, 1, 4]).unwrap();
        assert_eq!(t.pattern, vec![1, 0, 1]);
        assert_eq!(t.gaps, vec![1, 2, 1]);
        assert_eq!(OrderTypeTuple::of(&l, &[]).unwrap().gaps, vec![6]);
    }

    #[test]
    fn identical_marked_orders_pair() {
        let l = make_linear_order(5).unwrap();
        let seq = vec![(l.clone(), vec![2]), (l, vec![2])];
        assert_eq!(linear_order_embedding_pair(&seq).unwrap(), Some((0, 1)));
    }

    #[test]
    fn endpoint_marked_paths_form_an_antichain() {
        let marked: Vec<Structure> = (2..=5)
            .map(|n| to_sk_pred(&make_path(n).unwrap(), &[0, n].into_iter().collect()).unwrap())
            .collect();
        assert!(antichain_certificate(&marked).unwrap().antichain);
        let plain: Vec<Structure> = (2..=5).map(|n| make_path(n).unwrap()).collect();
        let c = antichain_certificate(&plain).unwrap();
        assert!(!c.antichain);
        assert_eq!(c.failing, Some((0, 1)));
        assert!(antichain_certificate(&plain[..1]).unwrap().antichain);
    }

    #[test]
    fn constants_become_marks() {
        let l = make_linear_order(4).unwrap();
        let s = to_sk(&l, &[3, 1]).unwrap();
        let p = constants_to_mark_predicate(&s).unwrap();
        assert_eq!(p, to_sk_pred(&l, &[1, 3].into_iter().collect()).unwrap());
    }
}
