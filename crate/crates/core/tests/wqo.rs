mod common;

use std::collections::BTreeSet;

use common::graph;
use fmtk::equiv::m_equivalent;
use fmtk::random::{random_marked_orders, rng};
use fmtk::structures::{check_embedding, find_embedding, Element, Structure};
use fmtk::wqo::{
    constants_to_mark_predicate, dickson_pair, graph_components, linear_order_embedding_pair, make_cycle, make_gn,
    make_hn, make_path, recognize_hn_gn, shrink_cycle_with_w, shrink_path_with_w, to_sk, to_sk_pred, witness_hn_gn,
    ComponentKind,
};
use proptest::prelude::*;

fn pairwise_oracle(seq: &[(Structure, Vec<Element>)]) -> Option<(usize, usize)> {
    for j in 1..seq.len() {
        for i in 0..j {
            let a = to_sk(&seq[i].0, &seq[i].1).unwrap();
            let b = to_sk(&seq[j].0, &seq[j].1).unwrap();
            if find_embedding(&a, &b).unwrap().is_some() {
                return Some((i, j));
            }
        }
    }
    None
}

fn permutations(items: &[Element]) -> Vec<Vec<Element>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    (0..items.len())
        .flat_map(|i| {
            let mut rest = items.to_vec();
            let x = rest.remove(i);
            permutations(&rest).into_iter().map(move |mut p| {
                p.insert(0, x);
                p
            })
        })
        .collect()
}

#[test]
fn families() {
    assert_eq!(make_hn(1).unwrap().size(), 10);
    let c3 = make_cycle(3).unwrap();
    assert_eq!(c3.tuple_count(0), 6);
    assert_eq!(recognize_hn_gn(&make_gn(2).unwrap()).unwrap(), (2, true));
    assert_eq!(recognize_hn_gn(&make_hn(2).unwrap()).unwrap(), (2, false));
}

#[test]
fn path_and_cycle_shrinks() {
    let p = make_path(60).unwrap();
    assert_eq!(
        shrink_path_with_w(&p, &BTreeSet::from([30]), 1, 1)
            .unwrap()
            .structure
            .size(),
        1
    );
    let short = shrink_path_with_w(&make_path(4).unwrap(), &BTreeSet::from([1, 3]), 1, 2).unwrap();
    assert_eq!(short.origin, vec![1, 2, 3]);
    let ends = shrink_path_with_w(&p, &BTreeSet::from([0, 60]), 0, 2).unwrap();
    assert_eq!(ends.origin, vec![0, 60]);
    let c = make_cycle(6).unwrap();
    let r = shrink_cycle_with_w(&c, &BTreeSet::new(), 0, 1).unwrap();
    assert!(graph_components(&r.structure)
        .unwrap()
        .iter()
        .all(|c| c.kind == ComponentKind::Path));
    assert_eq!(
        shrink_cycle_with_w(&c, &BTreeSet::from([2]), 0, 1).unwrap().origin,
        vec![2]
    );
}

#[test]
fn witnesses_hold_their_verdicts() {
    let g1 = make_gn(1).unwrap();
    let cycle: Vec<Element> = graph_components(&g1)
        .unwrap()
        .into_iter()
        .find(|c| c.kind == ComponentKind::Cycle)
        .unwrap()
        .vertices;
    for (g, w, m, k) in [
        (g1.clone(), BTreeSet::from([cycle[0]]), 0, 1),
        (make_gn(2).unwrap(), BTreeSet::from([0]), 1, 1),
        (make_hn(1).unwrap(), BTreeSet::new(), 0, 0),
    ] {
        let wit = witness_hn_gn(&g, &w, m, k).unwrap();
        let r = &wit.restriction;
        assert!(w.iter().all(|x| r.origin.contains(x)));
        assert!(check_embedding(&r.structure, &g, &r.origin));
        assert!(m_equivalent(&r.structure, &g, m).unwrap());
    }
}

#[test]
fn random_orders_match_the_pairwise_scan() {
    let mut r = rng(31);
    for k in 0..=3 {
        for _ in 0..5 {
            let seq = random_marked_orders(&mut r, 10, 12, k);
            assert_eq!(linear_order_embedding_pair(&seq).unwrap(), pairwise_oracle(&seq));
        }
    }
}

proptest! {
    #[test]
    fn dickson_pair_is_componentwise(tuples in proptest::collection::vec(proptest::collection::vec(0usize..5, 3), 0..8)) {
        let got = dickson_pair(&tuples).unwrap();
        if let Some((i, j)) = got {
            prop_assert!(i < j);
            prop_assert!(tuples[i].iter().zip(&tuples[j]).all(|(a, b)| a <= b));
        }
        // No earlier j has a dominated predecessor.
        let end = got.map_or(tuples.len(), |(_, j)| j);
        for j in 1..end {
            for i in 0..j {
                prop_assert!(!tuples[i].iter().zip(&tuples[j]).all(|(a, b)| a <= b));
            }
        }
    }

    /// A predicate-marked embedding is a constant-marked embedding after
    /// reordering the target's marks, and conversely.
    #[test]
    fn mark_predicate_versus_constants(a in graph(3), b in graph(4), ka in proptest::collection::btree_set(0usize..3, 0..3), kb in proptest::collection::btree_set(0usize..4, 0..3)) {
        let ka: Vec<Element> = ka.into_iter().filter(|&x| x < a.size()).collect();
        let kb: Vec<Element> = kb.into_iter().filter(|&x| x < b.size()).collect();
        prop_assume!(ka.len() == kb.len());
        let pred = find_embedding(
            &to_sk_pred(&a, &ka.iter().copied().collect()).unwrap(),
            &to_sk_pred(&b, &kb.iter().copied().collect()).unwrap(),
        ).unwrap().is_some();
        let sa = to_sk(&a, &ka).unwrap();
        let by_constants = permutations(&kb)
            .into_iter()
            .any(|p| find_embedding(&sa, &to_sk(&b, &p).unwrap()).unwrap().is_some());
        prop_assert_eq!(pred, by_constants);
        prop_assert_eq!(
            constants_to_mark_predicate(&sa).unwrap(),
            to_sk_pred(&a, &ka.iter().copied().collect()).unwrap()
        );
    }

    #[test]
    fn order_scan_matches_oracle(seed in any::<u64>(), k in 0usize..3) {
        let seq = random_marked_orders(&mut rng(seed), 8, 8, k);
        prop_assert_eq!(linear_order_embedding_pair(&seq).unwrap(), pairwise_oracle(&seq));
    }
}
