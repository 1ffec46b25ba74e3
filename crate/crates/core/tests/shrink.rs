use std::collections::BTreeSet;

use fmtk::equiv::{ef_game_equivalent, ef_game_equivalent_marked};
use fmtk::random::{random_sigma_tree, rng};
use fmtk::shrink::{
    format_trees, parse_trees, reduce_degree, reduce_height_no_w, reduce_root_distance, reduce_w_distances,
    shrink_tree, shrink_word, NamedTree, Shrunk, SigmaTree,
};
use fmtk::structures::check_embedding;
use proptest::prelude::*;
use rand::Rng;

fn chain(n: usize) -> SigmaTree {
    SigmaTree::word(vec!["a".into()], vec![0; n]).unwrap()
}

fn star(leaves: usize) -> SigmaTree {
    let parent = (0..=leaves).map(|i| if i == 0 { None } else { Some(0) }).collect();
    SigmaTree::new(vec!["a".into()], parent, vec![0; leaves + 1]).unwrap()
}

/// Subtree and equivalence checks against the game oracle.
fn assert_sound(before: &SigmaTree, after: &Shrunk, w: &BTreeSet<usize>, m: usize) {
    let big = before.to_structure();
    let small = after.tree.to_structure();
    assert!(w.iter().all(|x| after.origin.contains(x)));
    assert!(check_embedding(&small, &big, &after.origin));
    assert!(ef_game_equivalent(&small, &big, m).unwrap());
}

#[test]
fn star_degree_is_cut_per_class() {
    let s = star(10);
    let out = reduce_degree(&s, &BTreeSet::new(), 1, 0).unwrap();
    assert!(out.tree.len() <= 2);
    assert_sound(&s, &out, &BTreeSet::new(), 1);
    let w = BTreeSet::from([7]);
    let out = reduce_degree(&s, &w, 1, 1).unwrap();
    assert!(out.origin.contains(&7));
    assert_sound(&s, &out, &w, 1);
}

#[test]
fn unary_chain_height() {
    let s = chain(30);
    let out = reduce_height_no_w(&s, 1).unwrap();
    assert!(out.tree.len() < 30);
    assert_sound(&s, &out, &BTreeSet::new(), 1);
}

#[test]
fn unary_word_of_twenty() {
    let s = chain(20);
    let out = shrink_word(&s, 2).unwrap();
    // Orders with at least 2^m - 1 elements are m-equivalent.
    assert_eq!(out.tree.len(), 3);
    assert!(out.tree.is_word());
    assert_sound(&s, &out, &BTreeSet::new(), 2);
    assert_eq!(shrink_word(&chain(1), 2).unwrap().tree.len(), 1);
}

#[test]
fn root_distance_moves_the_bottom_closer() {
    let s = chain(40);
    let out = reduce_root_distance(&s, 39, 1).unwrap();
    let b = out.image_of(39).unwrap();
    assert!(out.tree.depth(b) < 39);
    assert!(ef_game_equivalent_marked(&out.tree.to_structure(), &[b], &s.to_structure(), &[39], 1).unwrap());
    assert_eq!(reduce_root_distance(&s, 0, 1).unwrap().tree, s);
}

#[test]
fn distances_between_marks() {
    let s = chain(40);
    let w = BTreeSet::from([0, 39]);
    let out = reduce_w_distances(&s, &w, 1, 2).unwrap();
    assert!(out.tree.len() < 40);
    assert_sound(&s, &out, &w, 1);
    let single = BTreeSet::from([5]);
    assert_eq!(reduce_w_distances(&s, &single, 1, 2).unwrap().tree, s);
}

#[test]
fn everything_marked_is_a_fixpoint() {
    let s = chain(2);
    let w = BTreeSet::from([0, 1]);
    assert_eq!(shrink_tree(&s, &w, 2, 2).unwrap().0.tree, s);
}

#[test]
fn random_words_stay_equivalent() {
    let mut r = rng(44);
    for _ in 0..100 {
        let n = r.gen_range(1..=40);
        let labels = (0..n).map(|_| r.gen_range(0..2)).collect();
        let w = SigmaTree::word(vec!["a".into(), "b".into()], labels).unwrap();
        let m = r.gen_range(0..=2);
        let out = shrink_word(&w, m).unwrap();
        assert_sound(&w, &out, &BTreeSet::new(), m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shrink_tree_postconditions(seed in any::<u64>(), size in 1usize..20, m in 0usize..3, k in 0usize..3) {
        let mut r = rng(seed);
        let t = random_sigma_tree(&mut r, 2, size);
        let w: BTreeSet<usize> = (0..k).map(|_| r.gen_range(0..t.len())).collect();
        let (out, report) = shrink_tree(&t, &w, m, k).unwrap();
        prop_assert!(report.verdicts.all());
        assert_sound(&t, &out, &w, m);
        prop_assert!(out.tree.len() <= t.len());
    }

    #[test]
    fn tree_text_round_trip(seed in any::<u64>(), size in 1usize..15) {
        let t = random_sigma_tree(&mut rng(seed), 2, size);
        let named = NamedTree { name: "t".into(), marks: BTreeSet::from([0]), tree: t };
        let back = parse_trees(&format_trees(std::slice::from_ref(&named))).unwrap();
        prop_assert_eq!(back, vec![named]);
    }
}
