mod common;

use common::{brute_embeds, brute_isomorphic, graph};
use fmtk::structures::{
    bowtie, cartesian_product, check_embedding, complement, disjoint_union, find_embedding, format_structure,
    is_isomorphic, parse_structures, tensor_product, Structure, Vocabulary,
};
use fmtk::wqo::{make_cycle, make_grid, make_linear_order, make_path};
use proptest::prelude::*;

fn vertex(looped: bool) -> Structure {
    let e = if looped { vec![vec![0, 0]] } else { vec![] };
    Structure::new(Vocabulary::graph(), 1, vec![e], vec![]).unwrap()
}

#[test]
fn bowtie_of_two_plain_vertices_by_hand() {
    let b = bowtie(&vertex(false), &vertex(false)).unwrap();
    let by_hand = Structure::new(Vocabulary::graph(), 2, vec![vec![vec![0, 1], vec![1, 0]]], vec![]).unwrap();
    assert_eq!(b, by_hand);
    let via_definition = complement(
        &disjoint_union(
            &complement(&vertex(false)).unwrap(),
            &complement(&vertex(false)).unwrap(),
        )
        .unwrap(),
    )
    .unwrap();
    assert_eq!(b, via_definition);
}

#[test]
fn single_plain_vertex_is_a_product_unit() {
    let c = make_cycle(5).unwrap();
    let p = cartesian_product(&vertex(false), &c).unwrap();
    assert!(is_isomorphic(&p, &c).unwrap());
}

#[test]
fn grid_is_a_tensor_of_orders() {
    let t = tensor_product(&make_linear_order(3).unwrap(), &make_linear_order(4).unwrap()).unwrap();
    assert_eq!(make_grid(&[3, 4]).unwrap(), t);
}

#[test]
fn union_adds_no_cross_edges() {
    let u = disjoint_union(&make_path(1).unwrap(), &vertex(false)).unwrap();
    assert_eq!(u.size(), 3);
    assert!(!u.holds(0, &[0, 2]));
    assert!(u.holds(0, &[0, 1]));
}

#[test]
fn double_complement_of_a_cycle_is_isomorphic() {
    let c = make_cycle(4).unwrap();
    assert!(is_isomorphic(&c, &complement(&complement(&c).unwrap()).unwrap()).unwrap());
    assert!(!is_isomorphic(&make_path(2).unwrap(), &make_path(3).unwrap()).unwrap());
}

proptest! {
    #[test]
    fn embedding_search_matches_brute_force(a in graph(3), b in graph(4)) {
        let found = find_embedding(&a, &b).unwrap();
        prop_assert_eq!(found.is_some(), brute_embeds(&a, &b));
        if let Some(map) = found {
            prop_assert!(check_embedding(&a, &b, &map));
        }
    }

    #[test]
    fn isomorphism_matches_brute_force(a in graph(3), b in graph(3)) {
        prop_assert_eq!(is_isomorphic(&a, &b).unwrap(), brute_isomorphic(&a, &b));
    }

    #[test]
    fn permutations_are_isomorphic(a in graph(4), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut perm: Vec<usize> = (0..a.size()).collect();
        perm.shuffle(&mut fmtk::random::rng(seed));
        prop_assert!(is_isomorphic(&a, &a.permute(&perm).unwrap()).unwrap());
    }

    #[test]
    fn complement_is_an_involution(a in graph(4)) {
        prop_assert_eq!(complement(&complement(&a).unwrap()).unwrap(), a);
    }

    #[test]
    fn operation_sizes(a in graph(3), b in graph(3)) {
        prop_assert_eq!(disjoint_union(&a, &b).unwrap().size(), a.size() + b.size());
        prop_assert_eq!(bowtie(&a, &b).unwrap().size(), a.size() + b.size());
        prop_assert_eq!(cartesian_product(&a, &b).unwrap().size(), a.size() * b.size());
        prop_assert_eq!(tensor_product(&a, &b).unwrap().size(), a.size() * b.size());
        prop_assert!(is_isomorphic(&disjoint_union(&a, &b).unwrap(), &disjoint_union(&b, &a).unwrap()).unwrap());
    }

    #[test]
    fn tensor_with_edgeless_is_edgeless(a in graph(3), n in 1usize..4) {
        let empty = Structure::new(Vocabulary::graph(), n, vec![vec![]], vec![]).unwrap();
        prop_assert_eq!(tensor_product(&a, &empty).unwrap().tuple_count(0), 0);
    }

    #[test]
    fn restriction_is_an_induced_substructure(a in graph(4), mask in 1u32..16) {
        let keep: Vec<usize> = (0..a.size()).filter(|i| mask & (1 << i) != 0).collect();
        prop_assume!(!keep.is_empty());
        let r = a.restrict(keep.iter().copied()).unwrap();
        prop_assert_eq!(&r.origin, &keep);
        prop_assert!(check_embedding(&r.structure, &a, &r.origin));
    }

    #[test]
    fn text_round_trip(a in graph(4)) {
        let parsed = parse_structures(&format_structure("A", &a)).unwrap();
        prop_assert_eq!(parsed.len(), 1);
        prop_assert_eq!(&parsed[0].1, &a);
    }
}
