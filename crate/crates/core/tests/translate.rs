mod common;

use std::collections::BTreeSet;

use common::{all_graphs, brute_embeds, naive_holds};
use fmtk::folog::{holds, parse_formula, Formula};
use fmtk::structures::{Element, Structure, Vocabulary};
use fmtk::translate::{
    atomic_diagram_sentence, core_formula, find_cores, forall_star_from_minimal_models, psc_check, sets_defined_by,
    translate_auto, translate_to_exists_forall, ClassSample,
};
use fmtk::wqo::{make_cycle, make_linear_order};

fn example() -> Structure {
    Structure::new(
        Vocabulary::graph(),
        2,
        vec![vec![vec![0, 0], vec![0, 1], vec![1, 1]]],
        vec![],
    )
    .unwrap()
}

#[test]
fn both_single_vertices_are_cores() {
    let a = example();
    let phi = parse_formula("exists x. forall y. E(x,y)").unwrap();
    let target = |s: &Structure| holds(s, &phi);
    let sample = ClassSample::new(vec![a.clone()]).unwrap();
    let cores = find_cores(&a, &target, 1, &sample).unwrap();
    for c in [BTreeSet::from([0]), BTreeSet::from([1])] {
        assert!(cores.contains(&c));
    }
    let (f, xs) = core_formula(&phi, 1, 2, &Vocabulary::graph()).unwrap();
    let singles: BTreeSet<BTreeSet<Element>> = cores.into_iter().filter(|c| c.len() == 1).collect();
    assert_eq!(sets_defined_by(&a, &f, &xs).unwrap(), singles);
}

#[test]
fn complete_digraphs_have_single_cores() {
    let phi = parse_formula("exists x. forall y. E(x,y)").unwrap();
    let complete = |n| {
        let t = (0..n).flat_map(|i| (0..n).map(move |j| vec![i, j])).collect();
        Structure::new(Vocabulary::graph(), n, vec![t], vec![]).unwrap()
    };
    let sample = ClassSample::new((1..=4).map(complete).collect()).unwrap();
    assert!(psc_check(&phi, 1, &sample).unwrap().holds);
}

#[test]
fn acyclic_graphs_keep_every_core() {
    let acyclic = parse_formula("forall x. !E(x,x)").unwrap();
    let target = |s: &Structure| holds(s, &acyclic);
    let a = make_cycle(4).unwrap();
    let sample = ClassSample::new(vec![a.clone()]).unwrap();
    let cores = find_cores(&a, &target, 2, &sample).unwrap();
    assert_eq!(cores.len(), 1 + 4 + 6);
}

#[test]
fn order_minimum_translates() {
    let phi = parse_formula("exists x. forall y. le(x,y)").unwrap();
    let sample: Vec<Structure> = (1..=8).map(|n| make_linear_order(n).unwrap()).collect();
    let auto = translate_auto(&phi, 1, &sample, 4).unwrap();
    let t = auto.translation.expect("a small p agrees");
    assert_eq!(t.sentence.existential, 1);
}

#[test]
fn translations_agree_on_small_graphs() {
    let v = Vocabulary::graph();
    let graphs = all_graphs(3);
    for text in [
        "forall x. forall y. E(x,y) -> E(y,x)",
        "exists x. E(x,x)",
        "exists x. forall y. E(x,y) & E(y,y)",
    ] {
        let phi = parse_formula(text).unwrap();
        let t = translate_to_exists_forall(&phi, 1, 3, &v).unwrap();
        let f = t.sentence.to_formula();
        // Each sentence has 1-element cores, and k + p covers every sample
        // structure, so the translation is exact here.
        for s in &graphs {
            assert_eq!(naive_holds(s, &f), naive_holds(s, &phi), "{text}");
        }
    }
}

#[test]
fn diagrams_characterise_embeddings() {
    let graphs = all_graphs(3);
    let small: Vec<&Structure> = graphs.iter().filter(|s| s.size() <= 2).collect();
    for a in small {
        let d = atomic_diagram_sentence(a).unwrap();
        assert!(d.quantifier_rank() <= a.size());
        for b in &graphs {
            assert_eq!(holds(b, &d).unwrap(), brute_embeds(a, b));
        }
    }
}

#[test]
fn minimal_models() {
    let sample = ClassSample::new(all_graphs(3)).unwrap();
    let edgeless = |s: &Structure| s.tuple_count(0) == 0;
    let r = forall_star_from_minimal_models(&edgeless, &sample).unwrap();
    assert!(r.minimal.iter().all(|m| m.tuple_count(0) <= 2));
    assert!(r.disagreements.is_empty());
    let all = |_: &Structure| true;
    assert_eq!(
        forall_star_from_minimal_models(&all, &sample).unwrap().sentence,
        Formula::True
    );
}
