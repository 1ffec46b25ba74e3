mod common;

use common::{all_graphs, graph, naive_holds};
use fmtk::folog::{
    assemble_prefix, holds, parse_formula, parse_formula_in, relativize, size_bound_sentence, split_prefix,
    CompiledFormula, Formula,
};
use fmtk::random::{random_sentence, random_structure, rng};
use fmtk::structures::Vocabulary;
use proptest::prelude::*;

#[test]
fn evaluator_matches_naive_recursion() {
    let v = Vocabulary::graph();
    let structures = all_graphs(3);
    let mut r = rng(11);
    for _ in 0..50 {
        let phi = random_sentence(&mut r, &v, 2, 6);
        let c = CompiledFormula::sentence(&phi, &v).unwrap();
        for s in &structures {
            assert_eq!(c.eval(s, &[]).unwrap(), naive_holds(s, &phi), "{phi}");
        }
    }
}

#[test]
fn size_bound_sentence_counts_elements() {
    let v = Vocabulary::graph();
    let mut r = rng(12);
    for n in 1..=4 {
        let xi = size_bound_sentence(n).unwrap();
        for size in 1..=6 {
            let s = random_structure(&mut r, &v, size, 0.3);
            assert_eq!(holds(&s, &xi).unwrap(), size <= n);
        }
    }
}

#[test]
fn relativizing_the_witness_sentence_to_one_variable() {
    let v = Vocabulary::graph();
    let phi = parse_formula("exists x. forall y. E(x,y)").unwrap();
    let rel = relativize(&phi, &["x1".to_string()], &v).unwrap();
    let loop_at = parse_formula("E(x1,x1)").unwrap();
    let a = CompiledFormula::new(&rel, &v, &["x1".to_string()]).unwrap();
    let b = CompiledFormula::new(&loop_at, &v, &["x1".to_string()]).unwrap();
    for s in all_graphs(3) {
        for e in 0..s.size() {
            assert_eq!(a.eval(&s, &[e]).unwrap(), b.eval(&s, &[e]).unwrap());
        }
    }
}

#[test]
fn parser_rejects_and_accepts() {
    assert!(parse_formula("E(x").is_err());
    let f = parse_formula("exists x. forall y. E(x,y)").unwrap();
    assert_eq!(
        f,
        Formula::exists("x", Formula::forall("y", parse_formula("E(x,y)").unwrap()))
    );
    assert!(parse_formula_in("P(x)", &Vocabulary::graph()).is_err());
}

proptest! {
    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let f = random_sentence(&mut rng(seed), &Vocabulary::graph(), 3, 8);
        prop_assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn relativization_is_quantifier_free(seed in any::<u64>(), len in 1usize..4) {
        let f = random_sentence(&mut rng(seed), &Vocabulary::graph(), 3, 8);
        let xs: Vec<String> = (1..=len).map(|i| format!("x{i}")).collect();
        let rel = relativize(&f, &xs, &Vocabulary::graph()).unwrap();
        prop_assert_eq!(rel.quantifier_rank(), 0);
        prop_assert!(rel.free_variables().iter().all(|x| xs.contains(x)));
    }

    #[test]
    fn prefix_split_round_trip(k in 1usize..4, p in 1usize..4) {
        let matrix = parse_formula("E(x1,y1) | !E(y1,x1)").unwrap();
        let ps = assemble_prefix(k, p, matrix).unwrap();
        prop_assert_eq!(split_prefix(&ps.to_formula()).unwrap(), ps);
    }

    #[test]
    fn simplify_preserves_meaning(seed in any::<u64>(), s in graph(3)) {
        let f = random_sentence(&mut rng(seed), &Vocabulary::graph(), 2, 8);
        prop_assert_eq!(holds(&s, &f.simplify()).unwrap(), naive_holds(&s, &f));
    }
}
