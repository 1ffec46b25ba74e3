//! Strategies and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use fmtk::folog::{Formula, Term};
use fmtk::structures::{Element, Structure, Vocabulary};
use proptest::prelude::*;

pub fn graph_from_bits(n: usize, bits: &[bool]) -> Structure {
    let tuples = (0..n * n).filter(|&i| bits[i]).map(|i| vec![i / n, i % n]).collect();
    Structure::new(Vocabulary::graph(), n, vec![tuples], vec![]).unwrap()
}

/// Directed graphs with loops allowed, `1..=max` vertices.
pub fn graph(max: usize) -> impl Strategy<Value = Structure> {
    (1..=max)
        .prop_flat_map(|n| proptest::collection::vec(any::<bool>(), n * n).prop_map(move |b| graph_from_bits(n, &b)))
}

pub fn all_graphs(max: usize) -> Vec<Structure> {
    let mut out = Vec::new();
    for n in 1..=max {
        out.extend(fmtk::structures::all_structures(&Vocabulary::graph(), n).unwrap());
    }
    out
}

fn injections(n: usize, m: usize) -> Vec<Vec<Element>> {
    if n == 0 {
        return vec![vec![]];
    }
    injections(n - 1, m)
        .into_iter()
        .flat_map(|f| {
            let free: Vec<Element> = (0..m).filter(|x| !f.contains(x)).collect();
            free.into_iter().map(move |x| {
                let mut g = f.clone();
                g.push(x);
                g
            })
        })
        .collect()
}

/// Induced embedding by trying every injection; graphs only.
pub fn brute_embeds(a: &Structure, b: &Structure) -> bool {
    injections(a.size(), b.size())
        .into_iter()
        .any(|f| (0..a.size()).all(|x| (0..a.size()).all(|y| a.holds(0, &[x, y]) == b.holds(0, &[f[x], f[y]]))))
}

pub fn brute_isomorphic(a: &Structure, b: &Structure) -> bool {
    a.size() == b.size() && brute_embeds(a, b)
}

/// Direct recursive evaluation with an explicit assignment.
pub fn naive_eval(s: &Structure, f: &Formula, env: &mut HashMap<String, Element>) -> bool {
    let term = |t: &Term, env: &HashMap<String, Element>| match t {
        Term::Var(v) => env[v],
        Term::Const(c) => s.constant(c).unwrap(),
    };
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom { pred, args } => {
            let t: Vec<Element> = args.iter().map(|a| term(a, env)).collect();
            s.holds_named(pred, &t).unwrap()
        }
        Formula::Eq(a, b) => term(a, env) == term(b, env),
        Formula::Not(g) => !naive_eval(s, g, env),
        Formula::And(gs) => gs.iter().all(|g| naive_eval(s, g, env)),
        Formula::Or(gs) => gs.iter().any(|g| naive_eval(s, g, env)),
        Formula::Imp(a, b) => !naive_eval(s, a, env) || naive_eval(s, b, env),
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let old = env.get(v).copied();
            let want = matches!(f, Formula::Exists(..));
            let mut result = !want;
            for e in 0..s.size() {
                env.insert(v.clone(), e);
                if naive_eval(s, g, env) == want {
                    result = want;
                    break;
                }
            }
            match old {
                Some(o) => env.insert(v.clone(), o),
                None => env.remove(v),
            };
            result
        }
    }
}

pub fn naive_holds(s: &Structure, f: &Formula) -> bool {
    naive_eval(s, f, &mut HashMap::new())
}
