//! Seeded random generators for structures, sentences, labeled trees,
//! expression trees and marked linear orders.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::ExpressionTree;
use crate::folog::{Formula, Term};
use crate::shrink::SigmaTree;
use crate::structures::{Element, Structure, Vocabulary};
use crate::wqo::make_linear_order;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Each possible tuple is present with probability `density`.
pub fn random_structure<R: Rng>(rng: &mut R, vocab: &Vocabulary, size: usize, density: f64) -> Structure {
    let mut relations = Vec::new();
    for p in vocab.predicates() {
        let mut rel = Vec::new();
        let mut tuple = vec![0; p.arity];
        loop {
            if rng.gen_bool(density) {
                rel.push(tuple.clone());
            }
            if !crate::structures::advance(&mut tuple, size) {
                break;
            }
        }
        relations.push(rel);
    }
    let constants = vocab.constants().iter().map(|_| rng.gen_range(0..size)).collect();
    Structure::new(vocab.clone(), size, relations, constants).expect("generated tuples are in range")
}

/// A random sentence of quantifier rank at most `rank` whose quantifiers
/// bind `v1, v2, ...`. `size` bounds the number of connectives.
pub fn random_sentence<R: Rng>(rng: &mut R, vocab: &Vocabulary, rank: usize, size: usize) -> Formula {
    let mut bound = Vec::new();
    gen(rng, vocab, rank, size, &mut bound)
}

fn gen<R: Rng>(rng: &mut R, vocab: &Vocabulary, rank: usize, size: usize, bound: &mut Vec<String>) -> Formula {
    let terms: Vec<Term> = bound
        .iter()
        .map(|v| Term::var(v.clone()))
        .chain(vocab.constants().iter().map(|c| Term::constant(c.clone())))
        .collect();
    let can_quantify = rank > 0;
    if terms.is_empty() {
        if !can_quantify {
            return if rng.gen_bool(0.5) {
                Formula::True
            } else {
                Formula::False
            };
        }
        return quantify(rng, vocab, rank, size, bound);
    }
    let roll = rng.gen_range(0..10);
    match roll {
        0..=2 if can_quantify => quantify(rng, vocab, rank, size, bound),
        3..=4 if size > 0 => Formula::not(gen(rng, vocab, rank, size - 1, bound)),
        5..=6 if size > 1 => {
            let a = gen(rng, vocab, rank, size / 2, bound);
            let b = gen(rng, vocab, rank, size / 2, bound);
            if rng.gen_bool(0.5) {
                Formula::and([a, b])
            } else {
                Formula::or([a, b])
            }
        }
        7 if size > 1 => Formula::imp(
            gen(rng, vocab, rank, size / 2, bound),
            gen(rng, vocab, rank, size / 2, bound),
        ),
        8 => {
            let a = terms.choose(rng).expect("nonempty").clone();
            let b = terms.choose(rng).expect("nonempty").clone();
            Formula::eq(a, b)
        }
        _ => match vocab.predicates().choose(rng) {
            Some(p) => Formula::atom(
                p.name.clone(),
                (0..p.arity)
                    .map(|_| terms.choose(rng).expect("nonempty").clone())
                    .collect(),
            ),
            None => Formula::eq(terms[0].clone(), terms[0].clone()),
        },
    }
}

fn quantify<R: Rng>(rng: &mut R, vocab: &Vocabulary, rank: usize, size: usize, bound: &mut Vec<String>) -> Formula {
    let v = format!("v{}", bound.len() + 1);
    bound.push(v.clone());
    let body = gen(rng, vocab, rank - 1, size.saturating_sub(1), bound);
    bound.pop();
    if rng.gen_bool(0.5) {
        Formula::exists(v, body)
    } else {
        Formula::forall(v, body)
    }
}

/// A random labeled tree: each node after the first picks a uniformly random
/// earlier node as parent.
pub fn random_sigma_tree<R: Rng>(rng: &mut R, alphabet_size: usize, size: usize) -> SigmaTree {
    let alphabet: Vec<String> = (0..alphabet_size.max(1))
        .map(|i| char::from(b'a' + (i % 26) as u8).to_string())
        .collect();
    let parent = (0..size.max(1))
        .map(|i| if i == 0 { None } else { Some(rng.gen_range(0..i)) })
        .collect();
    let label = (0..size.max(1)).map(|_| rng.gen_range(0..alphabet.len())).collect();
    SigmaTree::new(alphabet, parent, label).expect("generated tree is valid")
}

/// A random tree over `u` and `!` with `leaves` leaves drawn from `pool`.
/// Complements are inserted above a node with probability `p_complement`.
pub fn random_union_complement_tree<R: Rng>(
    rng: &mut R,
    pool: &[(String, Structure)],
    leaves: usize,
    p_complement: f64,
) -> ExpressionTree {
    let mut t = if leaves <= 1 {
        let (name, s) = pool.choose(rng).expect("nonempty pool");
        ExpressionTree::leaf(name.clone(), s.clone())
    } else {
        let left = rng.gen_range(1..leaves);
        ExpressionTree::union(
            random_union_complement_tree(rng, pool, left, p_complement),
            random_union_complement_tree(rng, pool, leaves - left, p_complement),
        )
    };
    if rng.gen_bool(p_complement) {
        t = ExpressionTree::complement(t);
    }
    t
}

/// `count` linear orders of sizes `1..=max_size`, each with `k` marks drawn
/// with repetition.
pub fn random_marked_orders<R: Rng>(
    rng: &mut R,
    count: usize,
    max_size: usize,
    k: usize,
) -> Vec<(Structure, Vec<Element>)> {
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=max_size.max(1));
            let marks = (0..k).map(|_| rng.gen_range(0..n)).collect();
            (make_linear_order(n).expect("valid order"), marks)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sentences_respect_rank() {
        let mut r = rng(7);
        for _ in 0..50 {
            let f = random_sentence(&mut r, &Vocabulary::graph(), 2, 6);
            assert!(f.quantifier_rank() <= 2);
            assert!(f.is_sentence());
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = random_sigma_tree(&mut rng(3), 2, 20);
        let b = random_sigma_tree(&mut rng(3), 2, 20);
        assert_eq!(a, b);
    }
}
