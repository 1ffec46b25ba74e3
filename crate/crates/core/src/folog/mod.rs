//! First-order formulas over relational vocabularies.
//!
//! The AST is a plain tree. Smart constructors ([`Formula::and`],
//! [`Formula::or`], [`Formula::not`], ...) flatten and fold constants; the
//! parser builds raw trees so that printing a parsed formula reproduces it.

mod eval;
mod parse;
mod print;
mod relativize;

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::structures::Vocabulary;

pub use eval::{evaluate, holds, CompiledFormula};
pub use parse::{parse_formula, parse_formula_in};
pub use relativize::relativize;

/// Prefix reserved for generated variable names. User formulas may still use
/// it, so generators also avoid names already present.
pub const FRESH_PREFIX: &str = "_";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Var(n) | Term::Const(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom { pred: String, args: Vec<Term> },
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn atom(pred: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Atom {
            pred: pred.into(),
            args,
        }
    }

    /// Equality, folded to `true` when both sides are the same term.
    pub fn eq(a: Term, b: Term) -> Self {
        if a == b {
            Formula::True
        } else {
            Formula::Eq(a, b)
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(inner) => *inner,
            other => Formula::Not(Box::new(other)),
        }
    }

    /// Conjunction: flattens nested conjunctions, drops `true`, folds `false`,
    /// removes duplicates.
    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut out: Vec<Formula> = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => {
                    for q in inner {
                        if !out.contains(&q) {
                            out.push(q);
                        }
                    }
                }
                other => {
                    if !out.contains(&other) {
                        out.push(other);
                    }
                }
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().expect("one element"),
            _ => Formula::And(out),
        }
    }

    /// Disjunction, dual to [`Formula::and`].
    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut out: Vec<Formula> = Vec::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => {
                    for q in inner {
                        if !out.contains(&q) {
                            out.push(q);
                        }
                    }
                }
                other => {
                    if !out.contains(&other) {
                        out.push(other);
                    }
                }
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().expect("one element"),
            _ => Formula::Or(out),
        }
    }

    pub fn imp(a: Formula, b: Formula) -> Self {
        match (a, b) {
            (Formula::False, _) | (_, Formula::True) => Formula::True,
            (Formula::True, b) => b,
            (a, Formula::False) => Formula::not(a),
            (a, b) => Formula::Imp(Box::new(a), Box::new(b)),
        }
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Self {
        Formula::Exists(var.into(), Box::new(body))
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Self {
        Formula::Forall(var.into(), Box::new(body))
    }

    pub fn exists_many<S: Into<String>>(vars: impl IntoIterator<Item = S>, body: Formula) -> Self {
        let vars: Vec<String> = vars.into_iter().map(Into::into).collect();
        vars.into_iter().rev().fold(body, |acc, v| Formula::exists(v, acc))
    }

    pub fn forall_many<S: Into<String>>(vars: impl IntoIterator<Item = S>, body: Formula) -> Self {
        let vars: Vec<String> = vars.into_iter().map(Into::into).collect();
        vars.into_iter().rev().fold(body, |acc, v| Formula::forall(v, acc))
    }

    /// Maximum nesting depth of quantifiers.
    pub fn quantifier_rank(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom { .. } | Formula::Eq(..) => 0,
            Formula::Not(f) => f.quantifier_rank(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(Formula::quantifier_rank).max().unwrap_or(0),
            Formula::Imp(a, b) => a.quantifier_rank().max(b.quantifier_rank()),
            Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.quantifier_rank(),
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.quantifier_rank() == 0
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut term = |t: &Term, bound: &Vec<String>| {
            if let Term::Var(v) = t {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom { args, .. } => args.iter().for_each(|t| term(t, bound)),
            Formula::Eq(a, b) => {
                term(a, bound);
                term(b, bound);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            Formula::Imp(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_variables().is_empty()
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn variable_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Atom { args, .. } => {
                for t in args {
                    if let Term::Var(v) = t {
                        out.insert(v.clone());
                    }
                }
            }
            Formula::Eq(a, b) => {
                for t in [a, b] {
                    if let Term::Var(v) = t {
                        out.insert(v.clone());
                    }
                }
            }
            Formula::Exists(v, _) | Formula::Forall(v, _) => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => g.visit(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit(f)),
            Formula::Imp(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    /// Number of AST nodes.
    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Checks predicate names, arities and constant names against `vocab`.
    pub fn check_vocabulary(&self, vocab: &Vocabulary) -> Result<()> {
        let mut err = None;
        let check_term = |t: &Term| match t {
            Term::Const(c) if vocab.constant_index(c).is_none() => Some(Error::UnknownConstant(c.clone())),
            _ => None,
        };
        self.visit(&mut |f| {
            if err.is_some() {
                return;
            }
            match f {
                Formula::Atom { pred, args } => match vocab.predicate_index(pred) {
                    None => err = Some(Error::UnknownPredicate(pred.clone())),
                    Some(i) => {
                        let arity = vocab.predicates()[i].arity;
                        if arity != args.len() {
                            err = Some(Error::ArityMismatch {
                                name: pred.clone(),
                                expected: arity,
                                found: args.len(),
                            });
                        } else {
                            err = args.iter().find_map(check_term);
                        }
                    }
                },
                Formula::Eq(a, b) => err = check_term(a).or_else(|| check_term(b)),
                _ => {}
            }
        });
        err.map_or(Ok(()), Err)
    }

    /// Replaces free occurrences of variables according to `map`. Bound
    /// variables shadow the map. The caller guarantees that substituted
    /// variables are not captured, which holds for fresh names.
    pub fn substitute(&self, map: &dyn Fn(&str) -> Option<Term>) -> Formula {
        self.substitute_inner(map, &mut Vec::new())
    }

    fn substitute_inner(&self, map: &dyn Fn(&str) -> Option<Term>, bound: &mut Vec<String>) -> Formula {
        let term = |t: &Term, bound: &Vec<String>| match t {
            Term::Var(v) if !bound.contains(v) => map(v).unwrap_or_else(|| t.clone()),
            _ => t.clone(),
        };
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom { pred, args } => Formula::Atom {
                pred: pred.clone(),
                args: args.iter().map(|t| term(t, bound)).collect(),
            },
            Formula::Eq(a, b) => Formula::Eq(term(a, bound), term(b, bound)),
            Formula::Not(f) => Formula::Not(Box::new(f.substitute_inner(map, bound))),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.substitute_inner(map, bound)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.substitute_inner(map, bound)).collect()),
            Formula::Imp(a, b) => Formula::Imp(
                Box::new(a.substitute_inner(map, bound)),
                Box::new(b.substitute_inner(map, bound)),
            ),
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(v.clone());
                let body = Box::new(f.substitute_inner(map, bound));
                bound.pop();
                if matches!(self, Formula::Exists(..)) {
                    Formula::Exists(v.clone(), body)
                } else {
                    Formula::Forall(v.clone(), body)
                }
            }
        }
    }

    /// Rebuilds the formula through the smart constructors.
    pub fn simplify(&self) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Atom { .. } => self.clone(),
            Formula::Eq(a, b) => Formula::eq(a.clone(), b.clone()),
            Formula::Not(f) => Formula::not(f.simplify()),
            Formula::And(fs) => Formula::and(fs.iter().map(Formula::simplify)),
            Formula::Or(fs) => Formula::or(fs.iter().map(Formula::simplify)),
            Formula::Imp(a, b) => Formula::imp(a.simplify(), b.simplify()),
            Formula::Exists(v, f) => match f.simplify() {
                c @ (Formula::True | Formula::False) => c,
                body => Formula::exists(v.clone(), body),
            },
            Formula::Forall(v, f) => match f.simplify() {
                c @ (Formula::True | Formula::False) => c,
                body => Formula::forall(v.clone(), body),
            },
        }
    }
}

/// `count` variable names `{prefix}{i}` that do not occur in `avoid`,
/// starting at index 1.
pub fn fresh_variables(prefix: &str, count: usize, avoid: &BTreeSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    let mut i = 1;
    while out.len() < count {
        let name = format!("{prefix}{i}");
        if !avoid.contains(&name) {
            out.push(name);
        }
        i += 1;
    }
    out
}

/// Names of the existential block in a prefix sentence: `x1..xk`.
pub fn existential_names(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("x{i}")).collect()
}

/// Names of the universal block in a prefix sentence: `y1..yp`.
pub fn universal_names(p: usize) -> Vec<String> {
    (1..=p).map(|i| format!("y{i}")).collect()
}

/// The sentence `∃x1..xn ∀y (y = x1 | ... | y = xn)`, true exactly in
/// structures with at most `n` elements.
pub fn size_bound_sentence(n: usize) -> Result<Formula> {
    if n == 0 {
        return Err(Error::Unsupported("size bound must be at least 1".into()));
    }
    let xs = existential_names(n);
    let matrix = Formula::or(xs.iter().map(|x| Formula::Eq(Term::var("y1"), Term::var(x.clone()))));
    Ok(PrefixSentence {
        existential: n,
        universal: 1,
        matrix,
    }
    .to_formula())
}

/// A sentence `∃x1..xk ∀y1..yp ψ` with quantifier-free `ψ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrefixSentence {
    pub existential: usize,
    pub universal: usize,
    pub matrix: Formula,
}

impl PrefixSentence {
    pub fn to_formula(&self) -> Formula {
        Formula::exists_many(
            existential_names(self.existential),
            Formula::forall_many(universal_names(self.universal), self.matrix.clone()),
        )
    }

    pub fn existential_vars(&self) -> Vec<String> {
        existential_names(self.existential)
    }

    pub fn universal_vars(&self) -> Vec<String> {
        universal_names(self.universal)
    }
}

/// Validates `matrix` and packages it as a prefix sentence.
pub fn assemble_prefix(k: usize, p: usize, matrix: Formula) -> Result<PrefixSentence> {
    if !matrix.is_quantifier_free() {
        return Err(Error::Unsupported("prefix matrix must be quantifier-free".into()));
    }
    let allowed: BTreeSet<String> = existential_names(k).into_iter().chain(universal_names(p)).collect();
    let stray: Vec<String> = matrix
        .free_variables()
        .into_iter()
        .filter(|v| !allowed.contains(v))
        .collect();
    if !stray.is_empty() {
        return Err(Error::NotASentence(stray));
    }
    Ok(PrefixSentence {
        existential: k,
        universal: p,
        matrix,
    })
}

/// Splits a formula of the shape `∃x1..xk ∀y1..yp ψ` (names as produced by
/// [`PrefixSentence::to_formula`]) back into its parts.
pub fn split_prefix(f: &Formula) -> Option<PrefixSentence> {
    let mut cur = f;
    let mut k = 0;
    while let Formula::Exists(v, body) = cur {
        if *v != format!("x{}", k + 1) {
            break;
        }
        k += 1;
        cur = body;
    }
    let mut p = 0;
    while let Formula::Forall(v, body) = cur {
        if *v != format!("y{}", p + 1) {
            break;
        }
        p += 1;
        cur = body;
    }
    assemble_prefix(k, p, cur.clone()).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(a: &str, b: &str) -> Formula {
        Formula::atom("E", vec![Term::var(a), Term::var(b)])
    }

    #[test]
    fn ranks() {
        assert_eq!(e("x", "y").quantifier_rank(), 0);
        let f = Formula::exists("x", Formula::forall("y", e("x", "y")));
        assert_eq!(f.quantifier_rank(), 2);
        let g = Formula::exists("x", Formula::and([e("x", "x"), Formula::forall("y", e("x", "y"))]));
        assert_eq!(g.quantifier_rank(), 2);
    }

    #[test]
    fn smart_constructors_fold() {
        assert_eq!(Formula::and([Formula::True, e("x", "y")]), e("x", "y"));
        assert_eq!(Formula::or([Formula::True, e("x", "y")]), Formula::True);
        assert_eq!(Formula::not(Formula::not(e("x", "y"))), e("x", "y"));
        assert_eq!(Formula::or([e("x", "y"), e("x", "y")]), e("x", "y"));
        assert_eq!(Formula::eq(Term::var("x"), Term::var("x")), Formula::True);
    }

    #[test]
    fn free_variables_respect_binding() {
        let f = Formula::exists("x", Formula::and([e("x", "y"), e("z", "x")]));
        let fv: Vec<String> = f.free_variables().into_iter().collect();
        assert_eq!(fv, vec!["y".to_string(), "z".to_string()]);
    }

    #[test]
    fn prefix_assembly() {
        let m = e("x1", "y1");
        let ps = assemble_prefix(1, 1, m.clone()).unwrap();
        assert_eq!(ps.to_formula(), Formula::exists("x1", Formula::forall("y1", m.clone())));
        assert_eq!(split_prefix(&ps.to_formula()), Some(ps));
        assert!(assemble_prefix(0, 0, m.clone()).is_err());
        let trivial = assemble_prefix(0, 0, Formula::True).unwrap();
        assert_eq!(trivial.to_formula(), Formula::True);
    }

    #[test]
    fn fresh_names_skip_used() {
        let avoid: BTreeSet<String> = ["_1".to_string()].into_iter().collect();
        assert_eq!(fresh_variables("_", 2, &avoid), vec!["_2", "_3"]);
    }
}
