//! Preservation under substructures modulo cores, checked on finite samples,
//! and the effective translations to prefix sentences.
//!
//! A *core* of a model `A` of a class `C` is a set of at most `k` elements
//! such that every substructure of `A` in the ambient class `S` that keeps
//! the core is again in `C`. All checks here range over explicit finite
//! samples; nothing is claimed beyond them.

use std::collections::BTreeSet;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::folog::{
    assemble_prefix, existential_names, holds, relativize, size_bound_sentence, universal_names, CompiledFormula,
    Formula, PrefixSentence, Term,
};
use crate::shrink::SigmaTree;
use crate::structures::{is_isomorphic, Element, Structure, Vocabulary};
use crate::wqo::{graph_components, recognize_hn_gn, ComponentKind, OrderTypeTuple};

/// Largest structure whose subsets are enumerated exhaustively.
pub const SUBSET_LIMIT: usize = 12;
/// Largest number of minimal models turned into a sentence.
pub const MINIMAL_MODEL_LIMIT: usize = 256;

/// Decides membership in a class of structures.
pub type Membership = Arc<dyn Fn(&Structure) -> bool + Send + Sync>;

/// Bundled membership tests.
pub mod classes {
    use super::*;

    pub fn all_structures() -> Membership {
        Arc::new(|_| true)
    }

    fn single_component(s: &Structure, kind: ComponentKind) -> bool {
        graph_components(s).is_ok_and(|c| c.len() == 1 && c[0].kind == kind)
    }

    pub fn cycles() -> Membership {
        Arc::new(|s| single_component(s, ComponentKind::Cycle))
    }

    pub fn paths() -> Membership {
        Arc::new(|s| single_component(s, ComponentKind::Path))
    }

    pub fn linear_orders() -> Membership {
        Arc::new(|s| OrderTypeTuple::of(s, &[]).is_ok())
    }

    pub fn words() -> Membership {
        Arc::new(|s| SigmaTree::from_structure(s).is_ok_and(|t| t.is_word()))
    }

    pub fn trees() -> Membership {
        Arc::new(|s| SigmaTree::from_structure(s).is_ok())
    }

    pub fn hn_gn() -> Membership {
        Arc::new(|s| recognize_hn_gn(s).is_ok())
    }

    /// Models of a sentence.
    pub fn models(phi: &Formula, vocab: &Vocabulary) -> Result<Membership> {
        let c = CompiledFormula::sentence(phi, vocab)?;
        Ok(Arc::new(move |s| c.eval(s, &[]).unwrap_or(false)))
    }
}

/// A finite surrogate for a class of structures.
#[derive(Clone)]
pub struct ClassSample {
    pub structures: Vec<Structure>,
    /// Set when every induced substructure of a listed structure that
    /// belongs to the class is listed, up to isomorphism.
    pub closed: bool,
    pub membership: Option<Membership>,
}

impl std::fmt::Debug for ClassSample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClassSample")
            .field("structures", &self.structures.len())
            .field("closed", &self.closed)
            .field("membership", &self.membership.is_some())
            .finish()
    }
}

impl ClassSample {
    pub fn new(structures: Vec<Structure>) -> Result<Self> {
        if let Some(first) = structures.first() {
            if structures.iter().any(|s| s.vocab() != first.vocab()) {
                return Err(Error::VocabularyMismatch);
            }
        }
        Ok(ClassSample {
            structures,
            closed: false,
            membership: None,
        })
    }

    pub fn with_membership(mut self, membership: Membership) -> Self {
        self.membership = Some(membership);
        self
    }

    pub fn contains_class(&self, s: &Structure) -> bool {
        self.membership.as_ref().is_none_or(|m| m(s))
    }

    /// Checks the closure property and sets the flag when it holds.
    pub fn mark_closed(mut self) -> Result<Self> {
        for s in &self.structures {
            guard_size(s)?;
            for mask in 1..(1u32 << s.size()) {
                let sub = s.restrict(bits(mask))?.structure;
                if !self.contains_class(&sub) {
                    continue;
                }
                let mut listed = false;
                for t in &self.structures {
                    if is_isomorphic(&sub, t)? {
                        listed = true;
                        break;
                    }
                }
                if !listed {
                    return Err(Error::InvalidStructure(
                        "sample is not closed under induced substructures".into(),
                    ));
                }
            }
        }
        self.closed = true;
        Ok(self)
    }
}

fn guard_size(s: &Structure) -> Result<()> {
    if s.size() > SUBSET_LIMIT {
        return Err(Error::GuardExceeded {
            what: "structure size for subset enumeration".into(),
            limit: SUBSET_LIMIT,
        });
    }
    Ok(())
}

fn bits(mask: u32) -> impl Iterator<Item = Element> {
    (0..32).filter(move |i| mask & (1 << i) != 0)
}

// ---------------------------------------------------------------------------
// Cores

/// Every set of at most `k` elements of `a` that is a core: each nonempty
/// induced substructure containing it that lies in the sample's class
/// satisfies `target`. Sets are listed by size, then lexicographically.
pub fn find_cores(
    a: &Structure,
    target: &(dyn Fn(&Structure) -> Result<bool> + Sync),
    k: usize,
    sample: &ClassSample,
) -> Result<Vec<BTreeSet<Element>>> {
    guard_size(a)?;
    let n = a.size();
    let bad: Vec<u32> = (1..(1u32 << n))
        .into_par_iter()
        .map(|mask| -> Result<Option<u32>> {
            let sub = a.restrict(bits(mask))?.structure;
            Ok((sample.contains_class(&sub) && !target(&sub)?).then_some(mask))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let cores: Vec<u32> = (0..(1u32 << n))
        .filter(|c| c.count_ones() as usize <= k)
        .filter(|&c| bad.iter().all(|&b| b & c != c))
        .collect();
    let mut out: Vec<BTreeSet<Element>> = cores.into_iter().map(|c| bits(c).collect()).collect();
    out.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreCertificate {
    /// Index of the structure in the sample.
    pub index: usize,
    pub core: BTreeSet<Element>,
    /// Substructures containing the core that were checked.
    pub checked: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PscReport {
    pub holds: bool,
    pub certificates: Vec<CoreCertificate>,
    /// Sample indices of models without a core.
    pub failures: Vec<usize>,
    pub models: usize,
}

/// Checks on the sample that every model of `phi` has a core of size at
/// most `k`, taking the smallest core found for each model.
pub fn psc_check(phi: &Formula, k: usize, sample: &ClassSample) -> Result<PscReport> {
    let vocab = match sample.structures.first() {
        Some(s) => s.vocab().clone(),
        None => {
            return Ok(PscReport {
                holds: true,
                certificates: Vec::new(),
                failures: Vec::new(),
                models: 0,
            })
        }
    };
    let c = CompiledFormula::sentence(phi, &vocab)?;
    let target = |s: &Structure| c.eval(s, &[]);
    let results: Vec<Result<Option<std::result::Result<CoreCertificate, usize>>>> = sample
        .structures
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            if !target(s)? {
                return Ok(None);
            }
            let cores = find_cores(s, &target, k, sample)?;
            Ok(Some(match cores.into_iter().next() {
                Some(core) => {
                    let free = s.size() - core.len();
                    Ok(CoreCertificate {
                        index: i,
                        core,
                        checked: (1usize << free) - usize::from(free == s.size()),
                    })
                }
                None => Err(i),
            }))
        })
        .collect();
    let mut certificates = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r? {
            Some(Ok(c)) => certificates.push(c),
            Some(Err(i)) => failures.push(i),
            None => {}
        }
    }
    Ok(PscReport {
        holds: failures.is_empty(),
        models: certificates.len() + failures.len(),
        certificates,
        failures,
    })
}

// ---------------------------------------------------------------------------
// Translation

/// Above this many top-level assignments the size-bound part of the matrix
/// is simplified instead of expanded literally.
const LITERAL_EXPANSION_LIMIT: f64 = 2.0e5;

/// The matrix `(ξ_{k+p} -> φ)` relativized to `x1..xk y1..yp`.
///
/// Without constants the relativized size bound is valid (the substructure
/// induced by `k + p` elements has at most `k + p` elements), so when the
/// literal expansion would be too large it is replaced by `true`.
fn relativized_matrix(phi: &Formula, k: usize, p: usize, vocab: &Vocabulary) -> Result<(Formula, bool)> {
    let vars: Vec<String> = existential_names(k).into_iter().chain(universal_names(p)).collect();
    let n = k + p;
    let range = n + vocab.constants().len();
    let literal_cost = (range as f64).powi(n as i32);
    if literal_cost <= LITERAL_EXPANSION_LIMIT {
        let psi = Formula::imp(size_bound_sentence(n)?, phi.clone());
        return Ok((relativize(&psi, &vars, vocab)?, false));
    }
    if vocab.has_constants() {
        return Err(Error::GuardExceeded {
            what: "relativized size bound with constants".into(),
            limit: LITERAL_EXPANSION_LIMIT as usize,
        });
    }
    Ok((relativize(phi, &vars, vocab)?, true))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Translation {
    pub sentence: PrefixSentence,
    pub p: usize,
    /// The size-bound antecedent was replaced by `true`.
    pub simplified: bool,
}

/// The sentence `∃x1..xk ∀y1..yp (ξ_{k+p} -> φ)|_{x̄ȳ}`.
pub fn translate_to_exists_forall(phi: &Formula, k: usize, p: usize, vocab: &Vocabulary) -> Result<Translation> {
    if p == 0 {
        return Err(Error::Unsupported("the universal block needs p >= 1".into()));
    }
    phi.check_vocabulary(vocab)?;
    let (matrix, simplified) = relativized_matrix(phi, k, p, vocab)?;
    Ok(Translation {
        sentence: assemble_prefix(k, p, matrix)?,
        p,
        simplified,
    })
}

/// Indices of sample structures on which the two sentences disagree.
pub fn sample_disagreements(a: &Formula, b: &Formula, sample: &[Structure]) -> Result<Vec<usize>> {
    let Some(first) = sample.first() else {
        return Ok(Vec::new());
    };
    let ca = CompiledFormula::sentence(a, first.vocab())?;
    let cb = CompiledFormula::sentence(b, first.vocab())?;
    let flags: Vec<Result<bool>> = sample
        .par_iter()
        .map(|s| Ok(ca.eval(s, &[])? != cb.eval(s, &[])?))
        .collect();
    let mut out = Vec::new();
    for (i, f) in flags.into_iter().enumerate() {
        if f? {
            out.push(i);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutoTranslation {
    /// The first translation agreeing with `phi` on the sample, if any.
    pub translation: Option<Translation>,
    /// Every `p` tried with its number of disagreements.
    pub tried: Vec<(usize, usize)>,
}

/// Tries `p = 1, 2, 4, ...` up to `p_cap` until the translation agrees with
/// `phi` on every sample structure.
pub fn translate_auto(phi: &Formula, k: usize, sample: &[Structure], p_cap: usize) -> Result<AutoTranslation> {
    let vocab = sample
        .first()
        .map(|s| s.vocab().clone())
        .ok_or_else(|| Error::InvalidStructure("empty sample".into()))?;
    let mut tried = Vec::new();
    let mut p = 1;
    while p <= p_cap {
        let t = translate_to_exists_forall(phi, k, p, &vocab)?;
        let bad = sample_disagreements(phi, &t.sentence.to_formula(), sample)?;
        tried.push((p, bad.len()));
        if bad.is_empty() {
            return Ok(AutoTranslation {
                translation: Some(t),
                tried,
            });
        }
        p *= 2;
    }
    Ok(AutoTranslation {
        translation: None,
        tried,
    })
}

/// The formula `∀y1..yp (ξ_{k+p} -> φ)|_{x̄ȳ}` with free variables
/// `x1..xk`, which on suitable classes holds of a tuple exactly when its
/// underlying set is a core.
pub fn core_formula(phi: &Formula, k: usize, p: usize, vocab: &Vocabulary) -> Result<(Formula, Vec<String>)> {
    let t = translate_to_exists_forall(phi, k, p, vocab)?;
    let xs = t.sentence.existential_vars();
    Ok((Formula::forall_many(t.sentence.universal_vars(), t.sentence.matrix), xs))
}

/// Underlying sets of the `k`-tuples of `a` satisfying `f(x1..xk)`.
pub fn sets_defined_by(a: &Structure, f: &Formula, xs: &[String]) -> Result<BTreeSet<BTreeSet<Element>>> {
    let c = CompiledFormula::new(f, a.vocab(), xs)?;
    let mut out = BTreeSet::new();
    let mut tuple = vec![0; xs.len()];
    if a.size() == 0 {
        return Ok(out);
    }
    loop {
        if c.eval(a, &tuple)? {
            out.insert(tuple.iter().copied().collect());
        }
        if !crate::structures::advance(&mut tuple, a.size()) {
            break;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Minimal models

/// `∃x1..xn` of all atomic and negated atomic facts of `a`, with the
/// variables pairwise distinct. A structure satisfies it iff `a` embeds.
pub fn atomic_diagram_sentence(a: &Structure) -> Result<Formula> {
    let n = a.size();
    let xs: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let var = |e: Element| Term::var(xs[e].clone());
    let mut facts = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            facts.push(Formula::not(Formula::eq(var(i), var(j))));
        }
    }
    for (pi, p) in a.vocab().predicates().iter().enumerate() {
        let mut tuple = vec![0; p.arity];
        loop {
            let atom = Formula::atom(p.name.clone(), tuple.iter().map(|&e| var(e)).collect());
            facts.push(if a.holds(pi, &tuple) { atom } else { Formula::not(atom) });
            if !crate::structures::advance(&mut tuple, n) {
                break;
            }
        }
    }
    for (c, &v) in a.vocab().constants().iter().zip(a.constant_values()) {
        facts.push(Formula::eq(Term::constant(c.clone()), var(v)));
    }
    Ok(Formula::exists_many(xs.clone(), Formula::and(facts)))
}

#[derive(Debug, Clone)]
pub struct MinimalModels {
    /// Minimal non-members of the class, one per isomorphism type.
    pub minimal: Vec<Structure>,
    /// `¬(diag(M1) ∨ ... ∨ diag(Mr))`, a universal sentence.
    pub sentence: Formula,
    /// Sample indices on which the sentence and the class disagree.
    pub disagreements: Vec<usize>,
}

/// Builds a universal sentence for the class decided by `member` from the
/// embedding-minimal non-members in a sample closed under substructures.
pub fn forall_star_from_minimal_models(
    member: &(dyn Fn(&Structure) -> bool + Sync),
    sample: &ClassSample,
) -> Result<MinimalModels> {
    let mut minimal: Vec<Structure> = Vec::new();
    for s in &sample.structures {
        if member(s) {
            continue;
        }
        guard_size(s)?;
        let full = (1u32 << s.size()) - 1;
        let mut is_minimal = true;
        for mask in 1..full {
            if !member(&s.restrict(bits(mask))?.structure) {
                is_minimal = false;
                break;
            }
        }
        if !is_minimal {
            continue;
        }
        let mut seen = false;
        for t in &minimal {
            if is_isomorphic(s, t)? {
                seen = true;
                break;
            }
        }
        if !seen {
            minimal.push(s.clone());
            if minimal.len() > MINIMAL_MODEL_LIMIT {
                return Err(Error::GuardExceeded {
                    what: "minimal models".into(),
                    limit: MINIMAL_MODEL_LIMIT,
                });
            }
        }
    }
    let sentence = if minimal.is_empty() {
        Formula::True
    } else {
        Formula::not(Formula::or(
            minimal
                .iter()
                .map(atomic_diagram_sentence)
                .collect::<Result<Vec<_>>>()?,
        ))
    };
    let mut disagreements = Vec::new();
    for (i, s) in sample.structures.iter().enumerate() {
        if holds(s, &sentence)? != member(s) {
            disagreements.push(i);
        }
    }
    Ok(MinimalModels {
        minimal,
        sentence,
        disagreements,
    })
}
