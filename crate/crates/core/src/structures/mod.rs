//! Finite relational structures.
//!
//! A [`Structure`] interprets a [`Vocabulary`] of predicate and constant
//! symbols over the dense universe `0..size`. Structures are immutable once
//! built; every operation in this module returns a fresh value, together with
//! a renumbering witness whenever elements are re-indexed.

mod embed;
mod ops;
mod text;

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

pub use embed::{check_embedding, find_embedding, is_isomorphic};
pub use ops::{
    all_structures, bowtie, cartesian_product, complement, disjoint_union, tensor_product, tree_of_structures,
    word_of_structures, ORDER_PREDICATE,
};
pub use text::{format_structure, format_structures, parse_structures};

/// Elements of a structure are dense indices `0..size`.
pub type Element = usize;

/// Largest `size^arity` for which a relation keeps a dense membership table.
const DENSE_LIMIT: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Predicate {
    pub name: String,
    pub arity: usize,
}

/// A finite relational signature: predicate symbols with positive arities and
/// constant symbols. Names are unique across both kinds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Vocabulary {
    predicates: Vec<Predicate>,
    constants: Vec<String>,
}

impl Vocabulary {
    pub fn new<P, C, S, T>(predicates: P, constants: C) -> Result<Self>
    where
        P: IntoIterator<Item = (S, usize)>,
        C: IntoIterator<Item = T>,
        S: Into<String>,
        T: Into<String>,
    {
        let mut vocab = Vocabulary::default();
        for (name, arity) in predicates {
            vocab = vocab.with_predicate(name, arity)?;
        }
        for name in constants {
            vocab = vocab.with_constant(name)?;
        }
        Ok(vocab)
    }

    /// Vocabulary with a single predicate and no constants.
    pub fn single(name: &str, arity: usize) -> Self {
        Vocabulary::new([(name, arity)], Vec::<String>::new()).expect("valid single predicate")
    }

    /// One binary predicate `E`, the vocabulary of (directed) graphs.
    pub fn graph() -> Self {
        Vocabulary::single("E", 2)
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.predicates
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn has_constants(&self) -> bool {
        !self.constants.is_empty()
    }

    pub fn predicate_index(&self, name: &str) -> Option<usize> {
        self.predicates.iter().position(|p| p.name == name)
    }

    pub fn constant_index(&self, name: &str) -> Option<usize> {
        self.constants.iter().position(|c| c == name)
    }

    pub fn contains_name(&self, name: &str) -> bool {
        self.predicate_index(name).is_some() || self.constant_index(name).is_some()
    }

    /// Returns a copy of this vocabulary extended by one predicate.
    pub fn with_predicate(&self, name: impl Into<String>, arity: usize) -> Result<Self> {
        let name = name.into();
        if arity == 0 {
            return Err(Error::InvalidVocabulary(format!(
                "predicate `{name}` must have positive arity"
            )));
        }
        if !is_identifier(&name) {
            return Err(Error::InvalidVocabulary(format!("`{name}` is not an identifier")));
        }
        if self.contains_name(&name) {
            return Err(Error::InvalidVocabulary(format!("duplicate symbol `{name}`")));
        }
        let mut out = self.clone();
        out.predicates.push(Predicate { name, arity });
        Ok(out)
    }

    /// Returns a copy of this vocabulary extended by one constant.
    pub fn with_constant(&self, name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if !is_identifier(&name) {
            return Err(Error::InvalidVocabulary(format!("`{name}` is not an identifier")));
        }
        if self.contains_name(&name) {
            return Err(Error::InvalidVocabulary(format!("duplicate symbol `{name}`")));
        }
        let mut out = self.clone();
        out.constants.push(name);
        Ok(out)
    }

    /// The same predicates with every constant dropped.
    pub fn without_constants(&self) -> Self {
        Vocabulary {
            predicates: self.predicates.clone(),
            constants: Vec::new(),
        }
    }

    /// A name not yet used by this vocabulary, derived from `base`.
    pub fn fresh_name(&self, base: &str) -> String {
        if !self.contains_name(base) {
            return base.to_string();
        }
        (1..)
            .map(|i| format!("{base}{i}"))
            .find(|n| !self.contains_name(n))
            .expect("unbounded search")
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// The interpretation of one predicate.
#[derive(Debug, Clone)]
pub(crate) struct Relation {
    arity: usize,
    tuples: BTreeSet<Vec<Element>>,
    dense: Option<Vec<u64>>,
}

impl Relation {
    fn new(arity: usize, size: usize, tuples: BTreeSet<Vec<Element>>) -> Self {
        let cells = size.checked_pow(arity as u32).filter(|&c| c <= DENSE_LIMIT);
        let dense = cells.map(|cells| {
            let mut bits = vec![0u64; cells.div_ceil(64).max(1)];
            for t in &tuples {
                let idx = dense_index(t, size);
                bits[idx / 64] |= 1 << (idx % 64);
            }
            bits
        });
        Relation { arity, tuples, dense }
    }

    #[inline]
    fn contains(&self, tuple: &[Element], size: usize) -> bool {
        match &self.dense {
            Some(bits) => {
                let idx = dense_index(tuple, size);
                bits[idx / 64] >> (idx % 64) & 1 == 1
            }
            None => self.tuples.contains(tuple),
        }
    }
}

/// Steps `tuple` to the next tuple over `0..base` in lexicographic order.
/// Returns `false` after wrapping around to all zeros.
pub(crate) fn advance(tuple: &mut [usize], base: usize) -> bool {
    for slot in tuple.iter_mut().rev() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

#[inline]
fn dense_index(tuple: &[Element], size: usize) -> usize {
    tuple.iter().fold(0, |acc, &e| acc * size + e)
}

impl PartialEq for Relation {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.tuples == other.tuples
    }
}

impl Eq for Relation {}

impl Hash for Relation {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.arity.hash(state);
        self.tuples.hash(state);
    }
}

/// A finite structure over a [`Vocabulary`], with universe `0..size`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Structure {
    vocab: Vocabulary,
    size: usize,
    relations: Vec<Relation>,
    constants: Vec<Element>,
}

impl Structure {
    /// Builds a structure from per-predicate tuple lists (in vocabulary order)
    /// and per-constant interpretations.
    pub fn new(
        vocab: Vocabulary,
        size: usize,
        relations: Vec<Vec<Vec<Element>>>,
        constants: Vec<Element>,
    ) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidStructure("empty universe".into()));
        }
        if relations.len() != vocab.predicates.len() {
            return Err(Error::InvalidStructure(format!(
                "expected {} relations, got {}",
                vocab.predicates.len(),
                relations.len()
            )));
        }
        if constants.len() != vocab.constants.len() {
            return Err(Error::InvalidStructure(format!(
                "expected {} constant interpretations, got {}",
                vocab.constants.len(),
                constants.len()
            )));
        }
        if let Some(&c) = constants.iter().find(|&&c| c >= size) {
            return Err(Error::InvalidElement(c));
        }
        let mut rels = Vec::with_capacity(relations.len());
        for (pred, tuples) in vocab.predicates.iter().zip(relations) {
            let mut set = BTreeSet::new();
            for t in tuples {
                if t.len() != pred.arity {
                    return Err(Error::ArityMismatch {
                        name: pred.name.clone(),
                        expected: pred.arity,
                        found: t.len(),
                    });
                }
                if let Some(&e) = t.iter().find(|&&e| e >= size) {
                    return Err(Error::InvalidElement(e));
                }
                set.insert(t);
            }
            rels.push(Relation::new(pred.arity, size, set));
        }
        Ok(Structure {
            vocab,
            size,
            relations: rels,
            constants,
        })
    }

    pub fn builder(vocab: Vocabulary, size: usize) -> StructureBuilder {
        let n = vocab.predicates.len();
        let c = vocab.constants.len();
        StructureBuilder {
            vocab,
            size,
            relations: vec![Vec::new(); n],
            constants: vec![None; c],
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn elements(&self) -> std::ops::Range<Element> {
        0..self.size
    }

    /// Membership test by predicate index. Out-of-range components yield `false`.
    #[inline]
    pub fn holds(&self, pred: usize, tuple: &[Element]) -> bool {
        if tuple.iter().any(|&e| e >= self.size) {
            return false;
        }
        self.relations[pred].contains(tuple, self.size)
    }

    pub fn holds_named(&self, pred: &str, tuple: &[Element]) -> Result<bool> {
        let idx = self
            .vocab
            .predicate_index(pred)
            .ok_or_else(|| Error::UnknownPredicate(pred.to_string()))?;
        let arity = self.vocab.predicates[idx].arity;
        if arity != tuple.len() {
            return Err(Error::ArityMismatch {
                name: pred.to_string(),
                expected: arity,
                found: tuple.len(),
            });
        }
        Ok(self.holds(idx, tuple))
    }

    pub fn tuples(&self, pred: usize) -> impl Iterator<Item = &[Element]> + '_ {
        self.relations[pred].tuples.iter().map(Vec::as_slice)
    }

    pub fn tuple_count(&self, pred: usize) -> usize {
        self.relations[pred].tuples.len()
    }

    pub fn constant_values(&self) -> &[Element] {
        &self.constants
    }

    pub fn constant(&self, name: &str) -> Option<Element> {
        self.vocab.constant_index(name).map(|i| self.constants[i])
    }

    pub(crate) fn relation_tuples(&self) -> Vec<Vec<Vec<Element>>> {
        self.relations
            .iter()
            .map(|r| r.tuples.iter().cloned().collect())
            .collect()
    }

    pub(crate) fn require_no_constants(&self, op: &'static str) -> Result<()> {
        if self.vocab.has_constants() {
            Err(Error::ConstantsPresent(op))
        } else {
            Ok(())
        }
    }

    /// The substructure induced by `subset`, elements renumbered in
    /// increasing order.
    pub fn induced_substructure(&self, subset: &BTreeSet<Element>) -> Result<Restriction> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        if let Some(&e) = subset.iter().find(|&&e| e >= self.size) {
            return Err(Error::InvalidElement(e));
        }
        for (name, &c) in self.vocab.constants.iter().zip(&self.constants) {
            if !subset.contains(&c) {
                return Err(Error::MissingConstant(name.clone()));
            }
        }
        let origin: Vec<Element> = subset.iter().copied().collect();
        let mut renumber = vec![usize::MAX; self.size];
        for (new, &old) in origin.iter().enumerate() {
            renumber[old] = new;
        }
        let relations = self
            .relations
            .iter()
            .map(|r| {
                r.tuples
                    .iter()
                    .filter(|t| t.iter().all(|&e| renumber[e] != usize::MAX))
                    .map(|t| t.iter().map(|&e| renumber[e]).collect())
                    .collect()
            })
            .collect();
        let constants = self.constants.iter().map(|&c| renumber[c]).collect();
        let structure = Structure::new(self.vocab.clone(), origin.len(), relations, constants)?;
        Ok(Restriction { structure, origin })
    }

    /// Convenience wrapper over [`Structure::induced_substructure`].
    pub fn restrict<I: IntoIterator<Item = Element>>(&self, subset: I) -> Result<Restriction> {
        self.induced_substructure(&subset.into_iter().collect())
    }

    /// Renames elements by a permutation: element `e` becomes `perm[e]`.
    pub fn permute(&self, perm: &[Element]) -> Result<Structure> {
        if perm.len() != self.size {
            return Err(Error::InvalidStructure("permutation length mismatch".into()));
        }
        let relations = self
            .relations
            .iter()
            .map(|r| r.tuples.iter().map(|t| t.iter().map(|&e| perm[e]).collect()).collect())
            .collect();
        let constants = self.constants.iter().map(|&c| perm[c]).collect();
        Structure::new(self.vocab.clone(), self.size, relations, constants)
    }

    /// Expands the vocabulary by a fresh predicate interpreted as `tuples`.
    pub fn expand_predicate(&self, name: &str, arity: usize, tuples: Vec<Vec<Element>>) -> Result<Structure> {
        let vocab = self.vocab.with_predicate(name, arity)?;
        let mut relations = self.relation_tuples();
        relations.push(tuples);
        Structure::new(vocab, self.size, relations, self.constants.clone())
    }

    /// Expands the vocabulary by fresh constants interpreted as `values`.
    pub fn expand_constants(&self, names: &[String], values: &[Element]) -> Result<Structure> {
        let mut vocab = self.vocab.clone();
        for n in names {
            vocab = vocab.with_constant(n.clone())?;
        }
        let mut constants = self.constants.clone();
        constants.extend_from_slice(values);
        Structure::new(vocab, self.size, self.relation_tuples(), constants)
    }

    /// The reduct to the vocabulary without constants.
    pub fn forget_constants(&self) -> Structure {
        Structure::new(
            self.vocab.without_constants(),
            self.size,
            self.relation_tuples(),
            Vec::new(),
        )
        .expect("reduct of a valid structure")
    }

    /// Reduct to the predicates named in `keep` (in this vocabulary's order).
    pub fn reduct(&self, keep: &[&str]) -> Result<Structure> {
        for name in keep {
            if self.vocab.predicate_index(name).is_none() {
                return Err(Error::UnknownPredicate(name.to_string()));
            }
        }
        let mut preds = Vec::new();
        let mut rels = Vec::new();
        for (p, r) in self.vocab.predicates.iter().zip(self.relation_tuples()) {
            if keep.contains(&p.name.as_str()) {
                preds.push((p.name.clone(), p.arity));
                rels.push(r);
            }
        }
        let vocab = Vocabulary::new(preds, self.vocab.constants.clone())?;
        Structure::new(vocab, self.size, rels, self.constants.clone())
    }
}

impl fmt::Debug for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Structure(size={}", self.size)?;
        for (p, r) in self.vocab.predicates.iter().zip(&self.relations) {
            write!(f, ", {}={:?}", p.name, r.tuples)?;
        }
        for (c, v) in self.vocab.constants.iter().zip(&self.constants) {
            write!(f, ", {c}={v}")?;
        }
        write!(f, ")")
    }
}

/// Incremental construction of a [`Structure`] by symbol names.
#[derive(Debug, Clone)]
pub struct StructureBuilder {
    vocab: Vocabulary,
    size: usize,
    relations: Vec<Vec<Vec<Element>>>,
    constants: Vec<Option<Element>>,
}

impl StructureBuilder {
    pub fn tuple(mut self, pred: &str, tuple: impl Into<Vec<Element>>) -> Result<Self> {
        let idx = self
            .vocab
            .predicate_index(pred)
            .ok_or_else(|| Error::UnknownPredicate(pred.to_string()))?;
        self.relations[idx].push(tuple.into());
        Ok(self)
    }

    pub fn tuples<I, T>(mut self, pred: &str, tuples: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<Vec<Element>>,
    {
        for t in tuples {
            self = self.tuple(pred, t)?;
        }
        Ok(self)
    }

    pub fn constant(mut self, name: &str, value: Element) -> Result<Self> {
        let idx = self
            .vocab
            .constant_index(name)
            .ok_or_else(|| Error::UnknownConstant(name.to_string()))?;
        self.constants[idx] = Some(value);
        Ok(self)
    }

    pub fn build(self) -> Result<Structure> {
        let mut constants = Vec::with_capacity(self.constants.len());
        for (name, c) in self.vocab.constants.iter().zip(&self.constants) {
            constants.push(c.ok_or_else(|| Error::InvalidStructure(format!("constant `{name}` is not interpreted")))?);
        }
        Structure::new(self.vocab, self.size, self.relations, constants)
    }
}

/// An induced substructure together with its renumbering witness:
/// `origin[new] = old`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restriction {
    pub structure: Structure,
    pub origin: Vec<Element>,
}

impl Restriction {
    /// The new index of an original element, if it was kept.
    pub fn image_of(&self, original: Element) -> Option<Element> {
        self.origin.binary_search(&original).ok()
    }

    /// Composes two renumberings: `self` restricts an intermediate structure
    /// that was itself obtained from the original through `outer`.
    pub fn compose_origin(&self, outer: &[Element]) -> Vec<Element> {
        self.origin.iter().map(|&e| outer[e]).collect()
    }
}
