//! Labeled trees and words over a finite alphabet, and algorithms that shrink
//! them to small m-equivalent subtrees containing a marked node set.
//!
//! A [`SigmaTree`] is stored by parent pointers. As a structure it is the
//! reflexive ancestor order `le` together with one unary predicate `Q<letter>`
//! per alphabet letter. Subtrees are induced sub-posets with a unique minimal
//! element; every reducer returns a [`Shrunk`] value recording which input
//! node each output node came from.

mod reduce;
mod text;

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::structures::{Structure, Vocabulary, ORDER_PREDICATE};

pub use reduce::{
    reduce_degree, reduce_height_no_w, reduce_root_distance, reduce_w_distances, shrink_tree, shrink_word,
    shrink_word_marked, PhaseLog, ShrinkReport, Verdicts,
};
pub use text::{format_trees, parse_trees, NamedTree};

/// Name of the unary predicate used for marked nodes.
pub const MARK_PREDICATE: &str = "R";

pub type Node = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SigmaTree {
    alphabet: Vec<String>,
    parent: Vec<Option<Node>>,
    label: Vec<usize>,
}

/// Output of a reducer: the new tree and `origin[new] = old`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shrunk {
    pub tree: SigmaTree,
    pub origin: Vec<Node>,
}

impl Shrunk {
    pub fn identity(tree: &SigmaTree) -> Self {
        Shrunk {
            tree: tree.clone(),
            origin: (0..tree.len()).collect(),
        }
    }

    /// Chains a further reduction of `self.tree`.
    pub fn then(self, next: Shrunk) -> Shrunk {
        Shrunk {
            origin: next.origin.iter().map(|&i| self.origin[i]).collect(),
            tree: next.tree,
        }
    }

    /// New index of an original node, if kept.
    pub fn image_of(&self, original: Node) -> Option<Node> {
        self.origin.iter().position(|&o| o == original)
    }

    /// Images of a set of original nodes; fails if one was dropped.
    pub fn map_marks(&self, marks: &BTreeSet<Node>) -> Result<BTreeSet<Node>> {
        marks
            .iter()
            .map(|&w| {
                self.image_of(w)
                    .ok_or_else(|| Error::VerificationFailed(format!("marked node {w} was removed")))
            })
            .collect()
    }
}

impl SigmaTree {
    /// Builds a tree; `parent` must describe a single rooted tree and labels
    /// index into `alphabet`.
    pub fn new(alphabet: Vec<String>, parent: Vec<Option<Node>>, label: Vec<usize>) -> Result<Self> {
        if parent.is_empty() {
            return Err(Error::InvalidStructure("tree has no nodes".into()));
        }
        if parent.len() != label.len() {
            return Err(Error::InvalidStructure("parent and label lengths differ".into()));
        }
        if alphabet.is_empty() {
            return Err(Error::InvalidVocabulary("empty alphabet".into()));
        }
        let mut seen = BTreeSet::new();
        for a in &alphabet {
            if !crate::structures::is_identifier(&format!("Q{a}")) || !seen.insert(a) {
                return Err(Error::InvalidVocabulary(format!("bad or duplicate letter `{a}`")));
            }
        }
        if let Some(&l) = label.iter().find(|&&l| l >= alphabet.len()) {
            return Err(Error::InvalidStructure(format!("label index {l} out of range")));
        }
        let roots = parent.iter().filter(|p| p.is_none()).count();
        if roots != 1 {
            return Err(Error::InvalidStructure(format!(
                "tree must have exactly one root, found {roots}"
            )));
        }
        for start in 0..parent.len() {
            let mut cur = start;
            let mut steps = 0;
            while let Some(p) = parent[cur] {
                if p >= parent.len() {
                    return Err(Error::InvalidElement(p));
                }
                steps += 1;
                if steps > parent.len() {
                    return Err(Error::InvalidStructure("parent map has a cycle".into()));
                }
                cur = p;
            }
        }
        Ok(SigmaTree {
            alphabet,
            parent,
            label,
        })
    }

    /// A word: node `i` is position `i`, node 0 is the root.
    pub fn word(alphabet: Vec<String>, labels: Vec<usize>) -> Result<Self> {
        let parent = (0..labels.len()).map(|i| i.checked_sub(1)).collect();
        SigmaTree::new(alphabet, parent, labels)
    }

    /// A word from a string of single-character letters.
    pub fn word_from_str(alphabet: &[&str], text: &str) -> Result<Self> {
        let alpha: Vec<String> = alphabet.iter().map(|s| s.to_string()).collect();
        let labels = text
            .chars()
            .map(|c| {
                alpha
                    .iter()
                    .position(|a| a.len() == c.len_utf8() && a.starts_with(c))
                    .ok_or_else(|| Error::InvalidStructure(format!("letter `{c}` not in alphabet")))
            })
            .collect::<Result<Vec<_>>>()?;
        SigmaTree::word(alpha, labels)
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, n: Node) -> Option<Node> {
        self.parent[n]
    }

    pub fn parents(&self) -> &[Option<Node>] {
        &self.parent
    }

    pub fn label(&self, n: Node) -> usize {
        self.label[n]
    }

    pub fn labels(&self) -> &[usize] {
        &self.label
    }

    pub fn letter(&self, n: Node) -> &str {
        &self.alphabet[self.label[n]]
    }

    pub fn root(&self) -> Node {
        self.parent
            .iter()
            .position(Option::is_none)
            .expect("validated tree has a root")
    }

    pub fn children(&self, n: Node) -> Vec<Node> {
        (0..self.len()).filter(|&c| self.parent[c] == Some(n)).collect()
    }

    pub fn children_lists(&self) -> Vec<Vec<Node>> {
        let mut out = vec![Vec::new(); self.len()];
        for (c, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                out[*p].push(c);
            }
        }
        out
    }

    pub fn depth(&self, n: Node) -> usize {
        let mut d = 0;
        let mut cur = n;
        while let Some(p) = self.parent[cur] {
            d += 1;
            cur = p;
        }
        d
    }

    /// Number of nodes on the longest root-to-leaf chain.
    pub fn height(&self) -> usize {
        (0..self.len()).map(|n| self.depth(n) + 1).max().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.children_lists().iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_word(&self) -> bool {
        self.max_degree() <= 1
    }

    /// `a <= b` in the tree order: `a` is an ancestor of `b` or equal to it.
    pub fn is_ancestor(&self, a: Node, b: Node) -> bool {
        let mut cur = b;
        loop {
            if cur == a {
                return true;
            }
            match self.parent[cur] {
                Some(p) => cur = p,
                None => return false,
            }
        }
    }

    /// Nodes of the subtree rooted at `a`.
    pub fn subtree_nodes(&self, a: Node) -> BTreeSet<Node> {
        (0..self.len()).filter(|&b| self.is_ancestor(a, b)).collect()
    }

    /// The path `a = c_0, ..., c_n = b`; requires `a <= b`.
    pub fn path(&self, a: Node, b: Node) -> Option<Vec<Node>> {
        let mut out = vec![b];
        let mut cur = b;
        while cur != a {
            cur = self.parent[cur]?;
            out.push(cur);
        }
        out.reverse();
        Some(out)
    }

    /// Hasse-diagram distance between comparable nodes.
    pub fn distance(&self, a: Node, b: Node) -> Option<usize> {
        self.path(a, b).or_else(|| self.path(b, a)).map(|p| p.len() - 1)
    }

    /// The induced subtree on `kept`, renumbered in increasing order. The
    /// kept set must have a unique minimal element.
    pub fn restrict(&self, kept: &BTreeSet<Node>) -> Result<Shrunk> {
        if kept.is_empty() {
            return Err(Error::EmptySubset);
        }
        if let Some(&n) = kept.iter().find(|&&n| n >= self.len()) {
            return Err(Error::InvalidElement(n));
        }
        let origin: Vec<Node> = kept.iter().copied().collect();
        let index = |n: Node| origin.binary_search(&n).ok();
        let mut parent = Vec::with_capacity(origin.len());
        for &n in &origin {
            let mut cur = self.parent[n];
            let mut found = None;
            while let Some(p) = cur {
                if let Some(i) = index(p) {
                    found = Some(i);
                    break;
                }
                cur = self.parent[p];
            }
            parent.push(found);
        }
        if parent.iter().filter(|p| p.is_none()).count() != 1 {
            return Err(Error::InvalidStructure(
                "kept nodes have no unique minimal element".into(),
            ));
        }
        let label = origin.iter().map(|&n| self.label[n]).collect();
        Ok(Shrunk {
            tree: SigmaTree {
                alphabet: self.alphabet.clone(),
                parent,
                label,
            },
            origin,
        })
    }

    /// The subtree rooted at `a`.
    pub fn subtree_at(&self, a: Node) -> Shrunk {
        self.restrict(&self.subtree_nodes(a))
            .expect("a rooted subtree has a unique minimum")
    }

    /// `self ·_e other`: a copy of `other` hung below `e`. New nodes follow
    /// the existing ones in `other`'s order.
    pub fn join_at(&self, e: Node, other: &SigmaTree) -> Result<SigmaTree> {
        if e >= self.len() {
            return Err(Error::InvalidElement(e));
        }
        if other.alphabet != self.alphabet {
            return Err(Error::VocabularyMismatch);
        }
        let off = self.len();
        let mut parent = self.parent.clone();
        parent.extend(other.parent.iter().map(|p| Some(p.map_or(e, |q| q + off))));
        let mut label = self.label.clone();
        label.extend_from_slice(&other.label);
        SigmaTree::new(self.alphabet.clone(), parent, label)
    }

    /// Joins each tree of a forest in turn at `e`.
    pub fn join_forest_at(&self, e: Node, forest: &[SigmaTree]) -> Result<SigmaTree> {
        let mut cur = self.clone();
        for t in forest {
            cur = cur.join_at(e, t)?;
        }
        Ok(cur)
    }

    pub fn vocabulary(&self) -> Vocabulary {
        let mut v = Vocabulary::single(ORDER_PREDICATE, 2);
        for a in &self.alphabet {
            v = v.with_predicate(format!("Q{a}"), 1).expect("letters validated");
        }
        v
    }

    pub fn marked_vocabulary(&self) -> Vocabulary {
        self.vocabulary()
            .with_predicate(MARK_PREDICATE, 1)
            .expect("mark predicate is not a letter predicate")
    }

    pub fn to_structure(&self) -> Structure {
        let mut relations = vec![self.order_pairs()];
        relations.extend(self.letter_relations());
        Structure::new(self.vocabulary(), self.len(), relations, Vec::new()).expect("valid tree structure")
    }

    /// The structure expanded by the unary mark predicate `R = marks`.
    pub fn to_structure_marked(&self, marks: &BTreeSet<Node>) -> Result<Structure> {
        if let Some(&n) = marks.iter().find(|&&n| n >= self.len()) {
            return Err(Error::InvalidElement(n));
        }
        let mut relations = vec![self.order_pairs()];
        relations.extend(self.letter_relations());
        relations.push(marks.iter().map(|&n| vec![n]).collect());
        Structure::new(self.marked_vocabulary(), self.len(), relations, Vec::new())
    }

    fn order_pairs(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for b in 0..self.len() {
            let mut cur = Some(b);
            while let Some(a) = cur {
                out.push(vec![a, b]);
                cur = self.parent[a];
            }
        }
        out
    }

    fn letter_relations(&self) -> Vec<Vec<Vec<usize>>> {
        (0..self.alphabet.len())
            .map(|l| {
                (0..self.len())
                    .filter(|&n| self.label[n] == l)
                    .map(|n| vec![n])
                    .collect()
            })
            .collect()
    }

    /// Reads a tree back from its structure. The vocabulary must be `le`
    /// followed by `Q<letter>` predicates; `le` must be a tree order and every
    /// node must carry exactly one letter.
    pub fn from_structure(s: &Structure) -> Result<SigmaTree> {
        let preds = s.vocab().predicates();
        if preds.first().map(|p| (p.name.as_str(), p.arity)) != Some((ORDER_PREDICATE, 2)) || s.vocab().has_constants()
        {
            return Err(Error::InvalidVocabulary(format!(
                "expected `{ORDER_PREDICATE}/2` followed by unary letter predicates"
            )));
        }
        let mut alphabet = Vec::new();
        for p in &preds[1..] {
            match p.name.strip_prefix('Q') {
                Some(l) if p.arity == 1 && !l.is_empty() => alphabet.push(l.to_string()),
                _ => {
                    return Err(Error::InvalidVocabulary(format!(
                        "`{}` is not a letter predicate",
                        p.name
                    )))
                }
            }
        }
        let n = s.size();
        let le = |a: usize, b: usize| s.holds(0, &[a, b]);
        for a in 0..n {
            if !le(a, a) {
                return Err(Error::InvalidStructure("order is not reflexive".into()));
            }
            for b in 0..n {
                if a != b && le(a, b) && le(b, a) {
                    return Err(Error::InvalidStructure("order is not antisymmetric".into()));
                }
                for c in 0..n {
                    if le(a, b) && le(b, c) && !le(a, c) {
                        return Err(Error::InvalidStructure("order is not transitive".into()));
                    }
                    if le(a, c) && le(b, c) && !le(a, b) && !le(b, a) {
                        return Err(Error::InvalidStructure("order is not a tree".into()));
                    }
                }
            }
        }
        let mut parent = Vec::with_capacity(n);
        for b in 0..n {
            // The parent is the largest proper predecessor.
            let preds: Vec<usize> = (0..n).filter(|&a| a != b && le(a, b)).collect();
            let p = preds.iter().copied().find(|&a| preds.iter().all(|&c| le(c, a)));
            parent.push(p);
        }
        let mut label = Vec::with_capacity(n);
        for e in 0..n {
            let letters: Vec<usize> = (0..alphabet.len()).filter(|&l| s.holds(l + 1, &[e])).collect();
            if letters.len() != 1 {
                return Err(Error::InvalidStructure(format!(
                    "node {e} carries {} letters",
                    letters.len()
                )));
            }
            label.push(letters[0]);
        }
        SigmaTree::new(alphabet, parent, label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    #[test]
    fn single_node_structure() {
        let t = SigmaTree::word(ab(), vec![0]).unwrap();
        let s = t.to_structure();
        assert_eq!(s.tuple_count(0), 1);
        assert!(s.holds(1, &[0]));
        assert!(!s.holds(2, &[0]));
    }

    #[test]
    fn chain_of_two_has_three_order_pairs() {
        let t = SigmaTree::word(ab(), vec![0, 1]).unwrap();
        assert_eq!(t.to_structure().tuple_count(0), 3);
    }

    #[test]
    fn structure_round_trip() {
        let t = SigmaTree::new(ab(), vec![Some(2), Some(2), None, Some(0)], vec![0, 1, 1, 0]).unwrap();
        assert_eq!(SigmaTree::from_structure(&t.to_structure()).unwrap(), t);
    }

    #[test]
    fn join_under_single_node() {
        let s = SigmaTree::word(ab(), vec![0]).unwrap();
        let j = s.join_at(0, &s).unwrap();
        assert_eq!(j, SigmaTree::word(ab(), vec![0, 0]).unwrap());
        assert!(s.join_at(3, &s).is_err());
    }

    #[test]
    fn restrict_reattaches_to_nearest_ancestor() {
        let w = SigmaTree::word(ab(), vec![0, 1, 0, 1]).unwrap();
        let r = w.restrict(&[0, 3].into_iter().collect()).unwrap();
        assert_eq!(r.tree, SigmaTree::word(ab(), vec![0, 1]).unwrap());
        assert_eq!(r.origin, vec![0, 3]);
        let star = SigmaTree::new(ab(), vec![None, Some(0), Some(0)], vec![0; 3]).unwrap();
        assert!(star.restrict(&[1, 2].into_iter().collect()).is_err());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(SigmaTree::new(ab(), vec![None, None], vec![0, 0]).is_err());
        assert!(SigmaTree::new(ab(), vec![Some(1), Some(0)], vec![0, 0]).is_err());
        assert!(SigmaTree::new(ab(), vec![None], vec![2]).is_err());
    }

    #[test]
    fn distances_and_paths() {
        let t = SigmaTree::new(ab(), vec![None, Some(0), Some(1), Some(0)], vec![0; 4]).unwrap();
        assert_eq!(t.path(0, 2), Some(vec![0, 1, 2]));
        assert_eq!(t.distance(2, 0), Some(2));
        assert_eq!(t.distance(2, 3), None);
        assert_eq!(t.height(), 3);
    }
}
