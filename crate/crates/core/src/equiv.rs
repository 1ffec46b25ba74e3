//! Deciding m-equivalence through rank-m back-and-forth types.
//!
//! The rank-0 type of a tuple is its atomic type (equalities and relation
//! facts among the tuple components and the constants). The rank-m type is the
//! set of rank-(m-1) types of all one-element extensions. Two pointed
//! structures satisfy the same sentences of quantifier rank at most `m` iff
//! their rank-m types coincide.
//!
//! Types are interned in a [`TypeSession`] and carry a SHA-256 fingerprint
//! computed from the canonical (sorted) fingerprints of their children, so
//! types from different sessions compare correctly.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::structures::{Element, Structure};

type Fingerprint = [u8; 32];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Atomic { len: usize, bits: Vec<u64> },
    Ext { rank: usize, children: Vec<u32> },
}

/// A canonical rank-m type.
#[derive(Clone, Copy)]
pub struct RankType {
    rank: usize,
    id: u32,
    fingerprint: Fingerprint,
}

impl RankType {
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Session-local identifier; equal ids within one session mean equal types.
    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn fingerprint(&self) -> &[u8; 32] {
        &self.fingerprint
    }

    pub fn fingerprint_hex(&self) -> String {
        hex::encode(self.fingerprint)
    }

    /// First 12 hex digits, for logs.
    pub fn short(&self) -> String {
        hex::encode(&self.fingerprint[..6])
    }
}

impl PartialEq for RankType {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.fingerprint == other.fingerprint
    }
}

impl Eq for RankType {}

impl Hash for RankType {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank.hash(state);
        self.fingerprint.hash(state);
    }
}

impl PartialOrd for RankType {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RankType {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.rank, self.fingerprint).cmp(&(other.rank, other.fingerprint))
    }
}

impl fmt::Debug for RankType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RankType(m={}, {})", self.rank, self.short())
    }
}

impl fmt::Display for RankType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fingerprint_hex())
    }
}

/// Interning table and memo for rank-type computations. Sessions are cheap;
/// create one per computation and keep it while structures are reused.
#[derive(Default)]
pub struct TypeSession {
    ids: HashMap<Key, u32>,
    fingerprints: Vec<Fingerprint>,
    structures: HashMap<Structure, usize>,
    memo: Vec<HashMap<(Vec<Element>, usize), u32>>,
}

impl TypeSession {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of distinct types interned so far.
    pub fn interned(&self) -> usize {
        self.fingerprints.len()
    }

    fn intern(&mut self, key: Key) -> u32 {
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let mut h = Sha256::new();
        match &key {
            Key::Atomic { len, bits } => {
                h.update(b"atomic");
                h.update((*len as u64).to_le_bytes());
                for w in bits {
                    h.update(w.to_le_bytes());
                }
            }
            Key::Ext { rank, children } => {
                h.update(b"ext");
                h.update((*rank as u64).to_le_bytes());
                let mut fps: Vec<&Fingerprint> = children.iter().map(|&c| &self.fingerprints[c as usize]).collect();
                fps.sort();
                for fp in fps {
                    h.update(fp);
                }
            }
        }
        let fp: Fingerprint = h.finalize().into();
        let id = self.fingerprints.len() as u32;
        self.fingerprints.push(fp);
        self.ids.insert(key, id);
        id
    }

    fn slot(&mut self, s: &Structure) -> usize {
        if let Some(&i) = self.structures.get(s) {
            return i;
        }
        let i = self.memo.len();
        self.memo.push(HashMap::new());
        self.structures.insert(s.clone(), i);
        i
    }

    /// The rank-`m` type of `tuple` in `s`.
    pub fn rank_type(&mut self, s: &Structure, tuple: &[Element], m: usize) -> Result<RankType> {
        if let Some(&e) = tuple.iter().find(|&&e| e >= s.size()) {
            return Err(Error::InvalidElement(e));
        }
        let slot = self.slot(s);
        let mut t = tuple.to_vec();
        let id = self.compute(s, slot, &mut t, m);
        Ok(RankType {
            rank: m,
            id,
            fingerprint: self.fingerprints[id as usize],
        })
    }

    fn compute(&mut self, s: &Structure, slot: usize, tuple: &mut Vec<Element>, m: usize) -> u32 {
        if let Some(&id) = self.memo[slot].get(&(tuple.clone(), m)) {
            return id;
        }
        let id = if m == 0 {
            let key = atomic_key(s, tuple);
            self.intern(key)
        } else {
            let mut children = Vec::with_capacity(s.size());
            for e in 0..s.size() {
                tuple.push(e);
                children.push(self.compute(s, slot, tuple, m - 1));
                tuple.pop();
            }
            children.sort_unstable();
            children.dedup();
            self.intern(Key::Ext { rank: m, children })
        };
        self.memo[slot].insert((tuple.clone(), m), id);
        id
    }

    pub fn m_equivalent(&mut self, a: &Structure, b: &Structure, m: usize) -> Result<bool> {
        self.m_equivalent_marked(a, &[], b, &[], m)
    }

    pub fn m_equivalent_marked(
        &mut self,
        a: &Structure,
        ta: &[Element],
        b: &Structure,
        tb: &[Element],
        m: usize,
    ) -> Result<bool> {
        if a.vocab() != b.vocab() {
            return Err(Error::VocabularyMismatch);
        }
        if ta.len() != tb.len() {
            return Ok(false);
        }
        Ok(self.rank_type(a, ta, m)? == self.rank_type(b, tb, m)?)
    }
}

/// Equalities among `tuple ++ constants`, then for every predicate the
/// membership of every tuple of positions.
fn atomic_key(s: &Structure, tuple: &[Element]) -> Key {
    let elems: Vec<Element> = tuple.iter().chain(s.constant_values()).copied().collect();
    let l = elems.len();
    let mut bits = Vec::new();
    let mut n = 0usize;
    let mut push = |b: bool, bits: &mut Vec<u64>| {
        if n.is_multiple_of(64) {
            bits.push(0);
        }
        if b {
            *bits.last_mut().expect("word") |= 1 << (n % 64);
        }
        n += 1;
    };
    for i in 0..l {
        for j in (i + 1)..l {
            push(elems[i] == elems[j], &mut bits);
        }
    }
    if l > 0 {
        let mut args = Vec::new();
        for (pi, p) in s.vocab().predicates().iter().enumerate() {
            let mut pos = vec![0usize; p.arity];
            loop {
                args.clear();
                args.extend(pos.iter().map(|&i| elems[i]));
                push(s.holds(pi, &args), &mut bits);
                if !crate::structures::advance(&mut pos, l) {
                    break;
                }
            }
        }
    }
    Key::Atomic { len: l, bits }
}

/// The rank-`m` type of `tuple` in `s`, computed in a fresh session.
pub fn rank_type(s: &Structure, tuple: &[Element], m: usize) -> Result<RankType> {
    TypeSession::new().rank_type(s, tuple, m)
}

/// Whether `a` and `b` agree on all sentences of quantifier rank at most `m`.
pub fn m_equivalent(a: &Structure, b: &Structure, m: usize) -> Result<bool> {
    TypeSession::new().m_equivalent(a, b, m)
}

/// Like [`m_equivalent`] for structures with distinguished tuples.
pub fn m_equivalent_marked(a: &Structure, ta: &[Element], b: &Structure, tb: &[Element], m: usize) -> Result<bool> {
    TypeSession::new().m_equivalent_marked(a, ta, b, tb, m)
}

/// Groups items by rank-`m` type. Classes are listed in order of first
/// occurrence and each holds item indices in increasing order.
pub fn realized_classes(items: &[(Structure, Vec<Element>)], m: usize) -> Result<Vec<Vec<usize>>> {
    let mut session = TypeSession::new();
    realized_classes_in(&mut session, items, m)
}

pub fn realized_classes_in(
    session: &mut TypeSession,
    items: &[(Structure, Vec<Element>)],
    m: usize,
) -> Result<Vec<Vec<usize>>> {
    if let Some((first, _)) = items.first() {
        if items.iter().any(|(s, _)| s.vocab() != first.vocab()) {
            return Err(Error::VocabularyMismatch);
        }
    }
    let mut index: HashMap<(usize, RankType), usize> = HashMap::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, (s, t)) in items.iter().enumerate() {
        let ty = session.rank_type(s, t, m)?;
        let c = *index.entry((t.len(), ty)).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[c].push(i);
    }
    Ok(classes)
}

/// Explicit m-round Ehrenfeucht-Fraisse game search, without memoization.
pub fn ef_game_equivalent(a: &Structure, b: &Structure, m: usize) -> Result<bool> {
    ef_game_equivalent_marked(a, &[], b, &[], m)
}

pub fn ef_game_equivalent_marked(
    a: &Structure,
    ta: &[Element],
    b: &Structure,
    tb: &[Element],
    m: usize,
) -> Result<bool> {
    if a.vocab() != b.vocab() {
        return Err(Error::VocabularyMismatch);
    }
    if ta.len() != tb.len() {
        return Ok(false);
    }
    for (&e, s) in ta.iter().map(|e| (e, a)).chain(tb.iter().map(|e| (e, b))) {
        if e >= s.size() {
            return Err(Error::InvalidElement(e));
        }
    }
    let mut xa: Vec<Element> = a.constant_values().to_vec();
    xa.extend_from_slice(ta);
    let mut xb: Vec<Element> = b.constant_values().to_vec();
    xb.extend_from_slice(tb);
    Ok(duplicator_wins(a, b, &mut xa, &mut xb, m))
}

fn duplicator_wins(a: &Structure, b: &Structure, xa: &mut Vec<Element>, xb: &mut Vec<Element>, rounds: usize) -> bool {
    if !partial_isomorphism(a, b, xa, xb) {
        return false;
    }
    if rounds == 0 {
        return true;
    }
    // Spoiler picks in either structure; duplicator must answer in the other.
    for swap in [false, true] {
        let (s, t) = if swap { (b, a) } else { (a, b) };
        for pick in 0..s.size() {
            let mut answered = false;
            for reply in 0..t.size() {
                let (pa, pb) = if swap { (reply, pick) } else { (pick, reply) };
                xa.push(pa);
                xb.push(pb);
                let ok = duplicator_wins(a, b, xa, xb, rounds - 1);
                xa.pop();
                xb.pop();
                if ok {
                    answered = true;
                    break;
                }
            }
            if !answered {
                return false;
            }
        }
    }
    true
}

/// Whether `xa[i] -> xb[i]` is a well-defined injective map preserving every
/// relation among the chosen elements.
fn partial_isomorphism(a: &Structure, b: &Structure, xa: &[Element], xb: &[Element]) -> bool {
    for i in 0..xa.len() {
        for j in 0..xa.len() {
            if (xa[i] == xa[j]) != (xb[i] == xb[j]) {
                return false;
            }
        }
    }
    for (pi, p) in a.vocab().predicates().iter().enumerate() {
        let total = xa.len().pow(p.arity as u32);
        for code in 0..total {
            let mut c = code;
            let mut ta = Vec::with_capacity(p.arity);
            let mut tb = Vec::with_capacity(p.arity);
            for _ in 0..p.arity {
                ta.push(xa[c % xa.len()]);
                tb.push(xb[c % xa.len()]);
                c /= xa.len();
            }
            if a.holds(pi, &ta) != b.holds(pi, &tb) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::Vocabulary;

    fn path(edges: usize) -> Structure {
        let e = (0..edges).flat_map(|i| [vec![i, i + 1], vec![i + 1, i]]).collect();
        Structure::new(Vocabulary::graph(), edges + 1, vec![e], vec![]).unwrap()
    }

    fn cycle(n: usize) -> Structure {
        let e = (0..n)
            .flat_map(|i| [vec![i, (i + 1) % n], vec![(i + 1) % n, i]])
            .collect();
        Structure::new(Vocabulary::graph(), n, vec![e], vec![]).unwrap()
    }

    fn order(n: usize) -> Structure {
        let e = (0..n).flat_map(|i| (i..n).map(move |j| vec![i, j])).collect();
        Structure::new(Vocabulary::single("le", 2), n, vec![e], vec![]).unwrap()
    }

    #[test]
    fn rank_zero_without_constants_is_trivial() {
        assert!(m_equivalent(&path(1), &cycle(5), 0).unwrap());
    }

    #[test]
    fn cycles_four_and_five() {
        assert_eq!(
            rank_type(&cycle(4), &[], 2).unwrap(),
            rank_type(&cycle(5), &[], 2).unwrap()
        );
        assert!(ef_game_equivalent(&cycle(4), &cycle(5), 2).unwrap());
    }

    #[test]
    fn paths_and_orders() {
        assert!(m_equivalent(&order(5), &order(8), 2).unwrap());
        assert!(m_equivalent(&path(3), &path(5), 1).unwrap());
        assert!(!m_equivalent(&path(1), &path(2), 2).unwrap());
        assert!(!ef_game_equivalent(&path(1), &path(2), 2).unwrap());
    }

    #[test]
    fn classes_of_cycles() {
        let items: Vec<_> = [4, 5, 6].iter().map(|&n| (cycle(n), vec![])).collect();
        assert_eq!(realized_classes(&items, 2).unwrap(), vec![vec![0, 1, 2]]);
        let items = vec![(path(1), vec![]), (path(2), vec![])];
        assert_eq!(realized_classes(&items, 2).unwrap().len(), 2);
    }

    #[test]
    fn fingerprints_are_session_independent() {
        let mut s1 = TypeSession::new();
        let mut s2 = TypeSession::new();
        s2.rank_type(&path(4), &[1], 2).unwrap();
        let a = s1.rank_type(&cycle(6), &[0], 2).unwrap();
        let b = s2.rank_type(&cycle(6), &[3], 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.fingerprint_hex().len(), 64);
    }

    #[test]
    fn constants_matter_at_rank_zero() {
        let v = Vocabulary::new([("E", 2)], ["c"]).unwrap();
        let a = Structure::new(v.clone(), 1, vec![vec![vec![0, 0]]], vec![0]).unwrap();
        let b = Structure::new(v, 1, vec![vec![]], vec![0]).unwrap();
        assert!(!m_equivalent(&a, &b, 0).unwrap());
        assert!(!ef_game_equivalent(&a, &b, 0).unwrap());
    }
}
