//! Linear orders, paths, cycles, grids, and the graphs `H_n` (n copies of
//! each path of length 0..=3^n) and `G_n` (`H_n` plus a cycle on 3^n nodes).
//!
//! `P_n` has `n + 1` vertices; `C_n` has `n` vertices. Graphs use the
//! symmetric irreflexive predicate `E`.

use std::collections::{BTreeMap, BTreeSet};

use log::warn;

use crate::error::{Error, Result};
use crate::structures::{disjoint_union, tensor_product, Element, Restriction, Structure, Vocabulary, ORDER_PREDICATE};

/// Largest `n` accepted by [`make_hn`] and [`make_gn`].
pub const HN_GN_LIMIT: usize = 2;

/// Reflexive linear order on `0..n` over `le`.
pub fn make_linear_order(n: usize) -> Result<Structure> {
    let tuples = (0..n).flat_map(|i| (i..n).map(move |j| vec![i, j])).collect();
    Structure::new(Vocabulary::single(ORDER_PREDICATE, 2), n, vec![tuples], Vec::new())
}

fn graph(size: usize, edges: impl IntoIterator<Item = (Element, Element)>) -> Result<Structure> {
    let tuples = edges.into_iter().flat_map(|(a, b)| [vec![a, b], vec![b, a]]).collect();
    Structure::new(Vocabulary::graph(), size, vec![tuples], Vec::new())
}

/// Path of length `n`.
pub fn make_path(n: usize) -> Result<Structure> {
    graph(n + 1, (0..n).map(|i| (i, i + 1)))
}

/// Cycle on `n >= 3` vertices.
pub fn make_cycle(n: usize) -> Result<Structure> {
    if n < 3 {
        return Err(Error::InvalidStructure(format!(
            "a cycle needs at least 3 vertices, got {n}"
        )));
    }
    graph(n, (0..n).map(|i| (i, (i + 1) % n)))
}

fn pow3(e: usize) -> Result<usize> {
    u32::try_from(e)
        .ok()
        .and_then(|e| 3usize.checked_pow(e))
        .ok_or_else(|| Error::GuardExceeded {
            what: "power of three".into(),
            limit: usize::MAX,
        })
}

fn union_all(parts: impl IntoIterator<Item = Result<Structure>>) -> Result<Structure> {
    let mut acc: Option<Structure> = None;
    for p in parts {
        let p = p?;
        acc = Some(match acc {
            None => p,
            Some(a) => disjoint_union(&a, &p)?,
        });
    }
    acc.ok_or_else(|| Error::InvalidStructure("empty union".into()))
}

fn hn(n: usize) -> Result<Structure> {
    if n == 0 {
        return Err(Error::InvalidStructure("H_0 is empty".into()));
    }
    let top = pow3(n)?;
    union_all((0..=top).flat_map(|i| (0..n).map(move |_| make_path(i))))
}

fn gn(n: usize) -> Result<Structure> {
    disjoint_union(&make_cycle(pow3(n)?)?, &hn(n)?)
}

fn guard(n: usize) -> Result<()> {
    if n > HN_GN_LIMIT {
        return Err(Error::GuardExceeded {
            what: "H_n/G_n index".into(),
            limit: HN_GN_LIMIT,
        });
    }
    Ok(())
}

/// `H_n`, the disjoint union of `n` copies of `P_i` for each `i` in
/// `0..=3^n`. Paths are laid out by increasing length.
pub fn make_hn(n: usize) -> Result<Structure> {
    guard(n)?;
    hn(n)
}

/// `G_n = C_{3^n} ⊔ H_n`, cycle first.
pub fn make_gn(n: usize) -> Result<Structure> {
    guard(n)?;
    gn(n)
}

/// `H_n` (or `G_n` when `with_cycle`) without the size guard.
pub fn make_hn_gn_unguarded(n: usize, with_cycle: bool) -> Result<Structure> {
    if n > HN_GN_LIMIT {
        warn!(
            "building the {} graph for n = {n}, above the usual limit",
            if with_cycle { "G" } else { "H" }
        );
    }
    if with_cycle {
        gn(n)
    } else {
        hn(n)
    }
}

/// Tensor product of linear orders of the given lengths.
pub fn make_grid(dims: &[usize]) -> Result<Structure> {
    let (first, rest) = dims
        .split_first()
        .ok_or_else(|| Error::InvalidStructure("grid needs at least one dimension".into()))?;
    let mut acc = make_linear_order(*first)?;
    for &d in rest {
        acc = tensor_product(&acc, &make_linear_order(d)?)?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Components

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComponentKind {
    Path,
    Cycle,
}

/// A connected component of a graph of maximum degree 2, with its vertices
/// in traversal order. Paths start at their smaller endpoint; cycles start
/// at their smallest vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub kind: ComponentKind,
    pub vertices: Vec<Element>,
}

impl Component {
    /// Number of edges for a path, vertices for a cycle.
    pub fn length(&self) -> usize {
        match self.kind {
            ComponentKind::Path => self.vertices.len() - 1,
            ComponentKind::Cycle => self.vertices.len(),
        }
    }
}

fn adjacency(g: &Structure) -> Result<Vec<Vec<Element>>> {
    let e = g
        .vocab()
        .predicate_index("E")
        .filter(|_| g.vocab().predicates().len() == 1 && !g.vocab().has_constants())
        .ok_or_else(|| Error::InvalidVocabulary("expected a graph over E/2".into()))?;
    let mut adj = vec![Vec::new(); g.size()];
    for t in g.tuples(e) {
        if t[0] == t[1] || !g.holds(e, &[t[1], t[0]]) {
            return Err(Error::InvalidStructure(
                "edge relation must be symmetric and irreflexive".into(),
            ));
        }
        adj[t[0]].push(t[1]);
    }
    if adj.iter().any(|a| a.len() > 2) {
        return Err(Error::InvalidStructure("a vertex has degree above 2".into()));
    }
    Ok(adj)
}

/// Splits a graph of maximum degree 2 into paths and cycles, ordered by
/// smallest vertex.
pub fn graph_components(g: &Structure) -> Result<Vec<Component>> {
    let adj = adjacency(g)?;
    let mut seen = vec![false; g.size()];
    let mut out = Vec::new();
    for start in 0..g.size() {
        if seen[start] {
            continue;
        }
        // Collect the component, then pick a traversal start.
        let mut stack = vec![start];
        let mut members = BTreeSet::new();
        while let Some(x) = stack.pop() {
            if members.insert(x) {
                stack.extend(adj[x].iter().copied());
            }
        }
        let endpoint = members.iter().copied().find(|&x| adj[x].len() < 2);
        let kind = if endpoint.is_some() {
            ComponentKind::Path
        } else {
            ComponentKind::Cycle
        };
        let first = endpoint.unwrap_or(start);
        let mut vertices = vec![first];
        let mut prev = None;
        let mut cur = first;
        loop {
            let next = adj[cur].iter().copied().filter(|&y| Some(y) != prev).min();
            match next {
                Some(y) if y != first && !vertices.contains(&y) => {
                    vertices.push(y);
                    prev = Some(cur);
                    cur = y;
                }
                _ => break,
            }
        }
        for &v in &vertices {
            seen[v] = true;
        }
        out.push(Component { kind, vertices });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Shrinkers

fn check_w(g: &Structure, w: &BTreeSet<Element>, k: usize) -> Result<()> {
    if w.len() > k {
        return Err(Error::TooManyMarks {
            given: w.len(),
            limit: k,
        });
    }
    if let Some(&x) = w.iter().find(|&&x| x >= g.size()) {
        return Err(Error::InvalidElement(x));
    }
    Ok(())
}

/// Vertices kept from a path given in order, by position: for marked
/// positions, clusters whose consecutive gaps are at most `3^(m+1)`
/// each contribute their whole span; without marks, a prefix of length
/// `min(len, 3^(m+k+2))`.
fn path_segments(len: usize, marked: &[usize], m: usize, k: usize) -> Result<BTreeSet<usize>> {
    if marked.is_empty() {
        let cap = pow3(m + k + 2)?.min(len);
        return Ok((0..=cap).collect());
    }
    let gap = pow3(m + 1)?;
    let mut kept = BTreeSet::new();
    let mut lo = marked[0];
    let mut hi = marked[0];
    for &p in &marked[1..] {
        if p - hi > gap {
            kept.extend(lo..=hi);
            lo = p;
        }
        hi = p;
    }
    kept.extend(lo..=hi);
    Ok(kept)
}

/// An induced substructure of the path `p` containing `w` that is a
/// disjoint union of at most `max(|w|, 1)` paths, each of length at most
/// `3^(m+k+2)`.
pub fn shrink_path_with_w(p: &Structure, w: &BTreeSet<Element>, m: usize, k: usize) -> Result<Restriction> {
    check_w(p, w, k)?;
    let comps = graph_components(p)?;
    if comps.len() != 1 || comps[0].kind != ComponentKind::Path {
        return Err(Error::InvalidStructure("expected a single path".into()));
    }
    shrink_on_order(p, &comps[0].vertices, w, m, k)
}

fn shrink_on_order(g: &Structure, order: &[Element], w: &BTreeSet<Element>, m: usize, k: usize) -> Result<Restriction> {
    let marked: Vec<usize> = order
        .iter()
        .enumerate()
        .filter(|(_, v)| w.contains(v))
        .map(|(i, _)| i)
        .collect();
    let kept = path_segments(order.len() - 1, &marked, m, k)?;
    g.restrict(kept.into_iter().map(|i| order[i]))
}

/// Deletes the smallest unmarked vertex of the cycle `c` and shrinks the
/// remaining path.
pub fn shrink_cycle_with_w(c: &Structure, w: &BTreeSet<Element>, m: usize, k: usize) -> Result<Restriction> {
    check_w(c, w, k)?;
    if k >= c.size() {
        return Err(Error::InvalidStructure(
            "mark limit must be below the cycle size".into(),
        ));
    }
    let comps = graph_components(c)?;
    if comps.len() != 1 || comps[0].kind != ComponentKind::Cycle {
        return Err(Error::InvalidStructure("expected a single cycle".into()));
    }
    let cycle = &comps[0].vertices;
    let cut = (0..cycle.len()).find(|&i| !w.contains(&cycle[i])).expect("k < |C|");
    let order: Vec<Element> = (1..cycle.len()).map(|d| cycle[(cut + d) % cycle.len()]).collect();
    shrink_on_order(c, &order, w, m, k)
}

/// Result of [`witness_hn_gn`].
#[derive(Debug, Clone)]
pub struct Witness {
    /// The `n` with input `H_n` or `G_n`.
    pub n: usize,
    pub has_cycle: bool,
    /// `m + k + 2`.
    pub level: usize,
    pub restriction: Restriction,
}

/// Recognizes `g` as `H_n` or `G_n` up to isomorphism, returning `n` and
/// whether the cycle is present.
pub fn recognize_hn_gn(g: &Structure) -> Result<(usize, bool)> {
    recognize(&graph_components(g)?)
}

fn recognize(comps: &[Component]) -> Result<(usize, bool)> {
    let bad = || Error::InvalidStructure("not isomorphic to any H_n or G_n".into());
    let cycles: Vec<&Component> = comps.iter().filter(|c| c.kind == ComponentKind::Cycle).collect();
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for c in comps.iter().filter(|c| c.kind == ComponentKind::Path) {
        *counts.entry(c.length()).or_default() += 1;
    }
    let n = counts.get(&0).copied().ok_or_else(bad)?;
    let top = pow3(n)?;
    let expected: BTreeMap<usize, usize> = (0..=top).map(|i| (i, n)).collect();
    if counts != expected || cycles.len() > 1 || cycles.first().is_some_and(|c| c.length() != top) {
        return Err(bad());
    }
    Ok((n, cycles.len() == 1))
}

/// A substructure of `g` (which must be `H_n` or `G_n`) containing `w` and
/// isomorphic to `H_{m+k+2}`, or `g` itself when `n <= m + k + 2`.
///
/// Long paths and the cycle are cut down around `w` to short segments, which
/// then stand in for whole paths of the same length among `m + k + 2`
/// copies of each path length.
pub fn witness_hn_gn(g: &Structure, w: &BTreeSet<Element>, m: usize, k: usize) -> Result<Witness> {
    check_w(g, w, k)?;
    let comps = graph_components(g)?;
    let (n, has_cycle) = recognize(&comps)?;
    let level = m + k + 2;
    if n <= level {
        return Ok(Witness {
            n,
            has_cycle,
            level,
            restriction: g.restrict(g.elements())?,
        });
    }
    let top = pow3(level)?;
    // Per target length: vertex sets already committed to that slot.
    let mut slots: BTreeMap<usize, Vec<Vec<Element>>> = BTreeMap::new();
    let mut used = vec![false; comps.len()];
    for (ci, c) in comps.iter().enumerate() {
        let marked: BTreeSet<Element> = c.vertices.iter().copied().filter(|v| w.contains(v)).collect();
        if marked.is_empty() {
            continue;
        }
        used[ci] = true;
        if c.kind == ComponentKind::Path && c.length() <= top {
            slots.entry(c.length()).or_default().push(c.vertices.clone());
            continue;
        }
        let part = g.restrict(c.vertices.iter().copied())?;
        let local: BTreeSet<Element> = marked.iter().map(|&v| part.image_of(v).expect("member")).collect();
        let shrunk = match c.kind {
            ComponentKind::Path => shrink_path_with_w(&part.structure, &local, m, k)?,
            ComponentKind::Cycle => shrink_cycle_with_w(&part.structure, &local, m, k)?,
        };
        let origin = shrunk.compose_origin(&part.origin);
        let sub = graph_components(&shrunk.structure)?;
        for seg in sub {
            let len = seg.length();
            slots
                .entry(len)
                .or_default()
                .push(seg.vertices.iter().map(|&v| origin[v]).collect());
        }
    }
    for len in 0..=top {
        let slot = slots.entry(len).or_default();
        for (ci, c) in comps.iter().enumerate() {
            if slot.len() >= level {
                break;
            }
            if !used[ci] && c.kind == ComponentKind::Path && c.length() == len {
                used[ci] = true;
                slot.push(c.vertices.clone());
            }
        }
        if slot.len() != level {
            return Err(Error::VerificationFailed(format!(
                "could not fill {level} paths of length {len}"
            )));
        }
    }
    let kept: BTreeSet<Element> = slots.values().flatten().flatten().copied().collect();
    Ok(Witness {
        n,
        has_cycle,
        level,
        restriction: g.restrict(kept)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lengths(g: &Structure) -> Vec<(ComponentKind, usize)> {
        let mut v: Vec<_> = graph_components(g)
            .unwrap()
            .iter()
            .map(|c| (c.kind, c.length()))
            .collect();
        v.sort();
        v
    }

    #[test]
    fn generator_sizes() {
        assert_eq!(make_hn(1).unwrap().size(), 10);
        assert_eq!(make_gn(1).unwrap().size(), 13);
        assert_eq!(make_cycle(3).unwrap().tuple_count(0), 6);
        assert_eq!(make_path(3).unwrap().size(), 4);
        assert!(matches!(make_hn(3), Err(Error::GuardExceeded { .. })));
        assert_eq!(make_grid(&[3, 4]).unwrap().size(), 12);
    }

    #[test]
    fn components_of_gn() {
        let l = lengths(&make_gn(1).unwrap());
        assert_eq!(
            l,
            vec![
                (ComponentKind::Path, 0),
                (ComponentKind::Path, 1),
                (ComponentKind::Path, 2),
                (ComponentKind::Path, 3),
                (ComponentKind::Cycle, 3)
            ]
        );
    }

    #[test]
    fn path_shrinks() {
        let p = make_path(100).unwrap();
        let one = shrink_path_with_w(&p, &[40].into_iter().collect(), 0, 1).unwrap();
        assert_eq!(one.structure.size(), 1);
        let ends = shrink_path_with_w(&p, &[0, 100].into_iter().collect(), 0, 2).unwrap();
        assert_eq!(
            lengths(&ends.structure),
            vec![(ComponentKind::Path, 0), (ComponentKind::Path, 0)]
        );
        let near = shrink_path_with_w(&p, &[10, 12].into_iter().collect(), 0, 2).unwrap();
        assert_eq!(near.origin, vec![10, 11, 12]);
        let none = shrink_path_with_w(&p, &BTreeSet::new(), 0, 0).unwrap();
        assert_eq!(none.structure.size(), 10);
    }

    #[test]
    fn cycle_shrinks() {
        let c = make_cycle(6).unwrap();
        let r = shrink_cycle_with_w(&c, &[0].into_iter().collect(), 0, 1).unwrap();
        assert_eq!(r.origin, vec![0]);
        let r = shrink_cycle_with_w(&c, &BTreeSet::new(), 0, 1).unwrap();
        assert!(lengths(&r.structure).iter().all(|(k, _)| *k == ComponentKind::Path));
    }

    #[test]
    fn witness_on_g3_is_h2_shaped() {
        let g3 = make_hn_gn_unguarded(3, true).unwrap();
        let wit = witness_hn_gn(&g3, &BTreeSet::new(), 0, 0).unwrap();
        assert_eq!((wit.n, wit.has_cycle, wit.level), (3, true, 2));
        assert_eq!(lengths(&wit.restriction.structure), lengths(&make_hn(2).unwrap()));
    }

    #[test]
    fn small_witness_is_identity() {
        let g1 = make_gn(1).unwrap();
        let w: BTreeSet<Element> = [1].into_iter().collect();
        let wit = witness_hn_gn(&g1, &w, 0, 1).unwrap();
        assert_eq!(wit.restriction.structure, g1);
    }
}
