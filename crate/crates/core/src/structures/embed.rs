use super::{advance, Element, Structure};
use crate::error::{Error, Result};

/// Per-element invariants preserved by induced embeddings: the diagonal
/// self-type must match exactly and positional degrees may only grow.
struct Profile {
    self_type: Vec<Vec<bool>>,
    degree: Vec<Vec<usize>>,
}

impl Profile {
    fn of(s: &Structure) -> Self {
        let mut self_type = vec![Vec::new(); s.size];
        let mut degree = vec![Vec::new(); s.size];
        for (pi, p) in s.vocab.predicates.iter().enumerate() {
            let diag_base = degree[0].len();
            for (e, st) in self_type.iter_mut().enumerate() {
                st.push(s.holds(pi, &vec![e; p.arity]));
            }
            for d in degree.iter_mut() {
                d.extend(std::iter::repeat_n(0, p.arity));
            }
            for t in s.tuples(pi) {
                for (pos, &e) in t.iter().enumerate() {
                    degree[e][diag_base + pos] += 1;
                }
            }
        }
        Profile { self_type, degree }
    }

    fn total(&self, e: Element) -> usize {
        self.degree[e].iter().sum()
    }
}

struct Search<'a> {
    a: &'a Structure,
    b: &'a Structure,
    order: Vec<Element>,
    candidates: Vec<Vec<Element>>,
    map: Vec<Option<Element>>,
    used: Vec<bool>,
}

impl Search<'_> {
    /// Checks every tuple over the assigned elements that involves `x`.
    fn consistent(&self, x: Element) -> bool {
        let assigned: Vec<Element> = (0..self.a.size).filter(|&e| self.map[e].is_some()).collect();
        for (pi, p) in self.a.vocab.predicates.iter().enumerate() {
            let r = p.arity;
            let mut idx = vec![0usize; r];
            let mut ta = vec![0; r];
            let mut tb = vec![0; r];
            loop {
                let mut has_x = false;
                for (k, &i) in idx.iter().enumerate() {
                    ta[k] = assigned[i];
                    has_x |= ta[k] == x;
                    tb[k] = self.map[ta[k]].expect("assigned");
                }
                if has_x && self.a.holds(pi, &ta) != self.b.holds(pi, &tb) {
                    return false;
                }
                if !advance(&mut idx, assigned.len()) {
                    break;
                }
            }
        }
        true
    }

    fn run(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let x = self.order[depth];
        if self.map[x].is_some() {
            // Pinned by a constant.
            return self.consistent(x) && self.run(depth + 1);
        }
        for ci in 0..self.candidates[x].len() {
            let y = self.candidates[x][ci];
            if self.used[y] {
                continue;
            }
            self.map[x] = Some(y);
            self.used[y] = true;
            if self.consistent(x) && self.run(depth + 1) {
                return true;
            }
            self.map[x] = None;
            self.used[y] = false;
        }
        false
    }
}

/// Searches for an injective map from `a` into `b` that preserves constants
/// and is an isomorphism onto the induced image. The search is exhaustive and
/// deterministic.
pub fn find_embedding(a: &Structure, b: &Structure) -> Result<Option<Vec<Element>>> {
    if a.vocab != b.vocab {
        return Err(Error::VocabularyMismatch);
    }
    if a.size > b.size {
        return Ok(None);
    }
    let pa = Profile::of(a);
    let pb = Profile::of(b);

    let mut map = vec![None; a.size];
    let mut used = vec![false; b.size];
    for (&ca, &cb) in a.constants.iter().zip(&b.constants) {
        match map[ca] {
            Some(prev) if prev != cb => return Ok(None),
            Some(_) => {}
            None => {
                if used[cb] {
                    return Ok(None);
                }
                map[ca] = Some(cb);
                used[cb] = true;
            }
        }
    }

    let compatible = |x: Element, y: Element| {
        pa.self_type[x] == pb.self_type[y] && pa.degree[x].iter().zip(&pb.degree[y]).all(|(dx, dy)| dx <= dy)
    };
    for (x, m) in map.iter().enumerate() {
        if let Some(y) = *m {
            if !compatible(x, y) {
                return Ok(None);
            }
        }
    }
    let mut candidates = vec![Vec::new(); a.size];
    for x in 0..a.size {
        if map[x].is_some() {
            continue;
        }
        let mut c: Vec<Element> = (0..b.size).filter(|&y| !used[y] && compatible(x, y)).collect();
        if c.is_empty() {
            return Ok(None);
        }
        c.sort_by_key(|&y| (pb.total(y) - pa.total(x), y));
        candidates[x] = c;
    }

    let order = search_order(a, &pa, &map, &candidates);
    let mut search = Search {
        a,
        b,
        order,
        candidates,
        map,
        used,
    };
    if search.run(0) {
        Ok(Some(search.map.into_iter().map(|m| m.expect("complete")).collect()))
    } else {
        Ok(None)
    }
}

/// Pinned elements first, then greedily the element most connected to those
/// already placed, breaking ties by fewer candidates, more degree, lower index.
fn search_order(a: &Structure, pa: &Profile, map: &[Option<Element>], candidates: &[Vec<Element>]) -> Vec<Element> {
    let n = a.size;
    let mut adj = vec![vec![false; n]; n];
    for pi in 0..a.vocab.predicates.len() {
        for t in a.tuples(pi) {
            for &u in t {
                for &v in t {
                    adj[u][v] = true;
                }
            }
        }
    }
    let mut placed = vec![false; n];
    let mut order: Vec<Element> = (0..n).filter(|&x| map[x].is_some()).collect();
    for &x in &order {
        placed[x] = true;
    }
    while order.len() < n {
        let next = (0..n)
            .filter(|&x| !placed[x])
            .max_by_key(|&x| {
                let links = order.iter().filter(|&&y| adj[x][y]).count();
                (
                    links,
                    std::cmp::Reverse(candidates[x].len()),
                    pa.total(x),
                    std::cmp::Reverse(x),
                )
            })
            .expect("unplaced element exists");
        placed[next] = true;
        order.push(next);
    }
    order
}

/// Verifies that `map` is an embedding of `a` into `b`.
pub fn check_embedding(a: &Structure, b: &Structure, map: &[Element]) -> bool {
    if a.vocab != b.vocab || map.len() != a.size {
        return false;
    }
    if map.iter().any(|&y| y >= b.size) {
        return false;
    }
    let mut seen = vec![false; b.size];
    for &y in map {
        if std::mem::replace(&mut seen[y], true) {
            return false;
        }
    }
    if a.constants.iter().zip(&b.constants).any(|(&ca, &cb)| map[ca] != cb) {
        return false;
    }
    for (pi, p) in a.vocab.predicates.iter().enumerate() {
        let r = p.arity;
        let cells = match a.size.checked_pow(r as u32) {
            Some(c) => c,
            None => return false,
        };
        let mut t = vec![0; r];
        for _ in 0..cells {
            let image: Vec<Element> = t.iter().map(|&e| map[e]).collect();
            if a.holds(pi, &t) != b.holds(pi, &image) {
                return false;
            }
            advance(&mut t, a.size);
        }
    }
    true
}

pub fn is_isomorphic(a: &Structure, b: &Structure) -> Result<bool> {
    if a.vocab != b.vocab {
        return Err(Error::VocabularyMismatch);
    }
    if a.size != b.size
        || a.relations
            .iter()
            .zip(&b.relations)
            .any(|(x, y)| x.tuples.len() != y.tuples.len())
    {
        return Ok(false);
    }
    Ok(find_embedding(a, b)?.is_some())
}
