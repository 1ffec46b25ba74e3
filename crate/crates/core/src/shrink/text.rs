//! Text format for labeled trees.
//!
//! ```text
//! tree t
//! alphabet: a b
//! node 0 label a root
//! node 1 label b parent 0
//! marks: 1
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{Node, SigmaTree};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedTree {
    pub name: String,
    pub tree: SigmaTree,
    pub marks: BTreeSet<Node>,
}

struct Block {
    name: String,
    line: usize,
    alphabet: Option<Vec<String>>,
    nodes: Vec<(usize, Node, String, Option<Node>)>,
    marks: BTreeSet<Node>,
}

impl Block {
    fn finish(self) -> Result<NamedTree> {
        let at = |m: String| Error::parse(self.line, 1, m);
        let alphabet = self
            .alphabet
            .ok_or_else(|| at(format!("tree `{}` has no alphabet line", self.name)))?;
        let n = self.nodes.len();
        let mut parent = vec![None; n];
        let mut label = vec![usize::MAX; n];
        for (line, id, letter, p) in self.nodes {
            if id >= n || label[id] != usize::MAX {
                return Err(Error::parse(
                    line,
                    1,
                    format!("node ids must be 0..{n} without repeats"),
                ));
            }
            label[id] = alphabet
                .iter()
                .position(|a| *a == letter)
                .ok_or_else(|| Error::parse(line, 1, format!("letter `{letter}` not in alphabet")))?;
            parent[id] = p;
        }
        let tree = SigmaTree::new(alphabet, parent, label).map_err(|e| at(e.to_string()))?;
        if let Some(&m) = self.marks.iter().find(|&&m| m >= n) {
            return Err(at(format!("mark {m} is not a node")));
        }
        Ok(NamedTree {
            name: self.name,
            tree,
            marks: self.marks,
        })
    }
}

fn number(s: &str, line: usize) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::parse(line, 1, format!("expected a number, found `{s}`")))
}

pub fn parse_trees(text: &str) -> Result<Vec<NamedTree>> {
    let mut out = Vec::new();
    let mut cur: Option<Block> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let words: Vec<&str> = content.split_whitespace().collect();
        if words[0] == "tree" {
            if let Some(b) = cur.take() {
                out.push(b.finish()?);
            }
            let name = words.get(1).ok_or_else(|| Error::parse(line, 1, "tree name missing"))?;
            cur = Some(Block {
                name: name.to_string(),
                line,
                alphabet: None,
                nodes: Vec::new(),
                marks: BTreeSet::new(),
            });
            continue;
        }
        let b = cur
            .as_mut()
            .ok_or_else(|| Error::parse(line, 1, "expected `tree NAME`"))?;
        match words[0] {
            "alphabet:" => b.alphabet = Some(words[1..].iter().map(|s| s.to_string()).collect()),
            "marks:" => {
                for w in &words[1..] {
                    b.marks.insert(number(w, line)?);
                }
            }
            "node" => {
                let bad = || Error::parse(line, 1, "expected `node ID label L (root | parent P)`");
                if words.len() < 5 || words[2] != "label" {
                    return Err(bad());
                }
                let id = number(words[1], line)?;
                let parent = match (words[4], words.get(5)) {
                    ("root", None) => None,
                    ("parent", Some(p)) if words.len() == 6 => Some(number(p, line)?),
                    _ => return Err(bad()),
                };
                b.nodes.push((line, id, words[3].to_string(), parent));
            }
            other => return Err(Error::parse(line, 1, format!("unrecognised line starting `{other}`"))),
        }
    }
    if let Some(b) = cur.take() {
        out.push(b.finish()?);
    }
    Ok(out)
}

pub fn format_trees(trees: &[NamedTree]) -> String {
    let mut out = String::new();
    for (i, t) in trees.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "tree {}", t.name);
        let _ = writeln!(out, "alphabet: {}", t.tree.alphabet().join(" "));
        for n in 0..t.tree.len() {
            match t.tree.parent(n) {
                None => {
                    let _ = writeln!(out, "node {n} label {} root", t.tree.letter(n));
                }
                Some(p) => {
                    let _ = writeln!(out, "node {n} label {} parent {p}", t.tree.letter(n));
                }
            }
        }
        if !t.marks.is_empty() {
            let marks: Vec<String> = t.marks.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "marks: {}", marks.join(" "));
        }
    }
    out
}
