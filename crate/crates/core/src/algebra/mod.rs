//! Expression trees over structure-building operations.
//!
//! Leaves hold named structures; internal nodes apply disjoint union `u`,
//! complement `!`, cartesian product `x`, tensor product `t` or bowtie `bw`.
//! The text form is an s-expression such as `(u a (! (bw b c)))` whose atoms
//! name structures supplied separately.

mod shrink;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::structures::{
    bowtie, cartesian_product, complement, disjoint_union, tensor_product, Element, Structure, Vocabulary,
};

pub use shrink::{
    reduce_expression_height, shrink_algebraic, shrink_leaves, shrink_tree_of_structures, shrink_word_of_structures,
    wqo_scan_marked_words, AlgebraReport, AlgebraVerdicts, AlgebraicShrink, ComposedShrink, HeightReduction, KeepWhole,
    LeafShrink, LeafShrinker, TreeLeaves, WordLeaves,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    Union,
    Complement,
    Product,
    Tensor,
    Bowtie,
}

impl Op {
    pub fn arity(self) -> usize {
        match self {
            Op::Complement => 1,
            _ => 2,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Op::Union => "u",
            Op::Complement => "!",
            Op::Product => "x",
            Op::Tensor => "t",
            Op::Bowtie => "bw",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Op> {
        Some(match s {
            "u" => Op::Union,
            "!" => Op::Complement,
            "x" => Op::Product,
            "t" => Op::Tensor,
            "bw" => Op::Bowtie,
            _ => return None,
        })
    }
}

/// A leaf or an operation node. Node positions are addressed by paths of
/// child indices from the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExpressionTree {
    Leaf { name: String, structure: Structure },
    Node { op: Op, children: Vec<ExpressionTree> },
}

pub type Path = Vec<usize>;

/// Where each element of an evaluated {u, !, bw}-tree comes from: the leaf
/// index in pre-order and the element of that leaf.
pub type Provenance = Vec<(usize, Element)>;

impl ExpressionTree {
    pub fn leaf(name: impl Into<String>, structure: Structure) -> Self {
        ExpressionTree::Leaf {
            name: name.into(),
            structure,
        }
    }

    pub fn node(op: Op, children: Vec<ExpressionTree>) -> Result<Self> {
        if children.len() != op.arity() {
            return Err(Error::InvalidStructure(format!(
                "`{}` takes {} operand(s), got {}",
                op.symbol(),
                op.arity(),
                children.len()
            )));
        }
        Ok(ExpressionTree::Node { op, children })
    }

    pub fn union(a: Self, b: Self) -> Self {
        ExpressionTree::Node {
            op: Op::Union,
            children: vec![a, b],
        }
    }

    pub fn complement(a: Self) -> Self {
        ExpressionTree::Node {
            op: Op::Complement,
            children: vec![a],
        }
    }

    pub fn bowtie(a: Self, b: Self) -> Self {
        ExpressionTree::Node {
            op: Op::Bowtie,
            children: vec![a, b],
        }
    }

    pub fn product(a: Self, b: Self) -> Self {
        ExpressionTree::Node {
            op: Op::Product,
            children: vec![a, b],
        }
    }

    pub fn tensor(a: Self, b: Self) -> Self {
        ExpressionTree::Node {
            op: Op::Tensor,
            children: vec![a, b],
        }
    }

    pub fn children(&self) -> &[ExpressionTree] {
        match self {
            ExpressionTree::Leaf { .. } => &[],
            ExpressionTree::Node { children, .. } => children,
        }
    }

    pub fn op(&self) -> Option<Op> {
        match self {
            ExpressionTree::Leaf { .. } => None,
            ExpressionTree::Node { op, .. } => Some(*op),
        }
    }

    /// Leaf structures in pre-order.
    pub fn leaves(&self) -> Vec<&Structure> {
        let mut out = Vec::new();
        self.walk(&mut |t| {
            if let ExpressionTree::Leaf { structure, .. } = t {
                out.push(structure);
            }
        });
        out
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            ExpressionTree::Leaf { .. } => 1,
            ExpressionTree::Node { children, .. } => children.iter().map(Self::leaf_count).sum(),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(Self::node_count).sum::<usize>()
    }

    /// Edges on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        self.children().iter().map(|c| c.height() + 1).max().unwrap_or(0)
    }

    pub fn ops_used(&self) -> BTreeSet<Op> {
        let mut out = BTreeSet::new();
        self.walk(&mut |t| {
            if let Some(op) = t.op() {
                out.insert(op);
            }
        });
        out
    }

    fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a ExpressionTree)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Paths of all nodes in pre-order.
    pub fn paths(&self) -> Vec<Path> {
        fn go(t: &ExpressionTree, cur: &mut Path, out: &mut Vec<Path>) {
            out.push(cur.clone());
            for (i, c) in t.children().iter().enumerate() {
                cur.push(i);
                go(c, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn at(&self, path: &[usize]) -> Option<&ExpressionTree> {
        path.iter().try_fold(self, |t, &i| t.children().get(i))
    }

    fn at_mut(&mut self, path: &[usize]) -> Option<&mut ExpressionTree> {
        let mut cur = self;
        for &i in path {
            cur = match cur {
                ExpressionTree::Leaf { .. } => return None,
                ExpressionTree::Node { children, .. } => children.get_mut(i)?,
            };
        }
        Some(cur)
    }

    /// Pre-order index of the first leaf at or below `path`, and the number
    /// of leaves there.
    pub fn leaf_range(&self, path: &[usize]) -> Option<std::ops::Range<usize>> {
        let mut start = 0;
        let mut cur = self;
        for &i in path {
            let ch = cur.children();
            start += ch.get(..i)?.iter().map(Self::leaf_count).sum::<usize>();
            cur = ch.get(i)?;
        }
        Some(start..start + cur.leaf_count())
    }

    /// The common vocabulary of the leaves; fails when leaves disagree or
    /// carry constants.
    pub fn vocabulary(&self) -> Result<Vocabulary> {
        let leaves = self.leaves();
        let first = leaves[0];
        for l in &leaves {
            l.require_no_constants("expression tree")?;
            if l.vocab() != first.vocab() {
                return Err(Error::VocabularyMismatch);
            }
        }
        Ok(first.vocab().clone())
    }

    pub fn eval(&self) -> Result<Structure> {
        match self {
            ExpressionTree::Leaf { structure, .. } => Ok(structure.clone()),
            ExpressionTree::Node { op, children } => {
                if children.len() != op.arity() {
                    return Err(Error::InvalidStructure(format!("bad arity at `{}`", op.symbol())));
                }
                let a = children[0].eval()?;
                match op {
                    Op::Complement => complement(&a),
                    _ => {
                        let b = children[1].eval()?;
                        match op {
                            Op::Union => disjoint_union(&a, &b),
                            Op::Product => cartesian_product(&a, &b),
                            Op::Tensor => tensor_product(&a, &b),
                            Op::Bowtie => bowtie(&a, &b),
                            Op::Complement => unreachable!(),
                        }
                    }
                }
            }
        }
    }

    /// Evaluation together with the leaf origin of every element. Products
    /// mix leaves and are rejected.
    pub fn eval_with_provenance(&self) -> Result<(Structure, Provenance)> {
        if let Some(op) = self
            .ops_used()
            .into_iter()
            .find(|o| matches!(o, Op::Product | Op::Tensor))
        {
            return Err(Error::Unsupported(format!("provenance through `{}`", op.symbol())));
        }
        let s = self.eval()?;
        let mut prov = Vec::with_capacity(s.size());
        for (i, leaf) in self.leaves().iter().enumerate() {
            prov.extend((0..leaf.size()).map(|e| (i, e)));
        }
        debug_assert_eq!(prov.len(), s.size());
        Ok((s, prov))
    }

    /// Rewrites a {u, !, bw}-tree so that `!` only occurs directly above
    /// leaves, using `!!A = A`, `!(A u B) = (!A) bw (!B)` and
    /// `!(A bw B) = (!A) u (!B)`.
    pub fn push_complement(&self) -> Result<ExpressionTree> {
        fn push(t: &ExpressionTree, neg: bool) -> Result<ExpressionTree> {
            match t {
                ExpressionTree::Leaf { .. } => Ok(if neg {
                    ExpressionTree::complement(t.clone())
                } else {
                    t.clone()
                }),
                ExpressionTree::Node { op, children } => match (op, neg) {
                    (Op::Complement, _) => push(&children[0], !neg),
                    (Op::Union, false) | (Op::Bowtie, true) => Ok(ExpressionTree::union(
                        push(&children[0], neg)?,
                        push(&children[1], neg)?,
                    )),
                    (Op::Union, true) | (Op::Bowtie, false) => Ok(ExpressionTree::bowtie(
                        push(&children[0], neg)?,
                        push(&children[1], neg)?,
                    )),
                    (Op::Product | Op::Tensor, _) => Err(Error::Unsupported(format!(
                        "complement push-down through `{}`",
                        op.symbol()
                    ))),
                },
            }
        }
        push(self, false)
    }

    /// True when the tree uses only `u` and `bw`, with `!` allowed directly
    /// above leaves.
    pub fn is_pushed(&self) -> bool {
        match self {
            ExpressionTree::Leaf { .. } => true,
            ExpressionTree::Node { op, children } => match op {
                Op::Complement => matches!(children[0], ExpressionTree::Leaf { .. }),
                Op::Union | Op::Bowtie => children.iter().all(Self::is_pushed),
                _ => false,
            },
        }
    }

    /// Rewrites every `A bw B` as `!((!A) u (!B))`, giving a {u, !}-tree.
    /// Complementing an operand that is itself a complement strips it.
    pub fn expand_bowtie(&self) -> ExpressionTree {
        match self {
            ExpressionTree::Leaf { .. } => self.clone(),
            ExpressionTree::Node { op, children } => {
                let ch: Vec<ExpressionTree> = children.iter().map(Self::expand_bowtie).collect();
                match op {
                    Op::Bowtie => {
                        let mut it = ch.into_iter();
                        let a = it.next().expect("binary");
                        let b = it.next().expect("binary");
                        ExpressionTree::complement(ExpressionTree::union(negate(a), negate(b)))
                    }
                    _ => ExpressionTree::Node { op: *op, children: ch },
                }
            }
        }
    }

    /// Replaces the subtree at `target` by a copy of the subtree at `source`.
    pub(crate) fn splice(&self, target: &[usize], source: &[usize]) -> Result<ExpressionTree> {
        let replacement = self
            .at(source)
            .ok_or_else(|| Error::InvalidStructure("no node at source path".into()))?
            .clone();
        let mut out = self.clone();
        let slot = out
            .at_mut(target)
            .ok_or_else(|| Error::InvalidStructure("no node at target path".into()))?;
        *slot = replacement;
        Ok(out)
    }

    /// Replaces leaf structures in pre-order.
    pub(crate) fn with_leaves(&self, leaves: &mut impl Iterator<Item = Structure>) -> ExpressionTree {
        match self {
            ExpressionTree::Leaf { name, .. } => ExpressionTree::Leaf {
                name: name.clone(),
                structure: leaves.next().expect("enough leaves"),
            },
            ExpressionTree::Node { op, children } => ExpressionTree::Node {
                op: *op,
                children: children.iter().map(|c| c.with_leaves(leaves)).collect(),
            },
        }
    }

    /// Leaf names and structures in pre-order, for writing a structure file
    /// alongside the s-expression.
    pub fn named_leaves(&self) -> Vec<(&str, &Structure)> {
        let mut out = Vec::new();
        self.walk(&mut |t| {
            if let ExpressionTree::Leaf { name, structure } = t {
                out.push((name.as_str(), structure));
            }
        });
        out
    }
}

fn negate(t: ExpressionTree) -> ExpressionTree {
    match t {
        ExpressionTree::Node {
            op: Op::Complement,
            mut children,
        } => children.pop().expect("unary"),
        other => ExpressionTree::complement(other),
    }
}

impl fmt::Display for ExpressionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExpressionTree::Leaf { name, .. } => f.write_str(name),
            ExpressionTree::Node { op, children } => {
                write!(f, "({}", op.symbol())?;
                for c in children {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open,
    Close,
    Atom(String),
}

fn tokenize(text: &str) -> Vec<(usize, usize, Token)> {
    let mut out = Vec::new();
    for (li, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let mut chars = line.char_indices().peekable();
        while let Some((ci, c)) = chars.next() {
            let at = (li + 1, ci + 1);
            match c {
                '(' => out.push((at.0, at.1, Token::Open)),
                ')' => out.push((at.0, at.1, Token::Close)),
                c if c.is_whitespace() => {}
                _ => {
                    let mut atom = String::from(c);
                    while let Some(&(_, d)) = chars.peek() {
                        if d == '(' || d == ')' || d.is_whitespace() {
                            break;
                        }
                        atom.push(d);
                        chars.next();
                    }
                    out.push((at.0, at.1, Token::Atom(atom)));
                }
            }
        }
    }
    out
}

/// Parses an s-expression, resolving leaf names in `leaves`.
pub fn parse_expression(text: &str, leaves: &HashMap<String, Structure>) -> Result<ExpressionTree> {
    let tokens = tokenize(text);
    let mut pos = 0;
    let tree = parse_node(&tokens, &mut pos, leaves)?;
    if let Some((l, c, _)) = tokens.get(pos) {
        return Err(Error::parse(*l, *c, "trailing input after expression"));
    }
    tree.vocabulary()?;
    Ok(tree)
}

fn parse_node(
    tokens: &[(usize, usize, Token)],
    pos: &mut usize,
    leaves: &HashMap<String, Structure>,
) -> Result<ExpressionTree> {
    let (l, c, tok) = tokens
        .get(*pos)
        .ok_or_else(|| Error::parse(tokens.last().map_or(1, |t| t.0), 1, "unexpected end of expression"))?;
    *pos += 1;
    match tok {
        Token::Atom(name) => leaves
            .get(name)
            .map(|s| ExpressionTree::leaf(name.clone(), s.clone()))
            .ok_or_else(|| Error::parse(*l, *c, format!("unknown structure `{name}`"))),
        Token::Close => Err(Error::parse(*l, *c, "unexpected `)`")),
        Token::Open => {
            let op = match tokens.get(*pos) {
                Some((_, _, Token::Atom(s))) => {
                    Op::from_symbol(s).ok_or_else(|| Error::parse(*l, *c, format!("unknown operation `{s}`")))?
                }
                _ => return Err(Error::parse(*l, *c, "expected an operation after `(`")),
            };
            *pos += 1;
            let mut children = Vec::new();
            loop {
                match tokens.get(*pos) {
                    Some((_, _, Token::Close)) => {
                        *pos += 1;
                        break;
                    }
                    Some(_) => children.push(parse_node(tokens, pos, leaves)?),
                    None => return Err(Error::parse(*l, *c, "unclosed `(`")),
                }
            }
            ExpressionTree::node(op, children).map_err(|e| Error::parse(*l, *c, e.to_string()))
        }
    }
}
