use std::collections::HashMap;

use super::{Formula, Term};
use crate::error::{Error, Result};
use crate::structures::{Element, Structure, Vocabulary};

#[derive(Debug, Clone, Copy)]
enum Arg {
    Slot(usize),
    Const(usize),
}

#[derive(Debug, Clone)]
enum Node {
    Bool(bool),
    Atom(usize, Vec<Arg>),
    Eq(Arg, Arg),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Exists(usize, Box<Node>),
    Forall(usize, Box<Node>),
}

/// A formula resolved against a vocabulary, with variables mapped to slots.
/// The listed free variables occupy the first slots, in order.
#[derive(Debug, Clone)]
pub struct CompiledFormula {
    vocab: Vocabulary,
    free: Vec<String>,
    slots: usize,
    root: Node,
}

struct Compiler<'a> {
    vocab: &'a Vocabulary,
    scope: Vec<(String, usize)>,
    next: usize,
}

impl Compiler<'_> {
    fn arg(&self, t: &Term) -> Result<Arg> {
        match t {
            Term::Var(v) => self
                .scope
                .iter()
                .rev()
                .find(|(n, _)| n == v)
                .map(|&(_, s)| Arg::Slot(s))
                .ok_or_else(|| Error::UnassignedVariable(v.clone())),
            Term::Const(c) => self
                .vocab
                .constant_index(c)
                .map(Arg::Const)
                .ok_or_else(|| Error::UnknownConstant(c.clone())),
        }
    }

    fn node(&mut self, f: &Formula) -> Result<Node> {
        Ok(match f {
            Formula::True => Node::Bool(true),
            Formula::False => Node::Bool(false),
            Formula::Atom { pred, args } => {
                let idx = self
                    .vocab
                    .predicate_index(pred)
                    .ok_or_else(|| Error::UnknownPredicate(pred.clone()))?;
                let arity = self.vocab.predicates()[idx].arity;
                if arity != args.len() {
                    return Err(Error::ArityMismatch {
                        name: pred.clone(),
                        expected: arity,
                        found: args.len(),
                    });
                }
                Node::Atom(idx, args.iter().map(|t| self.arg(t)).collect::<Result<_>>()?)
            }
            Formula::Eq(a, b) => Node::Eq(self.arg(a)?, self.arg(b)?),
            Formula::Not(g) => Node::Not(Box::new(self.node(g)?)),
            Formula::And(gs) => Node::And(gs.iter().map(|g| self.node(g)).collect::<Result<_>>()?),
            Formula::Or(gs) => Node::Or(gs.iter().map(|g| self.node(g)).collect::<Result<_>>()?),
            Formula::Imp(a, b) => Node::Or(vec![Node::Not(Box::new(self.node(a)?)), self.node(b)?]),
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let slot = self.next;
                self.next += 1;
                self.scope.push((v.clone(), slot));
                let body = self.node(g);
                self.scope.pop();
                let body = Box::new(body?);
                if matches!(f, Formula::Exists(..)) {
                    Node::Exists(slot, body)
                } else {
                    Node::Forall(slot, body)
                }
            }
        })
    }
}

impl CompiledFormula {
    /// Compiles `f` with `free` as its parameter list. Every free variable of
    /// `f` must be listed.
    pub fn new(f: &Formula, vocab: &Vocabulary, free: &[String]) -> Result<Self> {
        let mut c = Compiler {
            vocab,
            scope: free.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect(),
            next: free.len(),
        };
        let root = c.node(f)?;
        Ok(CompiledFormula {
            vocab: vocab.clone(),
            free: free.to_vec(),
            slots: c.next,
            root,
        })
    }

    pub fn sentence(f: &Formula, vocab: &Vocabulary) -> Result<Self> {
        Self::new(f, vocab, &[])
    }

    pub fn free_variables(&self) -> &[String] {
        &self.free
    }

    /// Evaluates with `args[i]` assigned to the i-th listed free variable.
    pub fn eval(&self, s: &Structure, args: &[Element]) -> Result<bool> {
        if s.vocab() != &self.vocab {
            return Err(Error::VocabularyMismatch);
        }
        if args.len() != self.free.len() {
            return Err(Error::UnassignedVariable(
                self.free.get(args.len()).cloned().unwrap_or_default(),
            ));
        }
        if let Some(&e) = args.iter().find(|&&e| e >= s.size()) {
            return Err(Error::InvalidElement(e));
        }
        let mut env = vec![0; self.slots];
        env[..args.len()].copy_from_slice(args);
        let mut buf = Vec::new();
        Ok(run(&self.root, s, &mut env, &mut buf))
    }
}

#[inline]
fn value(a: Arg, s: &Structure, env: &[Element]) -> Element {
    match a {
        Arg::Slot(i) => env[i],
        Arg::Const(c) => s.constant_values()[c],
    }
}

fn run(n: &Node, s: &Structure, env: &mut Vec<Element>, buf: &mut Vec<Element>) -> bool {
    match n {
        Node::Bool(b) => *b,
        Node::Atom(p, args) => {
            let start = buf.len();
            buf.extend(args.iter().map(|&a| value(a, s, env)));
            let r = s.holds(*p, &buf[start..]);
            buf.truncate(start);
            r
        }
        Node::Eq(a, b) => value(*a, s, env) == value(*b, s, env),
        Node::Not(g) => !run(g, s, env, buf),
        Node::And(gs) => gs.iter().all(|g| run(g, s, env, buf)),
        Node::Or(gs) => gs.iter().any(|g| run(g, s, env, buf)),
        Node::Exists(slot, g) => (0..s.size()).any(|e| {
            env[*slot] = e;
            run(g, s, env, buf)
        }),
        Node::Forall(slot, g) => (0..s.size()).all(|e| {
            env[*slot] = e;
            run(g, s, env, buf)
        }),
    }
}

/// Tarskian truth of `f` in `s` under `assignment`.
pub fn evaluate(s: &Structure, f: &Formula, assignment: &HashMap<String, Element>) -> Result<bool> {
    let free: Vec<String> = f.free_variables().into_iter().collect();
    let mut args = Vec::with_capacity(free.len());
    for v in &free {
        args.push(*assignment.get(v).ok_or_else(|| Error::UnassignedVariable(v.clone()))?);
    }
    CompiledFormula::new(f, s.vocab(), &free)?.eval(s, &args)
}

/// Truth of a sentence.
pub fn holds(s: &Structure, f: &Formula) -> Result<bool> {
    evaluate(s, f, &HashMap::new())
}
