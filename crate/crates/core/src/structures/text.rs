//! Line-oriented text format for structures.
//!
//! ```text
//! # a directed edge with a marked endpoint
//! structure edge
//! vocab: E/2, c
//! universe: 2
//! E: (0,1)
//! const c = 0
//! ```
//!
//! In the `vocab` line a bare name declares a constant symbol. Predicates
//! without a line are empty.

use std::fmt::Write as _;

use super::{Element, Structure, Vocabulary};
use crate::error::{Error, Result};

struct Block {
    name: String,
    line: usize,
    vocab: Option<Vocabulary>,
    universe: Option<usize>,
    relations: Vec<Vec<Vec<Element>>>,
    constants: Vec<Option<Element>>,
}

impl Block {
    fn new(name: String, line: usize) -> Self {
        Block {
            name,
            line,
            vocab: None,
            universe: None,
            relations: Vec::new(),
            constants: Vec::new(),
        }
    }

    fn vocab(&self, line: usize) -> Result<&Vocabulary> {
        self.vocab
            .as_ref()
            .ok_or_else(|| Error::parse(line, 1, "the vocab line must come first"))
    }

    fn finish(self) -> Result<(String, Structure)> {
        let at = |msg: String| Error::parse(self.line, 1, msg);
        let vocab = self
            .vocab
            .ok_or_else(|| at(format!("structure `{}` has no vocab line", self.name)))?;
        let size = self
            .universe
            .ok_or_else(|| at(format!("structure `{}` has no universe line", self.name)))?;
        let mut constants = Vec::with_capacity(self.constants.len());
        for (name, c) in vocab.constants().iter().zip(&self.constants) {
            constants
                .push(c.ok_or_else(|| Error::parse(self.line, 1, format!("constant `{name}` is not interpreted")))?);
        }
        let s = Structure::new(vocab, size, self.relations, constants)
            .map_err(|e| Error::parse(self.line, 1, format!("structure `{}`: {e}", self.name)))?;
        Ok((self.name, s))
    }
}

/// Parses every `structure` block in `text`, in order.
pub fn parse_structures(text: &str) -> Result<Vec<(String, Structure)>> {
    let mut out = Vec::new();
    let mut current: Option<Block> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("structure") {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                if let Some(b) = current.take() {
                    out.push(b.finish()?);
                }
                let name = rest.trim();
                if name.is_empty() {
                    return Err(Error::parse(line_no, 1, "structure name missing"));
                }
                current = Some(Block::new(name.to_string(), line_no));
                continue;
            }
        }
        let block = current
            .as_mut()
            .ok_or_else(|| Error::parse(line_no, 1, "expected `structure NAME`"))?;
        if let Some(rest) = line.strip_prefix("const ") {
            let (name, value) = rest
                .split_once('=')
                .ok_or_else(|| Error::parse(line_no, 1, "expected `const NAME = ELEMENT`"))?;
            let name = name.trim();
            let idx = block
                .vocab(line_no)?
                .constant_index(name)
                .ok_or_else(|| Error::parse(line_no, 7, format!("unknown constant `{name}`")))?;
            block.constants[idx] = Some(parse_number(value.trim(), line_no)?);
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| Error::parse(line_no, 1, format!("unrecognised line `{line}`")))?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "vocab" => {
                let vocab = parse_vocab(value, line_no)?;
                block.relations = vec![Vec::new(); vocab.predicates().len()];
                block.constants = vec![None; vocab.constants().len()];
                block.vocab = Some(vocab);
            }
            "universe" => block.universe = Some(parse_number(value, line_no)?),
            pred => {
                let vocab = block.vocab(line_no)?;
                let idx = vocab
                    .predicate_index(pred)
                    .ok_or_else(|| Error::parse(line_no, 1, format!("unknown predicate `{pred}`")))?;
                let tuples = parse_tuples(value, line_no, key.len() + 2)?;
                block.relations[idx].extend(tuples);
            }
        }
    }
    if let Some(b) = current.take() {
        out.push(b.finish()?);
    }
    Ok(out)
}

fn parse_number(s: &str, line: usize) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::parse(line, 1, format!("expected a number, found `{s}`")))
}

impl std::str::FromStr for Vocabulary {
    type Err = Error;

    /// Parses the `vocab:` line syntax, e.g. `E/2, P/1, c`.
    fn from_str(s: &str) -> Result<Self> {
        parse_vocab(s, 1)
    }
}

fn parse_vocab(value: &str, line: usize) -> Result<Vocabulary> {
    let mut vocab = Vocabulary::default();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let res = match item.split_once('/') {
            Some((name, arity)) => vocab.with_predicate(name.trim(), parse_number(arity.trim(), line)?),
            None => vocab.with_constant(item),
        };
        vocab = res.map_err(|e| Error::parse(line, 1, e.to_string()))?;
    }
    Ok(vocab)
}

/// Parses `(0,1) (2, 3)`; a bare number is a unary tuple.
fn parse_tuples(value: &str, line: usize, offset: usize) -> Result<Vec<Vec<Element>>> {
    let mut out = Vec::new();
    let mut rest = value;
    while !rest.trim_start().is_empty() {
        let trimmed = rest.trim_start();
        let col = offset + value.len() - trimmed.len() + 1;
        if let Some(inner) = trimmed.strip_prefix('(') {
            let end = inner
                .find(')')
                .ok_or_else(|| Error::parse(line, col, "unclosed tuple"))?;
            let tuple = inner[..end]
                .split(',')
                .map(|s| parse_number(s.trim(), line))
                .collect::<Result<Vec<_>>>()?;
            out.push(tuple);
            rest = &inner[end + 1..];
        } else {
            let end = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
            out.push(vec![parse_number(&trimmed[..end], line)?]);
            rest = &trimmed[end..];
        }
    }
    Ok(out)
}

/// Renders a structure in the text format accepted by [`parse_structures`].
pub fn format_structure(name: &str, s: &Structure) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "structure {name}");
    let mut items: Vec<String> = s
        .vocab()
        .predicates()
        .iter()
        .map(|p| format!("{}/{}", p.name, p.arity))
        .collect();
    items.extend(s.vocab().constants().iter().cloned());
    let _ = writeln!(out, "vocab: {}", items.join(", "));
    let _ = writeln!(out, "universe: {}", s.size());
    for (pi, p) in s.vocab().predicates().iter().enumerate() {
        let tuples: Vec<String> = s
            .tuples(pi)
            .map(|t| {
                let parts: Vec<String> = t.iter().map(ToString::to_string).collect();
                format!("({})", parts.join(","))
            })
            .collect();
        if tuples.is_empty() {
            let _ = writeln!(out, "{}:", p.name);
        } else {
            let _ = writeln!(out, "{}: {}", p.name, tuples.join(" "));
        }
    }
    for (c, v) in s.vocab().constants().iter().zip(s.constant_values()) {
        let _ = writeln!(out, "const {c} = {v}");
    }
    out
}

pub fn format_structures<'a, I>(items: I) -> String
where
    I: IntoIterator<Item = (&'a str, &'a Structure)>,
{
    items
        .into_iter()
        .map(|(n, s)| format_structure(n, s))
        .collect::<Vec<_>>()
        .join("\n")
}
