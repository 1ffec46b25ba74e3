//! Recursive-descent parser.
//!
//! ```text
//! formula := quant | imp
//! quant   := ("exists" | "forall") IDENT "." formula
//! imp     := or ["->" formula]
//! or      := and {"|" and}
//! and     := unary {"&" unary}
//! unary   := "!" unary | quant | primary
//! primary := "(" formula ")" | "true" | "false"
//!          | IDENT "(" term {"," term} ")" | term "=" term
//! ```

use super::{Formula, Term};
use crate::error::{Error, Result};
use crate::structures::Vocabulary;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Equals,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        };
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            '!' => Some(Tok::Bang),
            '&' => Some(Tok::Amp),
            '|' => Some(Tok::Pipe),
            '=' => Some(Tok::Equals),
            _ => None,
        };
        if let Some(tok) = single {
            bump(&mut chars);
            out.push(Token {
                tok,
                line: l,
                column: col,
            });
        } else if c.is_whitespace() {
            bump(&mut chars);
        } else if c == '-' {
            bump(&mut chars);
            if chars.peek() != Some(&'>') {
                return Err(Error::parse(l, col, "expected `->`"));
            }
            bump(&mut chars);
            out.push(Token {
                tok: Tok::Arrow,
                line: l,
                column: col,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    s.push(d);
                    bump(&mut chars);
                } else {
                    break;
                }
            }
            out.push(Token {
                tok: Tok::Ident(s),
                line: l,
                column: col,
            });
        } else {
            return Err(Error::parse(l, col, format!("unexpected character `{c}`")));
        }
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column,
    });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    vocab: Option<&'a Vocabulary>,
    bound: Vec<String>,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, tok: &Token, msg: impl Into<String>) -> Result<T> {
        Err(Error::parse(tok.line, tok.column, msg))
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            self.error(&t, format!("expected {what}, found {}", describe(&t.tok)))
        }
    }

    fn is_quantifier(&self) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == "exists" || s == "forall")
    }

    fn formula(&mut self) -> Result<Formula> {
        if self.is_quantifier() {
            self.quant()
        } else {
            self.imp()
        }
    }

    fn quant(&mut self) -> Result<Formula> {
        let kw = self.next();
        let var_tok = self.next();
        let var = match var_tok.tok {
            Tok::Ident(ref s) if !is_keyword(s) => s.clone(),
            ref other => return self.error(&var_tok, format!("expected a variable, found {}", describe(other))),
        };
        self.expect(Tok::Dot, "`.`")?;
        self.bound.push(var.clone());
        let body = self.formula();
        self.bound.pop();
        let body = Box::new(body?);
        Ok(match kw.tok {
            Tok::Ident(ref s) if s == "exists" => Formula::Exists(var, body),
            _ => Formula::Forall(var, body),
        })
    }

    fn imp(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        if self.peek().tok == Tok::Arrow {
            self.next();
            let rhs = self.formula()?;
            return Ok(Formula::Imp(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut parts = vec![self.and()?];
        while self.peek().tok == Tok::Pipe {
            self.next();
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().expect("one part")
        } else {
            Formula::Or(parts)
        })
    }

    fn and(&mut self) -> Result<Formula> {
        let mut parts = vec![self.unary()?];
        while self.peek().tok == Tok::Amp {
            self.next();
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().expect("one part")
        } else {
            Formula::And(parts)
        })
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.peek().tok == Tok::Bang {
            self.next();
            return Ok(Formula::Not(Box::new(self.unary()?)));
        }
        if self.is_quantifier() {
            return self.quant();
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula> {
        let t = self.next();
        match t.tok {
            Tok::LParen => {
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(ref s) if s == "true" => Ok(Formula::True),
            Tok::Ident(ref s) if s == "false" => Ok(Formula::False),
            Tok::Ident(ref name) if !is_keyword(name) => {
                if self.peek().tok == Tok::LParen {
                    self.next();
                    let mut args = vec![self.term()?];
                    while self.peek().tok == Tok::Comma {
                        self.next();
                        args.push(self.term()?);
                    }
                    self.expect(Tok::RParen, "`)` or `,`")?;
                    self.check_atom(&t, name, args.len())?;
                    Ok(Formula::Atom {
                        pred: name.clone(),
                        args,
                    })
                } else {
                    let lhs = self.resolve(&t, name)?;
                    self.expect(Tok::Equals, "`=` or `(`")?;
                    let rhs = self.term()?;
                    Ok(Formula::Eq(lhs, rhs))
                }
            }
            ref other => self.error(&t, format!("unexpected {}", describe(other))),
        }
    }

    fn term(&mut self) -> Result<Term> {
        let t = self.next();
        match t.tok {
            Tok::Ident(ref s) if !is_keyword(s) => self.resolve(&t, s),
            ref other => self.error(&t, format!("expected a term, found {}", describe(other))),
        }
    }

    fn resolve(&self, tok: &Token, name: &str) -> Result<Term> {
        if self.bound.iter().any(|b| b == name) {
            return Ok(Term::Var(name.to_string()));
        }
        match self.vocab {
            Some(v) if v.constant_index(name).is_some() => Ok(Term::Const(name.to_string())),
            Some(v) if v.predicate_index(name).is_some() => {
                self.error(tok, format!("predicate `{name}` used as a term"))
            }
            _ => Ok(Term::Var(name.to_string())),
        }
    }

    fn check_atom(&self, tok: &Token, name: &str, found: usize) -> Result<()> {
        let Some(v) = self.vocab else { return Ok(()) };
        match v.predicate_index(name) {
            None => Err(Error::UnknownPredicate(name.to_string())),
            Some(i) if v.predicates()[i].arity != found => Err(Error::ArityMismatch {
                name: name.to_string(),
                expected: v.predicates()[i].arity,
                found,
            }),
            Some(_) => Ok(()),
        }
        .map_err(|e| Error::parse(tok.line, tok.column, e.to_string()))
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "exists" | "forall" | "true" | "false")
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Bang => "`!`".into(),
        Tok::Amp => "`&`".into(),
        Tok::Pipe => "`|`".into(),
        Tok::Arrow => "`->`".into(),
        Tok::Equals => "`=`".into(),
        Tok::End => "end of input".into(),
    }
}

fn run(text: &str, vocab: Option<&Vocabulary>) -> Result<Formula> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        vocab,
        bound: Vec::new(),
    };
    let f = p.formula()?;
    let t = p.next();
    if t.tok != Tok::End {
        return p.error(&t, format!("unexpected {} after formula", describe(&t.tok)));
    }
    Ok(f)
}

/// Parses without a vocabulary: every term is a variable and predicate names
/// are not checked.
pub fn parse_formula(text: &str) -> Result<Formula> {
    run(text, None)
}

/// Parses against `vocab`: unbound names of constants become constant terms,
/// and predicate names and arities are checked.
pub fn parse_formula_in(text: &str, vocab: &Vocabulary) -> Result<Formula> {
    run(text, Some(vocab))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(a: &str, b: &str) -> Formula {
        Formula::atom("E", vec![Term::var(a), Term::var(b)])
    }

    #[test]
    fn quantifier_prefix() {
        let f = parse_formula("exists x. forall y. E(x,y)").unwrap();
        assert_eq!(f, Formula::exists("x", Formula::forall("y", e("x", "y"))));
    }

    #[test]
    fn precedence() {
        let f = parse_formula("!E(a,b) & E(b,c) | E(c,d) -> E(d,e)").unwrap();
        let expected = Formula::Imp(
            Box::new(Formula::Or(vec![
                Formula::And(vec![Formula::Not(Box::new(e("a", "b"))), e("b", "c")]),
                e("c", "d"),
            ])),
            Box::new(e("d", "e")),
        );
        assert_eq!(f, expected);
        let g = parse_formula("E(a,a) -> E(b,b) -> E(c,c)").unwrap();
        assert!(matches!(g, Formula::Imp(_, ref r) if matches!(**r, Formula::Imp(..))));
    }

    #[test]
    fn syntax_errors_have_positions() {
        match parse_formula("E(x") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (1, 4)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_formula("exists . E(x,x)").is_err());
        assert!(parse_formula("E(x,y) E(y,x)").is_err());
        assert!(parse_formula("x - y").is_err());
    }

    #[test]
    fn vocabulary_checks() {
        let v = Vocabulary::new([("E", 2)], ["c"]).unwrap();
        let f = parse_formula_in("exists x. E(x,c) & x = c", &v).unwrap();
        let want = Formula::exists(
            "x",
            Formula::And(vec![
                Formula::atom("E", vec![Term::var("x"), Term::constant("c")]),
                Formula::Eq(Term::var("x"), Term::constant("c")),
            ]),
        );
        assert_eq!(f, want);
        assert!(parse_formula_in("P(x)", &v).is_err());
        assert!(parse_formula_in("E(x)", &v).is_err());
        // A bound variable shadows a constant of the same name.
        let g = parse_formula_in("forall c. E(c,c)", &v).unwrap();
        assert_eq!(g, Formula::forall("c", e("c", "c")));
    }

    #[test]
    fn boolean_keywords() {
        assert_eq!(
            parse_formula("true | false").unwrap(),
            Formula::Or(vec![Formula::True, Formula::False])
        );
    }
}
