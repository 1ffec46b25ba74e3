use std::fmt;

use super::{Formula, Term};

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Binding strength; operands bind at least as tightly as their context.
fn level(f: &Formula) -> u8 {
    match unwrap_singleton(f) {
        Formula::Exists(..) | Formula::Forall(..) => 0,
        Formula::Imp(..) => 1,
        Formula::Or(fs) if fs.len() > 1 => 2,
        Formula::And(fs) if fs.len() > 1 => 3,
        Formula::Eq(..) => 4,
        _ => 5,
    }
}

fn unwrap_singleton(f: &Formula) -> &Formula {
    match f {
        Formula::And(fs) | Formula::Or(fs) if fs.len() == 1 => unwrap_singleton(&fs[0]),
        other => other,
    }
}

fn operand(out: &mut fmt::Formatter<'_>, f: &Formula, min_level: u8) -> fmt::Result {
    if level(f) < min_level {
        write!(out, "({f})")
    } else {
        write!(out, "{f}")
    }
}

fn join(out: &mut fmt::Formatter<'_>, fs: &[Formula], sep: &str, min_level: u8) -> fmt::Result {
    for (i, g) in fs.iter().enumerate() {
        if i > 0 {
            out.write_str(sep)?;
        }
        operand(out, g, min_level)?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => out.write_str("true"),
            Formula::False => out.write_str("false"),
            Formula::Atom { pred, args } => {
                write!(out, "{pred}(")?;
                for (i, t) in args.iter().enumerate() {
                    if i > 0 {
                        out.write_str(",")?;
                    }
                    write!(out, "{t}")?;
                }
                out.write_str(")")
            }
            Formula::Eq(a, b) => write!(out, "{a} = {b}"),
            Formula::Not(g) => {
                out.write_str("!")?;
                operand(out, g, 5)
            }
            Formula::And(fs) if fs.is_empty() => out.write_str("true"),
            Formula::Or(fs) if fs.is_empty() => out.write_str("false"),
            Formula::And(fs) if fs.len() == 1 => write!(out, "{}", fs[0]),
            Formula::Or(fs) if fs.len() == 1 => write!(out, "{}", fs[0]),
            Formula::And(fs) => join(out, fs, " & ", 4),
            Formula::Or(fs) => join(out, fs, " | ", 3),
            Formula::Imp(a, b) => {
                operand(out, a, 2)?;
                out.write_str(" -> ")?;
                operand(out, b, 1)
            }
            Formula::Exists(v, g) => write!(out, "exists {v}. {g}"),
            Formula::Forall(v, g) => write!(out, "forall {v}. {g}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_formula;

    #[test]
    fn prints_canonically() {
        for text in [
            "exists x. forall y. E(x,y)",
            "!E(a,b) & E(b,c) | E(c,d) -> E(d,e)",
            "(E(a,b) -> E(b,c)) -> E(c,d)",
            "E(a,b) -> E(b,c) -> E(c,d)",
            "(E(a,b) | E(b,c)) & !(x = y)",
            "(E(a,b) & E(b,c)) & E(c,c)",
            "E(a,a) & (exists x. E(x,a))",
            "!(forall x. x = x)",
            "true | false",
        ] {
            let f = parse_formula(text).unwrap();
            assert_eq!(f.to_string(), text);
            assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
        }
    }
}
