use super::{Formula, Term};
use crate::error::{Error, Result};
use crate::structures::Vocabulary;

/// Relativizes the sentence `phi` to the variables `xs`: every quantifier is
/// expanded into a finite disjunction (or the dual of one) ranging over `xs`
/// and the constants of `vocab`. The result is quantifier-free, its free
/// variables are among `xs`, and it holds of a tuple exactly when `phi` holds
/// in the substructure induced by the tuple together with the constants.
pub fn relativize(phi: &Formula, xs: &[String], vocab: &Vocabulary) -> Result<Formula> {
    let free: Vec<String> = phi.free_variables().into_iter().collect();
    if !free.is_empty() {
        return Err(Error::NotASentence(free));
    }
    if xs.is_empty() && !vocab.has_constants() {
        return Err(Error::Unsupported(
            "relativization needs at least one variable or constant".into(),
        ));
    }
    let range: Vec<Term> = xs
        .iter()
        .map(|x| Term::Var(x.clone()))
        .chain(vocab.constants().iter().map(|c| Term::Const(c.clone())))
        .collect();
    let mut env = Vec::new();
    Ok(rel(phi, &range, &mut env))
}

fn subst(t: &Term, env: &[(String, Term)]) -> Term {
    match t {
        Term::Var(v) => env
            .iter()
            .rev()
            .find(|(n, _)| n == v)
            .map(|(_, t)| t.clone())
            .expect("sentence has no free variables"),
        Term::Const(_) => t.clone(),
    }
}

fn rel(f: &Formula, range: &[Term], env: &mut Vec<(String, Term)>) -> Formula {
    match f {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::Atom { pred, args } => Formula::Atom {
            pred: pred.clone(),
            args: args.iter().map(|t| subst(t, env)).collect(),
        },
        Formula::Eq(a, b) => Formula::eq(subst(a, env), subst(b, env)),
        Formula::Not(g) => Formula::not(rel(g, range, env)),
        Formula::And(gs) => {
            let mut parts = Vec::with_capacity(gs.len());
            for g in gs {
                let r = rel(g, range, env);
                if r == Formula::False {
                    return Formula::False;
                }
                parts.push(r);
            }
            Formula::and(parts)
        }
        Formula::Or(gs) => {
            let mut parts = Vec::with_capacity(gs.len());
            for g in gs {
                let r = rel(g, range, env);
                if r == Formula::True {
                    return Formula::True;
                }
                parts.push(r);
            }
            Formula::or(parts)
        }
        Formula::Imp(a, b) => Formula::imp(rel(a, range, env), rel(b, range, env)),
        Formula::Exists(v, g) => expand(v, g, range, env),
        // forall v. g  ==  !exists v. !g
        Formula::Forall(v, g) => {
            let negated = Formula::Not(Box::new((**g).clone()));
            Formula::not(expand(v, &negated, range, env))
        }
    }
}

fn expand(v: &str, body: &Formula, range: &[Term], env: &mut Vec<(String, Term)>) -> Formula {
    let mut parts = Vec::with_capacity(range.len());
    for t in range {
        env.push((v.to_string(), t.clone()));
        let r = rel(body, range, env);
        env.pop();
        if r == Formula::True {
            return Formula::True;
        }
        parts.push(r);
    }
    Formula::or(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::folog::parse_formula;

    #[test]
    fn single_variable_example() {
        let phi = parse_formula("exists x. forall y. E(x,y)").unwrap();
        let r = relativize(&phi, &["x1".into()], &Vocabulary::graph()).unwrap();
        assert_eq!(r, parse_formula("E(x1,x1)").unwrap());
    }

    #[test]
    fn quantifier_free_is_unchanged() {
        let phi = parse_formula("true").unwrap();
        assert_eq!(relativize(&phi, &["x1".into()], &Vocabulary::graph()).unwrap(), phi);
    }

    #[test]
    fn rejects_free_variables() {
        let phi = parse_formula("E(x,x)").unwrap();
        assert!(matches!(
            relativize(&phi, &["x1".into()], &Vocabulary::graph()),
            Err(Error::NotASentence(_))
        ));
    }

    #[test]
    fn result_is_quantifier_free() {
        let phi = parse_formula("forall x. exists y. E(x,y) & !x = y").unwrap();
        let r = relativize(&phi, &["a".into(), "b".into()], &Vocabulary::graph()).unwrap();
        assert_eq!(r.quantifier_rank(), 0);
        assert!(r.free_variables().iter().all(|v| v == "a" || v == "b"));
    }
}
