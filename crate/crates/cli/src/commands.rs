use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use fmtk::algebra::{parse_expression, shrink_algebraic, KeepWhole, LeafShrinker, TreeLeaves, WordLeaves};
use fmtk::equiv::TypeSession;
use fmtk::folog::{parse_formula_in, CompiledFormula};
use fmtk::shrink::{format_trees, parse_trees, shrink_tree, shrink_word_marked, NamedTree};
use fmtk::structures::{all_structures, check_embedding, format_structure, parse_structures, Structure, Vocabulary};
use fmtk::translate::{find_cores, psc_check, translate_auto, translate_to_exists_forall, ClassSample};
use fmtk::wqo::{
    antichain_certificate, first_embedding_pair, make_cycle, make_gn, make_grid, make_hn, make_hn_gn_unguarded,
    make_linear_order, make_path, to_sk_pred,
};

use crate::report::{join, Report};
use crate::{ClassName, Cli, Command, GenClass, LeafKind};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_structures(path: &Path) -> Result<Vec<(String, Structure)>> {
    let items = parse_structures(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    if items.is_empty() {
        bail!("{} contains no structures", path.display());
    }
    Ok(items)
}

fn pick(items: Vec<(String, Structure)>, name: Option<&str>, path: &Path) -> Result<(String, Structure)> {
    match name {
        None => Ok(items.into_iter().next().expect("nonempty")),
        Some(n) => items
            .into_iter()
            .find(|(m, _)| m == n)
            .ok_or_else(|| anyhow!("no structure `{n}` in {}", path.display())),
    }
}

/// Strips `#` comments and joins lines.
fn formula_text(raw: &str) -> String {
    raw.lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .collect::<Vec<_>>()
        .join(" ")
}

/// The payload goes to `--out` or stdout; the report goes to stdout, or to
/// stderr when stdout already carries the payload.
fn emit(cli: &Cli, report: Report) -> Result<()> {
    match (&cli.out, &report.payload) {
        (Some(path), Some(payload)) => {
            fs::write(path, payload).with_context(|| format!("writing {}", path.display()))?;
            print!("{}", report.render());
        }
        (None, Some(payload)) => {
            print!("{payload}");
            eprint!("{}", report.render());
        }
        (_, None) => print!("{}", report.render()),
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    let mut report = match &cli.command {
        Command::Equiv { a, b, a_name, b_name } => equiv(cli, a, b, a_name.as_deref(), b_name.as_deref())?,
        Command::Shrink { file, name, marks } => shrink(cli, file, name.as_deref(), marks.as_deref())?,
        Command::Translate {
            formula,
            class,
            p,
            max_p,
            vocab,
        } => translate(cli, formula, *class, p, *max_p, vocab.as_deref())?,
        Command::Cores { file, formula } => cores(cli, file, formula)?,
        Command::WqoScan { file } => wqo_scan(file)?,
        Command::AlgebraEval { expr, structures } => algebra_eval(expr, structures)?,
        Command::AlgebraShrink {
            expr,
            structures,
            marks,
            leaf,
        } => algebra_shrink(cli, expr, structures, marks, *leaf)?,
        Command::Gen {
            class,
            n,
            dims,
            marks,
            unguarded,
        } => generate(*class, *n, dims.as_deref(), marks.as_deref(), *unguarded)?,
    };
    report.key("seed", cli.seed);
    emit(cli, report)
}

fn equiv(cli: &Cli, a: &Path, b: &Path, a_name: Option<&str>, b_name: Option<&str>) -> Result<Report> {
    let (na, sa) = pick(load_structures(a)?, a_name, a)?;
    let (nb, sb) = pick(load_structures(b)?, b_name, b)?;
    let eq = TypeSession::new().m_equivalent(&sa, &sb, cli.m)?;
    let mut r = Report::default();
    let verdict = if eq { "equivalent" } else { "distinguishable" };
    r.line(format!("{na} and {nb} are {verdict} up to quantifier rank {}", cli.m));
    r.key("command", "equiv");
    r.key("m", cli.m);
    r.key("size_a", sa.size());
    r.key("size_b", sb.size());
    r.key("verdict", verdict);
    Ok(r)
}

fn shrink(cli: &Cli, file: &Path, name: Option<&str>, marks: Option<&[usize]>) -> Result<Report> {
    let trees = parse_trees(&read(file)?).with_context(|| format!("parsing {}", file.display()))?;
    let t = match name {
        None => trees.into_iter().next(),
        Some(n) => trees.into_iter().find(|t| t.name == n),
    }
    .ok_or_else(|| anyhow!("no matching tree in {}", file.display()))?;
    let w: BTreeSet<usize> = match marks {
        Some(m) => m.iter().copied().collect(),
        None => t.marks.clone(),
    };
    let mut r = Report::default();
    let (shrunk, phases) = if t.tree.is_word() {
        if w.len() > cli.k {
            return Err(fmtk::Error::TooManyMarks {
                given: w.len(),
                limit: cli.k,
            }
            .into());
        }
        let s = shrink_word_marked(&t.tree, &w, cli.m)?;
        (s, Vec::new())
    } else {
        let (s, rep) = shrink_tree(&t.tree, &w, cli.m, cli.k)?;
        (s, rep.phases)
    };
    // Postconditions, checked again here.
    let big = t.tree.to_structure();
    let small = shrunk.tree.to_structure();
    let contains = w.iter().all(|x| shrunk.origin.contains(x));
    let sub = check_embedding(&small, &big, &shrunk.origin);
    let eq = TypeSession::new().m_equivalent(&small, &big, cli.m)?;
    if !(contains && sub && eq) {
        return Err(
            fmtk::Error::VerificationFailed(format!("contains_w={contains} subtree={sub} equivalent={eq}")).into(),
        );
    }
    r.line(format!(
        "shrunk {} from {} to {} nodes at rank {}",
        t.name,
        t.tree.len(),
        shrunk.tree.len(),
        cli.m
    ));
    for ph in &phases {
        r.line(format!(
            "phase {}: {} -> {} nodes, {} steps",
            ph.name, ph.before, ph.after, ph.steps
        ));
    }
    let out = NamedTree {
        name: format!("{}_shrunk", t.name),
        marks: shrunk.map_marks(&w)?,
        tree: shrunk.tree.clone(),
    };
    r.payload = Some(format_trees(&[out]));
    r.key("command", "shrink");
    r.key("m", cli.m);
    r.key("k", cli.k);
    r.key("input_size", t.tree.len());
    r.key("output_size", shrunk.tree.len());
    r.key("origin", join(&shrunk.origin, ","));
    r.key("contains_w", contains);
    r.key("subtree", sub);
    r.key("equivalent", eq);
    Ok(r)
}

fn sample_for(class: ClassName, max_size: usize, vocab: Option<&str>) -> Result<(Vocabulary, Vec<Structure>)> {
    Ok(match class {
        ClassName::Cycles => (
            Vocabulary::graph(),
            (3..=max_size.max(3)).map(make_cycle).collect::<fmtk::Result<_>>()?,
        ),
        ClassName::Paths => (
            Vocabulary::graph(),
            (0..max_size).map(make_path).collect::<fmtk::Result<_>>()?,
        ),
        ClassName::Linorder => (
            Vocabulary::single("le", 2),
            (1..=max_size).map(make_linear_order).collect::<fmtk::Result<_>>()?,
        ),
        ClassName::Hngn => (
            Vocabulary::graph(),
            vec![make_hn(1)?, make_gn(1)?, make_hn(2)?, make_gn(2)?],
        ),
        ClassName::All => {
            let v: Vocabulary = match vocab {
                Some(text) => text.parse()?,
                None => Vocabulary::graph(),
            };
            let mut all = Vec::new();
            for n in 1..=max_size.min(3) {
                all.extend(all_structures(&v, n)?);
            }
            (v, all)
        }
    })
}

fn translate(
    cli: &Cli,
    formula: &Path,
    class: ClassName,
    p: &str,
    max_p: usize,
    vocab: Option<&str>,
) -> Result<Report> {
    let (vocab, sample) = sample_for(class, cli.max_size, vocab)?;
    let phi = parse_formula_in(&formula_text(&read(formula)?), &vocab)?;
    let mut r = Report::default();
    let (t, disagreements) = if p == "auto" {
        let auto = translate_auto(&phi, cli.k, &sample, max_p)?;
        for (p, bad) in &auto.tried {
            r.line(format!("p = {p}: {bad} disagreement(s) on the sample"));
        }
        match auto.translation {
            Some(t) => (t, 0),
            None => {
                return Err(fmtk::Error::VerificationFailed(format!(
                    "no p up to {max_p} agrees with the sentence on the sample"
                ))
                .into())
            }
        }
    } else {
        let p: usize = p.parse().with_context(|| format!("bad --p value `{p}`"))?;
        let t = translate_to_exists_forall(&phi, cli.k, p, &vocab)?;
        let bad = fmtk::translate::sample_disagreements(&phi, &t.sentence.to_formula(), &sample)?;
        (t, bad.len())
    };
    let sentence = t.sentence.to_formula();
    r.line(format!("input: {phi}"));
    r.line(format!(
        "sample: {} structure(s), agreement checked only there",
        sample.len()
    ));
    if t.simplified {
        r.line("the relativized size bound is valid here and was replaced by true");
    }
    r.payload = Some(format!("{sentence}\n"));
    r.key("command", "translate");
    r.key("k", cli.k);
    r.key("p", t.p);
    r.key("sample_size", sample.len());
    r.key("disagreements", disagreements);
    r.key("agrees_on_sample", disagreements == 0);
    r.key("matrix_nodes", t.sentence.matrix.node_count());
    if disagreements > 0 {
        print!("{}", r.render());
        return Err(fmtk::Error::VerificationFailed(format!("{disagreements} sample disagreement(s)")).into());
    }
    Ok(r)
}

fn cores(cli: &Cli, file: &Path, formula: &str) -> Result<Report> {
    let items = load_structures(file)?;
    let vocab = items[0].1.vocab().clone();
    let phi = parse_formula_in(formula, &vocab)?;
    let sample = ClassSample::new(items.iter().map(|(_, s)| s.clone()).collect())?;
    let c = CompiledFormula::sentence(&phi, &vocab)?;
    let target = |s: &Structure| c.eval(s, &[]);
    let mut r = Report::default();
    for (name, s) in &items {
        if !target(s)? {
            r.line(format!("{name}: not a model"));
            continue;
        }
        let found = find_cores(s, &target, cli.k, &sample)?;
        let shown: Vec<String> = found.iter().map(|c| format!("{{{}}}", join(c, ","))).collect();
        r.line(format!(
            "{name}: cores {}",
            if shown.is_empty() {
                "none".into()
            } else {
                shown.join(" ")
            }
        ));
    }
    let psc = psc_check(&phi, cli.k, &sample)?;
    r.key("command", "cores");
    r.key("k", cli.k);
    r.key("models", psc.models);
    r.key("models_without_core", psc.failures.len());
    r.key("psc_on_sample", psc.holds);
    Ok(r)
}

fn wqo_scan(file: &Path) -> Result<Report> {
    let items = load_structures(file)?;
    let structures: Vec<Structure> = items.iter().map(|(_, s)| s.clone()).collect();
    let pair = first_embedding_pair(&structures)?;
    let anti = antichain_certificate(&structures)?;
    let mut r = Report::default();
    match pair {
        Some((i, j)) => r.line(format!("{} embeds into {}", items[i].0, items[j].0)),
        None => r.line("no item embeds into a later one"),
    }
    r.key("command", "wqo-scan");
    r.key("items", items.len());
    r.key("pair", pair.map_or("none".to_string(), |(i, j)| format!("{i},{j}")));
    r.key("antichain", anti.antichain);
    Ok(r)
}

fn leaf_library(path: &Path) -> Result<HashMap<String, Structure>> {
    Ok(load_structures(path)?.into_iter().collect())
}

fn algebra_eval(expr: &Path, structures: &Path) -> Result<Report> {
    let lib = leaf_library(structures)?;
    let t = parse_expression(&read(expr)?, &lib)?;
    let s = t.eval()?;
    let mut r = Report::default();
    r.line(format!("evaluated {t}"));
    r.payload = Some(format_structure("result", &s));
    r.key("command", "algebra-eval");
    r.key("leaves", t.leaf_count());
    r.key("height", t.height());
    r.key("size", s.size());
    Ok(r)
}

fn algebra_shrink(cli: &Cli, expr: &Path, structures: &Path, marks: &[usize], leaf: LeafKind) -> Result<Report> {
    let lib = leaf_library(structures)?;
    let t = parse_expression(&read(expr)?, &lib)?;
    let w: BTreeSet<usize> = marks.iter().copied().collect();
    let shrinker: &dyn LeafShrinker = match leaf {
        LeafKind::Whole => &KeepWhole,
        LeafKind::Word => &WordLeaves,
        LeafKind::Tree => &TreeLeaves,
    };
    let res = shrink_algebraic(&t, &w, cli.m, cli.k, shrinker)?;
    let v = res.report.verdicts;
    let mut r = Report::default();
    r.line(format!("input {t}"));
    r.line(format!("reduced {}", res.expression));
    r.line(format!("certificate {}", res.certificate));
    r.payload = Some(format_structure("result", &res.structure));
    r.key("command", "algebra-shrink");
    r.key("m", cli.m);
    r.key("k", cli.k);
    r.key("input_size", res.report.input_size);
    r.key("output_size", res.report.output_size);
    r.key("input_height", res.report.input_height);
    r.key("reduced_height", res.report.reduced_height);
    r.key("origin", join(&res.origin, ","));
    r.key("contains_w", v.contains_w);
    r.key("substructure", v.substructure);
    r.key("equivalent", v.equivalent);
    r.key("in_class", v.in_class);
    Ok(r)
}

fn generate(
    class: GenClass,
    n: usize,
    dims: Option<&[usize]>,
    marks: Option<&[usize]>,
    unguarded: bool,
) -> Result<Report> {
    let (name, s) = match class {
        GenClass::Linorder => (format!("L{n}"), make_linear_order(n)?),
        GenClass::Path => (format!("P{n}"), make_path(n)?),
        GenClass::Cycle => (format!("C{n}"), make_cycle(n)?),
        GenClass::Hn if unguarded => (format!("H{n}"), make_hn_gn_unguarded(n, false)?),
        GenClass::Hn => (format!("H{n}"), make_hn(n)?),
        GenClass::Gn if unguarded => (format!("G{n}"), make_hn_gn_unguarded(n, true)?),
        GenClass::Gn => (format!("G{n}"), make_gn(n)?),
        GenClass::Grid => {
            let d = dims.ok_or_else(|| anyhow!("--dims is required for grids"))?;
            (format!("grid_{}", join(d, "x")), make_grid(d)?)
        }
    };
    let s = match marks {
        Some(m) => to_sk_pred(&s, &m.iter().copied().collect())?,
        None => s,
    };
    let mut r = Report::default();
    r.line(format!("generated {name}"));
    r.payload = Some(format_structure(&name, &s));
    r.key("command", "gen");
    r.key("name", &name);
    r.key("size", s.size());
    Ok(r)
}
