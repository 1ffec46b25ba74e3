use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn fmtk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmtk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Looks up a report key; the report is on stderr when stdout carries a
/// payload.
fn key(o: &Output, k: &str) -> Option<String> {
    let both = format!("{}{}", stdout(o), String::from_utf8_lossy(&o.stderr));
    both.lines()
        .find_map(|l| l.strip_prefix(&format!("{k}=")).map(str::to_string))
}

#[test]
fn equiv_on_cycles_and_paths() {
    let o = fmtk(&["--m", "2", "equiv", &data("c4.txt"), &data("c5.txt")]);
    assert!(o.status.success());
    assert_eq!(key(&o, "verdict").as_deref(), Some("equivalent"));
    let o = fmtk(&["--m", "2", "equiv", &data("p1.txt"), &data("p2.txt")]);
    assert_eq!(key(&o, "verdict").as_deref(), Some("distinguishable"));
    let o = fmtk(&["equiv", &data("p1.txt"), &data("p1.txt")]);
    assert_eq!(key(&o, "verdict").as_deref(), Some("equivalent"));
}

#[test]
fn shrink_writes_a_parsable_tree() {
    let dir = std::env::temp_dir().join(format!("fmtk-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("shrunk.txt");
    let o = fmtk(&[
        "--m",
        "1",
        "--k",
        "1",
        "--out",
        out.to_str().unwrap(),
        "shrink",
        &data("chain30.txt"),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(key(&o, "equivalent").as_deref(), Some("true"));
    let trees = fmtk::shrink::parse_trees(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(trees[0].tree.len() < 30);
    assert_eq!(trees[0].marks.len(), 1);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn too_many_marks_is_an_error() {
    let o = fmtk(&["--k", "0", "shrink", &data("chain30.txt")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn generated_structures_round_trip_through_stdout() {
    let o = fmtk(&["gen", "--class", "grid", "--dims", "2,3"]);
    assert!(o.status.success());
    let parsed = fmtk::structures::parse_structures(&stdout(&o)).unwrap();
    assert_eq!(parsed[0].1, fmtk::wqo::make_grid(&[2, 3]).unwrap());
    let o = fmtk(&["gen", "--class", "hn", "--n", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn translate_cores_and_scans() {
    let o = fmtk(&["--k", "0", "translate", &data("symmetric.fo"), "--class", "cycles"]);
    assert!(o.status.success());
    assert_eq!(key(&o, "agrees_on_sample").as_deref(), Some("true"));
    let o = fmtk(&[
        "--k",
        "1",
        "cores",
        &data("example.txt"),
        "--formula",
        "exists x. forall y. E(x,y)",
    ]);
    assert!(stdout(&o).contains("{0} {1}"));
    assert_eq!(key(&o, "psc_on_sample").as_deref(), Some("true"));
}

#[test]
fn algebra_commands() {
    let o = fmtk(&[
        "algebra-eval",
        &data("cograph.expr"),
        "--structures",
        &data("vertex.txt"),
    ]);
    assert_eq!(key(&o, "size").as_deref(), Some("6"));
    let o = fmtk(&[
        "--k",
        "1",
        "algebra-shrink",
        &data("cograph.expr"),
        "--structures",
        &data("vertex.txt"),
        "--marks",
        "0",
    ]);
    assert!(o.status.success());
    for k in ["contains_w", "substructure", "equivalent", "in_class"] {
        assert_eq!(key(&o, k).as_deref(), Some("true"), "{k}");
    }
}
