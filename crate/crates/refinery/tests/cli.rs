use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};

use refinery::cli::{run, EXIT_OK, EXIT_USAGE};
use refinery::elab::load;
use refinery::run::verify;
use refinery_core::verify::Oracle;

fn example(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(name)
        .display()
        .to_string()
}

fn golden(name: &str) -> String {
    fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("tests/golden")
            .join(name),
    )
    .unwrap()
}

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(args.iter().copied(), &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn refine_prints_the_vector_type() {
    let spec = example("list.rfn");
    let (code, out, _) = call(&[
        "refine",
        "--spec",
        &spec,
        "--type",
        "List",
        "--algebra",
        "lengthalg",
        "--name",
        "Vector",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim_end(), golden("vector.agda").trim_end());
}

#[test]
fn refine_writes_to_a_file() {
    let spec = example("list.rfn");
    let path = scratch("vector_internal.rfn");
    let (code, out, _) = call(&[
        "refine",
        "--spec",
        &spec,
        "--type",
        "List",
        "--algebra",
        "lengthalg",
        "--emit",
        "internal",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    assert!(load(&fs::read_to_string(&path).unwrap()).is_ok());
}

#[test]
fn report_counts_lists_by_length() {
    let spec = example("list.rfn");
    let path = scratch("vector_report.tsv");
    let (code, out, _) = call(&[
        "verify",
        "--spec",
        &spec,
        "--type",
        "List",
        "--algebra",
        "lengthalg",
        "--bound",
        "6",
        "--report",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    let text = fs::read_to_string(&path).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split('\t').collect()).collect();
    // lists of length n have size n + 1 and there are 2^n of them
    assert_eq!(rows.len(), 6);
    for (n, row) in rows.iter().enumerate() {
        let want = (1usize << n).to_string();
        assert_eq!(
            row,
            &vec![n.to_string().as_str(), want.as_str(), want.as_str(), "ok"]
        );
    }
}

#[test]
fn usage_errors_exit_with_two() {
    let spec = example("list.rfn");
    assert_eq!(call(&["refine", "--spec", &spec]).0, EXIT_USAGE);
    assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(
        call(&[
            "verify",
            "--spec",
            &spec,
            "--type",
            "List",
            "--algebra",
            "lengthalg",
            "--partial",
            "--zygo"
        ])
        .0,
        EXIT_USAGE
    );

    let (code, _, err) = call(&[
        "verify",
        "--spec",
        &spec,
        "--type",
        "List",
        "--algebra",
        "nope",
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("nope"), "{err}");

    let (code, _, err) = call(&[
        "verify",
        "--spec",
        "/nonexistent/x.rfn",
        "--type",
        "List",
        "--algebra",
        "a",
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("cannot read"), "{err}");

    let (code, _, err) = call(&[
        "refine",
        "--spec",
        &spec,
        "--type",
        "List",
        "--algebra",
        "lengthalg",
        "--emit",
        "latex",
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("latex"), "{err}");
}

#[test]
fn help_and_version_exit_cleanly() {
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("check-lemmas"));
    assert_eq!(call(&["--version"]).0, EXIT_OK);
}

#[test]
fn syntax_errors_point_at_the_column() {
    let path = scratch("broken.rfn");
    fs::write(
        &path,
        "type T = A | B(x: rec\nalgebra f : T -> nat { A => 0 }\n",
    )
    .unwrap();
    let (code, _, err) = call(&["run", "--spec", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    let lines: Vec<&str> = err.lines().collect();
    assert!(lines[0].contains("broken.rfn:"), "{err}");
    assert!(lines.iter().any(|l| l.trim_end().ends_with('^')), "{err}");
}

#[test]
fn every_example_runs() {
    for name in [
        "list.rfn",
        "vector.rfn",
        "tree.rfn",
        "nat.rfn",
        "exp.rfn",
        "ctree.rfn",
        "wtexp.rfn",
        "avglist.rfn",
    ] {
        let (code, out, err) = call(&["run", "--spec", &example(name), "--bound", "3"]);
        assert_eq!(code, EXIT_OK, "{name}\n{out}\n{err}");
        assert!(!out.contains("FAIL"), "{name}\n{out}");
    }
}

#[test]
fn lemma_checks_pass() {
    let (code, out, _) = call(&[
        "check-lemmas",
        "--seed",
        "7",
        "--trials",
        "5",
        "--spec",
        &example("tree.rfn"),
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
}

#[test]
fn enumerate_lists_terms_by_size() {
    let spec = example("list.rfn");
    let (code, out, _) = call(&[
        "enumerate",
        "--spec",
        &spec,
        "--type",
        "List",
        "--bound",
        "3",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 1 + 2 + 4);
    let (code, out, _) = call(&[
        "enumerate",
        "--spec",
        &spec,
        "--type",
        "Vector",
        "--bound",
        "3",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        out.lines()
            .filter(|l| l.split('\t').nth(1) == Some("2"))
            .count(),
        4
    );
}

/// A refinement checked against an algebra it was not derived from must
/// fail, with a counterexample.
#[test]
fn a_wrong_oracle_is_caught() {
    let src = fs::read_to_string(example("ctree.rfn")).unwrap();
    let weak = "\npartial algebra weakRB : CTree -> (Colour, nat) {
  Leaf => ok (B, 1);
  Br(c, (s1, n1), (s2, n2)) =>
    case c of {
      R => if s2 = B && n1 = n2 then ok (R, n1) else fail;
      B => if n1 = n2 then ok (B, n1 + 1) else fail
    }
}\n";
    let m = load(&format!("{src}{weak}")).unwrap();
    let mut r = m.refinement("RBTree").unwrap().clone();
    assert!(verify(&r, 5, 1).unwrap().pass());
    r.oracle = Oracle::partial(&r.data.source, &m.algebra("weakRB").unwrap().spec).unwrap();
    let rep = verify(&r, 5, 2).unwrap();
    assert!(!rep.pass());
    let text = rep.to_string();
    assert!(text.contains("counterexample"), "{text}");
    assert!(text.contains("Br(R"), "{text}");
}

#[test]
fn the_binary_reads_stdin() {
    let src = fs::read_to_string(example("list.rfn")).unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_refinery"))
        .args([
            "verify",
            "--spec",
            "-",
            "--type",
            "List",
            "--algebra",
            "lengthalg",
            "--bound",
            "4",
        ])
        .env("REFINERY_COLOR", "never")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(src.as_bytes())
        .unwrap();
    let done = child.wait_with_output().unwrap();
    assert_eq!(done.status.code(), Some(EXIT_OK));
    let out = String::from_utf8(done.stdout).unwrap();
    assert!(
        out.lines().last().unwrap().starts_with("pass: 4 classes"),
        "{out}"
    );
}

#[test]
fn the_binary_reports_syntax_errors_on_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_refinery"))
        .args(["run", "--spec", "-"])
        .env("REFINERY_COLOR", "never")
        .stdin(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"type = oops\n")
        .unwrap();
    let done = child.wait_with_output().unwrap();
    assert_eq!(done.status.code(), Some(EXIT_USAGE));
    let err = String::from_utf8(done.stderr).unwrap();
    assert!(err.starts_with("error: <stdin>:1:"), "{err}");
}
