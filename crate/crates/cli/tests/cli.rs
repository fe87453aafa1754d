use std::path::PathBuf;
use std::process::{Command, Output};

fn models() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn rmrs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmrs"))
        .current_dir(models())
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn check_exit_codes() {
    assert_eq!(code(&rmrs(&["check", "concurrent_free.rmrs"])), 0);
    assert_eq!(code(&rmrs(&["check", "does-not-exist.rmrs"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.rmrs");
    std::fs::write(
        &path,
        "elements: A B\ninit: {A}\nrules:\n  mu1: {A} -> {}\n  mu2: {B} -> {}\nregulation: concurrent-free\n  mu1 < mu2\n",
    )
    .unwrap();
    let o = rmrs(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("not concurrent"), "{}", stderr(&o));

    std::fs::write(&path, "elements: A\ninit: {A\n").unwrap();
    let o = rmrs(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn check_dumps_the_automaton() {
    let o = rmrs(&["check", "regular.rmrs", "--dump-automaton"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.starts_with("states: "));
    assert!(out.contains("accepting: "));
    assert!(stderr(&o).contains("warning: language allows prefix `mu3`"));
}

#[test]
fn run_verdicts() {
    let o = rmrs(&["run", "conditional.rmrs", "conditional-bad.run"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("invalid at step 3"));
    assert_eq!(code(&rmrs(&["run", "regular.rmrs", "regular.run"])), 0);
    let o = rmrs(&["run", "basic.rmrs", "basic.run"]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "valid\n"));
}

#[test]
fn run_file_with_unknown_rule_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.run");
    std::fs::write(&path, "mu1 nope\n").unwrap();
    assert_eq!(
        code(&rmrs(&["run", "basic.rmrs", path.to_str().unwrap()])),
        2
    );
}

#[test]
fn enumerate_examples() {
    let o = rmrs(&[
        "enumerate",
        "two_runs_conditional.rmrs",
        "--depth",
        "3",
        "--states",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 2);

    let o = rmrs(&["enumerate", "programmed.rmrs", "--depth", "2", "--labels"]);
    assert_eq!(stdout(&o), "mu1 mu2\nmu2 mu1\n");

    let o = rmrs(&["enumerate", "basic.rmrs", "--depth", "0"]);
    assert_eq!(stdout(&o).lines().count(), 1);

    let o = rmrs(&[
        "enumerate",
        "basic.rmrs",
        "--depth",
        "1",
        "--states",
        "--labels",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn enumerate_respects_the_cap() {
    let o = rmrs(&[
        "enumerate",
        "basic.rmrs",
        "--depth",
        "6",
        "--max-configs",
        "3",
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("exploration limit of 3"));
}

#[test]
fn enumerate_output_is_stable() {
    let a = stdout(&rmrs(&["enumerate", "basic.rmrs", "--depth", "6"]));
    let b = stdout(&rmrs(&["enumerate", "basic.rmrs", "--depth", "6"]));
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn translate_examples() {
    let o = rmrs(&["translate", "ordered.rmrs", "--or2pr"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("regulation: programmed\n"));
    assert!(stdout(&o).contains("  mu2 -> { mu2 }\n"));

    let o = rmrs(&["translate", "concurrent_free.rmrs", "--cfr2cr"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("  mu3: forbid {A, B}\n"));

    assert_eq!(code(&rmrs(&["translate", "ordered.rmrs", "--cfr2cr"])), 2);
    assert_eq!(code(&rmrs(&["translate", "ordered.rmrs"])), 2);
}

#[test]
fn translated_model_is_equivalent() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pr.rmrs");
    std::fs::write(
        &path,
        rmrs(&["translate", "ordered.rmrs", "--or2pr"]).stdout,
    )
    .unwrap();
    let o = rmrs(&[
        "equiv",
        "ordered.rmrs",
        path.to_str().unwrap(),
        "--depth",
        "6",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn equiv_examples() {
    let dir = tempfile::tempdir().unwrap();
    let neutral = dir.path().join("neutral.rmrs");
    let basic = std::fs::read_to_string(models().join("basic.rmrs")).unwrap();
    let plain = basic.split("regulation:").next().unwrap();
    std::fs::write(&neutral, format!("{plain}regulation: conditional\n")).unwrap();
    let o = rmrs(&[
        "equiv",
        "basic.rmrs",
        neutral.to_str().unwrap(),
        "--depth",
        "5",
    ]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));

    let o = rmrs(&[
        "equiv",
        "ordered.rmrs",
        "ordered_rules_plain.rmrs",
        "--depth",
        "4",
    ]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("only in ordered_rules_plain.rmrs: mu1 mu2 mu1 mu1"));

    assert_eq!(
        code(&rmrs(&[
            "equiv",
            "regular.rmrs",
            "regular.rmrs",
            "--depth",
            "6"
        ])),
        0
    );
}

#[test]
fn rm_examples() {
    let o = rmrs(&["rm", "run", "identity.rm", "--input", "3"]);
    assert_eq!(stdout(&o), "3\n");
    let o = rmrs(&["rm", "run", "doubling.rm", "--input", "2"]);
    assert_eq!(stdout(&o), "4\n");

    let o = rmrs(&[
        "rm",
        "exec",
        "identity.rm",
        "--target",
        "cfr",
        "--input",
        "3",
    ]);
    assert_eq!(
        (code(&o), stdout(&o).as_str()),
        (0, "c2=3\ndeterministic\n")
    );
    let o = rmrs(&[
        "rm",
        "exec",
        "doubling.rm",
        "--target",
        "cr",
        "--input",
        "3",
    ]);
    assert_eq!(stdout(&o), "c2=6\ndeterministic\n");

    let o = rmrs(&["rm", "compile", "trivial-halt.rm", "--target", "cr"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rules = text.split("rules:\n").nth(1).unwrap();
    assert!(rules.starts_with("regulation:"), "{text}");
}

#[test]
fn rm_budget_and_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("loop.rm");
    std::fs::write(&path, "l1: inc c2 goto l1\nl2: halt\n").unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(
        code(&rmrs(&["rm", "run", p, "--input", "0", "--budget", "50"])),
        2
    );
    let o = rmrs(&[
        "rm", "exec", p, "--target", "cr", "--input", "0", "--depth", "50",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn compiled_model_runs_through_the_toolkit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("id.rmrs");
    let o = rmrs(&[
        "rm",
        "compile",
        "identity.rm",
        "--target",
        "cfr",
        "--input",
        "2",
    ]);
    std::fs::write(&path, o.stdout).unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(code(&rmrs(&["check", p])), 0);
    let o = rmrs(&["enumerate", p, "--depth", "6", "--labels"]);
    assert_eq!(stdout(&o), "mub1 mu2 mub1 mu2 mu1 eps\n");
}

#[test]
fn simulate_is_seeded() {
    let a = rmrs(&["simulate", "basic.rmrs", "--steps", "20", "--seed", "11"]);
    let b = rmrs(&["simulate", "basic.rmrs", "--steps", "20", "--seed", "11"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("0 {A, A}\n"));
}
