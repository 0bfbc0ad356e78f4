use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_pomdp-smpc");
const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/models/healthcare.pomdp");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    stdout(&out)
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["validate", GOLDEN]).status.code(), Some(0));

    let bad_syntax = dir.path().join("syntax.pomdp");
    std::fs::write(&bad_syntax, "states: 2\nactions 1\n").unwrap();
    assert_eq!(run(&["validate", path_str(&bad_syntax)]).status.code(), Some(1));

    let bad_rows = dir.path().join("rows.pomdp");
    std::fs::write(&bad_rows, "states: 2\nactions: 1\nobservations: 1\nT: 0\n0.5 0.4\n0 1\nO: 0\nuniform\n").unwrap();
    let out = run(&["validate", path_str(&bad_rows)]);
    assert_eq!(out.status.code(), Some(2));

    assert_eq!(run(&["validate", "/nonexistent/model.pomdp"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
}

#[test]
fn solve_then_query_the_policy() {
    let dir = tempfile::tempdir().unwrap();
    let policy = dir.path().join("h1.policy");
    let out = ok(&["solve", "--builtin", "healthcare", "--horizon", "1", "--out", path_str(&policy)]);
    assert!(out.contains("stage0_vectors="));

    let q = |belief: &str| ok(&["policy", "--policy", path_str(&policy), "--belief", belief]);
    assert_eq!(q("0,0,1").trim(), "value=31 action=appointment");
    assert_eq!(q("1,0,0").trim(), "value=0.8 action=skip");
    assert_eq!(q("0,1,0").trim(), "value=3 action=treatment");

    let terminal = ok(&["policy", "--policy", path_str(&policy), "--belief", "0,1,0", "--stage", "1"]);
    assert_eq!(terminal.trim(), "value=4 action=-");

    assert_eq!(run(&["policy", "--policy", path_str(&policy), "--belief", "0,1"]).status.code(), Some(1));
}

#[test]
fn file_and_builtin_models_agree() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.policy");
    let b = dir.path().join("b.policy");
    ok(&["solve", "--builtin", "healthcare", "--horizon", "3", "--out", path_str(&a)]);
    ok(&["solve", GOLDEN, "--horizon", "3", "--out", path_str(&b)]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn policy_grid_has_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let policy = dir.path().join("p.policy");
    ok(&["solve", "--builtin", "healthcare", "--horizon", "2", "--out", path_str(&policy)]);
    let csv = ok(&["policy", "--policy", path_str(&policy), "--grid", "1"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "belief_0,belief_1,belief_2,action");
    assert_eq!(lines.len(), 4);
    let csv = ok(&["policy", "--policy", path_str(&policy), "--grid", "4"]);
    assert_eq!(csv.lines().count(), 1 + 15);
}

#[test]
fn horizon_zero_policy_is_terminal_only() {
    let dir = tempfile::tempdir().unwrap();
    let policy = dir.path().join("p0.policy");
    ok(&["solve", "--builtin", "healthcare", "--horizon", "0", "--out", path_str(&policy)]);
    let text = std::fs::read_to_string(&policy).unwrap();
    assert!(text.ends_with("stage 0 1\n- 0 4 30\n"), "{text}");
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let policy = dir.path().join(format!("p{i}.policy"));
        let trace = dir.path().join(format!("t{i}.csv"));
        ok(&["solve", "--builtin", "healthcare", "--horizon", "4", "--out", path_str(&policy)]);
        let summary = ok(&[
            "simulate", "--builtin", "healthcare", "--horizon", "4", "--steps", "20", "--seed", "9", "--trace",
            path_str(&trace),
        ]);
        outputs.push((std::fs::read(&policy).unwrap(), std::fs::read(&trace).unwrap(), summary));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn zero_steps_give_a_header_and_one_row() {
    let csv = ok(&["simulate", "--builtin", "healthcare", "--horizon", "2", "--steps", "0"]);
    let rows: Vec<&str> = csv.lines().filter(|l| !l.contains('=')).collect();
    assert_eq!(rows.len(), 2, "{csv}");
    assert!(csv.contains("cost_no_terminal=0\n"), "{csv}");
}

#[test]
fn trace_requires_a_single_rollout() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let out = run(&[
        "simulate", "--builtin", "healthcare", "--horizon", "2", "--rollouts", "3", "--trace", path_str(&trace),
    ]);
    assert!(!out.status.success());
}

#[test]
fn compare_reports_both_controllers() {
    let out = ok(&["compare", "--builtin", "healthcare", "--horizon", "3", "--steps", "10", "--rollouts", "40"]);
    let field = |name: &str| -> Vec<String> {
        out.lines()
            .find(|l| l.split_whitespace().next() == Some(name))
            .unwrap_or_else(|| panic!("{name} missing:\n{out}"))
            .split_whitespace()
            .skip(1)
            .map(String::from)
            .collect()
    };
    assert_eq!(field("action_freq.diagnose")[1], "0");
    assert!(out.contains("paired_p_one_sided="));
    assert_eq!(field("mean_cost").len(), 2);
}

#[test]
fn unknown_controller_is_an_input_error() {
    let out = run(&["simulate", "--builtin", "healthcare", "--horizon", "1", "--controller", "greedy"]);
    assert_eq!(out.status.code(), Some(1));
}
