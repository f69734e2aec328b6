use std::path::PathBuf;
use std::process::{Command, Output};

fn model(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../core/models/{name}.nmso"))
}

fn gale(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gale"))
        .args(args)
        .output()
        .expect("gale runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn incomplete_tables_fail_with_a_counterexample() {
    let o = gale(&["check", model("l1_incomplete").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("x = 1, z = 0"), "{}", stdout(&o));
    let o = gale(&["check", model("l1").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn unreadable_inputs_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.nmso");
    std::fs::write(&bad, "automaton {").unwrap();
    assert_eq!(
        gale(&["check", bad.to_str().unwrap()]).status.code(),
        Some(3)
    );
    let missing = dir.path().join("missing.nmso");
    assert_eq!(
        gale(&["solve", missing.to_str().unwrap()]).status.code(),
        Some(3)
    );
    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{}").unwrap();
    assert_eq!(
        gale(&["verify", junk.to_str().unwrap()]).status.code(),
        Some(3)
    );
}

#[test]
fn solve_reports_the_winner() {
    let o = gale(&["solve", model("unbounded").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["winner"], "II");
    let o = gale(&["solve", model("eventually_zero").to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["winner"], "I");
}

#[test]
fn emptiness_finds_witnesses() {
    let o = gale(&["empt", model("empty_finite").to_str().unwrap()]);
    assert!(stdout(&o).contains("EMPTY"));
    let o = gale(&["empt", model("all_odd").to_str().unwrap()]);
    assert!(stdout(&o).contains("EMPTY"));
    let o = gale(&["empt", model("repeated_number").to_str().unwrap()]);
    assert!(stdout(&o).contains("witness"));
}

#[test]
fn artifacts_verify_in_a_fresh_process() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for name in ["unbounded", "eventually_zero"] {
        let o = gale(&["synth", model(name).to_str().unwrap(), "--out", out]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        let art = dir.path().join(format!("{name}.synth.json"));
        let o = gale(&["verify", art.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        assert!(!stdout(&o).contains("FAIL"));
    }
}

#[test]
fn tampered_artifacts_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    gale(&["synth", model("unbounded").to_str().unwrap(), "--out", out]);
    let art = dir.path().join("unbounded.synth.json");
    let text = std::fs::read_to_string(&art).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["winner"] = "I".into();
    std::fs::write(&art, v.to_string()).unwrap();
    let o = gale(&["verify", art.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn fixed_seeds_give_identical_artifacts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = gale(&[
            "--seed",
            "42",
            "synth",
            model("unbounded").to_str().unwrap(),
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let read =
        |d: &tempfile::TempDir| std::fs::read(d.path().join("unbounded.synth.json")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn resume_starts_at_the_recorded_round() {
    let dir = tempfile::tempdir().unwrap();
    let input = model("unbounded");
    let partial = dir.path().join("unbounded.partial.json");
    let state = serde_json::json!({
        "command": "solve",
        "input": input,
        "next_round": 2,
        "max_deepening": 6,
        "max_iterations": 100000,
    });
    std::fs::write(&partial, state.to_string()).unwrap();
    let o = gale(&[
        "solve",
        input.to_str().unwrap(),
        "--resume",
        partial.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("resuming at deepening round 2"));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["winner"], "II");
    // a partial state recorded for another command is refused
    let o = gale(&[
        "synth",
        input.to_str().unwrap(),
        "--resume",
        partial.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn play_answers_scripted_moves() {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_gale"))
        .args(["play", model("unbounded").to_str().unwrap()])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"3\nx\n0\n:quit\n")
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.matches("engine answers").count(), 2, "{text}");
    assert!(text.contains("expected a natural number"));
}

#[test]
fn export_writes_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("u.dot");
    let json = dir.path().join("u.json");
    let o = gale(&[
        "--dot",
        dot.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
        "export",
        model("unbounded").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&dot)
        .unwrap()
        .starts_with("digraph"));
    assert!(dir.path().join("u.game.dot").exists());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!(v["game"].is_object());
}
