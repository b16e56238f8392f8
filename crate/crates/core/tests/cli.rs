use std::io::Write;
use std::process::{Command, Output, Stdio};

const WORKED: &str = r#"{"type":"header","k":1,"delta":8,"metric":"euclidean","dim":1}
{"type":"insert","id":"p1","coords":[0.0]}
{"type":"insert","id":"p2","coords":[1.0]}
{"type":"insert","id":"p3","coords":[4.0]}
{"type":"delete","id":"p1"}
"#;

fn ckc(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ckc"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn run_text(text: &str, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--stream", "-"];
    args.extend_from_slice(extra);
    ckc(&args, Some(text))
}

#[test]
fn worked_stream_exits_zero() {
    let out = run_text(WORKED, &["--verify", "--oracle", "exact"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 4);
    assert!(stdout
        .lines()
        .last()
        .unwrap()
        .contains(r#""centers":["p3"]"#));
}

#[test]
fn header_only_exits_zero_with_no_reports() {
    let out = run_text(WORKED.lines().next().unwrap(), &["--verify"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_line_exits_two() {
    let text = WORKED.replace(r#"{"type":"insert","id":"p2","coords":[1.0]}"#, "{oops");
    let out = run_text(&text, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn absent_delete_exits_three() {
    let text = WORKED.replace(r#""id":"p1"}"#, r#""id":"nope"}"#);
    let out = run_text(&text, &["--verify"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 5"));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);
}

#[test]
fn distance_bound_violation_exits_three() {
    let text = WORKED.replace("[4.0]", "[9.5]");
    assert_eq!(run_text(&text, &[]).status.code(), Some(3));
}

#[test]
fn missing_file_exits_one() {
    let out = ckc(&["run", "--stream", "/nonexistent/stream.jsonl"], None);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gen_then_run_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let stream = dir.path().join("s.jsonl");
    let report = dir.path().join("r.jsonl");
    let s = stream.to_str().unwrap();
    let out = ckc(
        &[
            "gen",
            "--n",
            "10",
            "--k",
            "2",
            "--delta",
            "64",
            "--mode",
            "insert-only",
            "--seed",
            "7",
            "--out",
            s,
        ],
        None,
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(&stream).unwrap();
    assert_eq!(text.lines().count(), 11);
    let out = ckc(
        &[
            "run",
            "--stream",
            s,
            "--verify",
            "--oracle",
            "exact",
            "--report",
            report.to_str().unwrap(),
        ],
        None,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        std::fs::read_to_string(&report).unwrap().lines().count(),
        10
    );
}

#[test]
fn gen_is_deterministic_on_stdout() {
    let args = [
        "gen", "--n", "20", "--k", "3", "--delta", "1024", "--mode", "random", "--seed", "5",
    ];
    let a = ckc(&args, None);
    let b = ckc(&args, None);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn gen_infeasible_exits_two() {
    let out = ckc(
        &[
            "gen",
            "--n",
            "500",
            "--k",
            "1",
            "--delta",
            "2",
            "--mode",
            "insert-only",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_audit_interval_is_rejected() {
    let out = run_text(WORKED, &["--verify", "--audit-every", "0"]);
    assert_eq!(out.status.code(), Some(2));
}
