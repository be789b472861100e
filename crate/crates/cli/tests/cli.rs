use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_choicedict"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn write_trace(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn space_default_layout() {
    let o = run(&["space", "--n", "1000"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), golden("space_1000.txt"));
}

#[test]
fn space_self_contained_adds_header() {
    let o = run(&["space", "--n", "1000", "--mode", "self-contained"]);
    assert!(o.status.success());
    assert!(
        stdout(&o)
            .lines()
            .any(|l| l == "header=19 flag=1 A=768 tail=232 total=1020"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn space_single_element_is_tail_only() {
    let o = run(&["space", "--n", "1"]);
    assert_eq!(stdout(&o), golden("space_1.txt"));
}

#[test]
fn space_machine_readable_and_policies() {
    let o = run(&[
        "space",
        "--n",
        "2^16",
        "--b-policy",
        "w/2",
        "--mode",
        "plain",
        "--machine-readable",
    ]);
    assert_eq!(
        stdout(&o),
        "n=65536 b=32 mode=plain segments=1024 k=64 A=65536 tail=0 total=65600\n"
    );
    let o = run(&["space", "--n", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn replay_good_trace_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_trace(&dir, "good.txt", &golden("good_trace.txt"));
    let o = run(&["replay", "--trace", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "ok: 9 ops agree with the oracle\n");
}

#[test]
fn replay_output_does_not_depend_on_fill() {
    let dir = tempfile::tempdir().unwrap();
    let trace = bin()
        .args([
            "gen",
            "--n",
            "3000",
            "--ops",
            "2000",
            "--seed",
            "7",
            "--profile",
            "barrier-thrash",
        ])
        .output()
        .unwrap();
    let p = write_trace(&dir, "gen.txt", &stdout(&trace));
    let path = p.to_str().unwrap();
    let base = run(&["replay", "--trace", path, "--fill", "zeros", "--machine-readable"]);
    for fill in [
        "ones",
        "random:5",
        "crafted",
        "crafted:mirror",
        "crafted:all-to-last",
        "crafted:self",
    ] {
        let o = run(&["replay", "--trace", path, "--fill", fill, "--machine-readable"]);
        assert_eq!(o.status.code(), Some(0), "{fill}: {}", stderr(&o));
        assert_eq!(stdout(&o), stdout(&base), "{fill}");
    }
}

#[test]
fn replay_parse_error_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_trace(&dir, "bad.txt", "insert\n");
    let o = run(&["replay", "--trace", p.to_str().unwrap(), "--n", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));

    let p = write_trace(&dir, "bad3.txt", "universe=10 seed=0\ninsert 3\nfrobnicate 2\n");
    let o = run(&["replay", "--trace", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn replay_divergence_prints_minimal_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let trace = bin()
        .args(["gen", "--n", "cells:4x8", "--ops", "300", "--seed", "3"])
        .output()
        .unwrap();
    let p = write_trace(&dir, "cells.txt", &stdout(&trace));
    let o = run(&[
        "replay",
        "--trace",
        p.to_str().unwrap(),
        "--mutant",
        "skip-insert-rematch",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("divergence at op "), "{out}");
    assert!(out.contains("universe=cells:4x8"), "{out}");
    // The minimal trace replays to the same verdict.
    let minimal: String = out
        .lines()
        .skip_while(|l| !l.starts_with("universe="))
        .map(|l| format!("{l}\n"))
        .collect();
    let q = write_trace(&dir, "minimal.txt", &minimal);
    let again = run(&[
        "replay",
        "--trace",
        q.to_str().unwrap(),
        "--mutant",
        "skip-insert-rematch",
    ]);
    assert_eq!(again.status.code(), Some(1));
    let clean = run(&["replay", "--trace", q.to_str().unwrap()]);
    assert_eq!(clean.status.code(), Some(0));
}

#[test]
fn bench_reports_footprint_and_flat_init() {
    let o = run(&["bench", "--n", "2^12,2^16,2^20", "--ops", "3000", "--machine-readable"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    for n in [4096u64, 65536, 1 << 20] {
        let line = format!("n={n} b=128 mode=hidden");
        let head = out
            .lines()
            .find(|l| l.starts_with(&line))
            .unwrap_or_else(|| panic!("{out}"));
        assert!(
            head.contains(&format!("footprint={} expected={} footprint_ok=true", n + 1, n + 1)),
            "{head}"
        );
        assert!(out.contains(&format!("n={n} op=init count=1 max=4 ")), "{out}");
        assert!(out.contains(&format!("n={n} op=insert_worst_path max=64")), "{out}");
    }
    let last = out.lines().last().unwrap();
    assert!(last.starts_with("constant_time="), "{last}");
    assert!(last.ends_with("init_equal=true footprints_ok=true"), "{last}");
}

#[test]
fn bench_human_report_has_a_row_per_op() {
    let o = run(&["bench", "--n", "1000", "--ops", "500", "--mode", "self-contained"]);
    let out = stdout(&o);
    assert!(
        out.contains("footprint 1020 bits, expected n+2*ceil(log2(n+1)) = 1020: ok"),
        "{out}"
    );
    for op in ["init", "insert", "delete", "contains", "choice", "iter_next"] {
        assert!(
            out.lines().any(|l| l.trim_start().starts_with(op)),
            "{op} missing:\n{out}"
        );
    }
    assert!(run(&["bench", "--ops", "0"]).status.code() == Some(2));
}

#[test]
fn gen_is_deterministic() {
    let a = run(&[
        "gen",
        "--n",
        "500",
        "--ops",
        "50",
        "--seed",
        "9",
        "--profile",
        "insert-heavy",
    ]);
    let b = run(&[
        "gen",
        "--n",
        "500",
        "--ops",
        "50",
        "--seed",
        "9",
        "--profile",
        "insert-heavy",
    ]);
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).starts_with("universe=500 seed=9\n"));
}
