use std::path::Path;
use std::process::{Command, Output};

fn hyperlit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperlit"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = hyperlit(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn small_graph(dir: &Path) {
    ok(dir, &["synth", "--corpus", "c.jsonl", "--truth", "t.tsv", "--periods", "4", "--communities", "2"]);
    ok(dir, &["build", "--corpus", "c.jsonl", "--out", "g.txt"]);
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = hyperlit(dir.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["synth", "build", "walk", "embed", "predict", "discoverers", "alien", "eval"] {
        assert!(text.contains(name), "help lacks {name}");
    }
}

#[test]
fn unknown_metric_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = hyperlit(
        dir.path(),
        &["predict", "--property", "x", "--metric", "trans4", "--corpus", "c", "--out", "o"],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for m in ["deepwalk_cosine", "trans2", "trans3"] {
        assert!(err.contains(m), "stderr lacks {m}: {err}");
    }
}

#[test]
fn missing_input_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = hyperlit(dir.path(), &["build", "--corpus", "nowhere.jsonl", "--out", "g.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.jsonl"));
    assert!(!dir.path().join("g.txt").exists());
}

#[test]
fn walks_repeat_exactly_and_ignore_threads() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_graph(d);
    let args = |out: &'static str, threads: &'static str| {
        ["--threads", threads, "walk", "--graph", "g.txt", "--property", "target", "--walks", "500", "--out", out]
    };
    ok(d, &args("w1.txt", "1"));
    ok(d, &args("w2.txt", "4"));
    let w1 = std::fs::read(d.join("w1.txt")).unwrap();
    assert!(!w1.is_empty());
    assert_eq!(w1, std::fs::read(d.join("w2.txt")).unwrap());
    let manifest = std::fs::read_to_string(d.join("w1.txt.manifest.json")).unwrap();
    assert!(manifest.contains("\"g.txt\""));
    assert!(manifest.contains("\"subcommand\": \"walk\""));
    assert!(!manifest.contains("threads"));
}

#[test]
fn config_file_supplies_flags_and_command_line_wins() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_graph(d);
    std::fs::write(d.join("run.cfg"), "# walk settings\nwalks = 3\nlength = 2\n").unwrap();
    ok(d, &["--config", "run.cfg", "walk", "--graph", "g.txt", "--property", "target", "--out", "a.txt"]);
    let a = std::fs::read_to_string(d.join("a.txt")).unwrap();
    assert_eq!(a.lines().count(), 3);
    assert!(a.lines().all(|l| l.split(' ').count() <= 3));
    ok(d, &["--config", "run.cfg", "walk", "--graph", "g.txt", "--property", "target", "--walks", "5", "--out", "b.txt"]);
    assert_eq!(std::fs::read_to_string(d.join("b.txt")).unwrap().lines().count(), 5);
}

#[test]
fn flag_combinations_checked_after_parsing() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_graph(d);
    let out = hyperlit(d, &["discoverers", "--property", "target", "--out", "d.tsv"]);
    assert_eq!(out.status.code(), Some(2));
    let out = hyperlit(
        d,
        &["predict", "--property", "target", "--metric", "deepwalk_cosine", "--corpus", "c.jsonl", "--out", "p.tsv"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--vectors"));
}
