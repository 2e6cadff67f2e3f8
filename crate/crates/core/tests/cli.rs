use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ibag-search"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const WEIGHTS: &str = "cricket\t0.9\nwicket keeper\t0.8\numpire\t0.4\nbat\t0.2\nmatch\t0.1\nball\t0.3\ncatch\t0.3\n";
const SYNTABLE: &str =
    "Match\tcompetition, contest\nBall\tconglobate, conglomerate\nUmpire\tjudge, moderator, referee\nCatch\tcapture\n";
const LIMITS: &str = "relevance_limit=1.0\nterm_relevance_limit.default=0.25\n";

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        std::fs::write(root.join("weights.tsv"), WEIGHTS).unwrap();
        std::fs::write(root.join("syntable.tsv"), SYNTABLE).unwrap();
        std::fs::write(root.join("limits.conf"), LIMITS).unwrap();
        let texts = [
            "cricket cricket umpire",
            "the wicket keeper held the match, a fine competition and contest",
            "cricket bat bat ball",
            "nothing to see here",
            "cricket umpire referee",
            "cricket ball catch capture",
            "weather report",
            "cricket wicket keeper",
            "cricket cricket",
            "cricket judge moderator",
        ];
        let lines: Vec<String> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let links: Vec<String> = (0..10).filter(|j| *j != i).map(|j| format!("page{j}")).take(3).collect();
                serde_json::json!({"url": format!("page{i}"), "links": if i == 0 { (1..10).map(|j| format!("page{j}")).collect() } else { links }, "text": t}).to_string()
            })
            .collect();
        std::fs::write(root.join("corpus.jsonl"), lines.join("\n")).unwrap();
        Fixture { _dir: dir, root }
    }

    fn path(&self, name: &str) -> String {
        self.root.join(name).display().to_string()
    }

    fn build(&self) -> Output {
        run(&[
            "build",
            "--corpus",
            &self.path("corpus.jsonl"),
            "--weights",
            &self.path("weights.tsv"),
            "--syntable",
            &self.path("syntable.tsv"),
            "--limits",
            &self.path("limits.conf"),
            "--out",
            &self.path("index.json"),
        ])
    }
}

/// Lines of the block that starts with `== {mode} masking`.
fn block(out: &str, mode: &str) -> Vec<String> {
    out.lines()
        .skip_while(|l| !l.starts_with(&format!("== {mode} masking")))
        .skip(1)
        .take_while(|l| !l.starts_with("==") && !l.starts_with("harvest"))
        .map(str::to_owned)
        .collect()
}

#[test]
fn build_writes_three_section_index() {
    let f = Fixture::new();
    let o = f.build();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("bit patterns"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(f.path("index.json")).unwrap()).unwrap();
    for section in ["rpag", "ibag", "patterns"] {
        assert!(v.get(section).is_some(), "missing {section}");
    }
    assert!(v["format"].as_str().unwrap().starts_with("ibag-search-index/"));
}

#[test]
fn empty_index_is_a_warning() {
    let f = Fixture::new();
    std::fs::write(
        f.root.join("corpus.jsonl"),
        "{\"url\":\"a\",\"links\":[],\"text\":\"weather\"}\n",
    )
    .unwrap();
    let o = f.build();
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("empty index"));
}

#[test]
fn missing_syntable_is_an_io_error() {
    let f = Fixture::new();
    std::fs::remove_file(f.root.join("syntable.tsv")).unwrap();
    let o = f.build();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("syntable.tsv"));
}

#[test]
fn invalid_weight_is_a_validation_error() {
    let f = Fixture::new();
    std::fs::write(f.root.join("weights.tsv"), "cricket\t1.5\n").unwrap();
    let o = f.build();
    assert_eq!(o.status.code(), Some(1));
    assert!(!stderr(&o).is_empty());
}

#[test]
fn worked_example_page_is_predicted_after_masking() {
    let f = Fixture::new();
    assert!(f.build().status.success());
    let o = run(&[
        "query",
        &f.path("index.json"),
        "--search",
        "best wicket keeper",
        "--range",
        "all",
        "--mode",
        "after",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let after = block(&stdout(&o), "after");
    assert!(after.iter().any(|l| l.starts_with("page1\t")), "{after:?}");
    assert!(after.iter().any(|l| l.starts_with("page7\t")), "{after:?}");
    assert!(!after.iter().any(|l| l.starts_with("page8\t")), "{after:?}");
}

#[test]
fn both_modes_after_is_subset_of_selection() {
    let f = Fixture::new();
    assert!(f.build().status.success());
    let o = run(&[
        "query",
        &f.path("index.json"),
        "--search",
        "umpire and ball",
        "--mode",
        "both",
        "--limit",
        "100",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let before: Vec<String> = block(&out, "before");
    let after: Vec<String> = block(&out, "after");
    assert!(!after.is_empty());
    for l in &after {
        assert!(before.contains(l), "{l} not in {before:?}");
    }
    assert!(out.contains("harvest before: HR="));
    assert!(out.contains("harvest after: HR="));
}

#[test]
fn usage_errors_exit_one() {
    let f = Fixture::new();
    assert!(f.build().status.success());
    let idx = f.path("index.json");
    assert_eq!(
        run(&["query", &idx, "--search", "x", "--limit", "0"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["query", &idx, "--search", "x", "--range", "2:1"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["query", &idx, "--search", "x", "--range", "abc"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["query", &idx, "--search", "x", "--ontology", "9"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(
        run(&["query", "/no/such/index.json", "--search", "x"]).status.code(),
        Some(2)
    );
}

#[test]
fn repl_reads_until_end_of_input() {
    use std::io::Write;
    let f = Fixture::new();
    assert!(f.build().status.success());
    let mut child = bin()
        .args(["query", &f.path("index.json"), "--repl", "--mode", "after"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"wicket keeper\n\nreferee\t9:1\numpire\tall\t1\n")
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.matches("== after masking").count(), 2);
    assert!(out.contains("== after masking: 1 results"));
    assert!(stderr(&o).contains("stdin:3"));
}

fn read_report(dir: &Path) -> Value {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    for row in v["rows"].as_array_mut().unwrap() {
        row["avg_elapsed_us"] = Value::Null;
    }
    for q in v["queries"].as_array_mut().unwrap() {
        for k in ["c_ns", "elapsed_before_us", "elapsed_after_us"] {
            q[k] = Value::Null;
        }
    }
    v
}

#[test]
fn bench_is_deterministic_apart_from_timings() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&[
            "bench",
            "--sizes",
            "100,200",
            "--seed",
            "42",
            "--repetitions",
            "1",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(read_report(&a), read_report(&b));
    let csv = std::fs::read_to_string(a.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
    assert!(a.join("queries.csv").exists());
}

#[test]
fn empty_query_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.tsv");
    std::fs::write(&q, "# nothing\n\n").unwrap();
    let o = run(&[
        "bench",
        "--sizes",
        "100",
        "--queries",
        q.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn synth_build_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).display().to_string();
    assert!(run(&["synth", "--docs", "150", "--seed", "7", "--out", &p("c.jsonl")])
        .status
        .success());
    assert!(
        run(&["build", "--corpus", &p("c.jsonl"), "--builtin", "--out", &p("i.json")])
            .status
            .success()
    );
    let o = run(&["eval", "--index", &p("i.json")]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 1 + 20 + 1);
}
