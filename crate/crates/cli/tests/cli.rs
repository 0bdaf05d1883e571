use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

const G5: &str = "# five contacts\n1 3 1 8\n1 4 5 8\n2 1 1 6\n4 3 7 8\n4 5 5 7\n";
const FIXTURE_QUERIES: &str = "D 1 5\nR 3 7\nS 6\nA 5\nX 8\nE 4 5 6\nE 4 5 7\n";
const FIXTURE_ANSWERS: &str = "3 4\n1 4\n(1,3) (1,4) (4,5)\n(1,4) (4,5)\n(1,3) (1,4) (4,3)\ntrue\nfalse\n";

fn tgcsa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tgcsa")).args(args).output().expect("binary runs")
}

fn tgcsa_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tgcsa"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn report_value(report: &str, key: &str) -> String {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('\t')))
        .unwrap_or_else(|| panic!("no `{key}` in report:\n{report}"))
        .to_string()
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        fs::write(dir.path().join("g5.txt"), G5).unwrap();
        fs::write(dir.path().join("q.txt"), FIXTURE_QUERIES).unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn s(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }
}

fn is_usage_error(o: &Output) -> bool {
    o.status.code() == Some(2)
}

#[test]
fn build_and_query_every_codec() {
    let f = Fixture::new();
    for codec in ["plain", "vbyte-rle", "vbyte-rle-select", "huff-rle-opt"] {
        let out = f.s(&format!("g5.{codec}"));
        let report = stdout(&tgcsa(&["build", "--input", &f.s("g5.txt"), "--output", &out, "--codec", codec]));
        assert_eq!(report_value(&report, "codec"), codec);
        assert_eq!(report_value(&report, "contacts"), "5");
        assert_eq!(report_value(&report, "sigma"), "13");
        let answers = stdout(&tgcsa(&["query", "--index", &out, "--queries", &f.s("q.txt")]));
        assert_eq!(answers, FIXTURE_ANSWERS, "{codec}");
        let piped = stdout(&tgcsa_stdin(&["query", "--index", &out], FIXTURE_QUERIES));
        assert_eq!(piped, FIXTURE_ANSWERS);
    }
}

#[test]
fn plain_bpc_is_size_over_contacts() {
    let f = Fixture::new();
    let report = stdout(&tgcsa(&["build", "--input", &f.s("g5.txt"), "--output", &f.s("g5.idx"), "--codec", "plain"]));
    let bits: f64 = report_value(&report, "size_bits").parse().unwrap();
    let bpc: f64 = report_value(&report, "bpc").parse().unwrap();
    assert!((bpc - bits / 5.0).abs() < 1e-3);
}

#[test]
fn edgelog_baseline_answers_the_same() {
    let f = Fixture::new();
    let report =
        stdout(&tgcsa(&["build", "--input", &f.s("g5.txt"), "--output", &f.s("g5.idx"), "--baseline", "edgelog"]));
    let el = report_value(&report, "edgelog_output");
    assert_eq!(Path::new(&el), f.path("g5.idx.edgelog"));
    let answers = stdout(&tgcsa(&["query", "--index", &el, "--queries", &f.s("q.txt")]));
    assert_eq!(answers, FIXTURE_ANSWERS);
}

#[test]
fn edgelog_rejects_overlaps() {
    let f = Fixture::new();
    fs::write(f.path("dup.txt"), "1 2 1 5\n1 2 3 6\n").unwrap();
    let o = tgcsa(&["build", "--input", &f.s("dup.txt"), "--output", &f.s("dup.idx"), "--baseline", "edgelog"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("overlapping contacts unsupported on edge (1,2)"));
}

#[test]
fn usage_errors() {
    let f = Fixture::new();
    let g5 = f.s("g5.txt");
    let idx = f.s("g5.idx");
    assert!(is_usage_error(&tgcsa(&["build", "--input", &g5, "--output", &idx, "--tpsi", "0"])));
    assert!(is_usage_error(&tgcsa(&["build", "--input", &g5, "--output", &idx, "--arity", "3"])));
    assert!(is_usage_error(&tgcsa(&["build", "--input", &g5, "--output", &idx, "--codec", "zip"])));
    stdout(&tgcsa(&["build", "--input", &g5, "--output", &idx]));
    assert!(is_usage_error(&tgcsa(&["bench", "--index", &idx, "--queries", &f.s("q.txt"), "--repeat", "0"])));
    assert!(is_usage_error(&tgcsa(&["gen", "ba", "--vertices", "10", "--m", "10", "--lifetime", "50"])));
}

#[test]
fn malformed_query_line_fails() {
    let f = Fixture::new();
    let idx = f.s("g5.idx");
    stdout(&tgcsa(&["build", "--input", &f.s("g5.txt"), "--output", &idx]));
    let o = tgcsa_stdin(&["query", "--index", &idx], "D 1 5\nZ 9\n");
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn corrupt_index_rejected() {
    let f = Fixture::new();
    let idx = f.s("g5.idx");
    stdout(&tgcsa(&["build", "--input", &f.s("g5.txt"), "--output", &idx, "--codec", "plain"]));
    let mut bytes = fs::read(&idx).unwrap();
    bytes[0] = b'X';
    fs::write(&idx, &bytes).unwrap();
    assert!(!tgcsa(&["query", "--index", &idx, "--queries", &f.s("q.txt")]).status.success());
}

#[test]
fn bench_reports_fixture_classes() {
    let f = Fixture::new();
    let idx = f.s("g5.idx");
    stdout(&tgcsa(&["build", "--input", &f.s("g5.txt"), "--output", &idx, "--codec", "plain"]));
    fs::write(f.path("six.txt"), "D 1 5\nR 3 7\nS 6\nA 5\nX 8\nE 4 5 6\n").unwrap();
    for threads in ["1", "2"] {
        let report = stdout(&tgcsa(&[
            "bench",
            "--index",
            &idx,
            "--queries",
            &f.s("six.txt"),
            "--repeat",
            "3",
            "--warmup",
            "1",
            "--threads",
            threads,
        ]));
        assert_eq!(report_value(&report, "classes"), "6");
        for (class, results) in
            [("direct", 2), ("reverse", 2), ("snapshot", 3), ("activated", 2), ("deactivated", 3), ("edge", 1)]
        {
            assert_eq!(report_value(&report, &format!("{class}.results")), results.to_string(), "{class}");
            let us: f64 = report_value(&report, &format!("{class}.us_per_query_median")).parse().unwrap();
            assert!(us >= 0.0);
        }
        let bits: f64 = report_value(&report, "size_bits").parse().unwrap();
        let bpc: f64 = report_value(&report, "bpc").parse().unwrap();
        assert!((bpc - bits / 5.0).abs() < 1e-3);
    }
}

#[test]
fn gen_is_deterministic_and_indexable() {
    let f = Fixture::new();
    let args = |out: &str| {
        [
            "gen",
            "ba",
            "--vertices",
            "1000",
            "--m",
            "10",
            "--dist",
            "uniform:5",
            "--lifetime",
            "1000",
            "--seed",
            "7",
            "--output",
            out,
        ]
        .map(String::from)
    };
    let (a, b) = (f.s("a.txt"), f.s("b.txt"));
    let report = stdout(&tgcsa(&args(&a).iter().map(String::as_str).collect::<Vec<_>>()));
    stdout(&tgcsa(&args(&b).iter().map(String::as_str).collect::<Vec<_>>()));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(report_value(&report, "edges"), "9900");
    assert_eq!(report_value(&report, "contacts"), "49500");

    let build = stdout(&tgcsa(&["build", "--input", &a, "--output", &f.s("a.idx"), "--baseline", "edgelog"]));
    assert_eq!(report_value(&build, "contacts"), "49500");
    let q = "D 11 500\nS 250 .. 260 w\nA 100 .. 200\nE 11 1 57\n";
    let tg = stdout(&tgcsa_stdin(&["query", "--index", &f.s("a.idx")], q));
    let el = stdout(&tgcsa_stdin(&["query", "--index", &f.s("a.idx.edgelog")], q));
    assert_eq!(tg, el);
    assert_eq!(tg.lines().count(), 4);
}

#[test]
fn gen_to_stdout_keeps_stats_on_stderr() {
    let o = tgcsa(&["gen", "comm-net", "--seed", "3"]);
    let text = stdout(&o);
    assert!(text.lines().all(|l| l.split_whitespace().count() == 4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("e_per_v\t16.00"));
}

#[test]
fn stats_on_fixture() {
    let f = Fixture::new();
    let report = stdout(&tgcsa(&["stats", "--input", &f.s("g5.txt")]));
    assert_eq!(report_value(&report, "vertices"), "5");
    assert_eq!(report_value(&report, "edges"), "5");
    assert_eq!(report_value(&report, "contacts"), "5");
    assert_eq!(report_value(&report, "size_b_bits"), "60");
    let table = stdout(&tgcsa(&["stats", "--input", &f.s("g5.txt"), "--table"]));
    assert_eq!(table.lines().count(), 2);
}

#[test]
fn arity_three_incremental() {
    let f = Fixture::new();
    fs::write(f.path("inc.txt"), "1 3 1\n1 4 5\n2 1 1\n4 3 7\n4 5 5\n").unwrap();
    let idx = f.s("inc.idx");
    let report = stdout(&tgcsa(&["build", "--input", &f.s("inc.txt"), "--output", &idx, "--arity", "3"]));
    assert_eq!(report_value(&report, "arity"), "3");
    let answers = stdout(&tgcsa_stdin(&["query", "--index", &idx], "D 1 6\nS 2\nX 3\n"));
    assert_eq!(answers, "3 4\n(1,3) (2,1)\nerror: incremental contacts are never deactivated\n");
}
