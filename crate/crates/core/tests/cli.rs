use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const RANDOM: &str = r#"{"initial": {"preset": "random-seeded", "seed": 0}, "truncation": 12}"#;

struct Run {
    dir: TempDir,
}

impl Run {
    fn new(config: &str) -> Run {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("run.json"), config).unwrap();
        Run { dir }
    }

    fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn exec(&self, cmd: &str, extra: &[&str]) -> Output {
        self.exec_to(&self.out(), cmd, extra)
    }

    fn exec_to(&self, out: &Path, cmd: &str, extra: &[&str]) -> Output {
        let config = self.dir.path().join("run.json");
        let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        Command::new(env!("CARGO_BIN_EXE_fktoda")).args(&args).output().unwrap()
    }

    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.out().join(name)).unwrap()
    }

    fn json(&self, name: &str) -> serde_json::Value {
        serde_json::from_str(&self.read(name)).unwrap()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn plot_points(text: &str) -> Vec<(f64, f64)> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let mut it = l.split_whitespace().map(|x| x.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect()
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(files(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let r = Run::new(r#"{"initial": "zero", "truncation": 4, "bogus": 1}"#);
    let o = r.exec("evolve", &[]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("bogus"));
}

#[test]
fn negative_time_is_a_config_error() {
    let r = Run::new(r#"{"initial": "zero", "truncation": 4}"#);
    assert_eq!(code(&r.exec("spectrum", &["--t", "-1"])), 2);
}

#[test]
fn missing_config_file_is_an_io_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_fktoda"))
        .args(["spectrum", "--config", "/nonexistent/run.json"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 4);
}

#[test]
fn degenerate_functional_is_a_numerical_error() {
    let r = Run::new(r#"{"initial": "stationary", "truncation": 6}"#);
    let o = r.exec("reconstruct", &["--t", "0.2"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("quasi-definite"), "{}", stderr(&o));
}

#[test]
fn exponential_series_reports_the_moment_budget() {
    let r = Run::new(r#"{"initial": {"preset": "random-seeded", "seed": 0}, "truncation": 12, "moments": 12}"#);
    let o = r.exec("reconstruct", &["--t", "40"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("K_max"), "{}", stderr(&o));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let r = Run::new(RANDOM);
    let run = |dir: &str| {
        let out = r.dir.path().join(dir);
        let o = r.exec_to(&out, "verify", &["--t", "0.1", "--format", "csv", "--format", "json"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        files(&out).into_iter().map(|p| (p.strip_prefix(&out).unwrap().to_owned(), std::fs::read(&p).unwrap())).collect::<Vec<_>>()
    };
    let (a, b) = (run("first"), run("second"));
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn stationary_verify_is_flagged_constant() {
    let r = Run::new(r#"{"initial": "stationary", "truncation": 4}"#);
    let o = r.exec("verify", &["--t", "0.05"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep = r.json("report.json");
    assert_eq!(rep["constant_trajectory"], true);
}

#[test]
fn zero_state_residuals_are_zero() {
    let r = Run::new(r#"{"initial": "zero", "truncation": 4}"#);
    assert_eq!(code(&r.exec("verify", &["--t", "0.05"])), 0);
    let csv = r.read("residuals.csv");
    let mut rows = csv.lines().skip(1).peekable();
    assert!(rows.peek().is_some());
    for row in rows {
        let value: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(value, 0.0, "{row}");
    }
}

#[test]
fn stationary_spectrum_is_the_diagonal() {
    let r = Run::new(r#"{"initial": "stationary", "truncation": 2}"#);
    assert_eq!(code(&r.exec("spectrum", &["--format", "plotdata"])), 0);
    let mut pts = plot_points(&r.read("plot/spectrum.dat"));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let want = [(1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)];
    assert_eq!(pts.len(), 4);
    for (p, w) in pts.iter().zip(want) {
        assert!((p.0 - w.0).abs() < 1e-12 && (p.1 - w.1).abs() < 1e-12, "{p:?}");
    }
}

#[test]
fn zero_trajectory_plots_are_flat() {
    let r = Run::new(r#"{"initial": "zero", "truncation": 3}"#);
    assert_eq!(code(&r.exec("evolve", &["--t", "0.1", "--format", "plotdata"])), 0);
    let plots = files(&r.out().join("plot"));
    assert!(!plots.is_empty());
    for p in plots {
        let pts = plot_points(&std::fs::read_to_string(&p).unwrap());
        assert!(pts.iter().all(|&(_, v)| v == 0.0), "{}", p.display());
    }
}

#[test]
fn reconstruct_at_start_matches_the_operator() {
    let r = Run::new(RANDOM);
    let o = r.exec("reconstruct", &["--t", "0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let diff = r.json("reconstruct.json")["max_diff"].as_f64().unwrap();
    assert!(diff < 1e-8, "{diff:e}");
}

#[test]
fn every_subcommand_runs_on_the_random_preset() {
    let r = Run::new(RANDOM);
    for cmd in ["evolve", "verify", "reconstruct", "weyl", "spectrum", "moments"] {
        let o = r.exec(cmd, &["--t", "0.1"]);
        assert_eq!(code(&o), 0, "{cmd}: {}", stderr(&o));
    }
}
