//! End-to-end runs of the `subderiv-bench` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use subderiv::bench::{read_report, CSV_HEADER};
use subderiv::Status;

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subderiv-bench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn documented_run_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.csv");
    let o = bench(&[
        "--problem", "dc_quadratic_l1", "--epsilon", "1e-3", "--norm", "l1", "--mu", "0.5", "--max-iter", "10000",
        "--out", path_arg(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(*lines.last().unwrap(), "# status=eps_stationary");
    for row in &lines[1..lines.len() - 1] {
        assert_eq!(row.split(',').count(), 7, "{row}");
    }
}

#[test]
fn list_names_every_problem() {
    let o = bench(&["--list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["dc_quadratic_l1", "lasso_linf", "dc_max", "sparse_moreau", "relu_net", "complementarity_penalty"] {
        assert!(text.contains(name), "{name} missing from --list");
    }
}

#[test]
fn usage_errors_exit_two_and_name_the_flag() {
    let o = bench(&["--problem", "no_such_problem"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--problem"));
    let o = bench(&["--problem", "dc_max", "--schedule", "wolfe"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--schedule"));
    let o = bench(&["--problem", "dc_max", "--strategy", "l1-ext", "--norm", "l2"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(bench(&["--problem", "complementarity_penalty", "--dim", "3"]).status.code(), Some(2));
}

#[test]
fn runtime_failures_exit_one() {
    // ℓ2 Armijo stalls at a kink of the ReLU loss
    let o = bench(&["--problem", "relu_net", "--norm", "l2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("status=backtrack_exhausted"));
    let o = bench(&["--problem", "dc_max", "--out", "/nonexistent-dir/trace.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}

#[test]
fn json_report_round_trips_with_conditional_audit() {
    let dir = tempfile::tempdir().unwrap();
    let with = dir.path().join("with.json");
    let o = bench(&["--problem", "dc_max", "--format", "json", "--out", path_arg(&with)]);
    assert_eq!(o.status.code(), Some(0));
    let report = read_report(&with).unwrap();
    assert_eq!(report.status, Status::EpsStationary);
    assert_eq!(report.problem, "dc_max");
    assert_eq!(report.steps, report.trace.records.len());
    let audit = report.rate_audit.as_ref().expect("L and f* are registered");
    assert!(audit.last.holds && audit.all_n_hold);
    let again: subderiv::bench::Report = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(again, report);

    let without = dir.path().join("without.json");
    let o = bench(&["--problem", "relu_net", "--max-iter", "5", "--format", "json", "--out", path_arg(&without)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!fs::read_to_string(&without).unwrap().contains("rate_audit"));
    assert!(read_report(&without).unwrap().rate_audit.is_none());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("t.json");
    fs::write(
        &cfg,
        format!("# quick run\nproblem = dc_quadratic_l1\nmax-iter = 3\nepsilon = 0\nformat = json\nout = {}\n", out.display()),
    )
    .unwrap();
    let o = bench(&["--config", path_arg(&cfg), "--max-iter", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_report(&out).unwrap();
    assert_eq!(report.config.max_iter, Some(5));
    assert_eq!(report.status, Status::MaxIter);
    assert_eq!(report.steps, 5);

    fs::write(&cfg, "problem = dc_max\nbogus_key = 1\n").unwrap();
    assert_eq!(bench(&["--config", path_arg(&cfg)]).status.code(), Some(2));
    assert_eq!(bench(&["--config", "/nonexistent.cfg"]).status.code(), Some(2));
}

#[test]
fn sweep_writes_one_trace_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.csv");
    let o = bench(&[
        "--problem", "dc_quadratic_l1", "--sweep", "epsilon=1e-2,1e-4", "--sweep", "norm=l1,l2", "--out", path_arg(&out),
        "--no-timing",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "trace.epsilon-1e-2.norm-l1.csv",
            "trace.epsilon-1e-2.norm-l2.csv",
            "trace.epsilon-1e-4.norm-l1.csv",
            "trace.epsilon-1e-4.norm-l2.csv"
        ]
    );
    // a smaller tolerance never stops earlier
    let rows = |n: &str| fs::read_to_string(dir.path().join(n)).unwrap().lines().count();
    assert!(rows("trace.epsilon-1e-4.norm-l1.csv") >= rows("trace.epsilon-1e-2.norm-l1.csv"));
}

#[test]
fn fixture_files_feed_the_lasso_problem() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    fs::write(&a, "# 3 x 2\n1 0\n0 1\n1 1\n").unwrap();
    fs::write(&b, "1\n-1\n0\n").unwrap();
    let out = dir.path().join("r.json");
    let o = bench(&[
        "--problem", "lasso_linf", "--matrix", path_arg(&a), "--vector", path_arg(&b), "--format", "json", "--out",
        path_arg(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_report(&out).unwrap();
    assert_eq!(r.final_x.len(), 2);
    assert_eq!(r.status, Status::EpsStationary);

    fs::write(&b, "1\n-1\n").unwrap();
    assert_eq!(
        bench(&["--problem", "lasso_linf", "--matrix", path_arg(&a), "--vector", path_arg(&b)]).status.code(),
        Some(2)
    );
}

#[test]
fn no_timing_zeroes_the_clock_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = bench(&["--problem", "sparse_moreau", "--no-timing", "--out", path_arg(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(&out).unwrap();
    for row in csv.lines().skip(1).filter(|l| !l.starts_with('#')) {
        assert!(row.ends_with(",0"), "{row}");
    }
}
