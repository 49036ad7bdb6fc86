//! Flag parsing and process-level behaviour of `subderiv-bench`.
//!
//! Exit codes: 0 on a terminal status other than `backtrack_exhausted`,
//! 1 on runtime failures (solver errors, output IO, exhausted line search),
//! 2 on usage errors (bad flags, unknown problem, invalid parameters or
//! unreadable config/fixture files).
//!
//! `--config path` reads `key = value` lines (`#` comments, keys spelled
//! like the flags); explicit flags win. `--sweep key=v1,v2,...` may repeat;
//! the cartesian product of the listed values runs concurrently, each run
//! writing to `--out` with a `.key-value` suffix inserted before the
//! extension.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;

use super::{emit_trace, io, prepare, registry, solve, Format, Prepared, Settings};
use crate::error::{Error, Result};
use crate::solver::Status;

#[derive(Debug, Parser)]
#[command(name = "subderiv-bench", about = "Run subderivative-based descent on registered problems")]
struct Args {
    /// Problem name (see --list).
    #[arg(long)]
    problem: Option<String>,
    /// Print the problem registry and exit.
    #[arg(long)]
    list: bool,
    /// key=value configuration file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<String>,
    /// l2, l1 or linf.
    #[arg(long)]
    norm: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    alpha0: Option<String>,
    /// armijo or diminishing.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// auto, l2, linf-sep, l1-ext, l1-ext-reduced or fallback.
    #[arg(long)]
    strategy: Option<String>,
    /// Candidate budget of the sampling fallback.
    #[arg(long)]
    budget: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Write wall_ns as 0.
    #[arg(long)]
    no_timing: bool,
    /// key=v1,v2,... (repeatable).
    #[arg(long)]
    sweep: Vec<String>,
    /// Problem dimension.
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    /// Moreau parameter.
    #[arg(long)]
    r: Option<String>,
    /// Numeric text file with a matrix.
    #[arg(long)]
    matrix: Option<String>,
    /// Numeric text file with a vector.
    #[arg(long)]
    vector: Option<String>,
    /// Comma-separated starting point.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Override of the descent constant used by the rate audit.
    #[arg(long)]
    descent_constant: Option<String>,
    /// Override of the lower bound used by the rate audit.
    #[arg(long, allow_hyphen_values = true)]
    f_star: Option<String>,
    /// Values below this count as unbounded.
    #[arg(long, allow_hyphen_values = true)]
    floor: Option<String>,
}

impl Args {
    fn flag_pairs(&self) -> Vec<(String, String)> {
        let mut v = Vec::new();
        let mut push = |k: &str, x: &Option<String>| {
            if let Some(x) = x {
                v.push((k.to_string(), x.clone()));
            }
        };
        push("problem", &self.problem);
        push("epsilon", &self.epsilon);
        push("norm", &self.norm);
        push("mu", &self.mu);
        push("alpha0", &self.alpha0);
        push("schedule", &self.schedule);
        push("max_iter", &self.max_iter);
        push("seed", &self.seed);
        push("strategy", &self.strategy);
        push("budget", &self.budget);
        push("out", &self.out);
        push("format", &self.format);
        push("dim", &self.dim);
        push("lambda", &self.lambda);
        push("rho", &self.rho);
        push("r", &self.r);
        push("matrix", &self.matrix);
        push("vector", &self.vector);
        push("x0", &self.x0);
        push("descent_constant", &self.descent_constant);
        push("f_star", &self.f_star);
        push("floor", &self.floor);
        if self.no_timing {
            v.push(("no_timing".into(), "true".into()));
        }
        v
    }
}

fn parse_sweeps(specs: &[String]) -> Result<Vec<(String, Vec<String>)>> {
    specs
        .iter()
        .map(|s| {
            let (k, vals) = s
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("--sweep: expected key=v1,v2,... in {s:?}")))?;
            let vals: Vec<String> = vals.split(',').map(|x| x.trim().to_string()).collect();
            if k.trim().is_empty() || vals.iter().any(String::is_empty) {
                return Err(Error::InvalidParameter(format!("--sweep: malformed {s:?}")));
            }
            Ok((k.trim().replace('-', "_"), vals))
        })
        .collect()
}

/// `trace.csv` + [("epsilon","1e-4")] -> `trace.epsilon-1e-4.csv`.
fn suffixed(path: &Path, tags: &[(String, String)]) -> PathBuf {
    if tags.is_empty() {
        return path.to_path_buf();
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut name = stem;
    for (k, v) in tags {
        name.push_str(&format!(".{k}-{v}"));
    }
    if let Some(ext) = path.extension() {
        name.push('.');
        name.push_str(&ext.to_string_lossy());
    }
    path.with_file_name(name)
}

fn print_registry() {
    for p in registry::registry() {
        println!(
            "{:<24} dim={:<3} norm={:<4} eps={:e} max_iter={:<6} [{}] {}",
            p.name,
            p.default_dim,
            p.norm,
            p.epsilon,
            p.max_iter,
            p.tags.join(","),
            p.summary
        );
    }
}

struct Job {
    tags: Vec<(String, String)>,
    prepared: Prepared,
}

fn execute(job: &Job) -> i32 {
    let label = job
        .tags
        .iter()
        .map(|(k, v)| format!(" {k}={v}"))
        .collect::<String>();
    let report = match solve(&job.prepared) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error{label}: {e}");
            return 1;
        }
    };
    if let Some(out) = &job.prepared.settings.out {
        let path = suffixed(out, &job.tags);
        let format = job.prepared.settings.format.unwrap_or(Format::Csv);
        if let Err(e) = emit_trace(&report, &path, format) {
            eprintln!("error{label}: {e}");
            return 1;
        }
    }
    let d = report
        .final_dir_value
        .map_or_else(|| "n/a".to_string(), |d| format!("{d:.6e}"));
    let audit = report.rate_audit.as_ref().map_or(String::new(), |a| {
        format!(" rate_audit={}", if a.last.holds && a.all_n_hold { "ok" } else { "violated" })
    });
    println!(
        "{}{label}: status={} steps={} f={:.10e} d={d}{audit}",
        report.problem,
        report.status.as_str(),
        report.steps,
        report.final_f
    );
    if report.status == Status::BacktrackExhausted {
        eprintln!("error{label}: Armijo backtracking exhausted");
        return 1;
    }
    0
}

fn usage(e: impl std::fmt::Display) -> i32 {
    eprintln!("error: {e}");
    2
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if args.list {
        print_registry();
        return 0;
    }
    let mut base = Settings::default();
    if let Some(path) = &args.config {
        let pairs = match io::read_config(path) {
            Ok(p) => p,
            Err(e) => return usage(format!("--config: {e}")),
        };
        if let Err(e) = base.apply_all(&pairs) {
            return usage(format!("--config {}: {e}", path.display()));
        }
    }
    if let Err(e) = base.apply_all(&args.flag_pairs()) {
        return usage(e);
    }
    let sweeps = match parse_sweeps(&args.sweep) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (k, vals) in &sweeps {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                vals.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push((k.clone(), v.clone()));
                    c
                })
            })
            .collect();
    }
    let mut jobs = Vec::with_capacity(combos.len());
    for tags in combos {
        let mut s = base.clone();
        if let Err(e) = s.apply_all(&tags) {
            return usage(format!("--sweep: {e}"));
        }
        match prepare(&s) {
            Ok(prepared) => jobs.push(Job { tags, prepared }),
            Err(e) => return usage(e),
        }
    }
    if jobs.len() == 1 {
        return execute(&jobs[0]);
    }
    let codes: Vec<i32> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs.iter().map(|j| scope.spawn(move || execute(j))).collect();
        handles.into_iter().map(|h| h.join().unwrap_or(1)).collect()
    });
    codes.into_iter().max().unwrap_or(0)
}
