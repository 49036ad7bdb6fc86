//! Benchmark runner behind the `subderiv-bench` binary: problem registry,
//! configuration merging, execution and trace/report emission.
//!
//! Traces are written as CSV with the columns
//! `iter,f,dir_value,alpha,backtracks,step_norm,wall_ns` followed by a
//! `# status=...` line, or as a JSON [`Report`] that also echoes the
//! resolved configuration and, when both a descent constant and a lower
//! bound are known, a rate audit.

pub mod cli;
pub mod io;
pub mod registry;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::direction::NormChoice;
use crate::error::{Error, Result};
use crate::line_search::{ArmijoParams, Schedule};
use crate::model::SharedModel;
use crate::point::Point;
use crate::solver::{rate_audit, run, RateAudit, SolverConfig, Status, Strategy, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    Armijo,
    Diminishing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    Auto,
    L2,
    LinfSep,
    L1Ext,
    L1ExtReduced,
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Run configuration. Unset fields fall back to the problem's registered
/// defaults, then to global defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub problem: Option<String>,
    pub epsilon: Option<f64>,
    pub norm: Option<NormChoice>,
    pub mu: Option<f64>,
    pub alpha0: Option<f64>,
    pub schedule: Option<ScheduleKind>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub strategy: Option<StrategyKind>,
    pub budget: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub no_timing: Option<bool>,
    pub dim: Option<usize>,
    pub lambda: Option<f64>,
    pub rho: Option<f64>,
    pub r: Option<f64>,
    pub matrix: Option<PathBuf>,
    pub vector: Option<PathBuf>,
    pub x0: Option<Vec<f64>>,
    pub descent_constant: Option<f64>,
    pub f_star: Option<f64>,
    pub floor: Option<f64>,
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::InvalidParameter(format!("--{}: cannot parse {v:?}", key.replace('_', "-"))))
}

fn parse_real(key: &str, v: &str) -> Result<f64> {
    let x: f64 = parse_num(key, v)?;
    if x.is_nan() {
        return Err(Error::InvalidParameter(format!("--{}: NaN is not allowed", key.replace('_', "-"))));
    }
    Ok(x)
}

fn unknown(key: &str, v: &str, choices: &str) -> Error {
    Error::InvalidParameter(format!(
        "--{}: unknown value {v:?} (expected one of {choices})",
        key.replace('_', "-")
    ))
}

impl Settings {
    /// Sets one field from its textual form; `key` uses the flag name with
    /// either hyphens or underscores.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let key = key.trim_start_matches("--").replace('-', "_");
        let k = key.as_str();
        match k {
            "problem" => self.problem = Some(v.to_string()),
            "epsilon" => self.epsilon = Some(parse_real(k, v)?),
            "norm" => {
                self.norm = Some(v.parse().map_err(|_| unknown(k, v, "l2, l1, linf"))?);
            }
            "mu" => self.mu = Some(parse_real(k, v)?),
            "alpha0" => self.alpha0 = Some(parse_real(k, v)?),
            "schedule" => {
                self.schedule = Some(match v {
                    "armijo" => ScheduleKind::Armijo,
                    "diminishing" => ScheduleKind::Diminishing,
                    _ => return Err(unknown(k, v, "armijo, diminishing")),
                })
            }
            "max_iter" => self.max_iter = Some(parse_num(k, v)?),
            "seed" => self.seed = Some(parse_num(k, v)?),
            "strategy" => {
                self.strategy = Some(match v {
                    "auto" => StrategyKind::Auto,
                    "l2" => StrategyKind::L2,
                    "linf-sep" => StrategyKind::LinfSep,
                    "l1-ext" => StrategyKind::L1Ext,
                    "l1-ext-reduced" => StrategyKind::L1ExtReduced,
                    "fallback" => StrategyKind::Fallback,
                    _ => {
                        return Err(unknown(k, v, "auto, l2, linf-sep, l1-ext, l1-ext-reduced, fallback"))
                    }
                })
            }
            "budget" => self.budget = Some(parse_num(k, v)?),
            "out" => self.out = Some(PathBuf::from(v)),
            "format" => {
                self.format = Some(match v {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    _ => return Err(unknown(k, v, "csv, json")),
                })
            }
            "no_timing" => self.no_timing = Some(parse_num(k, v)?),
            "dim" => self.dim = Some(parse_num(k, v)?),
            "lambda" => self.lambda = Some(parse_real(k, v)?),
            "rho" => self.rho = Some(parse_real(k, v)?),
            "r" => self.r = Some(parse_real(k, v)?),
            "matrix" => self.matrix = Some(PathBuf::from(v)),
            "vector" => self.vector = Some(PathBuf::from(v)),
            "x0" => {
                self.x0 = Some(
                    v.split(',')
                        .map(|t| parse_real(k, t.trim()))
                        .collect::<Result<Vec<f64>>>()?,
                )
            }
            "descent_constant" => self.descent_constant = Some(parse_real(k, v)?),
            "f_star" => self.f_star = Some(parse_real(k, v)?),
            "floor" => self.floor = Some(parse_real(k, v)?),
            _ => return Err(Error::InvalidParameter(format!("unknown setting {key:?}"))),
        }
        Ok(())
    }

    pub fn apply_all(&mut self, pairs: &[(String, String)]) -> Result<()> {
        pairs.iter().try_for_each(|(k, v)| self.set(k, v))
    }
}

/// A problem instance with its fully resolved configuration.
pub struct Prepared {
    pub settings: Settings,
    pub model: SharedModel,
    pub x0: Point,
    pub config: SolverConfig,
    pub descent_constant: Option<f64>,
    pub f_star: Option<f64>,
}

/// Resolves defaults and builds the problem. Every error here is a
/// configuration error.
pub fn prepare(settings: &Settings) -> Result<Prepared> {
    let name = settings
        .problem
        .as_deref()
        .ok_or_else(|| Error::InvalidParameter("--problem is required (see --list)".into()))?;
    let spec = registry::find(name)
        .ok_or_else(|| Error::InvalidParameter(format!("--problem: unknown problem {name:?} (see --list)")))?;
    let mut s = settings.clone();
    if s.dim.is_none() {
        // a matrix fixture fixes the number of unknowns
        s.dim = Some(match &s.matrix {
            Some(path) if spec.name == "lasso_linf" => io::read_matrix(path)?.ncols(),
            _ => spec.default_dim,
        });
    }
    s.epsilon.get_or_insert(spec.epsilon);
    s.norm.get_or_insert(spec.norm);
    s.max_iter.get_or_insert(spec.max_iter);
    s.mu.get_or_insert(0.5);
    s.alpha0.get_or_insert(1.0);
    s.schedule.get_or_insert(ScheduleKind::Armijo);
    s.seed.get_or_insert(0);
    s.strategy.get_or_insert(StrategyKind::Auto);
    s.budget.get_or_insert(crate::solver::AUTO_FALLBACK_BUDGET);
    s.format.get_or_insert(Format::Csv);
    s.no_timing.get_or_insert(false);
    s.floor.get_or_insert(-1e12);

    let built = (spec.build)(&s, s.dim.unwrap())?;
    let schedule = match s.schedule.unwrap() {
        ScheduleKind::Armijo => Schedule::Armijo(ArmijoParams {
            mu: s.mu.unwrap(),
            alpha_init: s.alpha0.unwrap(),
            ..Default::default()
        }),
        ScheduleKind::Diminishing => Schedule::Diminishing {
            alpha0: s.alpha0.unwrap(),
        },
    };
    let strategy = match s.strategy.unwrap() {
        StrategyKind::Auto => Strategy::Auto,
        StrategyKind::L2 => Strategy::L2Smooth,
        StrategyKind::LinfSep => Strategy::LInfSeparable,
        StrategyKind::L1Ext => Strategy::L1Extreme { reduced: false },
        StrategyKind::L1ExtReduced => Strategy::L1Extreme { reduced: true },
        StrategyKind::Fallback => Strategy::Fallback {
            budget: s.budget.unwrap(),
            seed: s.seed.unwrap(),
        },
    };
    let config = SolverConfig {
        epsilon: s.epsilon.unwrap(),
        norm: s.norm.unwrap(),
        schedule,
        max_iter: s.max_iter.unwrap(),
        strategy,
        floor: s.floor.unwrap(),
        record_timing: !s.no_timing.unwrap(),
    };
    config.validate()?;
    let descent_constant = s.descent_constant.or(built.descent_constant);
    let f_star = s.f_star.or(built.f_star);
    Ok(Prepared {
        settings: s,
        model: built.model,
        x0: built.x0,
        config,
        descent_constant,
        f_star,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub problem: String,
    pub config: Settings,
    pub status: Status,
    pub steps: usize,
    pub final_f: f64,
    pub final_x: Vec<f64>,
    pub final_dir_value: Option<f64>,
    pub descent_constant: Option<f64>,
    pub f_star: Option<f64>,
    pub trace: Trace,
    /// Present iff both a descent constant and `f*` are known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_audit: Option<AuditBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditBlock {
    /// The audit at the largest available `N`.
    pub last: RateAudit,
    /// The rate inequality for every `N` up to termination.
    pub all_n_hold: bool,
}

/// Runs a prepared problem. Errors here are runtime failures.
pub fn solve(p: &Prepared) -> Result<Report> {
    let trace = run(p.model.as_ref(), &p.x0, &p.config)?;
    let audit = match (p.descent_constant, p.f_star, p.config.schedule) {
        (Some(l), Some(f_star), Schedule::Armijo(a)) => {
            let last_n = trace.dir_values().len().saturating_sub(1);
            let last = rate_audit(&trace, f_star, l, a.mu, last_n)?;
            let all_n_hold = (0..=last_n)
                .map(|n| rate_audit(&trace, f_star, l, a.mu, n).map(|r| r.rate_holds))
                .collect::<Result<Vec<bool>>>()?
                .into_iter()
                .all(|b| b);
            Some(AuditBlock { last, all_n_hold })
        }
        _ => None,
    };
    Ok(Report {
        problem: p.settings.problem.clone().unwrap_or_default(),
        config: p.settings.clone(),
        status: trace.status,
        steps: trace.records.len(),
        final_f: trace.final_f,
        final_x: trace.final_x.clone(),
        final_dir_value: trace.final_dir_value,
        descent_constant: p.descent_constant,
        f_star: p.f_star,
        trace,
        rate_audit: audit,
    })
}

pub const CSV_HEADER: &str = "iter,f,dir_value,alpha,backtracks,step_norm,wall_ns";

/// CSV rendering of a trace; floats use the shortest round-trip form.
pub fn trace_csv(trace: &Trace) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in &trace.records {
        writeln!(
            s,
            "{},{:?},{:?},{:?},{},{:?},{}",
            r.k, r.f, r.dir_value, r.alpha, r.backtracks, r.step_norm, r.wall_ns
        )
        .unwrap();
    }
    writeln!(s, "# status={}", trace.status.as_str()).unwrap();
    s
}

fn io_err(path: &Path, e: impl ToString) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

pub fn emit_trace(report: &Report, path: &Path, format: Format) -> Result<()> {
    let body = match format {
        Format::Csv => trace_csv(&report.trace),
        Format::Json => serde_json::to_string_pretty(report).map_err(|e| io_err(path, e))? + "\n",
    };
    fs::write(path, body).map_err(|e| io_err(path, e))
}

pub fn read_report(path: &Path) -> Result<Report> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })
}
