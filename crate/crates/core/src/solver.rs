//! The subderivative descent method.
//!
//! Each iteration solves the direction subproblem once; its value serves
//! both the ε-stationarity test and the step. Iterates move by
//! `x_{k+1} = x_k + α_k w_k` with `α_k` from the configured schedule.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::direction::{
    solve_l1_extreme, solve_l2_smooth, solve_linf_separable, solve_sampling_fallback,
    DirectionResult, NormChoice,
};
use crate::error::{check_dim, Error, Result};
use crate::ext_real::ExtReal;
use crate::line_search::{schedule_step, Schedule, StepContext};
use crate::model::FunctionModel;
use crate::point::Point;
use crate::verify::sufficient_decrease_audit;

/// Sample budget used when `Auto` has to fall back to sampling.
pub const AUTO_FALLBACK_BUDGET: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    /// Picks a closed-form solver matching the norm and the model's
    /// declared structure at the current iterate, else samples.
    Auto,
    L2Smooth,
    LInfSeparable,
    L1Extreme { reduced: bool },
    Fallback { budget: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub norm: NormChoice,
    pub schedule: Schedule,
    pub max_iter: usize,
    pub strategy: Strategy,
    /// Values below this floor end the run with [`Status::Unbounded`].
    pub floor: f64,
    /// When false, `wall_ns` is recorded as 0 for reproducible traces.
    pub record_timing: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon: 1e-3,
            norm: NormChoice::L2,
            schedule: Schedule::default(),
            max_iter: 1000,
            strategy: Strategy::Auto,
            floor: -1e12,
            record_timing: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return Err(Error::InvalidParameter(format!("ε = {} must be ≥ 0", self.epsilon)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        match self.schedule {
            Schedule::Armijo(p) => p.validate()?,
            Schedule::Diminishing { alpha0 } if !(alpha0 > 0.0 && alpha0.is_finite()) => {
                return Err(Error::InvalidParameter(format!("α₀ = {alpha0} must be positive")))
            }
            Schedule::Diminishing { .. } => {}
        }
        let required = match self.strategy {
            Strategy::L2Smooth => Some(NormChoice::L2),
            Strategy::LInfSeparable => Some(NormChoice::LInf),
            Strategy::L1Extreme { .. } => Some(NormChoice::L1),
            Strategy::Auto | Strategy::Fallback { .. } => None,
        };
        match required {
            Some(n) if n != self.norm => Err(Error::InvalidParameter(format!(
                "strategy {:?} requires norm {n}, got {}",
                self.strategy, self.norm
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// An exact direction search certified `min d f(x)(w) ≥ −ε`.
    EpsStationary,
    /// A sampling search found no direction below `−ε`; not a certificate.
    NoDescentFound,
    MaxIter,
    Unbounded,
    BacktrackExhausted,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::EpsStationary => "eps_stationary",
            Status::NoDescentFound => "no_descent_found",
            Status::MaxIter => "max_iter",
            Status::Unbounded => "unbounded",
            Status::BacktrackExhausted => "backtrack_exhausted",
        }
    }
}

/// One accepted step from `x_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub k: usize,
    /// `f(x_k)`.
    pub f: f64,
    /// `d f(x_k)(w_k)`.
    pub dir_value: f64,
    pub alpha: f64,
    pub backtracks: usize,
    /// `‖x_{k+1} − x_k‖₂`.
    pub step_norm: f64,
    pub wall_ns: u64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub records: Vec<IterRecord>,
    pub status: Status,
    pub final_x: Vec<f64>,
    pub final_f: f64,
    /// Direction value at the final iterate, when a search ran there.
    pub final_dir_value: Option<f64>,
    /// Whether the final search was exact.
    pub final_exact: bool,
}

impl Trace {
    pub fn f0(&self) -> f64 {
        self.records.first().map_or(self.final_f, |r| r.f)
    }

    /// `f(x_0), f(x_1), …, f(x_final)`.
    pub fn values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.records.iter().map(|r| r.f).collect();
        v.push(self.final_f);
        v
    }

    /// `d_0, …, d_K` including the final search when there was one.
    pub fn dir_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.records.iter().map(|r| r.dir_value).collect();
        v.extend(self.final_dir_value);
        v
    }
}

/// Runs the configured direction search at `x`; `k` offsets sampling seeds.
pub fn search_direction(
    f: &dyn FunctionModel,
    x: &Point,
    norm: NormChoice,
    strategy: Strategy,
    k: usize,
) -> Result<DirectionResult> {
    match strategy {
        Strategy::L2Smooth => solve_l2_smooth(f, x),
        Strategy::LInfSeparable => solve_linf_separable(f, x),
        Strategy::L1Extreme { reduced } => solve_l1_extreme(f, x, reduced),
        Strategy::Fallback { budget, seed } => {
            solve_sampling_fallback(f, x, norm, budget, seed.wrapping_add(k as u64))
        }
        Strategy::Auto => match norm {
            NormChoice::L2 if f.gradient(x).is_some() => solve_l2_smooth(f, x),
            NormChoice::LInf if f.separable(x).is_some() => solve_linf_separable(f, x),
            NormChoice::L1 if f.concave_subderivative() => solve_l1_extreme(f, x, false),
            _ => solve_sampling_fallback(f, x, norm, AUTO_FALLBACK_BUDGET, k as u64),
        },
    }
}

fn finite_direction_value(d: &DirectionResult) -> Result<f64> {
    match d.value {
        ExtReal::NegInf => Err(Error::NegInfSubderivative),
        v => Ok(v.to_f64()),
    }
}

pub fn run(f: &dyn FunctionModel, x0: &Point, cfg: &SolverConfig) -> Result<Trace> {
    cfg.validate()?;
    check_dim(f.dimension(), x0.dim())?;
    let mut x = x0.clone();
    let mut fx = f.value(&x).finite().ok_or(Error::DomainViolation)?;
    let mut records = Vec::new();
    for k in 0..=cfg.max_iter {
        let started = Instant::now();
        let dir = search_direction(f, &x, cfg.norm, cfg.strategy, k)?;
        let d = finite_direction_value(&dir)?;
        let finish = |status, records, x: Point, fx, d| {
            Ok(Trace {
                records,
                status,
                final_x: x.into_vec(),
                final_f: fx,
                final_dir_value: d,
                final_exact: dir.exact,
            })
        };
        if d >= -cfg.epsilon {
            let status = if dir.exact {
                Status::EpsStationary
            } else {
                Status::NoDescentFound
            };
            return finish(status, records, x, fx, Some(d));
        }
        if k == cfg.max_iter {
            return finish(Status::MaxIter, records, x, fx, Some(d));
        }
        let ctx = StepContext {
            f,
            x: &x,
            w: &dir.w,
            d,
        };
        let (alpha, backtracks) = match schedule_step(&cfg.schedule, k, &ctx) {
            Ok(step) => step,
            Err(Error::BacktrackExhausted { .. }) => {
                return finish(Status::BacktrackExhausted, records, x, fx, Some(d))
            }
            Err(e) => return Err(e),
        };
        let next = x.axpy(alpha, &dir.w);
        let f_next = f.value(&next).finite().ok_or(Error::DomainViolation)?;
        let wall_ns = if cfg.record_timing {
            started.elapsed().as_nanos() as u64
        } else {
            0
        };
        records.push(IterRecord {
            k,
            f: fx,
            dir_value: d,
            alpha,
            backtracks,
            step_norm: next.sub(&x).norm2(),
            wall_ns,
            x: x.as_slice().to_vec(),
        });
        x = next;
        fx = f_next;
        if fx < cfg.floor {
            return finish(Status::Unbounded, records, x, fx, None);
        }
    }
    unreachable!("the loop returns at k = max_iter")
}

/// Whether `min_{‖w‖ ≤ 1} d f(x)(w) ≥ −ε` according to the chosen search,
/// with the minimizing direction as witness. The verdict is a certificate
/// only when `witness.exact`.
pub fn check_d_stationary(
    f: &dyn FunctionModel,
    x: &Point,
    epsilon: f64,
    norm: NormChoice,
    strategy: Strategy,
) -> Result<(bool, DirectionResult)> {
    check_dim(f.dimension(), x.dim())?;
    if !f.value(x).is_finite() {
        return Err(Error::DomainViolation);
    }
    let witness = search_direction(f, x, norm, strategy, 0)?;
    Ok((witness.value >= ExtReal::Finite(-epsilon), witness))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateAudit {
    /// `min_{k ≤ N} |d_k|`.
    pub lhs: f64,
    /// `sqrt((f(x_0) − f*) / (M (N + 1)))`.
    pub rhs: f64,
    /// `min{1/2, μ/(2L)}`.
    pub m: f64,
    pub n: usize,
    pub rate_holds: bool,
    /// Per recorded step: `f_{k+1} − f_k ≤ −M min{|d_k|, d_k²}`.
    pub sufficient_decrease: Vec<bool>,
    pub holds: bool,
}

/// `M = min{1/2, μ/(2L)}`.
pub fn rate_constant(mu: f64, l: f64) -> f64 {
    if l <= 0.0 {
        0.5
    } else {
        f64::min(0.5, mu / (2.0 * l))
    }
}

/// Checks `min_{k ≤ N} |d_k| ≤ sqrt((f(x_0) − f*)/(M(N+1)))` and the
/// per-step sufficient decrease on an Armijo trace.
pub fn rate_audit(trace: &Trace, f_star: f64, l: f64, mu: f64, n: usize) -> Result<RateAudit> {
    let d = trace.dir_values();
    if n >= d.len() {
        return Err(Error::InsufficientTrace {
            requested: n,
            available: d.len().saturating_sub(1),
        });
    }
    let m = rate_constant(mu, l);
    let lhs = d[..=n].iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let rhs = ((trace.f0() - f_star) / (m * (n as f64 + 1.0))).sqrt();
    let rate_holds = lhs <= rhs;
    let sufficient_decrease = sufficient_decrease_audit(trace, m);
    let holds = rate_holds && sufficient_decrease.iter().all(|&b| b);
    Ok(RateAudit {
        lhs,
        rhs,
        m,
        n,
        rate_holds,
        sufficient_decrease,
        holds,
    })
}
