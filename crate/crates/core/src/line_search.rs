//! Step sizes: Armijo backtracking and the diminishing schedule `α₀/(k+1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::model::FunctionModel;
use crate::point::Point;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmijoParams {
    /// Reduction multiple in `(0, 1)`.
    pub mu: f64,
    pub alpha_init: f64,
    pub max_backtracks: usize,
}

impl Default for ArmijoParams {
    fn default() -> Self {
        ArmijoParams {
            mu: 0.5,
            alpha_init: 1.0,
            max_backtracks: 60,
        }
    }
}

impl ArmijoParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::InvalidParameter(format!("μ = {} must lie in (0, 1)", self.mu)));
        }
        if !(self.alpha_init > 0.0 && self.alpha_init.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "α_init = {} must be positive",
                self.alpha_init
            )));
        }
        if self.max_backtracks == 0 {
            return Err(Error::InvalidParameter("max_backtracks must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Schedule {
    Armijo(ArmijoParams),
    /// `α_k = alpha0 / (k + 1)`.
    Diminishing { alpha0: f64 },
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Armijo(ArmijoParams::default())
    }
}

/// Largest `α = α_init μ^m` with `f(x + α w) − f(x) < (α/2) d`.
///
/// `d` is the direction value reported by the direction search and is not
/// recomputed. The inequality is strict; equality rejects the step.
/// Returns `(α, m)`.
pub fn armijo(f: &dyn FunctionModel, x: &Point, w: &Point, d: f64, p: &ArmijoParams) -> Result<(f64, usize)> {
    p.validate()?;
    if d.is_nan() || d >= 0.0 {
        return Err(Error::InvalidParameter(format!("Armijo needs d < 0, got {d}")));
    }
    let fx = f.value(x).finite().ok_or(Error::DomainViolation)?;
    let mut alpha = p.alpha_init;
    for m in 0..=p.max_backtracks {
        if let ExtReal::Finite(fy) = f.value(&x.axpy(alpha, w)) {
            if fy - fx < 0.5 * alpha * d {
                return Ok((alpha, m));
            }
        }
        alpha *= p.mu;
    }
    Err(Error::BacktrackExhausted {
        backtracks: p.max_backtracks,
    })
}

/// Inputs needed by [`schedule_step`] for the Armijo case.
pub struct StepContext<'a> {
    pub f: &'a dyn FunctionModel,
    pub x: &'a Point,
    pub w: &'a Point,
    pub d: f64,
}

/// `α_k` and the number of backtracks (always 0 for the diminishing rule).
pub fn schedule_step(s: &Schedule, k: usize, ctx: &StepContext<'_>) -> Result<(f64, usize)> {
    match s {
        Schedule::Diminishing { alpha0 } => Ok((alpha0 / (k as f64 + 1.0), 0)),
        Schedule::Armijo(p) => armijo(ctx.f, ctx.x, ctx.w, ctx.d, p),
    }
}
