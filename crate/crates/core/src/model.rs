//! The oracle contract every objective implements.
//!
//! A [`FunctionModel`] answers two questions at a point `x`: the value
//! `f(x)` and the subderivative `d f(x)(w)`, the lower limit of
//! `(f(x + t w') - f(x)) / t` as `t -> 0+` and `w' -> w`. Everything else
//! on the trait is an optional capability used by the direction-search
//! solvers and the convergence audits.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::ext_real::ExtReal;
use crate::point::Point;

/// A one-variable positively homogeneous piece `g_i(t)` of a separable
/// subderivative, or a general scalar function when the caller has one.
#[derive(Clone)]
pub enum ScalarPiece {
    /// `g(t) = right * t` for `t >= 0` and `g(t) = left * |t|` for `t < 0`,
    /// i.e. `g(1) = right`, `g(-1) = left`.
    Homogeneous { right: f64, left: f64 },
    /// Arbitrary scalar function, minimized numerically over `[-1, 1]`.
    General(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl ScalarPiece {
    pub const ZERO: ScalarPiece = ScalarPiece::Homogeneous {
        right: 0.0,
        left: 0.0,
    };

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ScalarPiece::Homogeneous { right, left } => {
                if t >= 0.0 {
                    right * t
                } else {
                    left * -t
                }
            }
            ScalarPiece::General(g) => g(t),
        }
    }

    pub fn add(&self, other: &ScalarPiece) -> ScalarPiece {
        match (self, other) {
            (
                ScalarPiece::Homogeneous { right: a, left: b },
                ScalarPiece::Homogeneous { right: c, left: d },
            ) => ScalarPiece::Homogeneous {
                right: a + c,
                left: b + d,
            },
            _ => {
                let (p, q) = (self.clone(), other.clone());
                ScalarPiece::General(Arc::new(move |t| p.eval(t) + q.eval(t)))
            }
        }
    }

    pub fn scale(&self, s: f64) -> ScalarPiece {
        match self {
            ScalarPiece::Homogeneous { right, left } => ScalarPiece::Homogeneous {
                right: right * s,
                left: left * s,
            },
            ScalarPiece::General(g) => {
                let g = g.clone();
                ScalarPiece::General(Arc::new(move |t| s * g(t)))
            }
        }
    }
}

impl fmt::Debug for ScalarPiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarPiece::Homogeneous { right, left } => f
                .debug_struct("Homogeneous")
                .field("right", right)
                .field("left", left)
                .finish(),
            ScalarPiece::General(_) => f.write_str("General(..)"),
        }
    }
}

/// `d f(x)(w) = <linear, w> + sum_i pieces[i](w_i)`.
#[derive(Debug, Clone)]
pub struct Separable {
    pub linear: Vec<f64>,
    pub pieces: Vec<ScalarPiece>,
}

impl Separable {
    pub fn linear(grad: Vec<f64>) -> Self {
        let n = grad.len();
        Separable {
            linear: grad,
            pieces: vec![ScalarPiece::ZERO; n],
        }
    }

    pub fn add(&self, other: &Separable) -> Separable {
        Separable {
            linear: self
                .linear
                .iter()
                .zip(&other.linear)
                .map(|(a, b)| a + b)
                .collect(),
            pieces: self
                .pieces
                .iter()
                .zip(&other.pieces)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Separable {
        Separable {
            linear: self.linear.iter().map(|a| a * s).collect(),
            pieces: self.pieces.iter().map(|p| p.scale(s)).collect(),
        }
    }

    pub fn eval(&self, w: &[f64]) -> f64 {
        self.linear
            .iter()
            .zip(&self.pieces)
            .zip(w)
            .map(|((c, g), &t)| c * t + g.eval(t))
            .sum()
    }
}

/// An objective `f: R^n -> (-inf, +inf]` queried through its value and
/// subderivative.
///
/// Implementations must be pure and stateless: identical arguments give
/// bit-identical results, and a model may be shared across threads.
pub trait FunctionModel: Send + Sync {
    fn dimension(&self) -> usize;

    fn value(&self, x: &Point) -> ExtReal;

    /// `d f(x)(w)`. Only meaningful where `value(x)` is finite; use
    /// [`checked_subderivative`] when that is not already known.
    fn subderivative(&self, x: &Point, w: &Point) -> Result<ExtReal>;

    /// Set when `d f(x)(w)` is a full limit (finite, continuous in `w`).
    fn semi_differentiable(&self) -> bool {
        false
    }

    /// Constant `L` of the descent property
    /// `f(y) <= f(x) + d f(x)(y - x) + L/2 |y - x|^2`.
    fn descent_constant(&self) -> Option<f64> {
        None
    }

    fn lower_bound(&self) -> Option<f64> {
        None
    }

    /// The gradient, when `f` is differentiable at `x`.
    fn gradient(&self, _x: &Point) -> Option<Point> {
        None
    }

    /// Separable structure of `d f(x)(.)`, when declared.
    fn separable(&self, _x: &Point) -> Option<Separable> {
        None
    }

    /// Set when `d f(x)(.)` is concave for every `x`.
    fn concave_subderivative(&self) -> bool {
        false
    }

    /// Short human-readable name.
    fn name(&self) -> String {
        "model".to_string()
    }
}

pub type SharedModel = Arc<dyn FunctionModel>;

/// Subderivative with dimension and domain checks.
pub fn checked_subderivative(f: &dyn FunctionModel, x: &Point, w: &Point) -> Result<ExtReal> {
    check_dim(f.dimension(), x.dim())?;
    check_dim(f.dimension(), w.dim())?;
    if !f.value(x).is_finite() {
        return Err(Error::DomainViolation);
    }
    f.subderivative(x, w)
}

/// Absolute tolerance used by [`homogeneity_check`] on finite values.
pub const HOMOGENEITY_TOL: f64 = 1e-8;

/// Checks `d f(x)(t w) = t d f(x)(w)` at one sample.
///
/// Finite values are compared with a tolerance relative to their size;
/// infinite values must carry the same tag. Any error counts as a failure.
pub fn homogeneity_check(f: &dyn FunctionModel, x: &Point, w: &Point, t: f64) -> bool {
    if t.is_nan() || t <= 0.0 {
        return false;
    }
    let lhs = checked_subderivative(f, x, &w.scale(t));
    let rhs = checked_subderivative(f, x, w).map(|v| v.scale(t));
    match (lhs, rhs) {
        (Ok(ExtReal::Finite(a)), Ok(ExtReal::Finite(b))) => {
            (a - b).abs() <= HOMOGENEITY_TOL * (1.0 + a.abs().max(b.abs()))
        }
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    }
}
