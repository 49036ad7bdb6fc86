use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{check_dim, Error, Result};
use crate::ext_real::ExtReal;
use crate::model::{FunctionModel, ScalarPiece, Separable, SharedModel};
use crate::point::Point;

/// A scalar function `h` whose proximal mapping is known in closed form.
pub trait ScalarProx: Send + Sync {
    fn value(&self, t: f64) -> f64;
    /// Every minimizer of `y ↦ (t − y)²/(2r) + h(y)`, in ascending order.
    fn prox(&self, t: f64, r: f64) -> Vec<f64>;
    /// Prox-bound threshold: the envelope is defined for `r` below it.
    fn prox_threshold(&self) -> f64 {
        f64::INFINITY
    }
    fn lower_bound(&self) -> Option<f64> {
        None
    }
    fn name(&self) -> String {
        "h".into()
    }
}

/// `λ|t|`, prox by soft thresholding.
#[derive(Debug, Clone, Copy)]
pub struct AbsValue {
    pub lambda: f64,
}

impl ScalarProx for AbsValue {
    fn value(&self, t: f64) -> f64 {
        self.lambda * t.abs()
    }
    fn prox(&self, t: f64, r: f64) -> Vec<f64> {
        let k = self.lambda * r;
        vec![t.signum() * (t.abs() - k).max(0.0)]
    }
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
    fn name(&self) -> String {
        format!("{}|.|", self.lambda)
    }
}

/// `cost · [t ≠ 0]`, prox by hard thresholding. The envelope is
/// `min(t²/(2r), cost)`; at the threshold both `0` and `t` are minimizers.
#[derive(Debug, Clone, Copy)]
pub struct ZeroNormCost {
    pub cost: f64,
}

impl ScalarProx for ZeroNormCost {
    fn value(&self, t: f64) -> f64 {
        if t != 0.0 {
            self.cost
        } else {
            0.0
        }
    }
    fn prox(&self, t: f64, r: f64) -> Vec<f64> {
        let keep = t * t / (2.0 * r);
        if t == 0.0 || keep < self.cost {
            vec![0.0]
        } else if keep > self.cost {
            vec![t]
        } else if t > 0.0 {
            vec![0.0, t]
        } else {
            vec![t, 0.0]
        }
    }
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
    fn name(&self) -> String {
        format!("{}*|.|_0", self.cost)
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type ProxFn = Arc<dyn Fn(f64, f64) -> Vec<f64> + Send + Sync>;

/// A user scalar function with a user prox returning all minimizers.
#[derive(Clone)]
pub struct UserScalar {
    value: ScalarFn,
    prox: ProxFn,
    threshold: f64,
    lower_bound: Option<f64>,
}

impl UserScalar {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        prox: impl Fn(f64, f64) -> Vec<f64> + Send + Sync + 'static,
        threshold: f64,
    ) -> Self {
        UserScalar {
            value: Arc::new(value),
            prox: Arc::new(prox),
            threshold,
            lower_bound: None,
        }
    }

    pub fn with_lower_bound(mut self, b: f64) -> Self {
        self.lower_bound = Some(b);
        self
    }
}

impl ScalarProx for UserScalar {
    fn value(&self, t: f64) -> f64 {
        (self.value)(t)
    }
    fn prox(&self, t: f64, r: f64) -> Vec<f64> {
        (self.prox)(t, r)
    }
    fn prox_threshold(&self) -> f64 {
        self.threshold
    }
    fn lower_bound(&self) -> Option<f64> {
        self.lower_bound
    }
}

/// Inner functions whose envelope has a closed form.
#[derive(Clone)]
pub enum ProxFriendly {
    /// `λ‖·‖₁` on `R^n`.
    L1 { n: usize, lambda: f64 },
    /// `cost · ‖·‖₀` on `R^n`.
    ZeroNorm { n: usize, cost: f64 },
    /// `½ yᵀQy + qᵀy` with `Q` symmetric.
    Quadratic { q_mat: DMatrix<f64>, q_vec: Vec<f64> },
    /// `Σ_i h(y_i)` on `R^n` for a scalar `h` with known prox.
    Scalar { n: usize, h: Arc<dyn ScalarProx> },
    /// A model without a known prox; always rejected.
    Opaque(SharedModel),
}

#[derive(Clone)]
enum Kind {
    Separable(Arc<dyn ScalarProx>),
    Quadratic {
        q_mat: DMatrix<f64>,
        q_vec: Vec<f64>,
        chol: Cholesky<f64, Dyn>,
    },
}

/// `e_r h(x) = inf_y (1/2r)‖x − y‖² + h(y)`.
///
/// The envelope is a pointwise infimum of quadratics in `x`, so its
/// subderivative is `min_{y ∈ prox(x)} <(x − y)/r, w>`, a concave function
/// of `w`; the descent property holds with `L = 1/r`.
#[derive(Clone)]
pub struct MoreauEnvelope {
    dim: usize,
    r: f64,
    kind: Kind,
}

pub fn moreau_envelope(inner: ProxFriendly, r: f64) -> Result<MoreauEnvelope> {
    if r.is_nan() || r <= 0.0 || !r.is_finite() {
        return Err(Error::NonpositiveScale(r));
    }
    let (dim, kind) = match inner {
        ProxFriendly::L1 { n, lambda } => {
            if lambda <= 0.0 {
                return Err(Error::InvalidParameter("λ must be positive".into()));
            }
            (n, Kind::Separable(Arc::new(AbsValue { lambda })))
        }
        ProxFriendly::ZeroNorm { n, cost } => {
            if cost <= 0.0 {
                return Err(Error::InvalidParameter("zero-norm cost must be positive".into()));
            }
            (n, Kind::Separable(Arc::new(ZeroNormCost { cost })))
        }
        ProxFriendly::Scalar { n, h } => {
            if r >= h.prox_threshold() {
                return Err(Error::ProxUnavailable(format!(
                    "r = {r} is not below the prox threshold {}",
                    h.prox_threshold()
                )));
            }
            (n, Kind::Separable(h))
        }
        ProxFriendly::Quadratic { q_mat, q_vec } => {
            let n = q_mat.nrows();
            check_dim(n, q_mat.ncols())?;
            check_dim(n, q_vec.len())?;
            if (&q_mat - q_mat.transpose()).amax() > 1e-12 * (1.0 + q_mat.amax()) {
                return Err(Error::InvalidParameter("Q must be symmetric".into()));
            }
            let m = DMatrix::identity(n, n) + &q_mat * r;
            let chol = Cholesky::new(m).ok_or_else(|| {
                Error::ProxUnavailable("I + rQ is not positive definite".into())
            })?;
            (n, Kind::Quadratic { q_mat, q_vec, chol })
        }
        ProxFriendly::Opaque(m) => {
            return Err(Error::ProxUnavailable(format!("no closed-form prox for {}", m.name())))
        }
    };
    if dim == 0 {
        return Err(Error::EmptyPoint);
    }
    Ok(MoreauEnvelope { dim, r, kind })
}

impl MoreauEnvelope {
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Proximal points per coordinate (separable) or the single prox point.
    fn prox_sets(&self, x: &Point) -> Vec<Vec<f64>> {
        match &self.kind {
            Kind::Separable(h) => x.iter().map(|&t| h.prox(t, self.r)).collect(),
            Kind::Quadratic { .. } => self.quadratic_prox(x).into_iter().map(|y| vec![y]).collect(),
        }
    }

    fn quadratic_prox(&self, x: &Point) -> Vec<f64> {
        let Kind::Quadratic { q_vec, chol, .. } = &self.kind else {
            unreachable!()
        };
        let rhs = DVector::from_iterator(
            self.dim,
            x.iter().zip(q_vec).map(|(xi, qi)| xi - self.r * qi),
        );
        chol.solve(&rhs).iter().copied().collect()
    }
}

impl FunctionModel for MoreauEnvelope {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &Point) -> ExtReal {
        let r = self.r;
        let v = match &self.kind {
            Kind::Separable(h) => x
                .iter()
                .map(|&t| {
                    let p = h.prox(t, r)[0];
                    (t - p) * (t - p) / (2.0 * r) + h.value(p)
                })
                .sum(),
            Kind::Quadratic { q_mat, q_vec, .. } => {
                let y = self.quadratic_prox(x);
                let yv = DVector::from_column_slice(&y);
                let quad = 0.5 * yv.dot(&(q_mat * &yv));
                let lin: f64 = y.iter().zip(q_vec).map(|(a, b)| a * b).sum();
                let dist: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
                dist / (2.0 * r) + quad + lin
            }
        };
        ExtReal::try_new(v).unwrap_or(ExtReal::PosInf)
    }

    fn subderivative(&self, x: &Point, w: &Point) -> Result<ExtReal> {
        let mut s = 0.0;
        for ((&t, &wi), p) in x.iter().zip(w.iter()).zip(self.prox_sets(x)) {
            if p.is_empty() {
                return Err(Error::ProxUnavailable("empty proximal set".into()));
            }
            s += p
                .iter()
                .map(|&pi| (t - pi) * wi / self.r)
                .fold(f64::INFINITY, f64::min);
        }
        Ok(ExtReal::Finite(s))
    }

    fn semi_differentiable(&self) -> bool {
        true
    }

    fn descent_constant(&self) -> Option<f64> {
        Some(1.0 / self.r)
    }

    fn lower_bound(&self) -> Option<f64> {
        match &self.kind {
            Kind::Separable(h) => h.lower_bound().map(|b| b * self.dim as f64),
            Kind::Quadratic { .. } => None,
        }
    }

    fn gradient(&self, x: &Point) -> Option<Point> {
        let sets = self.prox_sets(x);
        if sets.iter().any(|p| p.len() != 1) {
            return None;
        }
        Some(Point::from_vec(
            x.iter().zip(&sets).map(|(&t, p)| (t - p[0]) / self.r).collect(),
        ))
    }

    fn separable(&self, x: &Point) -> Option<Separable> {
        if matches!(self.kind, Kind::Quadratic { .. }) {
            return self.gradient(x).map(|g| Separable::linear(g.into_vec()));
        }
        let pieces = x
            .iter()
            .zip(self.prox_sets(x))
            .map(|(&t, p)| {
                let slopes = p.iter().map(|&pi| (t - pi) / self.r);
                let lo = slopes.clone().fold(f64::INFINITY, f64::min);
                let hi = slopes.fold(f64::NEG_INFINITY, f64::max);
                ScalarPiece::Homogeneous { right: lo, left: -hi }
            })
            .collect();
        Some(Separable {
            linear: vec![0.0; self.dim],
            pieces,
        })
    }

    fn concave_subderivative(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        let inner = match &self.kind {
            Kind::Separable(h) => h.name(),
            Kind::Quadratic { .. } => "quadratic".into(),
        };
        format!("e_{}({})", self.r, inner)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pt;

    fn grid_envelope(h: &dyn ScalarProx, r: f64, t: f64) -> f64 {
        (-400_000..=400_000)
            .map(|k| k as f64 * 1e-5)
            .map(|y| (t - y) * (t - y) / (2.0 * r) + h.value(y))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn huber_value() {
        let e = moreau_envelope(ProxFriendly::L1 { n: 1, lambda: 1.0 }, 1.0).unwrap();
        assert_eq!(e.value(&pt![2]), ExtReal::Finite(1.5));
        assert!((grid_envelope(&AbsValue { lambda: 1.0 }, 1.0, 2.0) - 1.5).abs() < 1e-9);
        assert_eq!(e.value(&pt![0]), ExtReal::ZERO);
        assert_eq!(e.subderivative(&pt![0], &pt![1]).unwrap(), ExtReal::ZERO);
    }

    #[test]
    fn hard_threshold_value() {
        let e = moreau_envelope(ProxFriendly::ZeroNorm { n: 1, cost: 1.0 }, 0.5).unwrap();
        assert_eq!(e.value(&pt![0.5]), ExtReal::Finite(0.25));
        assert!((grid_envelope(&ZeroNormCost { cost: 1.0 }, 0.5, 0.5) - 0.25).abs() < 1e-9);
    }

    #[test]
    fn zero_norm_threshold_takes_min_over_prox() {
        // At t = 1, r = 0.5: t²/2r = 1 = cost, prox = {0, 1}.
        let e = moreau_envelope(ProxFriendly::ZeroNorm { n: 1, cost: 1.0 }, 0.5).unwrap();
        assert_eq!(e.subderivative(&pt![1], &pt![1]).unwrap(), ExtReal::ZERO);
        assert_eq!(e.subderivative(&pt![1], &pt![-1]).unwrap(), ExtReal::Finite(-2.0));
        assert!(e.gradient(&pt![1]).is_none());
    }

    #[test]
    fn quadratic_matches_closed_form() {
        // e_r(½ a y²) = a x² / (2 (1 + r a)).
        let e = moreau_envelope(
            ProxFriendly::Quadratic {
                q_mat: DMatrix::from_element(1, 1, 3.0),
                q_vec: vec![0.0],
            },
            0.5,
        )
        .unwrap();
        let v = e.value(&pt![2]).to_f64();
        assert!((v - 3.0 * 4.0 / (2.0 * 2.5)).abs() < 1e-12);
        let d = e.subderivative(&pt![2], &pt![1]).unwrap().to_f64();
        assert!((d - 3.0 * 2.0 / 2.5).abs() < 1e-12);
    }

    #[test]
    fn unsupported_inner() {
        let m: SharedModel = Arc::new(crate::oracles::l1_norm(1, 1.0));
        assert!(matches!(
            moreau_envelope(ProxFriendly::Opaque(m), 1.0),
            Err(Error::ProxUnavailable(_))
        ));
        let neg_def = ProxFriendly::Quadratic {
            q_mat: DMatrix::from_element(1, 1, -4.0),
            q_vec: vec![0.0],
        };
        assert!(matches!(moreau_envelope(neg_def, 0.5), Err(Error::ProxUnavailable(_))));
    }
}
