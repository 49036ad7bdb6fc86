//! Vector-valued maps `F: R^n -> R^m` used as inner functions of composites.
//!
//! [`SmoothMap`]s expose a Jacobian-vector product; [`SemiDiffMap`]s expose
//! the semi-derivative `d F(x)(w)`, which is continuous and positively
//! homogeneous in `w` but not necessarily linear. Every sized smooth map is
//! also a semi-differentiable map.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::point::Point;

pub trait SmoothMap: Send + Sync {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn eval(&self, x: &Point) -> Point;
    /// `∇F(x) w`.
    fn jacobian_apply(&self, x: &Point, w: &Point) -> Point;
    /// Lipschitz modulus of the derivative, if known.
    fn smoothness_constant(&self) -> Option<f64> {
        None
    }
    /// Lipschitz modulus of the map itself, if known.
    fn lipschitz_constant(&self) -> Option<f64> {
        None
    }
}

pub trait SemiDiffMap: Send + Sync {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn eval(&self, x: &Point) -> Point;
    fn semiderivative(&self, x: &Point, w: &Point) -> Point;
}

impl<T: SmoothMap> SemiDiffMap for T {
    fn dim_in(&self) -> usize {
        SmoothMap::dim_in(self)
    }
    fn dim_out(&self) -> usize {
        SmoothMap::dim_out(self)
    }
    fn eval(&self, x: &Point) -> Point {
        SmoothMap::eval(self, x)
    }
    fn semiderivative(&self, x: &Point, w: &Point) -> Point {
        self.jacobian_apply(x, w)
    }
}

/// Adapter exposing a shared smooth map through the semi-derivative API.
#[derive(Clone)]
pub struct SmoothAsSemi(pub Arc<dyn SmoothMap>);

impl SemiDiffMap for SmoothAsSemi {
    fn dim_in(&self) -> usize {
        self.0.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.0.dim_out()
    }
    fn eval(&self, x: &Point) -> Point {
        self.0.eval(x)
    }
    fn semiderivative(&self, x: &Point, w: &Point) -> Point {
        self.0.jacobian_apply(x, w)
    }
}

pub fn as_semi(map: Arc<dyn SmoothMap>) -> Arc<dyn SemiDiffMap> {
    Arc::new(SmoothAsSemi(map))
}

/// `x ↦ A x + b`.
#[derive(Debug, Clone)]
pub struct AffineMap {
    a: DMatrix<f64>,
    b: Vec<f64>,
}

impl AffineMap {
    pub fn new(a: DMatrix<f64>, b: Vec<f64>) -> Result<Self> {
        check_dim(a.nrows(), b.len())?;
        if a.ncols() == 0 || a.nrows() == 0 {
            return Err(Error::EmptyPoint);
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("affine map data must be finite".into()));
        }
        Ok(AffineMap { a, b })
    }

    pub fn identity(n: usize) -> Self {
        AffineMap {
            a: DMatrix::identity(n, n),
            b: vec![0.0; n],
        }
    }

    /// `x ↦ s x + c` componentwise on `R^n`.
    pub fn scaled_shift(n: usize, s: f64, c: f64) -> Self {
        AffineMap {
            a: DMatrix::identity(n, n) * s,
            b: vec![c; n],
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn offset(&self) -> &[f64] {
        &self.b
    }
}

pub(crate) fn mat_vec(a: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
        .collect()
}

pub(crate) fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    a.clone().svd(false, false).singular_values.max()
}

impl SmoothMap for AffineMap {
    fn dim_in(&self) -> usize {
        self.a.ncols()
    }
    fn dim_out(&self) -> usize {
        self.a.nrows()
    }
    fn eval(&self, x: &Point) -> Point {
        let mut y = mat_vec(&self.a, x);
        for (yi, bi) in y.iter_mut().zip(&self.b) {
            *yi += bi;
        }
        Point::from_vec(y)
    }
    fn jacobian_apply(&self, _x: &Point, w: &Point) -> Point {
        Point::from_vec(mat_vec(&self.a, w))
    }
    fn smoothness_constant(&self) -> Option<f64> {
        Some(0.0)
    }
    fn lipschitz_constant(&self) -> Option<f64> {
        Some(spectral_norm(&self.a))
    }
}

type VecFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type JvpFn = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// Smooth map given by closures for the value and the Jacobian-vector
/// product.
#[derive(Clone)]
pub struct SmoothFn {
    dim_in: usize,
    dim_out: usize,
    eval: VecFn,
    jvp: JvpFn,
    smoothness: Option<f64>,
}

impl SmoothFn {
    pub fn new(
        dim_in: usize,
        dim_out: usize,
        eval: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        jvp: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        SmoothFn {
            dim_in,
            dim_out,
            eval: Arc::new(eval),
            jvp: Arc::new(jvp),
            smoothness: None,
        }
    }

    pub fn with_smoothness(mut self, l: f64) -> Self {
        self.smoothness = Some(l);
        self
    }
}

impl SmoothMap for SmoothFn {
    fn dim_in(&self) -> usize {
        self.dim_in
    }
    fn dim_out(&self) -> usize {
        self.dim_out
    }
    fn eval(&self, x: &Point) -> Point {
        let y = (self.eval)(x);
        debug_assert_eq!(y.len(), self.dim_out);
        Point::from_vec(y)
    }
    fn jacobian_apply(&self, x: &Point, w: &Point) -> Point {
        Point::from_vec((self.jvp)(x, w))
    }
    fn smoothness_constant(&self) -> Option<f64> {
        self.smoothness
    }
}

/// Componentwise `max{0, y}`.
#[derive(Debug, Clone, Copy)]
pub struct Relu {
    pub dim: usize,
}

/// Semi-derivative of `max{0, .}` at `y` in direction `v`. At `y = 0` the
/// limit of `max{0, t v'} / t` is `max{0, v}`.
pub fn relu_semiderivative(y: f64, v: f64) -> f64 {
    if y > 0.0 {
        v
    } else if y < 0.0 {
        0.0
    } else {
        v.max(0.0)
    }
}

impl SemiDiffMap for Relu {
    fn dim_in(&self) -> usize {
        self.dim
    }
    fn dim_out(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &Point) -> Point {
        Point::from_vec(x.iter().map(|v| v.max(0.0)).collect())
    }
    fn semiderivative(&self, x: &Point, w: &Point) -> Point {
        Point::from_vec(
            x.iter()
                .zip(w.iter())
                .map(|(&y, &v)| relu_semiderivative(y, v))
                .collect(),
        )
    }
}

/// Componentwise `|y|`.
#[derive(Debug, Clone, Copy)]
pub struct Abs {
    pub dim: usize,
}

impl SemiDiffMap for Abs {
    fn dim_in(&self) -> usize {
        self.dim
    }
    fn dim_out(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &Point) -> Point {
        Point::from_vec(x.iter().map(|v| v.abs()).collect())
    }
    fn semiderivative(&self, x: &Point, w: &Point) -> Point {
        Point::from_vec(
            x.iter()
                .zip(w.iter())
                .map(|(&y, &v)| {
                    if y > 0.0 {
                        v
                    } else if y < 0.0 {
                        -v
                    } else {
                        v.abs()
                    }
                })
                .collect(),
        )
    }
}

/// Composition `outer ∘ inner` of semi-differentiable maps.
#[derive(Clone)]
pub struct ComposedMap {
    inner: Arc<dyn SemiDiffMap>,
    outer: Arc<dyn SemiDiffMap>,
}

impl ComposedMap {
    pub fn new(outer: Arc<dyn SemiDiffMap>, inner: Arc<dyn SemiDiffMap>) -> Result<Self> {
        check_dim(outer.dim_in(), inner.dim_out())?;
        Ok(ComposedMap { inner, outer })
    }
}

impl SemiDiffMap for ComposedMap {
    fn dim_in(&self) -> usize {
        self.inner.dim_in()
    }
    fn dim_out(&self) -> usize {
        self.outer.dim_out()
    }
    fn eval(&self, x: &Point) -> Point {
        self.outer.eval(&self.inner.eval(x))
    }
    fn semiderivative(&self, x: &Point, w: &Point) -> Point {
        let y = self.inner.eval(x);
        let v = self.inner.semiderivative(x, w);
        self.outer.semiderivative(&y, &v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pt;

    #[test]
    fn relu_at_kink_takes_positive_part() {
        let r = Relu { dim: 2 };
        let d = r.semiderivative(&pt![0, 0], &pt![-2, 3]);
        assert_eq!(d.as_slice(), &[0.0, 3.0]);
    }

    #[test]
    fn affine_jacobian_is_linear() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, -1.0, 0.5, 0.0, 3.0]);
        let f = AffineMap::new(a, vec![1.0, -1.0]).unwrap();
        let x = pt![1, 2, 3];
        let u = pt![0.3, -1, 2];
        let v = pt![1, 1, -0.5];
        let lhs = f.jacobian_apply(&x, &u.add(&v));
        let rhs = f.jacobian_apply(&x, &u).add(&f.jacobian_apply(&x, &v));
        for (a, b) in lhs.iter().zip(rhs.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(SmoothMap::eval(&f, &x).as_slice(), &[3.0, 8.5]);
    }

    #[test]
    fn finite_difference_converges_to_jacobian() {
        let f = SmoothFn::new(
            2,
            2,
            |x| vec![x[0] * x[0], x[0] * x[1]],
            |x, w| vec![2.0 * x[0] * w[0], w[0] * x[1] + x[0] * w[1]],
        );
        let x = pt![1.5, -0.5];
        let w = pt![0.7, 0.2];
        let jw = f.jacobian_apply(&x, &w);
        let mut last = f64::INFINITY;
        for k in 1..6 {
            let t = 10f64.powi(-k);
            let q = SmoothMap::eval(&f, &x.axpy(t, &w))
                .sub(&SmoothMap::eval(&f, &x))
                .scale(1.0 / t);
            let err = q.sub(&jw).norm2();
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-4);
    }

    #[test]
    fn composition_checks_dimensions() {
        let inner: Arc<dyn SemiDiffMap> = Arc::new(AffineMap::identity(3));
        let outer: Arc<dyn SemiDiffMap> = Arc::new(Relu { dim: 2 });
        assert!(ComposedMap::new(outer, inner).is_err());
    }
}
