//! Combinators building new models from old ones via the exact sum and
//! chain rules for subderivatives and semi-derivatives.
//!
//! Qualification conditions (metric subregularity along `w`, relative
//! Lipschitz continuity of the outer function) are contracts on the caller.
//! They hold automatically when all members are finite-valued or
//! semi-differentiable, which covers every bundled composition.

use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::ext_real::{ext_sum, ExtReal};
use crate::maps::{as_semi, SemiDiffMap, SmoothMap};
use crate::model::{FunctionModel, Separable, SharedModel};
use crate::oracles::DistanceToSet;
use crate::point::Point;
use crate::sets::SetModel;

/// Absolute tie tolerance for the active set of pointwise min/max.
pub const ACTIVE_TOL: f64 = 1e-12;

/// `Σ f_i`.
#[derive(Clone)]
pub struct Sum {
    members: Vec<SharedModel>,
}

/// Sum rule: `d(Σ f_i)(x)(w) = Σ d f_i(x)(w)`, folded left to right
/// starting from `0`.
pub fn sum(models: Vec<SharedModel>) -> Result<Sum> {
    let n = models.first().ok_or(Error::EmptyList)?.dimension();
    for m in &models {
        check_dim(n, m.dimension())?;
    }
    Ok(Sum { members: models })
}

fn all_some<T>(items: impl Iterator<Item = Option<T>>) -> Option<Vec<T>> {
    items.collect()
}

impl FunctionModel for Sum {
    fn dimension(&self) -> usize {
        self.members[0].dimension()
    }

    /// A clash `(+inf) + (-inf)` can only come from a member violating the
    /// `(-inf, +inf]` codomain; it is reported as `+inf`.
    fn value(&self, x: &Point) -> ExtReal {
        ext_sum(self.members.iter().map(|m| m.value(x))).unwrap_or(ExtReal::PosInf)
    }

    fn subderivative(&self, x: &Point, w: &Point) -> Result<ExtReal> {
        let parts = self
            .members
            .iter()
            .map(|m| m.subderivative(x, w))
            .collect::<Result<Vec<_>>>()?;
        ext_sum(parts)
    }

    fn semi_differentiable(&self) -> bool {
        self.members.iter().all(|m| m.semi_differentiable())
    }

    fn descent_constant(&self) -> Option<f64> {
        all_some(self.members.iter().map(|m| m.descent_constant())).map(|v| v.iter().sum())
    }

    fn lower_bound(&self) -> Option<f64> {
        all_some(self.members.iter().map(|m| m.lower_bound())).map(|v| v.iter().sum())
    }

    fn gradient(&self, x: &Point) -> Option<Point> {
        let grads = all_some(self.members.iter().map(|m| m.gradient(x)))?;
        grads.into_iter().reduce(|a, b| a.add(&b))
    }

    fn separable(&self, x: &Point) -> Option<Separable> {
        let parts = all_some(self.members.iter().map(|m| m.separable(x)))?;
        parts.into_iter().reduce(|a, b| a.add(&b))
    }

    fn concave_subderivative(&self) -> bool {
        self.members.iter().all(|m| m.concave_subderivative())
    }

    fn name(&self) -> String {
        let names: Vec<String> = self.members.iter().map(|m| m.name()).collect();
        format!("({})", names.join(" + "))
    }
}

/// `λ f` with `λ > 0`.
#[derive(Clone)]
pub struct Scale {
    inner: SharedModel,
    lambda: f64,
}

pub fn scale(model: SharedModel, lambda: f64) -> Result<Scale> {
    if lambda.is_nan() || lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::NonpositiveScale(lambda));
    }
    Ok(Scale {
        inner: model,
        lambda,
    })
}

impl FunctionModel for Scale {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }
    fn value(&self, x: &Point) -> ExtReal {
        self.inner.value(x).scale(self.lambda)
    }
    fn subderivative(&self, x: &Point, w: &Point) -> Result<ExtReal> {
        Ok(self.inner.subderivative(x, w)?.scale(self.lambda))
    }
    fn semi_differentiable(&self) -> bool {
        self.inner.semi_differentiable()
    }
    fn descent_constant(&self) -> Option<f64> {
        self.inner.descent_constant().map(|l| l * self.lambda)
    }
    fn lower_bound(&self) -> Option<f64> {
        self.inner.lower_bound().map(|b| b * self.lambda)
    }
    fn gradient(&self, x: &Point) -> Option<Point> {
        self.inner.gradient(x).map(|g| g.scale(self.lambda))
    }
    fn separable(&self, x: &Point) -> Option<Separable> {
        self.inner.separable(x).map(|s| s.scale(self.lambda))
    }
    fn concave_subderivative(&self) -> bool {
        self.inner.concave_subderivative()
    }
    fn name(&self) -> String {
        format!("{}*{}", self.lambda, self.inner.name())
    }
}

/// `g ∘ F` with `F` smooth.
#[derive(Clone)]
pub struct PrecomposeSmooth {
    outer: SharedModel,
    map: Arc<dyn SmoothMap>,
    concave_modulus: Option<f64>,
}

/// Chain rule `d(g∘F)(x)(w) = d g(F(x))(∇F(x) w)`.
pub fn precompose_smooth(g: SharedModel, map: Arc<dyn SmoothMap>) -> Result<PrecomposeSmooth> {
    check_dim(g.dimension(), map.dim_out())?;
    Ok(PrecomposeSmooth {
        outer: g,
        map,
        concave_modulus: None,
    })
}

impl PrecomposeSmooth {
    /// Declares `g` concave with Lipschitz modulus `ell` over the region of
    /// interest (fattened by the unit ball). Combined with the smoothness
    /// constant `L` of `F` this yields the descent constant `ell * L`.
    pub fn with_concave_modulus(mut self, ell: f64) -> Self {
        self.concave_modulus = Some(ell);
        self
    }
}

impl FunctionModel for PrecomposeSmooth {
    fn dimension(&self) -> usize {
        self.map.dim_in()
    }
    fn value(&self, x: &Point) -> ExtReal {
        self.outer.value(&self.map.eval(x))
    }
    fn subderivative(&self, x: &Point, w: &Point) -> Result<ExtReal> {
        let y = self.map.eval(x);
        let v = self.map.jacobian_apply(x, w);
        self.outer.subderivative(&y, &v)
    }
    fn semi_differentiable(&self) -> bool {
        self.outer.semi_differentiable()
    }
    /// `ell * L_F` for a declared concave outer function; otherwise, for an
    /// affine `F` with Lipschitz constant `κ`, `L_g κ²`.
    fn descent_constant(&self) -> Option<f64> {
        if let (Some(ell), Some(l)) = (self.concave_modulus, self.map.smoothness_constant()) {
            return Some(ell * l);
        }
        match (self.map.smoothness_constant(), self.map.lipschitz_constant()) {
            (Some(0.0), Some(kappa)) => {
                self.outer.descent_constant().map(|lg| lg * kappa * kappa)
            }
            _ => None,
        }
    }
    fn lower_bound(&self) -> Option<f64> {
        self.outer.lower_bound()
    }
    fn concave_subderivative(&self) -> bool {
        self.outer.concave_subderivative()
    }
    fn name(&self) -> String {
        format!("{}∘F", self.outer.name())
    }
}

/// `g ∘ F` with `g` a semi-differentiable model and `F` semi-differentiable.
#[derive(Clone)]
pub struct PrecomposeSemiDiff {
    outer: SharedModel,
    map: Arc<dyn SemiDiffMap>,
}

/// Chain rule for semi-differentiable functions:
/// `d(g∘F)(x)(w) = d g(F(x))(d F(x)(w))`.
pub fn precompose_semidiff(
    g: SharedModel,
    map: Arc<dyn SemiDiffMap>,
) -> Result<PrecomposeSemiDiff> {
    check_dim(g.dimension(), map.dim_out())?;
    if !g.semi_differentiable() {
        return Err(Error::InvalidParameter(format!(
            "outer model {} is not semi-differentiable",
            g.name()
        )));
    }
    Ok(PrecomposeSemiDiff { outer: g, map })
}

impl FunctionModel for PrecomposeSemiDiff {
    fn dimension(&self) -> usize {
        self.map.dim_in()
    }
    fn value(&self, x: &Point) -> ExtReal {
        self.outer.value(&self.map.eval(x))
    }
    fn subderivative(&self, x: &Point, w: &Point) -> Result<ExtReal> {
        let y = self.map.eval(x);
        let v = self.map.semiderivative(x, w);
        self.outer.subderivative(&y, &v)
    }
    fn semi_differentiable(&self) -> bool {
        true
    }
    fn lower_bound(&self) -> Option<f64> {
        self.outer.lower_bound()
    }
    fn name(&self) -> String {
        format!("{}∘G", self.outer.name())
    }
}

/// Forward semi-derivative propagation through `F_k ∘ ... ∘ F_1`.
///
/// Returns the composite value at `x` and its semi-derivative applied to
/// `w`, computed in one pass: `x_i = F_i(x_{i-1})`,
/// `u_i = d F_i(x_{i-1})(u_{i-1})`.
pub fn forward_chain(layers: &[Arc<dyn SemiDiffMap>], x: &Point, w: &Point) -> Result<(Point, Point)> {
    check_dim(x.dim(), w.dim())?;
    let mut dim = x.dim();
    for layer in layers {
        check_dim(layer.dim_in(), dim)?;
        dim = layer.dim_out();
    }
    let mut z = x.clone();
    let mut u = w.clone();
    for layer in layers {
        let next_u = layer.semiderivative(&z, &u);
        z = layer.eval(&z);
        u = next_u;
    }
    Ok((z, u))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Extremum {
    Min,
    Max,
}

/// Pointwise min or max of finite-valued semi-differentiable models.
#[derive(Clone)]
pub struct Pointwise {
    members: Vec<SharedModel>,
    kind: Extremum,
}

fn pointwise(models: Vec<SharedModel>, kind: Extremum) -> Result<Pointwise> {
    let n = models.first().ok_or(Error::EmptyList)?.dimension();
    for m in &models {
        check_dim(n, m.dimension())?;
        if !m.semi_differentiable() {
            return Err(Error::InvalidParameter(format!(
                "pointwise member {} is not semi-differentiable",
                m.name()
            )));
        }
    }
    Ok(Pointwise {
        members: models,
        kind,
    })
}

/// `max_i f_i`, with `d f(x)(w) = max` of member subderivatives over the
/// active set.
pub fn pointwise_max(models: Vec<SharedModel>) -> Result<Pointwise> {
    pointwise(models, Extremum::Max)
}

/// `min_i f_i`, with `d f(x)(w) = min` of member subderivatives over the
/// active set.
pub fn pointwise_min(models: Vec<SharedModel>) -> Result<Pointwise> {
    pointwise(models, Extremum::Min)
}

impl Pointwise {
    fn pick(&self, a: ExtReal, b: ExtReal) -> ExtReal {
        match self.kind {
            Extremum::Min => a.min(b),
            Extremum::Max => a.max(b),
        }
    }

    /// Indices `i` with `|f_i(x) - f(x)| <= ACTIVE_TOL`.
    pub fn active_set(&self, x: &Point) -> Vec<usize> {
        let values: Vec<ExtReal> = self.members.iter().map(|m| m.value(x)).collect();
        let best = values.iter().copied().reduce(|a, b| self.pick(a, b)).unwrap();
        values
            .iter()
            .enumerate()
            .filter(|(_, &v)| match (v, best) {
                (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs() <= ACTIVE_TOL,
                (a, b) => a == b,
            })
            .map(|(i, _)| i)
            .collect()
    }
}

impl FunctionModel for Pointwise {
    fn dimension(&self) -> usize {
        self.members[0].dimension()
    }

    fn value(&self, x: &Point) -> ExtReal {
        self.members
            .iter()
            .map(|m| m.value(x))
            .reduce(|a, b| self.pick(a, b))
            .unwrap()
    }

    fn subderivative(&self, x: &Point, w: &Point) -> Result<ExtReal> {
        let mut out: Option<ExtReal> = None;
        for i in self.active_set(x) {
            let d = self.members[i].subderivative(x, w)?;
            out = Some(match out {
                None => d,
                Some(acc) => self.pick(acc, d),
            });
        }
        Ok(out.expect("active set is never empty"))
    }

    fn semi_differentiable(&self) -> bool {
        true
    }

    /// For a min of models sharing the descent property, the largest member
    /// constant works: `f(y) <= f_j(y)` for the active member `j` attaining
    /// `d f(x)(y - x)`.
    fn descent_constant(&self) -> Option<f64> {
        match self.kind {
            Extremum::Min => all_some(self.members.iter().map(|m| m.descent_constant()))
                .map(|v| v.into_iter().fold(0.0, f64::max)),
            Extremum::Max if self.members.len() == 1 => self.members[0].descent_constant(),
            Extremum::Max => None,
        }
    }

    fn lower_bound(&self) -> Option<f64> {
        match self.kind {
            Extremum::Min => all_some(self.members.iter().map(|m| m.lower_bound()))
                .map(|v| v.into_iter().fold(f64::INFINITY, f64::min)),
            Extremum::Max => self
                .members
                .iter()
                .filter_map(|m| m.lower_bound())
                .reduce(f64::max),
        }
    }

    fn gradient(&self, x: &Point) -> Option<Point> {
        match self.active_set(x).as_slice() {
            [i] => self.members[*i].gradient(x),
            _ => None,
        }
    }

    fn concave_subderivative(&self) -> bool {
        match self.kind {
            Extremum::Min => self.members.iter().all(|m| m.concave_subderivative()),
            Extremum::Max => self.members.len() == 1 && self.members[0].concave_subderivative(),
        }
    }

    fn name(&self) -> String {
        let names: Vec<String> = self.members.iter().map(|m| m.name()).collect();
        let op = match self.kind {
            Extremum::Min => "min",
            Extremum::Max => "max",
        };
        format!("{op}({})", names.join(", "))
    }
}

/// Exact penalty `φ(x) + ρ dist(G(x); X)`.
pub fn penalize(
    phi: SharedModel,
    g: Arc<dyn SemiDiffMap>,
    set: Arc<dyn SetModel>,
    rho: f64,
) -> Result<Sum> {
    check_dim(phi.dimension(), g.dim_in())?;
    check_dim(set.dimension(), g.dim_out())?;
    let dist: SharedModel = Arc::new(DistanceToSet::new(set));
    let composed: SharedModel = Arc::new(precompose_semidiff(dist, g)?);
    let penalty: SharedModel = Arc::new(scale(composed, rho)?);
    sum(vec![phi, penalty])
}

/// [`penalize`] for a smooth constraint map.
pub fn penalize_smooth(
    phi: SharedModel,
    g: Arc<dyn SmoothMap>,
    set: Arc<dyn SetModel>,
    rho: f64,
) -> Result<Sum> {
    penalize(phi, as_semi(g), set, rho)
}

/// Descent constant `L (1 + r) / r` of `[e_r g1]∘F1 - g2∘F2` for convex
/// `g_i` and `L`-smooth `F_i`, valid on all of `R^n`.
pub fn dc_amenable_descent_constant(l: f64, r: f64) -> f64 {
    l * (1.0 + r) / r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{AffineMap, Relu, SmoothFn};
    use crate::oracles::{half_squared_norm, l1_norm, linear, neg_l1_norm, zero_norm_composite};
    use crate::pt;
    use crate::sets::Singleton;
    use nalgebra::DMatrix;

    fn fin(v: ExtReal) -> f64 {
        v.finite().expect("finite")
    }

    #[test]
    fn sum_of_quadratic_and_negative_l1() {
        let f = sum(vec![Arc::new(half_squared_norm(2)), Arc::new(neg_l1_norm(2, 1.0))]).unwrap();
        assert_eq!(fin(f.subderivative(&pt![2, 0], &pt![0, 1]).unwrap()), -1.0);
        assert_eq!(f.descent_constant(), Some(1.0));
    }

    #[test]
    fn sum_of_single_model_is_identity() {
        let g: SharedModel = Arc::new(l1_norm(3, 1.0));
        let f = sum(vec![g.clone()]).unwrap();
        let (x, w) = (pt![1, -1, 0], pt![2, 1, -3]);
        assert_eq!(f.value(&x), g.value(&x));
        assert_eq!(f.subderivative(&x, &w).unwrap(), g.subderivative(&x, &w).unwrap());
    }

    #[test]
    fn sum_of_l1_twice() {
        let f = sum(vec![Arc::new(l1_norm(1, 1.0)), Arc::new(l1_norm(1, 1.0))]).unwrap();
        assert_eq!(fin(f.subderivative(&pt![1], &pt![1]).unwrap()), 2.0);
    }

    #[test]
    fn sum_rejects_dimension_mismatch() {
        let r = sum(vec![Arc::new(l1_norm(1, 1.0)), Arc::new(l1_norm(2, 1.0))]);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn scale_examples() {
        let f = scale(Arc::new(l1_norm(3, 1.0)), 2.0).unwrap();
        assert_eq!(fin(f.subderivative(&pt![1, -1, 0], &pt![2, 1, -3]).unwrap()), 8.0);
        assert!(matches!(
            scale(Arc::new(l1_norm(1, 1.0)), 0.0),
            Err(Error::NonpositiveScale(_))
        ));
        let z = zero_norm_composite(DMatrix::identity(2, 2), vec![0.0; 2]).unwrap();
        let f = scale(Arc::new(z), 3.0).unwrap();
        assert_eq!(f.subderivative(&pt![1, 0], &pt![0, 1]).unwrap(), ExtReal::PosInf);
    }

    #[test]
    fn precompose_l1_with_square_map() {
        let map = SmoothFn::new(2, 2, |x| vec![x[0] * x[0], x[1]], |x, w| {
            vec![2.0 * x[0] * w[0], w[1]]
        });
        let f = precompose_smooth(Arc::new(l1_norm(2, 1.0)), Arc::new(map)).unwrap();
        assert_eq!(fin(f.subderivative(&pt![1, 2], &pt![1, 0]).unwrap()), 2.0);
    }

    #[test]
    fn precompose_zero_norm_with_flattening_map() {
        let z = zero_norm_composite(DMatrix::identity(2, 2), vec![0.0; 2]).unwrap();
        let map = SmoothFn::new(2, 2, |x| vec![x[0], 0.0], |_, w| vec![w[0], 0.0]);
        let f = precompose_smooth(Arc::new(z), Arc::new(map)).unwrap();
        assert_eq!(f.subderivative(&pt![1, 1], &pt![0, 1]).unwrap(), ExtReal::ZERO);
    }

    #[test]
    fn precompose_with_identity_is_outer() {
        let g: SharedModel = Arc::new(l1_norm(3, 2.0));
        let f = precompose_smooth(g.clone(), Arc::new(AffineMap::identity(3))).unwrap();
        let (x, w) = (pt![0.5, 0, -2], pt![1, -1, 1]);
        assert_eq!(f.subderivative(&x, &w).unwrap(), g.subderivative(&x, &w).unwrap());
    }

    #[test]
    fn semidiff_chain_relu_after_shift() {
        let layers: Vec<Arc<dyn SemiDiffMap>> =
            vec![Arc::new(AffineMap::scaled_shift(1, 1.0, -1.0)), Arc::new(Relu { dim: 1 })];
        let (v, d) = forward_chain(&layers, &pt![1], &pt![-2]).unwrap();
        assert_eq!(v[0], 0.0);
        assert_eq!(d[0], 0.0);
    }

    #[test]
    fn semidiff_chain_abs_of_square() {
        let sq: Arc<dyn SemiDiffMap> = Arc::new(SmoothFn::new(1, 1, |x| vec![x[0] * x[0]], |x, w| {
            vec![2.0 * x[0] * w[0]]
        }));
        let abs: Arc<dyn SemiDiffMap> = Arc::new(crate::maps::Abs { dim: 1 });
        let (_, d) = forward_chain(&[sq, abs], &pt![0], &pt![3]).unwrap();
        assert_eq!(d[0], 0.0);
    }

    #[test]
    fn forward_chain_examples() {
        let two_x: Arc<dyn SemiDiffMap> = Arc::new(AffineMap::scaled_shift(1, 2.0, 0.0));
        let neg_x: Arc<dyn SemiDiffMap> = Arc::new(AffineMap::scaled_shift(1, -1.0, 0.0));
        let relu: Arc<dyn SemiDiffMap> = Arc::new(Relu { dim: 1 });
        let (v, d) = forward_chain(&[two_x, relu.clone()], &pt![1], &pt![1]).unwrap();
        assert_eq!((v[0], d[0]), (2.0, 2.0));
        let (v, d) = forward_chain(&[], &pt![3, 4], &pt![1, 2]).unwrap();
        assert_eq!((v, d), (pt![3, 4], pt![1, 2]));
        let (v, d) = forward_chain(&[neg_x, relu], &pt![0], &pt![1]).unwrap();
        assert_eq!((v[0], d[0]), (0.0, 0.0));
    }

    #[test]
    fn pointwise_examples() {
        let zero: SharedModel = Arc::new(linear(vec![0.0]));
        let id: SharedModel = Arc::new(linear(vec![1.0]));
        let relu = pointwise_max(vec![zero, id.clone()]).unwrap();
        assert_eq!(fin(relu.subderivative(&pt![0], &pt![-1]).unwrap()), 0.0);
        let single = pointwise_min(vec![id.clone()]).unwrap();
        assert_eq!(single.subderivative(&pt![0.3], &pt![2]).unwrap(), id.subderivative(&pt![0.3], &pt![2]).unwrap());
        let two_x: SharedModel = Arc::new(linear(vec![2.0]));
        let m = pointwise_min(vec![id, two_x]).unwrap();
        assert_eq!(m.active_set(&pt![1]), vec![0]);
        assert_eq!(fin(m.subderivative(&pt![1], &pt![1]).unwrap()), 1.0);
        assert!(pointwise_min(vec![]).is_err());
    }

    #[test]
    fn penalty_distance_to_origin() {
        let phi: SharedModel = Arc::new(linear(vec![0.0, 0.0]));
        let set: Arc<dyn SetModel> = Arc::new(Singleton::new(pt![0, 0]));
        let id: Arc<dyn SmoothMap> = Arc::new(AffineMap::identity(2));
        let f = penalize_smooth(phi.clone(), id.clone(), set.clone(), 1.0).unwrap();
        assert_eq!(fin(f.value(&pt![3, 4])), 5.0);
        assert!((fin(f.subderivative(&pt![3, 4], &pt![1, 0]).unwrap()) - 0.6).abs() < 1e-15);
        let f2 = penalize_smooth(phi, id, set, 2.0).unwrap();
        assert_eq!(fin(f2.value(&pt![3, 4])), 10.0);
        assert!((fin(f2.subderivative(&pt![3, 4], &pt![1, 0]).unwrap()) - 1.2).abs() < 1e-15);
    }

    #[test]
    fn dc_constant_formula() {
        assert_eq!(dc_amenable_descent_constant(2.0, 1.0), 4.0);
    }
}
