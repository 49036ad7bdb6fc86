use std::sync::Arc;

use crate::error::Result;
use crate::ext_real::ExtReal;
use crate::model::{FunctionModel, Separable};
use crate::point::{dot, Point};

type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A differentiable objective; `d f(x)(w) = <∇f(x), w>`.
#[derive(Clone)]
pub struct SmoothModel {
    dim: usize,
    value: ValueFn,
    grad: GradFn,
    smoothness: Option<f64>,
    lower_bound: Option<f64>,
    name: String,
}

/// `grad` must be the true gradient of `f`; `l` is an optional Lipschitz
/// modulus of the gradient, advertised as the descent constant.
pub fn smooth_model(
    dim: usize,
    f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    l: Option<f64>,
) -> SmoothModel {
    assert!(dim > 0, "dimension must be positive");
    SmoothModel {
        dim,
        value: Arc::new(f),
        grad: Arc::new(grad),
        smoothness: l,
        lower_bound: None,
        name: "smooth".into(),
    }
}

impl SmoothModel {
    pub fn with_lower_bound(mut self, f_star: f64) -> Self {
        self.lower_bound = Some(f_star);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// `½‖x‖²`.
pub fn half_squared_norm(n: usize) -> SmoothModel {
    half_squared_distance(vec![0.0; n])
}

/// `½‖x − c‖²`.
pub fn half_squared_distance(c: Vec<f64>) -> SmoothModel {
    let n = c.len();
    let c2 = c.clone();
    smooth_model(
        n,
        move |x| 0.5 * x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(),
        move |x| x.iter().zip(&c2).map(|(a, b)| a - b).collect(),
        Some(1.0),
    )
    .with_lower_bound(0.0)
    .with_name("half_sq")
}

/// `<c, x>`.
pub fn linear(c: Vec<f64>) -> SmoothModel {
    let n = c.len();
    let c2 = c.clone();
    smooth_model(n, move |x| dot(&c, x), move |_| c2.clone(), Some(0.0)).with_name("linear")
}

impl FunctionModel for SmoothModel {
    fn dimension(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &Point) -> ExtReal {
        ExtReal::try_new((self.value)(x)).unwrap_or(ExtReal::PosInf)
    }
    fn subderivative(&self, x: &Point, w: &Point) -> Result<ExtReal> {
        ExtReal::try_new(dot(&(self.grad)(x), w))
    }
    fn semi_differentiable(&self) -> bool {
        true
    }
    fn descent_constant(&self) -> Option<f64> {
        self.smoothness
    }
    fn lower_bound(&self) -> Option<f64> {
        self.lower_bound
    }
    fn gradient(&self, x: &Point) -> Option<Point> {
        Point::new((self.grad)(x)).ok()
    }
    fn separable(&self, x: &Point) -> Option<Separable> {
        Some(Separable::linear((self.grad)(x)))
    }
    fn concave_subderivative(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        self.name.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pt;

    #[test]
    fn gradient_pairing() {
        let f = half_squared_norm(2);
        assert_eq!(f.subderivative(&pt![3, 4], &pt![1, 0]).unwrap(), ExtReal::Finite(3.0));
        assert_eq!(f.subderivative(&pt![3, 4], &pt![0, 0]).unwrap(), ExtReal::ZERO);
        let one = f.subderivative(&pt![3, 4], &pt![1, 2]).unwrap().to_f64();
        let two = f.subderivative(&pt![3, 4], &pt![2, 4]).unwrap().to_f64();
        assert_eq!(two, 2.0 * one);
    }
}
