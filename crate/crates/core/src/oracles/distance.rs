use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::model::FunctionModel;
use crate::point::Point;
use crate::sets::SetModel;

/// `dist(x; X)`.
///
/// Inside `X` the subderivative is `dist(w; T_X(x))`; outside it is
/// `min_{y ∈ proj_X(x)} <x − y, w> / dist(x; X)`. The minimum is only as good
/// as the projection list, so set models must return every nearest point.
#[derive(Clone)]
pub struct DistanceToSet {
    set: Arc<dyn SetModel>,
}

impl DistanceToSet {
    pub fn new(set: Arc<dyn SetModel>) -> Self {
        DistanceToSet { set }
    }

    pub fn set(&self) -> &Arc<dyn SetModel> {
        &self.set
    }
}

pub fn distance_to_set(set: Arc<dyn SetModel>) -> DistanceToSet {
    DistanceToSet::new(set)
}

impl FunctionModel for DistanceToSet {
    fn dimension(&self) -> usize {
        self.set.dimension()
    }

    /// `+∞` only when the set model cannot produce a nearest point.
    fn value(&self, x: &Point) -> ExtReal {
        if self.set.contains(x) {
            return ExtReal::ZERO;
        }
        let best = self
            .set
            .project(x)
            .iter()
            .map(|y| x.sub(y).norm2())
            .fold(f64::INFINITY, f64::min);
        if best.is_finite() {
            ExtReal::Finite(best)
        } else {
            ExtReal::PosInf
        }
    }

    fn subderivative(&self, x: &Point, w: &Point) -> Result<ExtReal> {
        if self.set.contains(x) {
            return Ok(ExtReal::Finite(self.set.tangent_distance(x, w)));
        }
        let proj = self.set.project(x);
        if proj.is_empty() {
            return Err(Error::EmptyProjection);
        }
        let dist = proj.iter().map(|y| x.sub(y).norm2()).fold(f64::INFINITY, f64::min);
        let best = proj
            .iter()
            .map(|y| x.sub(y).dot(w) / dist)
            .fold(f64::INFINITY, f64::min);
        Ok(ExtReal::Finite(best))
    }

    fn semi_differentiable(&self) -> bool {
        self.set.derivable()
    }

    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }

    fn gradient(&self, x: &Point) -> Option<Point> {
        if self.set.contains(x) {
            return None;
        }
        match self.set.project(x).as_slice() {
            [y] => {
                let r = x.sub(y);
                let d = r.norm2();
                Some(r.scale(1.0 / d))
            }
            _ => None,
        }
    }

    fn name(&self) -> String {
        format!("dist(.; {})", self.set.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pt;
    use crate::sets::{BoxSet, Singleton};

    #[test]
    fn origin_examples() {
        let f = distance_to_set(Arc::new(Singleton::new(pt![0, 0])));
        assert_eq!(f.value(&pt![3, 4]), ExtReal::Finite(5.0));
        let d = f.subderivative(&pt![3, 4], &pt![1, 0]).unwrap().to_f64();
        assert!((d - 0.6).abs() < 1e-15);
        let d0 = f.subderivative(&pt![0, 0], &pt![-3, 4]).unwrap().to_f64();
        assert!((d0 - 5.0).abs() < 1e-15);
    }

    #[test]
    fn orthant_example() {
        let f = distance_to_set(Arc::new(BoxSet::nonnegative_orthant(2)));
        let d = f.subderivative(&pt![1, -2], &pt![0, 1]).unwrap().to_f64();
        assert_eq!(d, -1.0);
    }
}
