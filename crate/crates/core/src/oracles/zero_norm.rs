use nalgebra::DMatrix;

use crate::error::{check_dim, Result};
use crate::ext_real::ExtReal;
use crate::maps::mat_vec;
use crate::model::FunctionModel;
use crate::point::Point;

/// `‖Ax + b‖₀`, the number of nonzero entries of `Ax + b`.
///
/// `d f(x)(w) = 0` when the support of `Aw` lies inside the support of
/// `Ax + b`, and `+∞` otherwise. An entry belongs to the support when its
/// magnitude exceeds the cutoff `τ₀` (default `0`, i.e. exact nonzero test).
#[derive(Debug, Clone)]
pub struct ZeroNormComposite {
    a: DMatrix<f64>,
    b: Vec<f64>,
    tau0: f64,
}

pub fn zero_norm_composite(a: DMatrix<f64>, b: Vec<f64>) -> Result<ZeroNormComposite> {
    check_dim(a.nrows(), b.len())?;
    Ok(ZeroNormComposite { a, b, tau0: 0.0 })
}

impl ZeroNormComposite {
    /// Overrides the support cutoff for noisy data.
    pub fn with_support_cutoff(mut self, tau0: f64) -> Self {
        self.tau0 = tau0.max(0.0);
        self
    }

    /// The subderivative is a lower limit that is attained along every
    /// sequence `w' -> w`.
    pub const fn directionally_lower_regular(&self) -> bool {
        true
    }

    fn in_support(&self, v: f64) -> bool {
        v.abs() > self.tau0
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut y = mat_vec(&self.a, x);
        for (yi, bi) in y.iter_mut().zip(&self.b) {
            *yi += bi;
        }
        y
    }
}

impl FunctionModel for ZeroNormComposite {
    fn dimension(&self) -> usize {
        self.a.ncols()
    }
    fn value(&self, x: &Point) -> ExtReal {
        let count = self.residual(x).iter().filter(|&&v| self.in_support(v)).count();
        ExtReal::Finite(count as f64)
    }
    fn subderivative(&self, x: &Point, w: &Point) -> Result<ExtReal> {
        let base = self.residual(x);
        let dir = mat_vec(&self.a, w);
        let escapes = dir
            .iter()
            .zip(&base)
            .any(|(&d, &y)| self.in_support(d) && !self.in_support(y));
        Ok(if escapes { ExtReal::PosInf } else { ExtReal::ZERO })
    }
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
    fn name(&self) -> String {
        "zero_norm".into()
    }
}
