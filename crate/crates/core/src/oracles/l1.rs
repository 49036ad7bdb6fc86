use crate::error::Result;
use crate::ext_real::ExtReal;
use crate::model::{FunctionModel, ScalarPiece, Separable};
use crate::point::Point;

/// `λ‖x‖₁`, with the sign decomposition
/// `d f(x)(w) = λ (Σ_{x_i>0} w_i − Σ_{x_i<0} w_i + Σ_{x_i=0} |w_i|)`.
#[derive(Debug, Clone)]
pub struct L1Norm {
    dim: usize,
    lambda: f64,
}

pub fn l1_norm(n: usize, lambda: f64) -> L1Norm {
    assert!(n > 0 && lambda > 0.0, "l1_norm needs n > 0 and λ > 0");
    L1Norm { dim: n, lambda }
}

impl L1Norm {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Per-coordinate `(g(1), g(−1))` of `t ↦ d|·|(x_i)(t)`.
fn abs_piece(xi: f64) -> (f64, f64) {
    if xi > 0.0 {
        (1.0, -1.0)
    } else if xi < 0.0 {
        (-1.0, 1.0)
    } else {
        (1.0, 1.0)
    }
}

fn abs_subderivative(xi: f64, wi: f64) -> f64 {
    if xi > 0.0 {
        wi
    } else if xi < 0.0 {
        -wi
    } else {
        wi.abs()
    }
}

impl FunctionModel for L1Norm {
    fn dimension(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &Point) -> ExtReal {
        ExtReal::Finite(self.lambda * x.norm1())
    }
    fn subderivative(&self, x: &Point, w: &Point) -> Result<ExtReal> {
        let s: f64 = x.iter().zip(w.iter()).map(|(&a, &b)| abs_subderivative(a, b)).sum();
        Ok(ExtReal::Finite(self.lambda * s))
    }
    fn semi_differentiable(&self) -> bool {
        true
    }
    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
    fn gradient(&self, x: &Point) -> Option<Point> {
        if x.contains(&0.0) {
            return None;
        }
        Some(Point::from_vec(x.iter().map(|v| self.lambda * v.signum()).collect()))
    }
    fn separable(&self, x: &Point) -> Option<Separable> {
        Some(Separable {
            linear: vec![0.0; self.dim],
            pieces: x
                .iter()
                .map(|&xi| {
                    let (r, l) = abs_piece(xi);
                    ScalarPiece::Homogeneous {
                        right: self.lambda * r,
                        left: self.lambda * l,
                    }
                })
                .collect(),
        })
    }
    fn name(&self) -> String {
        format!("{}*l1", self.lambda)
    }
}

/// `−λ‖x‖₁`: concave, so the descent property holds with `L = 0`.
#[derive(Debug, Clone)]
pub struct NegL1Norm {
    dim: usize,
    lambda: f64,
}

pub fn neg_l1_norm(n: usize, lambda: f64) -> NegL1Norm {
    assert!(n > 0 && lambda > 0.0, "neg_l1_norm needs n > 0 and λ > 0");
    NegL1Norm { dim: n, lambda }
}

impl FunctionModel for NegL1Norm {
    fn dimension(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &Point) -> ExtReal {
        ExtReal::Finite(-self.lambda * x.norm1())
    }
    fn subderivative(&self, x: &Point, w: &Point) -> Result<ExtReal> {
        let s: f64 = x.iter().zip(w.iter()).map(|(&a, &b)| abs_subderivative(a, b)).sum();
        Ok(ExtReal::Finite(-self.lambda * s))
    }
    fn semi_differentiable(&self) -> bool {
        true
    }
    fn descent_constant(&self) -> Option<f64> {
        Some(0.0)
    }
    fn gradient(&self, x: &Point) -> Option<Point> {
        if x.contains(&0.0) {
            return None;
        }
        Some(Point::from_vec(x.iter().map(|v| -self.lambda * v.signum()).collect()))
    }
    fn separable(&self, x: &Point) -> Option<Separable> {
        Some(Separable {
            linear: vec![0.0; self.dim],
            pieces: x
                .iter()
                .map(|&xi| {
                    let (r, l) = abs_piece(xi);
                    ScalarPiece::Homogeneous {
                        right: -self.lambda * r,
                        left: -self.lambda * l,
                    }
                })
                .collect(),
        })
    }
    fn concave_subderivative(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        format!("-{}*l1", self.lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pt;

    #[test]
    fn l1_examples() {
        let f = l1_norm(3, 1.0);
        assert_eq!(f.subderivative(&pt![1, -1, 0], &pt![2, 1, -3]).unwrap(), ExtReal::Finite(4.0));
        assert_eq!(f.subderivative(&pt![1, -1, 0], &pt![0, 0, 0]).unwrap(), ExtReal::ZERO);
        let g = l1_norm(2, 2.0);
        assert_eq!(g.subderivative(&pt![0, 0], &pt![1, 0]).unwrap(), ExtReal::Finite(2.0));
    }

    #[test]
    fn neg_l1_examples() {
        let f = neg_l1_norm(2, 3.0);
        assert_eq!(f.subderivative(&pt![0, 0], &pt![1, 0]).unwrap(), ExtReal::Finite(-3.0));
        assert_eq!(f.subderivative(&pt![0, 0], &pt![0, 0]).unwrap(), ExtReal::ZERO);
        let g = neg_l1_norm(2, 1.0);
        assert_eq!(g.subderivative(&pt![2, 0], &pt![0, 1]).unwrap(), ExtReal::Finite(-1.0));
    }

    #[test]
    fn separable_matches_subderivative() {
        let f = l1_norm(3, 1.5);
        let x = pt![1, -2, 0];
        let w = pt![-0.5, 0.25, -1];
        let s = f.separable(&x).unwrap();
        assert_eq!(s.eval(&w), f.subderivative(&x, &w).unwrap().to_f64());
    }
}
