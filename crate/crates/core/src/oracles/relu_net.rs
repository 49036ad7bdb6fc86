use std::sync::Arc;

use crate::calculus::forward_chain;
use crate::error::{check_dim, Error, Result};
use crate::ext_real::ExtReal;
use crate::maps::{relu_semiderivative, SemiDiffMap};
use crate::model::FunctionModel;
use crate::point::Point;

/// Offsets of `W^i` (row-major, `n_i × n_{i−1}`) and `b^i` inside `θ`.
#[derive(Debug, Clone, Copy)]
struct LayerShape {
    w_off: usize,
    b_off: usize,
    n_in: usize,
    n_out: usize,
}

/// `(θ, z) ↦ (θ, W z − b)`: smooth jointly in the parameters and the input.
struct Bilinear {
    p: usize,
    shape: LayerShape,
}

impl Bilinear {
    fn apply(&self, theta: &[f64], z: &[f64]) -> Vec<f64> {
        let s = self.shape;
        (0..s.n_out)
            .map(|r| {
                let row = &theta[s.w_off + r * s.n_in..s.w_off + (r + 1) * s.n_in];
                row.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() - theta[s.b_off + r]
            })
            .collect()
    }
}

impl SemiDiffMap for Bilinear {
    fn dim_in(&self) -> usize {
        self.p + self.shape.n_in
    }
    fn dim_out(&self) -> usize {
        self.p + self.shape.n_out
    }
    fn eval(&self, x: &Point) -> Point {
        let (theta, z) = x.split_at(self.p);
        let mut out = theta.to_vec();
        out.extend(self.apply(theta, z));
        Point::from_vec(out)
    }
    /// `(dθ, dW z + W dz − db)`.
    fn semiderivative(&self, x: &Point, w: &Point) -> Point {
        let (theta, z) = x.split_at(self.p);
        let (dtheta, dz) = w.split_at(self.p);
        let a = self.apply(dtheta, z);
        let b = self.apply(theta, dz);
        let s = self.shape;
        let mut out = dtheta.to_vec();
        // `apply(theta, dz)` subtracted b; the bias enters only through `dθ`.
        out.extend((0..s.n_out).map(|r| a[r] + b[r] + theta[s.b_off + r]));
        Point::from_vec(out)
    }
}

/// `(θ, z) ↦ (θ, max{0, z})`.
struct ReluTail {
    p: usize,
    n: usize,
}

impl SemiDiffMap for ReluTail {
    fn dim_in(&self) -> usize {
        self.p + self.n
    }
    fn dim_out(&self) -> usize {
        self.p + self.n
    }
    fn eval(&self, x: &Point) -> Point {
        let mut out = x.as_slice().to_vec();
        for v in &mut out[self.p..] {
            *v = v.max(0.0);
        }
        Point::from_vec(out)
    }
    fn semiderivative(&self, x: &Point, w: &Point) -> Point {
        let mut out = w.as_slice().to_vec();
        for (o, &y) in out[self.p..].iter_mut().zip(&x[self.p..]) {
            *o = relu_semiderivative(y, *o);
        }
        Point::from_vec(out)
    }
}

/// `(θ, z) ↦ ‖z − y‖²`.
struct SquaredLoss {
    p: usize,
    target: Vec<f64>,
}

impl SemiDiffMap for SquaredLoss {
    fn dim_in(&self) -> usize {
        self.p + self.target.len()
    }
    fn dim_out(&self) -> usize {
        1
    }
    fn eval(&self, x: &Point) -> Point {
        let r: f64 = x[self.p..].iter().zip(&self.target).map(|(a, b)| (a - b) * (a - b)).sum();
        Point::from_vec(vec![r])
    }
    fn semiderivative(&self, x: &Point, w: &Point) -> Point {
        let d: f64 = x[self.p..]
            .iter()
            .zip(&self.target)
            .zip(&w[self.p..])
            .map(|((a, b), dz)| 2.0 * (a - b) * dz)
            .sum();
        Point::from_vec(vec![d])
    }
}

/// Mean squared loss `(1/M) Σ ‖f(W, b; xⁱ) − yⁱ‖²` of a fully connected ReLU
/// network, as a function of the stacked parameters
/// `θ = (W¹, b¹, …, Wᴺ, bᴺ)` with each `Wⁱ` stored row-major as
/// `n_i × n_{i−1}`.
///
/// Hidden layers apply ReLU; the output layer is affine unless
/// [`with_output_relu`](Self::with_output_relu) is set. The subderivative is
/// propagated forward through the joint `(θ, z)` maps with input direction
/// `(dθ, 0)`.
#[derive(Clone)]
pub struct ReluNetworkLoss {
    widths: Vec<usize>,
    shapes: Vec<LayerShape>,
    p: usize,
    data: Vec<(Vec<f64>, Vec<f64>)>,
    output_relu: bool,
    chains: Vec<Vec<Arc<dyn SemiDiffMap>>>,
}

pub fn relu_network_loss(
    widths: Vec<usize>,
    data: Vec<(Vec<f64>, Vec<f64>)>,
) -> Result<ReluNetworkLoss> {
    if widths.len() < 2 || widths.contains(&0) {
        return Err(Error::InvalidParameter(
            "widths need an input and an output layer, all positive".into(),
        ));
    }
    if data.is_empty() {
        return Err(Error::EmptyList);
    }
    for (x, y) in &data {
        check_dim(widths[0], x.len())?;
        check_dim(*widths.last().unwrap(), y.len())?;
    }
    let mut shapes = Vec::new();
    let mut off = 0;
    for pair in widths.windows(2) {
        let (n_in, n_out) = (pair[0], pair[1]);
        shapes.push(LayerShape {
            w_off: off,
            b_off: off + n_in * n_out,
            n_in,
            n_out,
        });
        off += n_out * (n_in + 1);
    }
    let mut net = ReluNetworkLoss {
        widths,
        shapes,
        p: off,
        data,
        output_relu: false,
        chains: Vec::new(),
    };
    net.build_chains();
    Ok(net)
}

impl ReluNetworkLoss {
    /// Applies ReLU after the output layer as well.
    pub fn with_output_relu(mut self, on: bool) -> Self {
        self.output_relu = on;
        self.build_chains();
        self
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn parameter_count(&self) -> usize {
        self.p
    }

    fn build_chains(&mut self) {
        let last = self.shapes.len() - 1;
        let mut body: Vec<Arc<dyn SemiDiffMap>> = Vec::new();
        for (i, &shape) in self.shapes.iter().enumerate() {
            body.push(Arc::new(Bilinear { p: self.p, shape }));
            if i < last || self.output_relu {
                body.push(Arc::new(ReluTail {
                    p: self.p,
                    n: shape.n_out,
                }));
            }
        }
        self.chains = self
            .data
            .iter()
            .map(|(_, y)| {
                let mut c = body.clone();
                c.push(Arc::new(SquaredLoss {
                    p: self.p,
                    target: y.clone(),
                }));
                c
            })
            .collect();
    }

    /// Network output `f(W, b; input)`.
    pub fn predict(&self, theta: &Point, input: &[f64]) -> Vec<f64> {
        let mut z = input.to_vec();
        let last = self.shapes.len() - 1;
        for (i, &shape) in self.shapes.iter().enumerate() {
            z = Bilinear { p: self.p, shape }.apply(theta, &z);
            if i < last || self.output_relu {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
        }
        z
    }
}

impl FunctionModel for ReluNetworkLoss {
    fn dimension(&self) -> usize {
        self.p
    }

    fn value(&self, theta: &Point) -> ExtReal {
        let total: f64 = self
            .data
            .iter()
            .map(|(x, y)| {
                self.predict(theta, x)
                    .iter()
                    .zip(y)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
            .sum();
        ExtReal::try_new(total / self.data.len() as f64).unwrap_or(ExtReal::PosInf)
    }

    fn subderivative(&self, theta: &Point, dtheta: &Point) -> Result<ExtReal> {
        check_dim(self.p, theta.dim())?;
        check_dim(self.p, dtheta.dim())?;
        let mut total = 0.0;
        for ((x, _), chain) in self.data.iter().zip(&self.chains) {
            let start = theta.concat(&Point::from_vec(x.clone()));
            let dir = dtheta.concat(&Point::from_vec(vec![0.0; x.len()]));
            let (_, d) = forward_chain(chain, &start, &dir)?;
            total += d[0];
        }
        ExtReal::try_new(total / self.data.len() as f64)
    }

    fn semi_differentiable(&self) -> bool {
        true
    }

    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }

    fn name(&self) -> String {
        format!("relu_net{:?}", self.widths)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pt;

    fn one_one(x: f64, y: f64) -> ReluNetworkLoss {
        relu_network_loss(vec![1, 1], vec![(vec![x], vec![y])])
            .unwrap()
            .with_output_relu(true)
    }

    #[test]
    fn single_unit_examples() {
        let f = one_one(1.0, 0.0);
        assert_eq!(f.value(&pt![1, 0]), ExtReal::Finite(1.0));
        assert_eq!(f.subderivative(&pt![1, 0], &pt![1, 0]).unwrap(), ExtReal::Finite(2.0));
        assert_eq!(f.subderivative(&pt![1, 0], &pt![0, 0]).unwrap(), ExtReal::ZERO);
        let g = one_one(1.0, 1.0);
        assert_eq!(g.value(&pt![-1, 0]), ExtReal::Finite(1.0));
        assert_eq!(g.subderivative(&pt![-1, 0], &pt![0.3, -0.2]).unwrap(), ExtReal::ZERO);
    }

    #[test]
    fn bias_direction_sign() {
        // f = max{0, W − b}, loss (W − b)² at W=1,b=0; d in db=1 is −2.
        let f = one_one(1.0, 0.0);
        assert_eq!(f.subderivative(&pt![1, 0], &pt![0, 1]).unwrap(), ExtReal::Finite(-2.0));
    }

    #[test]
    fn parameter_layout() {
        let f = relu_network_loss(vec![2, 3, 1], vec![(vec![1.0, 2.0], vec![0.5])]).unwrap();
        assert_eq!(f.parameter_count(), 3 * 3 + 4);
    }
}
