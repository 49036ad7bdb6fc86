//! Named benchmark problems.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::io::{read_matrix, read_vector};
use super::Settings;
use crate::calculus::{penalize_smooth, pointwise_min, precompose_smooth, sum};
use crate::direction::NormChoice;
use crate::error::{check_dim, Error, Result};
use crate::maps::{mat_vec, spectral_norm, AffineMap, SmoothMap};
use crate::model::SharedModel;
use crate::oracles::{
    half_squared_distance, half_squared_norm, l1_norm, moreau_envelope, neg_l1_norm,
    relu_network_loss, smooth_model, ProxFriendly,
};
use crate::point::Point;
use crate::sets::{ComplementaritySet, SetModel};

/// Seed for generated default data; independent of `--seed` so that problem
/// data stay fixed across solver seeds.
const DATA_SEED: u64 = 0x5eed;

pub struct Built {
    pub model: SharedModel,
    pub x0: Point,
    /// Valid descent constant, when known.
    pub descent_constant: Option<f64>,
    /// A lower bound on the optimal value, when known.
    pub f_star: Option<f64>,
}

pub struct ProblemSpec {
    pub name: &'static str,
    pub summary: &'static str,
    pub tags: &'static [&'static str],
    pub default_dim: usize,
    pub norm: NormChoice,
    pub epsilon: f64,
    pub max_iter: usize,
    pub build: fn(&Settings, usize) -> Result<Built>,
}

pub fn registry() -> &'static [ProblemSpec] {
    &REGISTRY
}

pub fn find(name: &str) -> Option<&'static ProblemSpec> {
    REGISTRY.iter().find(|p| p.name == name)
}

static REGISTRY: [ProblemSpec; 6] = [
    ProblemSpec {
        name: "dc_quadratic_l1",
        summary: "½‖x‖² − λ‖x‖₁; concave subderivative, L = 1, f* = −nλ²/2",
        tags: &["concave-subderivative", "separable"],
        default_dim: 2,
        norm: NormChoice::L1,
        epsilon: 1e-3,
        max_iter: 10_000,
        build: build_dc_quadratic_l1,
    },
    ProblemSpec {
        name: "lasso_linf",
        summary: "½‖Ax − b‖² + λ‖x‖₁ with the ℓ∞ separable direction search",
        tags: &["separable"],
        default_dim: 5,
        norm: NormChoice::LInf,
        epsilon: 1e-3,
        max_iter: 10_000,
        build: build_lasso,
    },
    ProblemSpec {
        name: "dc_max",
        summary: "min_i (½‖x‖² − <a_i, x> − c_i), a difference of max functions in min form",
        tags: &["concave-subderivative"],
        default_dim: 2,
        norm: NormChoice::L1,
        epsilon: 1e-3,
        max_iter: 10_000,
        build: build_dc_max,
    },
    ProblemSpec {
        name: "sparse_moreau",
        summary: "e_r‖·‖₀(Ax + b), Moreau-smoothed sparsity; L = ‖A‖²/r, f* = 0",
        tags: &["concave-subderivative", "smooth"],
        default_dim: 4,
        norm: NormChoice::L2,
        epsilon: 1e-3,
        max_iter: 10_000,
        build: build_sparse_moreau,
    },
    ProblemSpec {
        name: "relu_net",
        summary: "mean squared loss of a 2-4-1 ReLU network on 8 fixed samples",
        tags: &[],
        default_dim: 2,
        norm: NormChoice::LInf,
        epsilon: 1e-3,
        max_iter: 200,
        build: build_relu_net,
    },
    ProblemSpec {
        name: "complementarity_penalty",
        summary: "½‖x − c‖² + ρ dist(x; {(y, z): <y, z> = 0, y ≤ 0, z ≤ 0})",
        tags: &[],
        default_dim: 2,
        norm: NormChoice::L2,
        epsilon: 1e-3,
        max_iter: 1000,
        build: build_complementarity,
    },
];

fn start_point(s: &Settings, n: usize, default: impl FnOnce() -> Vec<f64>) -> Result<Point> {
    let v = match &s.x0 {
        Some(v) => v.clone(),
        None => default(),
    };
    check_dim(n, v.len())?;
    Point::new(v)
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

fn matrix_or(s: &Settings, default: impl FnOnce() -> DMatrix<f64>) -> Result<DMatrix<f64>> {
    match &s.matrix {
        Some(p) => read_matrix(p),
        None => Ok(default()),
    }
}

fn vector_or(s: &Settings, default: impl FnOnce() -> Vec<f64>) -> Result<Vec<f64>> {
    match &s.vector {
        Some(p) => read_vector(p),
        None => Ok(default()),
    }
}

fn alternating(n: usize, magnitude: f64) -> Vec<f64> {
    (0..n).map(|i| if i % 2 == 0 { magnitude } else { -magnitude }).collect()
}

fn build_dc_quadratic_l1(s: &Settings, n: usize) -> Result<Built> {
    let lambda = positive("lambda", s.lambda.unwrap_or(1.0))?;
    let model: SharedModel = Arc::new(sum(vec![
        Arc::new(half_squared_norm(n)),
        Arc::new(neg_l1_norm(n, lambda)),
    ])?);
    Ok(Built {
        descent_constant: model.descent_constant(),
        model,
        x0: start_point(s, n, || alternating(n, 3.0))?,
        f_star: Some(-(n as f64) * lambda * lambda / 2.0),
    })
}

fn build_lasso(s: &Settings, n: usize) -> Result<Built> {
    let lambda = positive("lambda", s.lambda.unwrap_or(0.1))?;
    let mut rng = ChaCha8Rng::seed_from_u64(DATA_SEED);
    let a = matrix_or(s, || {
        let m = 2 * n;
        DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal) / (m as f64).sqrt())
    })?;
    check_dim(n, a.ncols())?;
    let b = vector_or(s, || {
        let truth: Vec<f64> = (0..n).map(|i| if i % 3 == 0 { 1.0 } else { 0.0 }).collect();
        mat_vec(&a, &truth)
    })?;
    check_dim(a.nrows(), b.len())?;
    let l = spectral_norm(&a).powi(2);
    let (a1, b1, a2, b2) = (a.clone(), b.clone(), a, b);
    let data = smooth_model(
        n,
        move |x| {
            let r = mat_vec(&a1, x);
            0.5 * r.iter().zip(&b1).map(|(u, v)| (u - v) * (u - v)).sum::<f64>()
        },
        move |x| {
            let r: Vec<f64> = mat_vec(&a2, x).iter().zip(&b2).map(|(u, v)| u - v).collect();
            mat_vec(&a2.transpose(), &r)
        },
        Some(l),
    )
    .with_lower_bound(0.0)
    .with_name("least_squares");
    let model: SharedModel = Arc::new(sum(vec![Arc::new(data), Arc::new(l1_norm(n, lambda))])?);
    Ok(Built {
        model,
        x0: start_point(s, n, || vec![0.0; n])?,
        descent_constant: None,
        f_star: Some(0.0),
    })
}

fn build_dc_max(s: &Settings, n: usize) -> Result<Built> {
    let a = matrix_or(s, || {
        DMatrix::from_fn(2 * n, n, |i, j| {
            if i / 2 == j {
                if i % 2 == 0 {
                    2.0
                } else {
                    -2.0
                }
            } else {
                0.0
            }
        })
    })?;
    check_dim(n, a.ncols())?;
    let c = vector_or(s, || vec![0.0; a.nrows()])?;
    check_dim(a.nrows(), c.len())?;
    let mut members: Vec<SharedModel> = Vec::new();
    let mut f_star = f64::INFINITY;
    for (i, ci) in c.iter().enumerate() {
        let ai: Vec<f64> = a.row(i).iter().copied().collect();
        let norm_sq: f64 = ai.iter().map(|v| v * v).sum();
        f_star = f_star.min(-0.5 * norm_sq - ci);
        let (a1, a2, ci) = (ai.clone(), ai, *ci);
        members.push(Arc::new(
            smooth_model(
                n,
                move |x| {
                    x.iter().zip(&a1).map(|(u, v)| 0.5 * u * u - v * u).sum::<f64>() - ci
                },
                move |x| x.iter().zip(&a2).map(|(u, v)| u - v).collect(),
                Some(1.0),
            )
            .with_name(format!("q{i}")),
        ));
    }
    let model: SharedModel = Arc::new(pointwise_min(members)?);
    Ok(Built {
        descent_constant: model.descent_constant(),
        model,
        x0: start_point(s, n, || (1..=n).map(|i| 0.1 * i as f64).collect())?,
        f_star: Some(f_star),
    })
}

fn build_sparse_moreau(s: &Settings, n: usize) -> Result<Built> {
    let r = positive("r", s.r.unwrap_or(0.5))?;
    let a = matrix_or(s, || DMatrix::identity(n, n))?;
    check_dim(n, a.ncols())?;
    let b = vector_or(s, || {
        let mut rng = ChaCha8Rng::seed_from_u64(DATA_SEED);
        (0..a.nrows()).map(|_| rng.random_range(-2.0..2.0)).collect()
    })?;
    let map: Arc<dyn SmoothMap> = Arc::new(AffineMap::new(a.clone(), b)?);
    let env = moreau_envelope(ProxFriendly::ZeroNorm { n: a.nrows(), cost: 1.0 }, r)?;
    let model: SharedModel = Arc::new(precompose_smooth(Arc::new(env), map)?);
    Ok(Built {
        descent_constant: model.descent_constant(),
        model,
        x0: start_point(s, n, || vec![0.0; n])?,
        f_star: Some(0.0),
    })
}

fn build_relu_net(s: &Settings, n: usize) -> Result<Built> {
    let mut rng = ChaCha8Rng::seed_from_u64(DATA_SEED);
    let data: Vec<(Vec<f64>, Vec<f64>)> = (0..8)
        .map(|_| {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y = x[0].abs() - x.iter().skip(1).sum::<f64>();
            (x, vec![y])
        })
        .collect();
    let net = relu_network_loss(vec![n, 4, 1], data)?;
    let p = net.parameter_count();
    let theta0: Vec<f64> = (0..p).map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal)).collect();
    Ok(Built {
        model: Arc::new(net),
        x0: start_point(s, p, || theta0)?,
        descent_constant: None,
        f_star: Some(0.0),
    })
}

fn build_complementarity(s: &Settings, n: usize) -> Result<Built> {
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "complementarity_penalty needs an even dimension, got {n}"
        )));
    }
    let rho = positive("rho", s.rho.unwrap_or(10.0))?;
    let c = vector_or(s, || alternating(n, 1.0).iter().map(|v| v - 0.5).collect())?;
    check_dim(n, c.len())?;
    let set: Arc<dyn SetModel> = Arc::new(ComplementaritySet::new(n / 2)?);
    let g: Arc<dyn SmoothMap> = Arc::new(AffineMap::identity(n));
    let c0 = c.clone();
    let model: SharedModel = Arc::new(penalize_smooth(
        Arc::new(half_squared_distance(c)),
        g,
        set,
        rho,
    )?);
    Ok(Built {
        model,
        x0: start_point(s, n, || c0)?,
        descent_constant: None,
        f_star: Some(0.0),
    })
}
