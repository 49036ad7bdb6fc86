//! Solvers for the direction-search subproblem `min_{‖w‖ ≤ 1} d f(x)(w)`.
//!
//! Every solver reports the value of the returned direction as recomputed by
//! `f.subderivative(x, w)`, so results are consistent with the model no
//! matter how the candidate was found.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::ext_real::ExtReal;
use crate::model::{FunctionModel, ScalarPiece, Separable};
use crate::point::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormChoice {
    L2,
    L1,
    LInf,
}

impl NormChoice {
    pub fn norm(self, w: &[f64]) -> f64 {
        match self {
            NormChoice::L2 => crate::point::norm2(w),
            NormChoice::L1 => w.iter().map(|v| v.abs()).sum(),
            NormChoice::LInf => w.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// `w / ‖w‖` in this norm, or `None` for `w = 0`.
    pub fn normalize(self, w: &Point) -> Option<Point> {
        let n = self.norm(w);
        (n > 0.0).then(|| w.scale(1.0 / n))
    }
}

impl fmt::Display for NormChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormChoice::L2 => "l2",
            NormChoice::L1 => "l1",
            NormChoice::LInf => "linf",
        })
    }
}

impl FromStr for NormChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" => Ok(NormChoice::L2),
            "l1" => Ok(NormChoice::L1),
            "linf" => Ok(NormChoice::LInf),
            other => Err(Error::InvalidParameter(format!("unknown norm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionResult {
    pub w: Point,
    /// `d f(x)(w)`.
    pub value: ExtReal,
    /// Set only by the closed-form solvers.
    pub exact: bool,
    /// Number of subderivative evaluations spent.
    pub evaluations: usize,
}

fn finish(f: &dyn FunctionModel, x: &Point, w: Point, exact: bool, evaluations: usize) -> Result<DirectionResult> {
    let value = f.subderivative(x, &w)?;
    Ok(DirectionResult {
        w,
        value,
        exact,
        evaluations: evaluations + 1,
    })
}

/// Gradient descent direction `−∇f(x)/‖∇f(x)‖₂` with value `−‖∇f(x)‖₂`.
pub fn solve_l2_smooth(f: &dyn FunctionModel, x: &Point) -> Result<DirectionResult> {
    check_dim(f.dimension(), x.dim())?;
    let g = f.gradient(x).ok_or(Error::NoGradient)?;
    let w = match NormChoice::L2.normalize(&g) {
        Some(u) => u.scale(-1.0),
        None => Point::zeros(x.dim()),
    };
    finish(f, x, w, true, 0)
}

/// Minimizer and minimum of `t ↦ c t + g(t)` over `[−1, 1]`, plus an
/// exactness flag.
///
/// Positively homogeneous pieces are piecewise linear with a kink at 0, so
/// the minimum is attained at `−1`, `+1` or `0`; candidates are compared in
/// that order and a later one wins only on strict improvement. General
/// pieces are bracketed on a 65-point grid and refined by golden-section
/// search to `1e−10`.
pub fn solve_scalar(c: f64, g: &ScalarPiece) -> (f64, f64, bool) {
    match g {
        ScalarPiece::Homogeneous { right, left } => {
            let mut best = (-1.0, -c + left);
            for (t, v) in [(1.0, c + right), (0.0, 0.0)] {
                if v < best.1 {
                    best = (t, v);
                }
            }
            (best.0, best.1, true)
        }
        ScalarPiece::General(_) => {
            let h = |t: f64| c * t + g.eval(t);
            let (t, v) = golden_minimize(h, -1.0, 1.0, 64, 1e-10);
            (t, v, false)
        }
    }
}

/// Grid bracketing followed by golden-section refinement on `[lo, hi]`.
pub(crate) fn golden_minimize(h: impl Fn(f64) -> f64, lo: f64, hi: f64, cells: usize, tol: f64) -> (f64, f64) {
    let step = (hi - lo) / cells as f64;
    let grid: Vec<f64> = (0..=cells).map(|j| lo + step * j as f64).collect();
    let mut best = (grid[0], h(grid[0]));
    for &t in &grid[1..] {
        let v = h(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut hc, mut hd) = (h(c), h(d));
    while b - a > tol {
        if hc < hd {
            b = d;
            d = c;
            hd = hc;
            c = b - phi * (b - a);
            hc = h(c);
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + phi * (b - a);
            hd = h(d);
        }
    }
    let t = 0.5 * (a + b);
    let v = h(t);
    if v < best.1 {
        (t, v)
    } else {
        best
    }
}

/// Coordinatewise solution of the ℓ∞ subproblem for a declared separable
/// structure. Returns `(w, s)` with `s_i` the per-coordinate minima and
/// whether every coordinate was solved in closed form.
pub fn solve_separable_parts(sep: &Separable) -> (Vec<f64>, Vec<f64>, bool) {
    let mut w = Vec::with_capacity(sep.linear.len());
    let mut s = Vec::with_capacity(sep.linear.len());
    let mut exact = true;
    for (c, g) in sep.linear.iter().zip(&sep.pieces) {
        let (t, v, e) = solve_scalar(*c, g);
        w.push(t);
        s.push(v);
        exact &= e;
    }
    (w, s, exact)
}

/// ℓ∞ direction search when `d f(x)(w) = <c, w> + Σ g_i(w_i)`.
pub fn solve_linf_separable(f: &dyn FunctionModel, x: &Point) -> Result<DirectionResult> {
    check_dim(f.dimension(), x.dim())?;
    let sep = f.separable(x).ok_or(Error::NotSeparable)?;
    let (w, _, exact) = solve_separable_parts(&sep);
    finish(f, x, Point::from_vec(w), exact, 0)
}

/// Vertex candidates: `e₁, −e₁, e₂, −e₂, …`, or `e₁, …, e_n, −e` when
/// `reduced`.
pub fn l1_vertices(n: usize, reduced: bool) -> Vec<Point> {
    if reduced {
        let mut v: Vec<Point> = (0..n).map(|i| Point::basis(n, i, 1.0)).collect();
        v.push(Point::from_vec(vec![-1.0; n]));
        v
    } else {
        (0..n)
            .flat_map(|i| [Point::basis(n, i, 1.0), Point::basis(n, i, -1.0)])
            .collect()
    }
}

/// Gauge of `co({e_i} ∪ {−e})`, the norm whose unit ball the reduced
/// vertex search is exact on: `Σ w_i + (n + 1) max(0, −min_i w_i)`.
pub fn reduced_gauge(w: &[f64]) -> f64 {
    let n = w.len() as f64;
    let m = w.iter().copied().fold(f64::INFINITY, f64::min);
    w.iter().sum::<f64>() + (n + 1.0) * (-m).max(0.0)
}

fn argmin_candidates(
    f: &dyn FunctionModel,
    x: &Point,
    candidates: impl IntoIterator<Item = Point>,
) -> Result<(Option<(Point, ExtReal)>, usize)> {
    let mut best: Option<(Point, ExtReal)> = None;
    let mut count = 0;
    for w in candidates {
        let v = f.subderivative(x, &w)?;
        count += 1;
        if v == ExtReal::PosInf {
            continue;
        }
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((w, v));
        }
    }
    Ok((best, count))
}

/// Minimizes a concave `d f(x)(·)` over the ℓ1 ball by enumerating its
/// vertices; with `reduced`, over `co({e_i} ∪ {−e})` with `n + 1` vertices.
/// Ties go to the first vertex in enumeration order.
pub fn solve_l1_extreme(f: &dyn FunctionModel, x: &Point, reduced: bool) -> Result<DirectionResult> {
    check_dim(f.dimension(), x.dim())?;
    let mut best: Option<(Point, ExtReal)> = None;
    let mut count = 0;
    for w in l1_vertices(x.dim(), reduced) {
        let v = f.subderivative(x, &w)?;
        count += 1;
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((w, v));
        }
    }
    let (w, value) = best.expect("at least two vertices");
    Ok(DirectionResult {
        w,
        value,
        exact: true,
        evaluations: count,
    })
}

/// Uniform sample from the unit ball of `norm`.
pub fn sample_unit_ball(rng: &mut impl Rng, n: usize, norm: NormChoice) -> Point {
    match norm {
        NormChoice::L2 => loop {
            let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let len = crate::point::norm2(&g);
            if len > 0.0 {
                let radius = rng.random::<f64>().powf(1.0 / n as f64);
                return Point::from_vec(g.iter().map(|v| v * radius / len).collect());
            }
        },
        NormChoice::LInf => Point::from_vec((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()),
        NormChoice::L1 => {
            let e: Vec<f64> = (0..=n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total: f64 = e.iter().sum();
            Point::from_vec(
                e[..n]
                    .iter()
                    .map(|v| if rng.random_bool(0.5) { v / total } else { -v / total })
                    .collect(),
            )
        }
    }
}

/// Inexact search: the best of the signed coordinate directions, the
/// normalized negative gradient (when available) and `budget` seeded
/// uniform samples of the unit ball. Samples with value `+∞` are
/// discarded; if every candidate is `+∞` the zero direction is returned.
pub fn solve_sampling_fallback(
    f: &dyn FunctionModel,
    x: &Point,
    norm: NormChoice,
    budget: usize,
    seed: u64,
) -> Result<DirectionResult> {
    check_dim(f.dimension(), x.dim())?;
    let n = x.dim();
    let mut candidates = l1_vertices(n, false);
    if let Some(g) = f.gradient(x) {
        if let Some(u) = norm.normalize(&g) {
            candidates.push(u.scale(-1.0));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    candidates.extend((0..budget).map(|_| sample_unit_ball(&mut rng, n, norm)));
    let (best, count) = argmin_candidates(f, x, candidates)?;
    match best {
        Some((w, value)) => Ok(DirectionResult {
            w,
            value,
            exact: false,
            evaluations: count,
        }),
        None => finish(f, x, Point::zeros(n), false, count),
    }
}
