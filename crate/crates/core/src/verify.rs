//! Independent checks: finite-difference subderivatives, brute-force
//! direction search, and samplers for the descent property and the
//! sufficient-decrease inequality.
//!
//! Nothing here calls a closed-form solver, so these routines can serve as
//! oracles for them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::direction::{DirectionResult, NormChoice};
use crate::error::{check_dim, Error, Result};
use crate::ext_real::ExtReal;
use crate::maps::SemiDiffMap;
use crate::model::FunctionModel;
use crate::point::Point;
use crate::sets::SetModel;
use crate::solver::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FdMode {
    /// Minimum quotient over the finest levels and nearby directions.
    LiminfApprox,
    /// Quotient along `w` itself at the finest level.
    FullLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FDConfig {
    pub t0: f64,
    pub rho: f64,
    pub levels: usize,
    pub perturbations: usize,
    pub mode: FdMode,
    /// Quotients beyond this magnitude are reported as infinite.
    pub divergence: f64,
    /// Relative agreement required across the last three levels.
    pub convergence_tol: f64,
    pub seed: u64,
}

impl Default for FDConfig {
    fn default() -> Self {
        FDConfig {
            t0: 1e-2,
            rho: 0.5,
            levels: 20,
            perturbations: 8,
            mode: FdMode::FullLimit,
            divergence: 1e8,
            convergence_tol: 1e-6,
            seed: 0,
        }
    }
}

impl FDConfig {
    pub fn liminf() -> Self {
        FDConfig {
            mode: FdMode::LiminfApprox,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.rho > 0.0 && self.rho < 1.0 && self.levels >= 3) {
            return Err(Error::InvalidParameter(
                "FD grid needs t0 > 0, 0 < ρ < 1 and at least 3 levels".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdEstimate {
    pub value: ExtReal,
    /// Last three levels agree (or consistently diverge).
    pub converged: bool,
    pub steps: Vec<f64>,
    /// Per level: the quotient along `w` (FullLimit) or the minimum over
    /// the perturbed directions (LiminfApprox); `±inf` when `f` left its
    /// domain.
    pub quotients: Vec<f64>,
}

fn quotient(f: &dyn FunctionModel, x: &Point, fx: f64, t: f64, w: &Point) -> f64 {
    match f.value(&x.axpy(t, w)) {
        ExtReal::Finite(v) => (v - fx) / t,
        ExtReal::PosInf => f64::INFINITY,
        ExtReal::NegInf => f64::NEG_INFINITY,
    }
}

/// Reads off an infinite limit from the tail: either a quotient beyond the
/// threshold, or geometric growth by `≈ 1/ρ` over the last levels once the
/// magnitude exceeds `1e3`.
fn divergence(q: &[f64], rho: f64, threshold: f64) -> Option<ExtReal> {
    let last = *q.last()?;
    let to_inf = |v: f64| if v > 0.0 { ExtReal::PosInf } else { ExtReal::NegInf };
    if last.is_infinite() || last.abs() > threshold {
        return Some(to_inf(last));
    }
    let tail = &q[q.len().saturating_sub(4)..];
    let growing = tail.len() == 4
        && tail.windows(2).all(|p| {
            let ratio = p[1] / p[0];
            p[0].signum() == p[1].signum() && (ratio * rho - 1.0).abs() < 0.1
        });
    (growing && last.abs() > 1e3).then(|| to_inf(last))
}

/// Finite-difference estimate of `d f(x)(w)` on the grid
/// `t_j = t0 ρ^j`. Perturbed directions `w'` lie on a sphere of radius
/// `min(t, 0.1‖w‖)` around `w`.
pub fn fd_subderivative(f: &dyn FunctionModel, x: &Point, w: &Point, cfg: &FDConfig) -> Result<FdEstimate> {
    cfg.validate()?;
    check_dim(f.dimension(), x.dim())?;
    check_dim(f.dimension(), w.dim())?;
    let fx = f.value(x).finite().ok_or(Error::DomainViolation)?;
    let steps: Vec<f64> = (0..cfg.levels).map(|j| cfg.t0 * cfg.rho.powi(j as i32)).collect();
    if w.is_zero() {
        return Ok(FdEstimate {
            value: ExtReal::ZERO,
            converged: true,
            quotients: vec![0.0; steps.len()],
            steps,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let wn = w.norm2();
    let quotients: Vec<f64> = steps
        .iter()
        .map(|&t| {
            let mut q = quotient(f, x, fx, t, w);
            if cfg.mode == FdMode::LiminfApprox {
                let radius = t.min(0.1 * wn);
                for _ in 0..cfg.perturbations {
                    let g: Vec<f64> = (0..w.dim()).map(|_| rng.sample(StandardNormal)).collect();
                    let len = crate::point::norm2(&g);
                    if len == 0.0 {
                        continue;
                    }
                    let wp = w.axpy(radius / len, &Point::from_vec(g));
                    q = q.min(quotient(f, x, fx, t, &wp));
                }
            }
            q
        })
        .collect();
    let tail = &quotients[quotients.len() - 3..];
    if let Some(v) = divergence(&quotients, cfg.rho, cfg.divergence) {
        return Ok(FdEstimate {
            value: v,
            converged: true,
            steps,
            quotients,
        });
    }
    let value = match cfg.mode {
        FdMode::FullLimit => *tail.last().unwrap(),
        FdMode::LiminfApprox => {
            let start = quotients.len().saturating_sub(5);
            quotients[start..].iter().copied().fold(f64::INFINITY, f64::min)
        }
    };
    let scale = 1.0 + value.abs();
    let converged = tail.iter().all(|q| (q - tail[2]).abs() <= cfg.convergence_tol * scale);
    Ok(FdEstimate {
        value: ExtReal::try_new(value)?,
        converged,
        steps,
        quotients,
    })
}

/// Largest dimension accepted by [`brute_force_direction`].
pub const BRUTE_FORCE_MAX_DIM: usize = 4;

/// Unit-sphere grid of the given norm. For ℓ2, `resolution` is the angular
/// step of a hyperspherical grid; for ℓ1, points `k/K` with integer `k`,
/// `Σ|k_i| = K = ⌈1/resolution⌉`; for ℓ∞, each face `w_i = ±1` with a grid
/// of step at most `resolution` on the other coordinates.
pub fn sphere_grid(n: usize, norm: NormChoice, resolution: f64) -> Vec<Point> {
    if n == 1 {
        return vec![Point::from_vec(vec![-1.0]), Point::from_vec(vec![1.0])];
    }
    match norm {
        NormChoice::L2 => {
            let mut out = Vec::new();
            let polar = (std::f64::consts::PI / resolution).ceil() as usize;
            let azimuth = (2.0 * std::f64::consts::PI / resolution).ceil() as usize;
            let mut angles = vec![0usize; n - 1];
            loop {
                let mut p = vec![0.0; n];
                let mut s = 1.0;
                for i in 0..n - 1 {
                    let theta = if i == n - 2 {
                        2.0 * std::f64::consts::PI * angles[i] as f64 / azimuth as f64
                    } else {
                        std::f64::consts::PI * angles[i] as f64 / polar as f64
                    };
                    p[i] = s * theta.cos();
                    s *= theta.sin();
                }
                p[n - 1] = s;
                out.push(Point::from_vec(p));
                // Odometer increment.
                let mut i = n - 2;
                loop {
                    angles[i] += 1;
                    let limit = if i == n - 2 { azimuth } else { polar + 1 };
                    if angles[i] < limit {
                        break;
                    }
                    angles[i] = 0;
                    if i == 0 {
                        return out;
                    }
                    i -= 1;
                }
            }
        }
        NormChoice::L1 => {
            let k = (1.0 / resolution).ceil().max(1.0) as i64;
            let mut out = Vec::new();
            let mut cur = vec![0i64; n];
            l1_lattice(&mut cur, 0, k, k, &mut out);
            out
        }
        NormChoice::LInf => {
            let mut m = (2.0 / resolution).ceil().max(2.0) as usize;
            if m % 2 == 1 {
                m += 1;
            }
            let ticks: Vec<f64> = (0..=m).map(|j| -1.0 + 2.0 * j as f64 / m as f64).collect();
            let mut out = Vec::new();
            for face in 0..n {
                for sign in [1.0, -1.0] {
                    let mut idx = vec![0usize; n - 1];
                    loop {
                        let mut p = Vec::with_capacity(n);
                        let mut it = idx.iter();
                        for i in 0..n {
                            p.push(if i == face { sign } else { ticks[*it.next().unwrap()] });
                        }
                        out.push(Point::from_vec(p));
                        let mut i = 0;
                        loop {
                            if i == idx.len() {
                                break;
                            }
                            idx[i] += 1;
                            if idx[i] <= m {
                                break;
                            }
                            idx[i] = 0;
                            i += 1;
                        }
                        if i == idx.len() {
                            break;
                        }
                    }
                }
            }
            out
        }
    }
}

fn l1_lattice(cur: &mut Vec<i64>, i: usize, remaining: i64, k: i64, out: &mut Vec<Point>) {
    let n = cur.len();
    if i == n - 1 {
        for v in if remaining == 0 { vec![0] } else { vec![remaining, -remaining] } {
            cur[i] = v;
            out.push(Point::from_vec(cur.iter().map(|&c| c as f64 / k as f64).collect()));
        }
        return;
    }
    for a in 0..=remaining {
        for v in if a == 0 { vec![0] } else { vec![a, -a] } {
            cur[i] = v;
            l1_lattice(cur, i + 1, remaining - a, k, out);
        }
    }
}

/// Best direction over a dense grid of the unit sphere (`n ≤ 4`). Ties go
/// to the first grid point.
pub fn brute_force_direction(
    f: &dyn FunctionModel,
    x: &Point,
    norm: NormChoice,
    resolution: f64,
) -> Result<DirectionResult> {
    check_dim(f.dimension(), x.dim())?;
    if x.dim() > BRUTE_FORCE_MAX_DIM {
        return Err(Error::DimensionTooLarge {
            max: BRUTE_FORCE_MAX_DIM,
            found: x.dim(),
        });
    }
    if resolution.is_nan() || resolution <= 0.0 {
        return Err(Error::InvalidParameter("resolution must be positive".into()));
    }
    let grid = sphere_grid(x.dim(), norm, resolution);
    let count = grid.len();
    let mut best: Option<(Point, ExtReal)> = None;
    for w in grid {
        let v = f.subderivative(x, &w)?;
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((w, v));
        }
    }
    let (w, value) = best.expect("grid is never empty");
    Ok(DirectionResult {
        w,
        value,
        exact: false,
        evaluations: count,
    })
}

/// Absolute slack allowed by [`descent_property_sample`].
pub const DESCENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentViolation {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentSample {
    pub violations: Vec<DescentViolation>,
    /// Largest `f(y) − f(x) − d f(x)(y − x) − L/2 ‖y − x‖²` seen.
    pub max_gap: f64,
    pub pairs: usize,
}

/// Samples pairs uniformly in the box `[lower, upper]` and tests
/// `f(y) ≤ f(x) + d f(x)(y − x) + L/2 ‖y − x‖²`.
pub fn descent_property_sample(
    f: &dyn FunctionModel,
    l: f64,
    lower: &[f64],
    upper: &[f64],
    pairs: usize,
    seed: u64,
) -> Result<DescentSample> {
    check_dim(f.dimension(), lower.len())?;
    check_dim(f.dimension(), upper.len())?;
    if l.is_nan() || l < 0.0 {
        return Err(Error::InvalidParameter(format!("L = {l} must be ≥ 0")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        Point::from_vec(
            lower
                .iter()
                .zip(upper)
                .map(|(&a, &b)| if a < b { rng.random_range(a..b) } else { a })
                .collect(),
        )
    };
    let mut out = DescentSample {
        violations: Vec::new(),
        max_gap: f64::NEG_INFINITY,
        pairs,
    };
    for _ in 0..pairs {
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        let (Some(fx), fy) = (f.value(&x).finite(), f.value(&y)) else {
            continue;
        };
        let step = y.sub(&x);
        let bound = f.subderivative(&x, &step)?.add(ExtReal::Finite(fx + 0.5 * l * step.dot(&step)))?;
        let gap = match (fy, bound) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a - b,
            (_, ExtReal::PosInf) => f64::NEG_INFINITY,
            (ExtReal::PosInf, _) => f64::INFINITY,
            _ => f64::NEG_INFINITY,
        };
        out.max_gap = out.max_gap.max(gap);
        if gap > DESCENT_TOL {
            out.violations.push(DescentViolation {
                x: x.into_vec(),
                y: y.into_vec(),
                gap,
            });
        }
    }
    Ok(out)
}

/// Per recorded step: `f(x_{k+1}) − f(x_k) ≤ −M min{|d_k|, d_k²}`.
pub fn sufficient_decrease_audit(trace: &Trace, m: f64) -> Vec<bool> {
    let f = trace.values();
    trace
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let d = r.dir_value.abs();
            f[i + 1] - f[i] <= -m * d.min(d * d)
        })
        .collect()
}

/// Tolerance of [`tangent_membership`].
pub const TANGENT_TOL: f64 = 1e-9;

/// Whether `w` is tangent to `{x : G(x) ∈ X}` at `x`, tested as
/// `dist(d G(x)(w); T_X(G(x))) ≤ 1e−9`.
pub fn tangent_membership(g: &dyn SemiDiffMap, set: &dyn SetModel, x: &Point, w: &Point) -> Result<bool> {
    check_dim(g.dim_in(), x.dim())?;
    check_dim(g.dim_in(), w.dim())?;
    check_dim(set.dimension(), g.dim_out())?;
    let y = g.eval(x);
    if !set.contains(&y) {
        return Err(Error::NotFeasible);
    }
    Ok(set.tangent_distance(&y, &g.semiderivative(x, w)) <= TANGENT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::AffineMap;
    use crate::oracles::{half_squared_norm, l1_norm, moreau_envelope, neg_l1_norm, zero_norm_composite, ProxFriendly};
    use crate::pt;
    use crate::sets::{BoxSet, Singleton};
    use crate::solver::{IterRecord, Status};
    use nalgebra::DMatrix;

    #[test]
    fn fd_examples() {
        let f = l1_norm(3, 1.0);
        let e = fd_subderivative(&f, &pt![1, -1, 0], &pt![2, 1, -3], &FDConfig::default()).unwrap();
        assert!((e.value.to_f64() - 4.0).abs() < 1e-6);
        let z = zero_norm_composite(DMatrix::identity(2, 2), vec![0.0; 2]).unwrap();
        for cfg in [FDConfig::default(), FDConfig::liminf()] {
            let e = fd_subderivative(&z, &pt![1, 0], &pt![0, 1], &cfg).unwrap();
            assert_eq!(e.value, ExtReal::PosInf);
        }
        let e = fd_subderivative(&f, &pt![1, 2, 3], &pt![0, 0, 0], &FDConfig::default()).unwrap();
        assert_eq!(e.value, ExtReal::ZERO);
    }

    #[test]
    fn liminf_picks_lower_branch() {
        // d f(0)(w) = −|w| for −|·|; the liminf estimate must not exceed it.
        let f = neg_l1_norm(1, 1.0);
        let e = fd_subderivative(&f, &pt![0], &pt![1], &FDConfig::liminf()).unwrap();
        assert!(e.value.to_f64() <= -1.0 + 1e-12);
    }

    #[test]
    fn brute_force_examples() {
        let f = half_squared_norm(2);
        let r = brute_force_direction(&f, &pt![3, 4], NormChoice::L2, 1e-3).unwrap();
        assert!((r.value.to_f64() + 5.0).abs() < 1e-4);
        let g = l1_norm(1, 1.0);
        assert_eq!(sphere_grid(1, NormChoice::L2, 0.1).len(), 2);
        let r = brute_force_direction(&g, &pt![1], NormChoice::L1, 0.5).unwrap();
        assert_eq!(r.w, pt![-1]);
        assert!(matches!(
            brute_force_direction(&l1_norm(5, 1.0), &pt![0, 0, 0, 0, 0], NormChoice::L1, 0.5),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn sphere_grids_lie_on_spheres() {
        for n in 2..=4 {
            for norm in [NormChoice::L2, NormChoice::L1, NormChoice::LInf] {
                let grid = sphere_grid(n, norm, 0.5);
                assert!(!grid.is_empty());
                for w in grid {
                    assert!((norm.norm(&w) - 1.0).abs() < 1e-12, "{norm} {w:?}");
                }
            }
        }
        let l1 = sphere_grid(2, NormChoice::L1, 1.0);
        assert_eq!(l1.len(), 4);
    }

    #[test]
    fn descent_examples() {
        let lo = [-3.0, -3.0];
        let hi = [3.0, 3.0];
        let s = descent_property_sample(&half_squared_norm(2), 1.0, &lo, &hi, 500, 1).unwrap();
        assert!(s.violations.is_empty());
        let s = descent_property_sample(&neg_l1_norm(2, 1.0), 0.0, &lo, &hi, 500, 2).unwrap();
        assert!(s.violations.is_empty());
        let e = moreau_envelope(ProxFriendly::ZeroNorm { n: 2, cost: 1.0 }, 0.5).unwrap();
        let s = descent_property_sample(&e, 2.0, &lo, &hi, 500, 3).unwrap();
        assert!(s.violations.is_empty());
        // Negative control: too small a constant for the quadratic.
        let s = descent_property_sample(&half_squared_norm(2), 0.5, &lo, &hi, 200, 4).unwrap();
        assert!(!s.violations.is_empty());
    }

    fn record(k: usize, f: f64, d: f64) -> IterRecord {
        IterRecord {
            k,
            f,
            dir_value: d,
            alpha: 1.0,
            backtracks: 0,
            step_norm: 1.0,
            wall_ns: 0,
            x: vec![0.0],
        }
    }

    #[test]
    fn sufficient_decrease_controls() {
        let trace = Trace {
            records: vec![record(0, 1.0, -1.0), record(1, 0.5, 0.0), record(2, 0.5, -1.0)],
            status: Status::MaxIter,
            final_x: vec![0.0],
            final_f: 0.7,
            final_dir_value: None,
            final_exact: true,
        };
        assert_eq!(sufficient_decrease_audit(&trace, 0.25), vec![true, true, false]);
    }

    #[test]
    fn tangent_examples() {
        let id = AffineMap::identity(2);
        let orthant = BoxSet::nonnegative_orthant(2);
        assert!(tangent_membership(&id, &orthant, &pt![0, 1], &pt![1, -1]).unwrap());
        assert!(!tangent_membership(&id, &orthant, &pt![0, 1], &pt![-1, 0]).unwrap());
        assert!(tangent_membership(&id, &orthant, &pt![0, 1], &pt![0, 0]).unwrap());
        let origin = Singleton::new(pt![0, 0]);
        assert!(!tangent_membership(&id, &origin, &pt![0, 0], &pt![1, 0]).unwrap());
        assert_eq!(
            tangent_membership(&id, &origin, &pt![1, 0], &pt![1, 0]),
            Err(Error::NotFeasible)
        );
    }
}
