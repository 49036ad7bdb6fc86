//! Closed sets exposing membership, Euclidean projection and the distance
//! from a direction to the tangent cone.
//!
//! All bundled sets are geometrically derivable: every tangent vector is
//! realized by a curve inside the set, which makes their distance functions
//! semi-differentiable. Finite unions of convex sets keep that property.

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::maps::mat_vec;
use crate::point::{dot, norm2, Point};

/// Membership slack for points produced by floating-point arithmetic.
pub const SET_TOL: f64 = 1e-12;
/// Relative tie tolerance when filtering nearest points.
pub const PROJECTION_TIE_TOL: f64 = 1e-12;

pub trait SetModel: Send + Sync {
    fn dimension(&self) -> usize;

    fn contains(&self, x: &Point) -> bool;

    /// All Euclidean nearest points the model can enumerate. Every returned
    /// point is in the set and they are equidistant from `x`.
    fn project(&self, x: &Point) -> Vec<Point>;

    /// `dist(w; T_X(x))` for `x` in the set.
    fn tangent_distance(&self, x: &Point, w: &Point) -> f64;

    fn derivable(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        "set".to_string()
    }
}

fn scale_tol(scale: f64) -> f64 {
    SET_TOL * (1.0 + scale.abs())
}

/// `{x : l <= x <= u}`; bounds may be infinite.
#[derive(Debug, Clone)]
pub struct BoxSet {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxSet {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::EmptyPoint);
        }
        for (l, u) in lower.iter().zip(&upper) {
            if l.is_nan() || u.is_nan() || l > u || *l == f64::INFINITY || *u == f64::NEG_INFINITY
            {
                return Err(Error::InvalidParameter(format!("empty box side [{l}, {u}]")));
            }
        }
        Ok(BoxSet { lower, upper })
    }

    /// The nonnegative orthant `R^n_+`.
    pub fn nonnegative_orthant(n: usize) -> Self {
        BoxSet {
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }
}

impl SetModel for BoxSet {
    fn dimension(&self) -> usize {
        self.lower.len()
    }

    fn contains(&self, x: &Point) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&v, (&l, &u))| v >= l - scale_tol(l) && v <= u + scale_tol(u))
    }

    fn project(&self, x: &Point) -> Vec<Point> {
        vec![Point::from_vec(
            x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .map(|(&v, (&l, &u))| v.clamp(l, u))
                .collect(),
        )]
    }

    fn tangent_distance(&self, x: &Point, w: &Point) -> f64 {
        let mut sq = 0.0;
        for i in 0..x.dim() {
            let (l, u, v) = (self.lower[i], self.upper[i], w[i]);
            let at_lower = x[i] <= l + scale_tol(l);
            let at_upper = x[i] >= u - scale_tol(u);
            let excess = match (at_lower, at_upper) {
                (true, true) => v.abs(),
                (true, false) => (-v).max(0.0),
                (false, true) => v.max(0.0),
                (false, false) => 0.0,
            };
            sq += excess * excess;
        }
        sq.sqrt()
    }

    fn name(&self) -> String {
        if self.lower.iter().all(|&l| l == 0.0) && self.upper.iter().all(|u| u.is_infinite()) {
            "orthant".into()
        } else {
            "box".into()
        }
    }
}

/// Closed Euclidean ball.
#[derive(Debug, Clone)]
pub struct Ball {
    center: Vec<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::EmptyPoint);
        }
        if radius.is_nan() || radius <= 0.0 || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!("ball radius {radius}")));
        }
        Ok(Ball { center, radius })
    }
}

impl SetModel for Ball {
    fn dimension(&self) -> usize {
        self.center.len()
    }

    fn contains(&self, x: &Point) -> bool {
        let d: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        norm2(&d) <= self.radius + scale_tol(self.radius)
    }

    fn project(&self, x: &Point) -> Vec<Point> {
        let d: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        let r = norm2(&d);
        if r <= self.radius {
            return vec![x.clone()];
        }
        let s = self.radius / r;
        vec![Point::from_vec(
            self.center.iter().zip(&d).map(|(c, di)| c + s * di).collect(),
        )]
    }

    fn tangent_distance(&self, x: &Point, w: &Point) -> f64 {
        let d: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        let r = norm2(&d);
        if r < self.radius - scale_tol(self.radius) {
            return 0.0;
        }
        (dot(&d, w) / r).max(0.0)
    }

    fn name(&self) -> String {
        "ball".into()
    }
}

/// `{x : A x = b}`, assumed consistent.
#[derive(Debug, Clone)]
pub struct AffineSubspace {
    a: DMatrix<f64>,
    b: Vec<f64>,
    pinv: DMatrix<f64>,
}

impl AffineSubspace {
    pub fn new(a: DMatrix<f64>, b: Vec<f64>) -> Result<Self> {
        check_dim(a.nrows(), b.len())?;
        if a.ncols() == 0 {
            return Err(Error::EmptyPoint);
        }
        let pinv = a
            .clone()
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let x0 = mat_vec(&pinv, &b);
        let resid: Vec<f64> = mat_vec(&a, &x0).iter().zip(&b).map(|(p, q)| p - q).collect();
        if norm2(&resid) > 1e-9 * (1.0 + norm2(&b)) {
            return Err(Error::InvalidParameter("inconsistent affine system".into()));
        }
        Ok(AffineSubspace { a, b, pinv })
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        mat_vec(&self.a, x).iter().zip(&self.b).map(|(p, q)| p - q).collect()
    }
}

impl SetModel for AffineSubspace {
    fn dimension(&self) -> usize {
        self.a.ncols()
    }

    fn contains(&self, x: &Point) -> bool {
        norm2(&self.residual(x)) <= scale_tol(x.norm2() + norm2(&self.b))
    }

    fn project(&self, x: &Point) -> Vec<Point> {
        let corr = mat_vec(&self.pinv, &self.residual(x));
        vec![Point::from_vec(x.iter().zip(&corr).map(|(a, c)| a - c).collect())]
    }

    fn tangent_distance(&self, _x: &Point, w: &Point) -> f64 {
        // T = null(A); the normal component of w is A⁺ A w
        norm2(&mat_vec(&self.pinv, &mat_vec(&self.a, w)))
    }

    fn name(&self) -> String {
        "affine".into()
    }
}

/// `{p}`.
#[derive(Debug, Clone)]
pub struct Singleton {
    p: Point,
}

impl Singleton {
    pub fn new(p: Point) -> Self {
        Singleton { p }
    }
}

impl SetModel for Singleton {
    fn dimension(&self) -> usize {
        self.p.dim()
    }
    fn contains(&self, x: &Point) -> bool {
        x.sub(&self.p).norm2() <= scale_tol(self.p.norm2())
    }
    fn project(&self, _x: &Point) -> Vec<Point> {
        vec![self.p.clone()]
    }
    fn tangent_distance(&self, _x: &Point, w: &Point) -> f64 {
        w.norm2()
    }
    fn name(&self) -> String {
        "singleton".into()
    }
}

/// Convex polyhedron `{x : A x <= b}`.
#[derive(Debug, Clone)]
pub struct Polyhedron {
    rows: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl Polyhedron {
    pub fn new(a: &DMatrix<f64>, b: Vec<f64>) -> Result<Self> {
        check_dim(a.nrows(), b.len())?;
        if a.ncols() == 0 {
            return Err(Error::EmptyPoint);
        }
        let rows = (0..a.nrows())
            .map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect())
            .collect();
        let p = Polyhedron { rows, b };
        Ok(p)
    }

    pub fn dimension(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.rows
            .iter()
            .zip(&self.b)
            .all(|(a, &bi)| dot(a, x) <= bi + scale_tol(bi.abs() + norm2(x)))
    }

    pub fn project(&self, x: &[f64]) -> Option<Vec<f64>> {
        let rows: Vec<&[f64]> = self.rows.iter().map(|r| r.as_slice()).collect();
        project_polyhedral(&rows, &self.b, x)
    }

    /// `dist(w; {v : a_j v <= 0 for active j})`.
    pub fn tangent_distance(&self, x: &[f64], w: &[f64]) -> f64 {
        let active: Vec<&[f64]> = self
            .rows
            .iter()
            .zip(&self.b)
            .filter(|(a, &bi)| dot(a, x) >= bi - scale_tol(bi.abs() + norm2(x)))
            .map(|(a, _)| a.as_slice())
            .collect();
        let zeros = vec![0.0; active.len()];
        match project_polyhedral(&active, &zeros, w) {
            Some(p) => {
                let d: Vec<f64> = w.iter().zip(&p).map(|(a, b)| a - b).collect();
                norm2(&d)
            }
            // a cone always contains 0, so projection cannot fail
            None => norm2(w),
        }
    }
}

/// Euclidean projection onto `{y : rows_j y <= b_j}` by face enumeration.
///
/// The projection lies in the relative interior of some face, and is the
/// projection onto that face's affine hull, which is cut out by at most
/// `n` linearly independent active constraints. Enumerating constraint
/// subsets of size `<= n` and keeping the nearest feasible candidate is
/// therefore exact. Returns `None` when the polyhedron is empty.
pub(crate) fn project_polyhedral(rows: &[&[f64]], b: &[f64], x: &[f64]) -> Option<Vec<f64>> {
    let n = x.len();
    let feasible = |y: &[f64]| {
        rows.iter()
            .zip(b)
            .all(|(a, &bi)| dot(a, y) <= bi + scale_tol(bi.abs() + norm2(y)))
    };
    if feasible(x) {
        return Some(x.to_vec());
    }
    let m = rows.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut subset = Vec::with_capacity(n);
    for size in 1..=n.min(m) {
        for_each_subset(m, size, 0, &mut subset, &mut |s| {
            if let Some(y) = project_onto_equalities(rows, b, s, x) {
                if feasible(&y) {
                    let d: f64 = y.iter().zip(x).map(|(p, q)| (p - q) * (p - q)).sum();
                    if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                        best = Some((d, y));
                    }
                }
            }
        });
    }
    best.map(|(_, y)| y)
}

fn for_each_subset(
    m: usize,
    size: usize,
    start: usize,
    cur: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]),
) {
    if cur.len() == size {
        f(cur);
        return;
    }
    for i in start..m {
        if m - i < size - cur.len() {
            break;
        }
        cur.push(i);
        for_each_subset(m, size, i + 1, cur, f);
        cur.pop();
    }
}

/// Projection onto `{y : rows_S y = b_S}`; `None` when the rows are
/// (numerically) dependent.
fn project_onto_equalities(rows: &[&[f64]], b: &[f64], s: &[usize], x: &[f64]) -> Option<Vec<f64>> {
    let k = s.len();
    let gram = DMatrix::from_fn(k, k, |i, j| dot(rows[s[i]], rows[s[j]]));
    let r = nalgebra::DVector::from_iterator(k, s.iter().map(|&i| dot(rows[i], x) - b[i]));
    let scale = gram.diagonal().max();
    let chol = gram.cholesky()?;
    let l = chol.l();
    let min_pivot = l.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v * v));
    if min_pivot <= 1e-12 * scale {
        return None;
    }
    let lambda = chol.solve(&r);
    let mut y = x.to_vec();
    for (idx, &i) in s.iter().enumerate() {
        for (yj, aj) in y.iter_mut().zip(rows[i]) {
            *yj -= lambda[idx] * aj;
        }
    }
    Some(y)
}

/// Finite union of convex polyhedra.
#[derive(Debug, Clone)]
pub struct PolyhedralUnion {
    pieces: Vec<Polyhedron>,
}

impl PolyhedralUnion {
    pub fn new(pieces: Vec<Polyhedron>) -> Result<Self> {
        let n = pieces.first().ok_or(Error::EmptyList)?.dimension();
        for p in &pieces {
            check_dim(n, p.dimension())?;
        }
        Ok(PolyhedralUnion { pieces })
    }

    pub fn pieces(&self) -> &[Polyhedron] {
        &self.pieces
    }
}

impl SetModel for PolyhedralUnion {
    fn dimension(&self) -> usize {
        self.pieces[0].dimension()
    }

    fn contains(&self, x: &Point) -> bool {
        self.pieces.iter().any(|p| p.contains(x))
    }

    fn project(&self, x: &Point) -> Vec<Point> {
        let cands: Vec<(f64, Vec<f64>)> = self
            .pieces
            .iter()
            .filter_map(|p| p.project(x))
            .map(|y| {
                let d: Vec<f64> = y.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
                (norm2(&d), y)
            })
            .collect();
        let best = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let mut out: Vec<Point> = Vec::new();
        for (d, y) in cands {
            if d <= best * (1.0 + PROJECTION_TIE_TOL) {
                let p = Point::from_vec(y);
                if !out.iter().any(|q| q.sub(&p).norm2() <= PROJECTION_TIE_TOL) {
                    out.push(p);
                }
            }
        }
        out
    }

    fn tangent_distance(&self, x: &Point, w: &Point) -> f64 {
        self.pieces
            .iter()
            .filter(|p| p.contains(x))
            .map(|p| p.tangent_distance(x, w))
            .fold(f64::INFINITY, f64::min)
    }

    fn name(&self) -> String {
        "polyhedral-union".into()
    }
}

/// `{(y, z) ∈ R^k × R^k : <y, z> = 0, y <= 0, z <= 0}`.
///
/// With both blocks nonpositive the orthogonality is componentwise, so the
/// set is a product of `k` copies of the two-ray set
/// `{(a, b) : a <= 0, b <= 0, a b = 0}`.
#[derive(Debug, Clone)]
pub struct ComplementaritySet {
    k: usize,
}

impl ComplementaritySet {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyPoint);
        }
        Ok(ComplementaritySet { k })
    }

    fn pair_dist_sq(a: f64, b: f64) -> (f64, f64) {
        let on_first = a.max(0.0).powi(2) + b * b;
        let on_second = a * a + b.max(0.0).powi(2);
        (on_first, on_second)
    }
}

impl SetModel for ComplementaritySet {
    fn dimension(&self) -> usize {
        2 * self.k
    }

    fn contains(&self, x: &Point) -> bool {
        (0..self.k).all(|i| {
            let (a, b) = (x[i], x[self.k + i]);
            a <= SET_TOL && b <= SET_TOL && a.abs().min(b.abs()) <= SET_TOL
        })
    }

    fn project(&self, x: &Point) -> Vec<Point> {
        let k = self.k;
        // per pair: list of nearest (a, b) points
        let mut choices: Vec<Vec<(f64, f64)>> = Vec::with_capacity(k);
        for i in 0..k {
            let (a, b) = (x[i], x[k + i]);
            let (d1, d2) = Self::pair_dist_sq(a, b);
            let p1 = (a.min(0.0), 0.0);
            let p2 = (0.0, b.min(0.0));
            let tie = (d1 - d2).abs() <= PROJECTION_TIE_TOL * d1.max(d2);
            let c = if tie && p1 != p2 {
                vec![p1, p2]
            } else if d1 <= d2 {
                vec![p1]
            } else {
                vec![p2]
            };
            choices.push(c);
        }
        let mut out = vec![vec![0.0; 2 * k]];
        for (i, c) in choices.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * c.len());
            for base in &out {
                for &(a, b) in c {
                    let mut v = base.clone();
                    v[i] = a;
                    v[k + i] = b;
                    next.push(v);
                }
            }
            out = next;
        }
        out.into_iter().map(Point::from_vec).collect()
    }

    fn tangent_distance(&self, x: &Point, w: &Point) -> f64 {
        let k = self.k;
        let mut sq = 0.0;
        for i in 0..k {
            let (a, b) = (x[i], x[k + i]);
            let (va, vb) = (w[i], w[k + i]);
            sq += if a < -SET_TOL {
                vb * vb
            } else if b < -SET_TOL {
                va * va
            } else {
                let (d1, d2) = Self::pair_dist_sq(va, vb);
                d1.min(d2)
            };
        }
        sq.sqrt()
    }

    fn name(&self) -> String {
        "complementarity".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pt;

    fn square(lo: f64, hi: f64) -> Polyhedron {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        Polyhedron::new(&a, vec![hi, -lo, hi, -lo]).unwrap()
    }

    #[test]
    fn polyhedron_projection_matches_box_clamp() {
        let p = square(-1.0, 1.0);
        let b = BoxSet::new(vec![-1.0; 2], vec![1.0; 2]).unwrap();
        for x in [pt![3, 0.5], pt![-2, -7], pt![0.2, 0.3], pt![5, 5]] {
            let y = p.project(&x).unwrap();
            let z = &b.project(&x)[0];
            assert!((y[0] - z[0]).abs() < 1e-14 && (y[1] - z[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn union_returns_all_nearest_points() {
        let u = PolyhedralUnion::new(vec![square(-3.0, -1.0), square(1.0, 3.0)]).unwrap();
        let p = u.project(&pt![0, 0]);
        assert_eq!(p.len(), 2);
        let d0 = p[0].norm2();
        let d1 = p[1].norm2();
        assert!((d0 - d1).abs() < 1e-12);
        for q in &p {
            assert!(u.contains(q));
        }
    }

    #[test]
    fn orthant_tangent_cone() {
        let o = BoxSet::nonnegative_orthant(2);
        // T at (0, 1) is R_+ × R
        assert_eq!(o.tangent_distance(&pt![0, 1], &pt![1, -1]), 0.0);
        assert_eq!(o.tangent_distance(&pt![0, 1], &pt![-2, 5]), 2.0);
    }

    #[test]
    fn complementarity_projection_and_tangent() {
        let c = ComplementaritySet::new(1).unwrap();
        assert!(c.contains(&pt![-1, 0]));
        assert!(!c.contains(&pt![-1, -1]));
        // (-1, -1) is equidistant from both rays
        let p = c.project(&pt![-1, -1]);
        assert_eq!(p.len(), 2);
        // at the origin the tangent cone is the set itself
        assert!((c.tangent_distance(&pt![0, 0], &pt![-1, -2]) - 1.0).abs() < 1e-15);
        assert_eq!(c.tangent_distance(&pt![-1, 0], &pt![3, 2]), 2.0);
    }

    #[test]
    fn affine_projection_lands_in_set() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let s = AffineSubspace::new(a, vec![1.0]).unwrap();
        let p = &s.project(&pt![1, 2, 3])[0];
        assert!(s.contains(p));
        assert!((p[0] - (-2.0 / 3.0)).abs() < 1e-12);
        assert!(s.tangent_distance(p, &pt![1, -1, 0]) < 1e-14);
        assert!((s.tangent_distance(p, &pt![1, 1, 1]) - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn tiny_scale_projections_are_not_ties() {
        // distances ~1e-8 apart by a fixed ratio must not count as equal
        let c = ComplementaritySet::new(1).unwrap();
        let p = c.project(&pt![0.9e-8, -0.4e-8]);
        assert_eq!(p, vec![pt![0, -0.4e-8]]);
        let u = PolyhedralUnion::new(vec![square(-3e-8, -1e-8), square(1.5e-8, 3e-8)]).unwrap();
        assert_eq!(u.project(&pt![0, 0]).len(), 1);
    }

    #[test]
    fn ball_tangent_halfspace() {
        let b = Ball::new(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(b.tangent_distance(&pt![1, 0], &pt![2, 1]), 2.0);
        assert_eq!(b.tangent_distance(&pt![1, 0], &pt![-2, 1]), 0.0);
        assert_eq!(b.tangent_distance(&pt![0.5, 0], &pt![2, 1]), 0.0);
    }
}
