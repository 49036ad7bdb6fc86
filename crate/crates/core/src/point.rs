use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vector of finite reals with positive dimension.
///
/// Used both for points `x` and for directions `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyPoint);
        }
        if let Some((index, &value)) = coords.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteCoordinate { index, value });
        }
        Ok(Point(coords))
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "points must have positive dimension");
        Point(vec![0.0; n])
    }

    /// The `i`-th standard basis vector scaled by `sign`.
    pub fn basis(n: usize, i: usize, sign: f64) -> Self {
        let mut p = Point::zeros(n);
        p.0[i] = sign;
        p
    }

    /// Internal constructor for arithmetic on already-validated points.
    pub(crate) fn from_vec(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    /// `self + t * w`.
    pub fn axpy(&self, t: f64, w: &Point) -> Point {
        debug_assert_eq!(self.dim(), w.dim());
        Point(self.0.iter().zip(&w.0).map(|(a, b)| a + t * b).collect())
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, t: f64) -> Point {
        Point(self.0.iter().map(|a| a * t).collect())
    }

    pub fn dot(&self, other: &Point) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.0)
    }

    pub fn norm1(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Concatenation `(self, other)`.
    pub fn concat(&self, other: &Point) -> Point {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Point(v)
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Shorthand for tests and examples; panics on invalid input.
#[macro_export]
macro_rules! pt {
    ($($x:expr),+ $(,)?) => {
        $crate::Point::new(vec![$($x as f64),+]).expect("valid point literal")
    };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonfinite_and_empty() {
        assert_eq!(Point::new(vec![]), Err(Error::EmptyPoint));
        assert!(matches!(
            Point::new(vec![1.0, f64::NAN]),
            Err(Error::NonFiniteCoordinate { index: 1, .. })
        ));
        assert!(Point::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn norms() {
        let p = pt![3, -4];
        assert_eq!(p.norm2(), 5.0);
        assert_eq!(p.norm1(), 7.0);
        assert_eq!(p.norm_inf(), 4.0);
    }

    #[test]
    fn serde_rejects_nan_free_roundtrip() {
        let p = pt![1.5, -2];
        let s = serde_json::to_string(&p).unwrap();
        let q: Point = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        assert!(serde_json::from_str::<Point>("[]").is_err());
    }
}
