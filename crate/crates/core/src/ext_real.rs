//! Extended reals `[-inf, +inf]`, the codomain of subderivatives.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Mul, Neg};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A value in `[-inf, +inf]`. The finite payload is never NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Maps `f64` infinities to the matching tag; rejects NaN.
    pub fn try_new(v: f64) -> Result<Self> {
        if v.is_nan() {
            Err(Error::NotANumber)
        } else if v == f64::INFINITY {
            Ok(ExtReal::PosInf)
        } else if v == f64::NEG_INFINITY {
            Ok(ExtReal::NegInf)
        } else {
            Ok(ExtReal::Finite(v))
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// `f64` view; infinities map to `f64` infinities.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    /// Extended sum; `(+inf) + (-inf)` is an error rather than a value.
    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: ExtReal) -> Result<ExtReal> {
        use ExtReal::*;
        match (self, other) {
            (PosInf, NegInf) | (NegInf, PosInf) => Err(Error::IndeterminateSum),
            (PosInf, _) | (_, PosInf) => Ok(PosInf),
            (NegInf, _) | (_, NegInf) => Ok(NegInf),
            (Finite(a), Finite(b)) => Ok(ExtReal::from(a + b)),
        }
    }

    /// Multiplication by a positive real.
    pub fn scale(self, t: f64) -> ExtReal {
        debug_assert!(t > 0.0);
        match self {
            ExtReal::Finite(v) => ExtReal::from(v * t),
            other => other,
        }
    }

    fn rank(self) -> u8 {
        match self {
            ExtReal::NegInf => 0,
            ExtReal::Finite(_) => 1,
            ExtReal::PosInf => 2,
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if other > self {
            other
        } else {
            self
        }
    }
}

/// Infallible conversion for arithmetic results that cannot be NaN.
///
/// Panics on NaN: a NaN here means a bundled model produced `0 * inf` or
/// `inf - inf`, which is a bug, not a value.
impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        match ExtReal::try_new(v) {
            Ok(x) => x,
            Err(_) => panic!("NaN is not an extended real"),
        }
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            // payloads are never NaN
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b).unwrap(),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        match self {
            ExtReal::NegInf => ExtReal::PosInf,
            ExtReal::Finite(v) => ExtReal::Finite(-v),
            ExtReal::PosInf => ExtReal::NegInf,
        }
    }
}

impl Mul<f64> for ExtReal {
    type Output = ExtReal;
    fn mul(self, t: f64) -> ExtReal {
        self.scale(t)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => write!(f, "-inf"),
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => write!(f, "+inf"),
        }
    }
}

/// Sums a sequence of extended reals left to right.
pub fn ext_sum<I: IntoIterator<Item = ExtReal>>(items: I) -> Result<ExtReal> {
    items
        .into_iter()
        .try_fold(ExtReal::ZERO, |acc, v| acc.add(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn finite_sum() {
        assert_eq!(
            ExtReal::Finite(2.0).add(ExtReal::Finite(3.0)).unwrap(),
            ExtReal::Finite(5.0)
        );
    }

    #[test]
    fn infinity_absorbs_finite() {
        assert_eq!(
            ExtReal::PosInf.add(ExtReal::Finite(-7.0)).unwrap(),
            ExtReal::PosInf
        );
        assert_eq!(
            ExtReal::Finite(1.0).add(ExtReal::NegInf).unwrap(),
            ExtReal::NegInf
        );
    }

    #[test]
    fn opposite_infinities_are_rejected() {
        assert_eq!(
            ExtReal::PosInf.add(ExtReal::NegInf),
            Err(Error::IndeterminateSum)
        );
        assert_eq!(
            ExtReal::NegInf.add(ExtReal::PosInf),
            Err(Error::IndeterminateSum)
        );
    }

    #[test]
    fn nan_rejected() {
        assert_eq!(ExtReal::try_new(f64::NAN), Err(Error::NotANumber));
        assert_eq!(ExtReal::try_new(f64::INFINITY), Ok(ExtReal::PosInf));
    }

    proptest! {
        #[test]
        fn ordering_is_total(a in -1e300f64..1e300) {
            let x = ExtReal::Finite(a);
            prop_assert!(ExtReal::NegInf < x);
            prop_assert!(x < ExtReal::PosInf);
            prop_assert_eq!(x.cmp(&x), Ordering::Equal);
        }

        #[test]
        fn negation_reverses_order(a in -1e6f64..1e6, b in -1e6f64..1e6) {
            let (x, y) = (ExtReal::Finite(a), ExtReal::Finite(b));
            prop_assert_eq!(x.cmp(&y), (-y).cmp(&-x));
        }
    }
}
