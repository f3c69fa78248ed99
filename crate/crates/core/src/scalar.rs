//! Scalar abstraction for set and element weights.
//!
//! Every weight the algorithms produce is a finite sum of terms of the form
//! `2^j / f` (or `2^k / (2^j * scale)`), possibly capped at one and rescaled by
//! a constant. Those values are representable exactly as rationals, so the
//! weight-carrying code is generic over [`Scalar`] and can be run over `f64`
//! for speed or over [`num_rational::Ratio<i64>`] when bit-exact comparisons
//! are wanted.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Numeric type usable as a weight.
pub trait Scalar: Num + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive {
    /// `num / den` as a scalar.
    fn ratio(num: u64, den: u64) -> Self {
        Self::from_u64(num).expect("numerator representable") / Self::from_u64(den).expect("denominator representable")
    }

    /// `2^exp / den`.
    fn pow2_over(exp: u32, den: u64) -> Self {
        Self::ratio(1u64 << exp, den)
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `min(1, self)`.
    fn cap_one(self) -> Self {
        if self > Self::one() {
            Self::one()
        } else {
            self
        }
    }
}

impl Scalar for f64 {}
impl Scalar for f32 {}
impl Scalar for Ratio<i64> {}
impl Scalar for Ratio<i128> {}

/// Sums a slice of scalars, starting at zero.
pub fn sum<T: Scalar>(values: &[T]) -> T {
    values.iter().cloned().fold(T::zero(), |acc, v| acc + v)
}

/// Larger of two partially ordered scalars (first wins on ties / NaN).
pub fn max<T: Scalar>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow2_over_is_exact_for_rationals() {
        let w: Ratio<i64> = Scalar::pow2_over(3, 12);
        assert_eq!(w, Ratio::new(2, 3));
    }

    #[test]
    fn cap_one_clamps() {
        assert_eq!(1.5f64.cap_one(), 1.0);
        assert_eq!(0.25f64.cap_one(), 0.25);
        let r: Ratio<i64> = Ratio::new(7, 4);
        assert_eq!(r.cap_one(), Ratio::from_integer(1));
    }

    #[test]
    fn sum_and_max() {
        assert_eq!(sum(&[0.5f64, 0.25, 0.25]), 1.0);
        assert_eq!(max(2.0f64, 3.0), 3.0);
    }
}
