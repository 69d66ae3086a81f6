//! Numeric abstractions shared by the scoring, color and policy code.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Exact or floating scalar: `f32`, `f64`, or a rational such as
/// [`num_rational::Rational64`].
pub trait Scalar: Num + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static {
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar")
    }

    /// `numerator / denominator` built in the scalar itself, so rationals stay exact.
    fn ratio(numerator: i64, denominator: i64) -> Self {
        Self::from_i64(numerator).expect("representable") / Self::from_i64(denominator).expect("representable")
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl<T> Scalar for T where T: Num + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static {}

/// Floating-point scalar: `f32` or `f64`.
pub trait Real: Scalar + Float + Copy {
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }
}

impl<T: Scalar + Float + Copy> Real for T {}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    #[test]
    fn ratio_is_exact_for_rationals() {
        let tenth = Rational64::ratio(1, 10);
        let sum = tenth + Rational64::ratio(2, 10);
        assert_eq!(sum, Rational64::ratio(3, 10));
        assert_ne!(0.1f64 + 0.2, 0.3);
    }

    #[test]
    fn max_of_picks_larger() {
        assert_eq!(2.0f64.max_of(-1.0), 2.0);
        assert_eq!(
            Rational64::ratio(-1, 2).max_of(Rational64::from_count(0)),
            Rational64::from_count(0)
        );
    }
}
