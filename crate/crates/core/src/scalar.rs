//! Scalar abstractions for the two algebras used by the inference pipelines.
//!
//! The probability-domain pipeline (sum-product) is generic over
//! [`FloatScalar`], implemented for `f32` and `f64`. The log-domain pipeline
//! (max-product) works in the max-plus semiring and is generic over
//! [`MaxPlusWeight`], implemented for the floats and for `i64`, where the
//! integer instantiation gives exact arithmetic for algebraic tests.
//!
//! `f64` is the default scalar everywhere; `f32` trades accuracy for
//! footprint and carries a correspondingly looser validation tolerance.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar usable for probability-domain computation.
pub trait FloatScalar:
    Float + NumAssign + FromPrimitive + ToPrimitive + Debug + Default + Send + Sync + 'static
{
    /// Absolute tolerance for checking that a stochastic row sums to one.
    fn distribution_tolerance() -> Self;

    /// Lossless-enough conversion from `f64` model parameters.
    fn from_f64_param(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to any FloatScalar")
    }
}

impl FloatScalar for f64 {
    fn distribution_tolerance() -> Self {
        1e-12
    }
}

impl FloatScalar for f32 {
    fn distribution_tolerance() -> Self {
        1e-5
    }
}

/// Log weight in the max-plus semiring, where `max` plays the role of
/// addition, numeric `+` the role of multiplication, and negative infinity
/// is the annihilator (an impossible transition).
///
/// Method names avoid `add`/`mul`/`zero` so that float types can implement
/// both this trait and the ordinary numeric traits without ambiguity.
pub trait MaxPlusWeight: Copy + PartialOrd + PartialEq + Debug + Send + Sync + 'static {
    /// The annihilator: absorbs anything under [`Self::plus`].
    fn neg_inf() -> Self;

    /// The semiring unit: the log weight of a certain event.
    fn log_one() -> Self;

    /// Semiring multiplication, i.e. numeric addition that absorbs `-inf`.
    fn plus(self, rhs: Self) -> Self;

    /// True unless the value is the annihilator.
    fn is_reachable(self) -> bool;

    /// True for every value a well-formed element may contain: excludes NaN
    /// and positive infinity for floats, always true for integers.
    fn is_valid_log_weight(self) -> bool;
}

impl MaxPlusWeight for f64 {
    fn neg_inf() -> Self {
        f64::NEG_INFINITY
    }
    fn log_one() -> Self {
        0.0
    }
    fn plus(self, rhs: Self) -> Self {
        self + rhs
    }
    fn is_reachable(self) -> bool {
        self != f64::NEG_INFINITY
    }
    fn is_valid_log_weight(self) -> bool {
        !self.is_nan() && self != f64::INFINITY
    }
}

impl MaxPlusWeight for f32 {
    fn neg_inf() -> Self {
        f32::NEG_INFINITY
    }
    fn log_one() -> Self {
        0.0
    }
    fn plus(self, rhs: Self) -> Self {
        self + rhs
    }
    fn is_reachable(self) -> bool {
        self != f32::NEG_INFINITY
    }
    fn is_valid_log_weight(self) -> bool {
        !self.is_nan() && self != f32::INFINITY
    }
}

/// `i64::MIN` stands in for `-inf`; addition saturates there instead of
/// wrapping, so the annihilator law holds exactly.
impl MaxPlusWeight for i64 {
    fn neg_inf() -> Self {
        i64::MIN
    }
    fn log_one() -> Self {
        0
    }
    fn plus(self, rhs: Self) -> Self {
        if self == i64::MIN || rhs == i64::MIN {
            i64::MIN
        } else {
            self + rhs
        }
    }
    fn is_reachable(self) -> bool {
        self != i64::MIN
    }
    fn is_valid_log_weight(self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_annihilator_absorbs() {
        assert_eq!(i64::MIN.plus(5), i64::MIN);
        assert_eq!(5i64.plus(i64::MIN), i64::MIN);
        assert_eq!(i64::MIN.plus(i64::MIN), i64::MIN);
        assert!(!i64::MIN.is_reachable());
        assert!(0i64.is_reachable());
    }

    #[test]
    fn integer_addition_does_not_wrap_near_annihilator() {
        // Without the guard, MIN + positive would wrap instead of absorbing.
        assert_eq!(i64::MIN.plus(i64::MAX), i64::MIN);
    }

    #[test]
    fn float_annihilator_absorbs() {
        assert_eq!(f64::neg_inf().plus(3.0), f64::NEG_INFINITY);
        assert!(3.0f64.is_reachable());
        assert!(!f64::NEG_INFINITY.is_reachable());
    }

    #[test]
    fn validity_excludes_nan_and_positive_infinity() {
        assert!(!f64::NAN.is_valid_log_weight());
        assert!(!f64::INFINITY.is_valid_log_weight());
        assert!(f64::NEG_INFINITY.is_valid_log_weight());
        assert!(0.5f64.is_valid_log_weight());
        assert!(i64::MIN.is_valid_log_weight());
    }
}
