//! Real coefficient fields used throughout the crate.
//!
//! Most algebra is written once over [`Scalar`] and instantiated twice: with
//! `f64` for series and sampling work, and with [`Rational`] wherever a
//! residual has to be shown to vanish exactly.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational.
pub type Rational = BigRational;

/// Absolute threshold below which a floating residual counts as zero.
pub const FLOAT_ZERO_TOL: f64 = 1e-12;

pub trait Scalar:
    Clone + Debug + Display + PartialEq + PartialOrd + Num + Signed + Send + Sync + 'static
{
    /// Exact conversion where the field allows it; `None` for non-finite input.
    fn from_f64(x: f64) -> Option<Self>;
    fn from_i64(n: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Exact zero for rationals, `|x| <= FLOAT_ZERO_TOL` for floats.
    fn is_negligible(&self) -> bool;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= FLOAT_ZERO_TOL
    }
}

impl Scalar for Rational {
    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }

    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn to_f64(&self) -> f64 {
        match ToPrimitive::to_f64(self) {
            Some(v) if v.is_finite() => v,
            _ => big_ratio_to_f64(self.numer(), self.denom()),
        }
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
}

// Keep the top 60 bits of each side and restore the binary exponent afterwards,
// so huge numerators over huge denominators still convert.
fn big_ratio_to_f64(n: &BigInt, d: &BigInt) -> f64 {
    let shift_n = n.bits().saturating_sub(60);
    let shift_d = d.bits().saturating_sub(60);
    let nm = (n >> shift_n).to_f64().unwrap_or(f64::NAN);
    let dm = (d >> shift_d).to_f64().unwrap_or(f64::NAN);
    let exp = shift_n as i64 - shift_d as i64;
    let half = (exp / 2).clamp(-2000, 2000) as i32;
    let rest = (exp - exp / 2).clamp(-2000, 2000) as i32;
    nm / dm * 2f64.powi(half) * 2f64.powi(rest)
}

/// `n!` in the given field.
pub fn factorial<T: Scalar>(n: u32) -> T {
    (1..=n as i64).fold(T::one(), |acc, k| acc * T::from_i64(k))
}

/// Rational from a small integer ratio, for tests and constants.
pub fn ratio(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact rational value of a finite float. Panics on NaN or infinity.
pub fn exact(x: f64) -> Rational {
    BigRational::from_float(x).expect("finite float")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn huge_ratios_convert() {
        let big = BigInt::from(3) << 3000u32;
        let q = BigRational::new(big.clone() * BigInt::from(5), big * BigInt::from(4));
        assert_eq!(Scalar::to_f64(&q), 1.25);
        let tiny = BigRational::new(BigInt::from(1), BigInt::from(1) << 1030u32);
        assert_eq!(Scalar::to_f64(&tiny), 2f64.powi(-1000) * 2f64.powi(-30));
    }

    #[test]
    fn rational_from_float_is_exact() {
        let r = exact(0.1);
        assert_eq!(Scalar::to_f64(&r), 0.1);
        assert_ne!(r, ratio(1, 10));
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial::<Rational>(5), ratio(120, 1));
        assert_eq!(factorial::<f64>(0), 1.0);
        let f30: Rational = factorial(30);
        assert_eq!(f30.numer().to_string(), "265252859812191058636308480000000");
    }

    #[test]
    fn negligible_thresholds() {
        assert!(1e-13_f64.is_negligible());
        assert!(!1e-11_f64.is_negligible());
        assert!(!ratio(1, 1_000_000_000_000_000).is_negligible());
        assert!(Rational::zero().is_negligible());
    }
}
