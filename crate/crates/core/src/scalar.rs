//! Scalar abstractions shared by the exact and floating backends.
//!
//! The algebraic layer (polynomials, ring arithmetic, multiplication
//! operators, closure data) is written against [`Coeff`] / [`Scalar`] so the
//! same code runs over `BigRational` for identity proofs and over `f64` or
//! `Complex<f64>` for numerics. Transcendental pieces (roots, residue sums)
//! are generic over [`Real`] instead.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign, ToPrimitive, Zero};

/// Ring of coefficients: enough structure for polynomial add/mul and
/// division by a monic polynomial.
pub trait Coeff: Clone + Debug + PartialEq + Num + Neg<Output = Self> + 'static {}

impl<T> Coeff for T where T: Clone + Debug + PartialEq + Num + Neg<Output = T> + 'static {}

/// A field usable by the generic linear algebra and ring code.
///
/// `magnitude` drives pivot selection; `is_exact` tells callers whether
/// equality comparisons are meaningful or need a tolerance.
pub trait Scalar: Coeff + NumAssign + Send + Sync {
    /// Lossy conversion used for pivoting and error reporting.
    fn magnitude(&self) -> f64;

    fn is_exact() -> bool;

    /// Embeds an exact rational `num/den`.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Embeds an exact integer (Chebyshev coefficients, binomials).
    fn from_bigint(v: &BigInt) -> Self;

    /// Treat as zero: exact equality for exact types, `|x| <= tol` otherwise.
    fn is_negligible(&self, tol: f64) -> bool {
        if Self::is_exact() {
            self.is_zero()
        } else {
            self.magnitude() <= tol
        }
    }
}

macro_rules! impl_float_scalar {
    ($f:ty) => {
        impl Scalar for $f {
            fn magnitude(&self) -> f64 {
                (*self as f64).abs()
            }
            fn is_exact() -> bool {
                false
            }
            fn from_ratio(num: i64, den: i64) -> Self {
                (num as f64 / den as f64) as $f
            }
            fn from_bigint(v: &BigInt) -> Self {
                v.to_f64().unwrap_or(f64::NAN) as $f
            }
        }

        impl Scalar for Complex<$f> {
            fn magnitude(&self) -> f64 {
                self.norm() as f64
            }
            fn is_exact() -> bool {
                false
            }
            fn from_ratio(num: i64, den: i64) -> Self {
                Complex::new(<$f as Scalar>::from_ratio(num, den), 0.0)
            }
            fn from_bigint(v: &BigInt) -> Self {
                Complex::new(<$f as Scalar>::from_bigint(v), 0.0)
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

impl Scalar for BigRational {
    fn magnitude(&self) -> f64 {
        self.to_f64().map(f64::abs).unwrap_or(f64::INFINITY)
    }
    fn is_exact() -> bool {
        true
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_bigint(v: &BigInt) -> Self {
        BigRational::from_integer(v.clone())
    }
}

impl Scalar for Complex<BigRational> {
    fn magnitude(&self) -> f64 {
        let re = self.re.magnitude();
        let im = self.im.magnitude();
        re.hypot(im)
    }
    fn is_exact() -> bool {
        true
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(BigRational::from_ratio(num, den), BigRational::zero())
    }
    fn from_bigint(v: &BigInt) -> Self {
        Complex::new(BigRational::from_bigint(v), BigRational::zero())
    }
}

/// Real floating type for the transcendental layer (roots of unity, square
/// roots, residue sums).
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Send + Sync + Scalar + 'static
{
    fn from_f64_lossy(x: f64) -> Self;
}

impl Real for f32 {
    fn from_f64_lossy(x: f64) -> Self {
        x as f32
    }
}

impl Real for f64 {
    fn from_f64_lossy(x: f64) -> Self {
        x
    }
}

/// Parses a decimal (`-0.75`, `1.5e-2`), fraction (`3/4`) or integer into an
/// exact rational. Decimal literals are read as the decimal they denote, not
/// as the nearest binary double.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|ch| ch.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(all_digits.parse::<BigInt>().ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    for _ in 0..scale.unsigned_abs() {
        if scale > 0 {
            value *= ten.clone();
        } else {
            value /= ten.clone();
        }
    }
    Some(if negative { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_rational_forms() {
        let half = BigRational::from_ratio(1, 2);
        assert_eq!(parse_rational("0.5"), Some(half.clone()));
        assert_eq!(parse_rational("1/2"), Some(half.clone()));
        assert_eq!(parse_rational("5e-1"), Some(half));
        assert_eq!(parse_rational("-1.25"), Some(BigRational::from_ratio(-5, 4)));
        assert_eq!(parse_rational("3"), Some(BigRational::from_ratio(3, 1)));
        assert_eq!(parse_rational(".3"), Some(BigRational::from_ratio(3, 10)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational(""), None);
    }

    #[test]
    fn negligible_respects_exactness() {
        let tiny = BigRational::new(BigInt::from(1), BigInt::from(10).pow(40));
        assert!(!tiny.is_negligible(1e-12));
        assert!(1e-15f64.is_negligible(1e-12));
    }
}
