//! Dense univariate polynomials over a generic coefficient ring.

use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::{Coeff, Scalar};

/// Dense polynomial, `coeffs[k]` multiplies `x^k`. Trailing zeros are
/// trimmed so the zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<S> {
    coeffs: Vec<S>,
}

impl<S: Coeff> Poly<S> {
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: S) -> Self {
        Self::new(vec![c])
    }

    /// `coeff * x^degree`.
    pub fn monomial(degree: usize, coeff: S) -> Self {
        let mut coeffs = vec![S::zero(); degree + 1];
        coeffs[degree] = coeff;
        Self::new(coeffs)
    }

    pub fn x() -> Self {
        Self::monomial(1, S::one())
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    /// Coefficient of `x^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(S::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<&S> {
        self.coeffs.last()
    }

    pub fn scale(&self, factor: &S) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * factor.clone()).collect())
    }

    /// Horner evaluation at any value the coefficients can act on.
    pub fn eval<V>(&self, x: &V) -> V
    where
        V: Clone + num_traits::Zero + Add<Output = V> + Mul<Output = V> + From<S>,
    {
        self.coeffs
            .iter()
            .rev()
            .fold(V::zero(), |acc, c| acc * x.clone() + V::from(c.clone()))
    }

    /// Horner evaluation in the coefficient ring itself.
    pub fn eval_same(&self, x: &S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut result = Self::constant(S::one());
        for _ in 0..exp {
            result = &result * self;
        }
        result
    }

    /// Quotient and remainder by a monic divisor; works over any coefficient
    /// ring (no division needed).
    ///
    /// Panics if `divisor` is zero or not monic.
    pub fn div_rem_monic(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        assert!(
            divisor.leading().is_some_and(|l| l.is_one()),
            "divisor must be monic"
        );
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree() else {
            return (Self::zero(), Self::zero());
        };
        if nd < dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![S::zero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let lead = rem[k + dd].clone();
            if lead.is_zero() {
                continue;
            }
            for (i, d) in divisor.coeffs.iter().enumerate() {
                rem[k + i] = rem[k + i].clone() - lead.clone() * d.clone();
            }
            quot[k] = lead;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }
}

impl<S: Scalar> Poly<S> {
    /// Quotient and remainder over a field.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let lead = divisor
            .leading()
            .cloned()
            .expect("division by the zero polynomial");
        let inv = S::one() / lead.clone();
        let monic = divisor.scale(&inv);
        let (q, r) = self.div_rem_monic(&monic);
        (q.scale(&inv), r)
    }
}

impl<S: Coeff> Add for &Poly<S> {
    type Output = Poly<S>;
    fn add(self, rhs: Self) -> Poly<S> {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..len).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<S: Coeff> Sub for &Poly<S> {
    type Output = Poly<S>;
    fn sub(self, rhs: Self) -> Poly<S> {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..len).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<S: Coeff> Mul for &Poly<S> {
    type Output = Poly<S>;
    fn mul(self, rhs: Self) -> Poly<S> {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![S::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }
}

impl<S: Coeff> Neg for &Poly<S> {
    type Output = Poly<S>;
    fn neg(self) -> Poly<S> {
        Poly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn p(c: &[i64]) -> Poly<BigInt> {
        Poly::new(c.iter().map(|&v| BigInt::from(v)).collect())
    }

    #[test]
    fn trims_trailing_zeros() {
        assert_eq!(p(&[1, 2, 0, 0]).degree(), Some(1));
        assert!(p(&[0, 0]).is_zero());
    }

    #[test]
    fn monic_division_identity() {
        // x^5 + 3x - 2 by x^2 + 2x - 1
        let a = p(&[-2, 3, 0, 0, 0, 1]);
        let d = p(&[-1, 2, 1]);
        let (q, r) = a.div_rem_monic(&d);
        assert!(r.degree().is_none_or(|k| k < 2));
        assert_eq!(&(&q * &d) + &r, a);
    }

    #[test]
    fn field_division() {
        let half = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let a = Poly::new(vec![half(1, 1), half(0, 1), half(1, 1)]);
        let d = Poly::new(vec![half(1, 1), half(2, 1)]);
        let (q, r) = a.div_rem(&d);
        assert_eq!(&(&q * &d) + &r, a);
        assert_eq!(r.degree(), Some(0));
    }

    #[test]
    fn eval_and_pow() {
        let q = p(&[1, 1]);
        assert_eq!(q.pow(3), p(&[1, 3, 3, 1]));
        assert_eq!(q.pow(3).eval_same(&BigInt::from(2)), BigInt::from(27));
    }
}
