//! The deformed superpotential, its two-ring critical points, and arithmetic
//! in the chiral ring `C[x]/(x^{2n} + 2c x^n - 1)`.

use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::{Real, Scalar};

/// Named bases of the chiral ring. Coordinates carried with one tag never mix
/// with coordinates carried with another.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisTag {
    /// `1, x, ..., x^{2n-1}`.
    Monomial,
    /// `1, ..., x^{n-1}, x^n + c, ..., x^{2n-1} + c x^{n-1}`.
    Shifted,
    /// Chinese-remainder idempotents, inner ring first.
    Delta,
    /// `phi_0, phi'_0, phi_1, phi'_1, ...` built from the eigen-elements of `C^n`.
    Interleaved,
}

impl std::str::FromStr for BasisTag {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "monomial" => Ok(Self::Monomial),
            "shifted" => Ok(Self::Shifted),
            "delta" => Ok(Self::Delta),
            "interleaved" => Ok(Self::Interleaved),
            other => Err(format!("unknown basis `{other}`")),
        }
    }
}

/// Model parameters `(n, c, t)` in the floating backend.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub c: f64,
    pub t: Complex64,
}

impl ModelParams {
    pub fn new(n: usize, c: f64, t: Complex64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        if !c.is_finite() {
            return Err(Error::InvalidParams(format!("c must be finite, got {c}")));
        }
        if t.is_zero() || !t.re.is_finite() || !t.im.is_finite() {
            return Err(Error::InvalidParams(format!("t must be finite and nonzero, got {t}")));
        }
        Ok(Self { n, c, t })
    }

    /// Accepts a complex deformation only when it is real.
    pub fn with_complex_c(n: usize, c: Complex64, t: Complex64) -> Result<Self> {
        if c.im != 0.0 {
            return Err(Error::ComplexDeformation(c.im));
        }
        Self::new(n, c.re, t)
    }

    /// Dimension of the chiral ring, `2n`.
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn ring(&self) -> ChiralRing<Complex64> {
        ChiralRing::new(self.n, Complex64::new(self.c, 0.0)).expect("validated params")
    }

    pub fn roots(&self) -> RootData<f64> {
        RootData::new(self)
    }

    /// Scalar `-2nt/(2n+1)` relating `w` in the ring to the coupling element
    /// `x - c/(n+1) x^{n+1}`.
    pub fn coupling_prefactor(&self) -> Complex64 {
        let n = self.n as f64;
        self.t * (-2.0 * n / (2.0 * n + 1.0))
    }
}

/// Coefficients of `x^{2n} + 2c x^n - 1`, lowest degree first.
pub fn modulus<S: Scalar>(n: usize, c: &S) -> Poly<S> {
    let mut coeffs = vec![S::zero(); 2 * n + 1];
    coeffs[0] = -S::one();
    coeffs[n] = coeffs[n].clone() + (S::one() + S::one()) * c.clone();
    coeffs[2 * n] = coeffs[2 * n].clone() + S::one();
    Poly::new(coeffs)
}

/// Critical-point data of `w`: two concentric rings of `n` points each.
#[derive(Clone, Debug)]
pub struct RootData<T> {
    pub n: usize,
    /// Inner radius; `a^n = sqrt(1+c^2) - c`.
    pub a: T,
    /// Outer radius; `b^n = sqrt(1+c^2) + c`.
    pub b: T,
    /// `a^n`.
    pub a_pow_n: T,
    /// `b^n`.
    pub b_pow_n: T,
    /// `exp(2 pi i / n)`.
    pub omega: Complex<T>,
    /// `exp(i pi / n)`.
    pub epsilon: Complex<T>,
    /// `n a^n (a^n + b^n)`.
    pub alpha: T,
    /// `n b^n (a^n + b^n)`.
    pub beta: T,
    /// `a omega^j`.
    pub a_roots: Vec<Complex<T>>,
    /// `b omega^j epsilon`.
    pub b_roots: Vec<Complex<T>>,
}

impl<T: Real> RootData<T> {
    pub fn new(params: &ModelParams) -> Self {
        let n = params.n;
        let nf = T::from_usize(n).expect("n fits");
        let c = T::from_f64_lossy(params.c);
        let one = T::one();
        let s = (one + c * c).sqrt();
        // Avoid cancellation in whichever of s - c, s + c is small.
        let (a_pow_n, b_pow_n) = if c >= T::zero() {
            (one / (s + c), s + c)
        } else {
            (s - c, one / (s - c))
        };
        let a = a_pow_n.powf(one / nf);
        let b = b_pow_n.powf(one / nf);
        let two_pi = T::PI() + T::PI();
        let omega = Complex::from_polar(one, two_pi / nf);
        let epsilon = Complex::from_polar(one, T::PI() / nf);
        let unit = |j: usize| Complex::from_polar(one, two_pi * T::from_usize(j).unwrap() / nf);
        let a_roots = (0..n).map(|j| unit(j) * a).collect();
        let b_roots = (0..n).map(|j| unit(j) * epsilon * b).collect();
        Self {
            n,
            a,
            b,
            a_pow_n,
            b_pow_n,
            omega,
            epsilon,
            alpha: nf * a_pow_n * (a_pow_n + b_pow_n),
            beta: nf * b_pow_n * (a_pow_n + b_pow_n),
            a_roots,
            b_roots,
        }
    }

    /// Roots in idempotent order: `a_0..a_{n-1}, b_0..b_{n-1}`.
    pub fn all_roots(&self) -> Vec<Complex<T>> {
        self.a_roots.iter().chain(&self.b_roots).copied().collect()
    }

    /// Roots ordered by ascending modulus, then by argument in `[0, 2 pi)`.
    pub fn roots_by_modulus(&self) -> Vec<Complex<T>> {
        let two_pi = T::PI() + T::PI();
        let key = |z: &Complex<T>| {
            let arg = z.arg();
            (z.norm(), if arg < T::zero() { arg + two_pi } else { arg })
        };
        let mut roots = self.all_roots();
        roots.sort_by(|x, y| {
            let (rx, ax) = key(x);
            let (ry, ay) = key(y);
            rx.partial_cmp(&ry)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(ax.partial_cmp(&ay).unwrap_or(std::cmp::Ordering::Equal))
        });
        roots
    }

    pub fn min_pairwise_distance(&self) -> T {
        let roots = self.all_roots();
        let mut best = T::infinity();
        for (i, x) in roots.iter().enumerate() {
            for y in &roots[i + 1..] {
                best = best.min((*x - *y).norm());
            }
        }
        best
    }
}

/// `w(x) = t (x^{2n+1}/(2n+1) + 2c x^{n+1}/(n+1) - x)`.
pub fn eval_w<T: Real>(x: Complex<T>, params: &ModelParams) -> Complex<T> {
    let n = params.n as i32;
    let c = T::from_f64_lossy(params.c);
    let t: Complex<T> = complex_from(params.t);
    let two = T::one() + T::one();
    let top = x.powi(2 * n + 1) / T::from_i32(2 * n + 1).unwrap();
    let mid = x.powi(n + 1) * (two * c / T::from_i32(n + 1).unwrap());
    t * (top + mid - x)
}

/// `w'(x) = t (x^{2n} + 2c x^n - 1)`.
pub fn eval_w1<T: Real>(x: Complex<T>, params: &ModelParams) -> Complex<T> {
    let n = params.n as i32;
    let c = T::from_f64_lossy(params.c);
    let t: Complex<T> = complex_from(params.t);
    let two = T::one() + T::one();
    t * (x.powi(2 * n) + x.powi(n) * (two * c) - Complex::<T>::one())
}

/// `w''(x) = t (2n x^{2n-1} + 2cn x^{n-1})`.
pub fn eval_w2<T: Real>(x: Complex<T>, params: &ModelParams) -> Complex<T> {
    let n = params.n as i32;
    let nf = T::from_i32(n).unwrap();
    let c = T::from_f64_lossy(params.c);
    let t: Complex<T> = complex_from(params.t);
    let two = T::one() + T::one();
    t * (x.powi(2 * n - 1) * (two * nf) + x.powi(n - 1) * (two * c * nf))
}

pub(crate) fn complex_from<T: Real>(z: Complex64) -> Complex<T> {
    Complex::new(T::from_f64_lossy(z.re), T::from_f64_lossy(z.im))
}

/// Class in the chiral ring, stored as coordinates in a tagged basis.
#[derive(Clone, Debug, PartialEq)]
pub struct RingElement<S> {
    pub coeffs: Vec<S>,
    pub basis: BasisTag,
}

impl<S: Scalar> RingElement<S> {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn coeff(&self, k: usize) -> &S {
        &self.coeffs[k]
    }

    fn require_monomial(&self) -> Result<()> {
        if self.basis != BasisTag::Monomial {
            return Err(Error::BasisMismatch {
                expected: BasisTag::Monomial,
                found: self.basis,
            });
        }
        Ok(())
    }
}

/// `C[x]/(x^{2n} + 2c x^n - 1)` over the scalar `S`.
#[derive(Clone, Debug)]
pub struct ChiralRing<S> {
    n: usize,
    c: S,
    modulus: Poly<S>,
}

impl<S: Scalar> ChiralRing<S> {
    pub fn new(n: usize, c: S) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        let modulus = modulus(n, &c);
        Ok(Self { n, c, modulus })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> &S {
        &self.c
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn modulus(&self) -> &Poly<S> {
        &self.modulus
    }

    /// Reduces an arbitrary polynomial to its class (monomial coordinates).
    pub fn reduce(&self, p: &Poly<S>) -> RingElement<S> {
        let (_, r) = p.div_rem_monic(&self.modulus);
        let mut coeffs = r.into_coeffs();
        coeffs.resize(self.dim(), S::zero());
        RingElement {
            coeffs,
            basis: BasisTag::Monomial,
        }
    }

    /// Builds a monomial-basis element from `2n` coordinates.
    pub fn element(&self, coeffs: Vec<S>) -> Result<RingElement<S>> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: coeffs.len(),
            });
        }
        Ok(RingElement {
            coeffs,
            basis: BasisTag::Monomial,
        })
    }

    pub fn zero(&self) -> RingElement<S> {
        self.reduce(&Poly::zero())
    }

    pub fn one(&self) -> RingElement<S> {
        self.x_pow(0)
    }

    /// Class of `x^k` for any `k`.
    pub fn x_pow(&self, k: usize) -> RingElement<S> {
        if k < self.dim() {
            let mut coeffs = vec![S::zero(); self.dim()];
            coeffs[k] = S::one();
            return RingElement {
                coeffs,
                basis: BasisTag::Monomial,
            };
        }
        // Square-and-multiply keeps degrees bounded by 4n.
        let mut result = self.one();
        let mut base = self.x_pow(1);
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul_unchecked(&result, &base);
            }
            base = self.mul_unchecked(&base, &base);
            e >>= 1;
        }
        result
    }

    pub fn to_poly(&self, u: &RingElement<S>) -> Result<Poly<S>> {
        u.require_monomial()?;
        Ok(Poly::new(u.coeffs.clone()))
    }

    pub fn mul(&self, u: &RingElement<S>, v: &RingElement<S>) -> Result<RingElement<S>> {
        u.require_monomial()?;
        v.require_monomial()?;
        self.check_dim(u)?;
        self.check_dim(v)?;
        Ok(self.mul_unchecked(u, v))
    }

    pub fn add(&self, u: &RingElement<S>, v: &RingElement<S>) -> Result<RingElement<S>> {
        if u.basis != v.basis {
            return Err(Error::BasisMismatch {
                expected: u.basis,
                found: v.basis,
            });
        }
        self.check_dim(u)?;
        self.check_dim(v)?;
        Ok(RingElement {
            coeffs: u
                .coeffs
                .iter()
                .zip(&v.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
            basis: u.basis,
        })
    }

    pub fn scale(&self, u: &RingElement<S>, k: &S) -> RingElement<S> {
        RingElement {
            coeffs: u.coeffs.iter().map(|a| a.clone() * k.clone()).collect(),
            basis: u.basis,
        }
    }

    pub fn pow(&self, u: &RingElement<S>, exp: usize) -> Result<RingElement<S>> {
        u.require_monomial()?;
        let mut result = self.one();
        for _ in 0..exp {
            result = self.mul_unchecked(&result, u);
        }
        Ok(result)
    }

    /// Evaluates the class at a point (meaningful at roots of the modulus).
    pub fn evaluate(&self, u: &RingElement<S>, x: &S) -> Result<S> {
        Ok(self.to_poly(u)?.eval_same(x))
    }

    fn check_dim(&self, u: &RingElement<S>) -> Result<()> {
        if u.coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.coeffs.len(),
            });
        }
        Ok(())
    }

    fn mul_unchecked(&self, u: &RingElement<S>, v: &RingElement<S>) -> RingElement<S> {
        let p = &Poly::new(u.coeffs.clone()) * &Poly::new(v.coeffs.clone());
        self.reduce(&p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    fn ints(p: &Poly<BigRational>) -> Vec<BigRational> {
        p.coeffs().to_vec()
    }

    #[test]
    fn modulus_examples() {
        assert_eq!(ints(&modulus(1, &rat(0, 1))), vec![rat(-1, 1), rat(0, 1), rat(1, 1)]);
        assert_eq!(
            ints(&modulus(2, &rat(1, 1))),
            vec![rat(-1, 1), rat(0, 1), rat(2, 1), rat(0, 1), rat(1, 1)]
        );
        let m = modulus(3, &rat(1, 2));
        assert_eq!(m.coeff(0), rat(-1, 1));
        assert_eq!(m.coeff(3), rat(1, 1));
        assert_eq!(m.coeff(6), rat(1, 1));
        assert_eq!(m.degree(), Some(6));
    }

    #[test]
    fn modulus_n1_is_shared_by_scalar_backends() {
        let m = modulus(1, &0.0f64);
        assert_eq!(m.coeffs(), &[-1.0, 0.0, 1.0]);
    }

    #[test]
    fn root_examples() {
        let p = ModelParams::new(1, 0.0, Complex64::one()).unwrap();
        let r = p.roots();
        assert!((r.a - 1.0).abs() < 1e-15 && (r.b - 1.0).abs() < 1e-15);
        assert!((r.a_roots[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((r.b_roots[0] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);

        let p = ModelParams::new(1, 0.75, Complex64::one()).unwrap();
        let r = p.roots();
        assert!((r.a - 0.5).abs() < 1e-15);
        assert!((r.b - 2.0).abs() < 1e-15);
        // Quadratic formula on x^2 + 1.5x - 1.
        let disc: f64 = 1.5f64 * 1.5 + 4.0;
        let roots = [(-1.5 + disc.sqrt()) / 2.0, (-1.5 - disc.sqrt()) / 2.0];
        assert!((r.a_roots[0].re - roots[0]).abs() < 1e-14);
        assert!((r.b_roots[0].re - roots[1]).abs() < 1e-14);

        let p = ModelParams::new(2, 0.75, Complex64::one()).unwrap();
        let r = p.roots();
        assert!((r.a - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((r.b - 2.0f64.sqrt()).abs() < 1e-15);
        for z in &r.b_roots {
            // Arguments are odd multiples of pi/2.
            let q = z.arg() / std::f64::consts::FRAC_PI_2;
            assert!((q.round() - q).abs() < 1e-12 && (q.round() as i64).rem_euclid(2) == 1);
        }
    }

    #[test]
    fn radii_relations_hold_for_negative_c() {
        for c in [-3.0, -0.4, 0.0, 0.4, 3.0, 1e4] {
            let r = ModelParams::new(3, c, Complex64::one()).unwrap().roots();
            assert!((r.a_pow_n * r.b_pow_n - 1.0).abs() < 1e-12);
            assert!((r.b_pow_n - r.a_pow_n - 2.0 * c).abs() < 1e-12 * (1.0 + c.abs()));
        }
    }

    #[test]
    fn critical_points_are_roots_of_w1() {
        for n in 1..=6 {
            for c in [0.0, 0.3, 1.5] {
                let p = ModelParams::new(n, c, Complex64::new(2.0, 1.0)).unwrap();
                let r = p.roots();
                for z in r.all_roots() {
                    let scale = p.t.norm() * (z.norm().powi(2 * n as i32) + 1.0);
                    assert!(eval_w1(z, &p).norm() / scale < 1e-12, "n={n} c={c} z={z}");
                }
                assert!(r.min_pairwise_distance() > 1e-10);
            }
        }
    }

    #[test]
    fn second_derivative_matches_alpha_beta() {
        let p = ModelParams::new(1, 0.0, Complex64::one()).unwrap();
        assert!((eval_w2(Complex64::one(), &p) - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        for n in 1..=5 {
            let p = ModelParams::new(n, 0.3, Complex64::new(0.5, -1.0)).unwrap();
            let r = p.roots();
            let first = eval_w2(r.a_roots[0], &p) * r.a_roots[0];
            for (a, b) in r.a_roots.iter().zip(&r.b_roots) {
                let wa = eval_w2(*a, &p) * a;
                let wb = eval_w2(*b, &p) * b;
                assert!((wa - p.t * r.alpha).norm() < 1e-12 * r.alpha);
                assert!((wb - p.t * r.beta).norm() < 1e-12 * r.beta);
                assert!((wa - first).norm() < 1e-12 * first.norm());
            }
        }
    }

    #[test]
    fn w_derivative_is_w1() {
        let p = ModelParams::new(3, 0.7, Complex64::new(1.0, 0.5)).unwrap();
        let x = Complex64::new(0.4, 0.3);
        let h = 1e-6;
        let fd = (eval_w(x + h, &p) - eval_w(x - h, &p)) / (2.0 * h);
        assert!((fd - eval_w1(x, &p)).norm() < 1e-8);
        let fd2 = (eval_w1(x + h, &p) - eval_w1(x - h, &p)) / (2.0 * h);
        assert!((fd2 - eval_w2(x, &p)).norm() < 1e-8);
    }

    #[test]
    fn ring_mul_examples() {
        for c in [rat(0, 1), rat(3, 4), rat(-5, 2)] {
            let ring = ChiralRing::new(1, c.clone()).unwrap();
            let x = ring.x_pow(1);
            let xx = ring.mul(&x, &x).unwrap();
            assert_eq!(xx.coeffs, vec![rat(1, 1), -(rat(2, 1) * c.clone())]);
            assert_eq!(ring.mul(&ring.one(), &x).unwrap(), x);
        }
        let ring = ChiralRing::new(2, rat(0, 1)).unwrap();
        let x2 = ring.x_pow(2);
        assert_eq!(ring.mul(&x2, &x2).unwrap(), ring.one());
    }

    #[test]
    fn modulus_reduces_to_zero_exactly() {
        for n in 1..=6 {
            let ring = ChiralRing::new(n, rat(7, 3)).unwrap();
            assert!(ring.reduce(ring.modulus()).is_zero());
        }
    }

    #[test]
    fn mixed_bases_are_rejected() {
        let ring = ChiralRing::new(2, rat(1, 2)).unwrap();
        let mut u = ring.x_pow(1);
        u.basis = BasisTag::Delta;
        assert!(matches!(ring.mul(&u, &ring.one()), Err(Error::BasisMismatch { .. })));
        assert!(matches!(ring.add(&u, &ring.one()), Err(Error::BasisMismatch { .. })));
    }

    #[test]
    fn x_pow_matches_repeated_multiplication() {
        let ring = ChiralRing::new(3, rat(2, 5)).unwrap();
        let x = ring.x_pow(1);
        let mut acc = ring.one();
        for k in 0..20 {
            assert_eq!(ring.x_pow(k), acc, "k={k}");
            acc = ring.mul(&acc, &x).unwrap();
        }
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0, 0.0, Complex64::one()).is_err());
        assert!(ModelParams::new(1, 0.0, Complex64::zero()).is_err());
        assert!(matches!(
            ModelParams::with_complex_c(1, Complex64::new(0.0, 1.0), Complex64::one()),
            Err(Error::ComplexDeformation(_))
        ));
        assert!(ModelParams::with_complex_c(1, Complex64::new(0.5, 0.0), Complex64::one()).is_ok());
    }
}
