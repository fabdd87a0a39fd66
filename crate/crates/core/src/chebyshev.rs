//! Chebyshev polynomials of the second kind, the "tilde" family obtained by
//! `z -> iz, t -> it`, and the division lemma expressing `x^{d+2}` modulo
//! `x^2 + 2tx - 1`.
//!
//! Everything here is integer-exact. The lemma is the reduction rule for the
//! one-variable ring `C[y]/(y^2 + 2cy - 1)` that `y = x^n` satisfies in the
//! chiral ring, which makes it an independent route to the closure data of
//! the coupling operator.

use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::poly::Poly;
use crate::scalar::Scalar;

/// Polynomial in `t` with integer coefficients.
pub type IntPoly = Poly<BigInt>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChebyshevKind {
    /// `U_{k+1} = 2t U_k - U_{k-1}`, `U_0 = 1`, `U_1 = 2t`.
    U,
    /// `Ũ_{k+1} = -2t Ũ_k + Ũ_{k-1}`, `Ũ_0 = 1`, `Ũ_1 = -2t`.
    UTilde,
}

/// Table of the first `len` polynomials of one family.
#[derive(Clone, Debug)]
pub struct ChebyshevSeq {
    pub kind: ChebyshevKind,
    pub coeff_table: Vec<IntPoly>,
}

impl ChebyshevSeq {
    pub fn new(kind: ChebyshevKind, len: usize) -> Self {
        let coeff_table = (0..len).map(|k| chebyshev(kind, k)).collect();
        Self { kind, coeff_table }
    }

    /// Evaluates `P_k(t)` for every stored `k`.
    pub fn eval<S: Scalar>(&self, t: &S) -> Vec<S> {
        self.coeff_table.iter().map(|p| eval_int_poly(p, t)).collect()
    }
}

fn cache(kind: ChebyshevKind) -> &'static Mutex<Vec<IntPoly>> {
    static U: OnceLock<Mutex<Vec<IntPoly>>> = OnceLock::new();
    static UT: OnceLock<Mutex<Vec<IntPoly>>> = OnceLock::new();
    let cell = match kind {
        ChebyshevKind::U => &U,
        ChebyshevKind::UTilde => &UT,
    };
    cell.get_or_init(|| Mutex::new(Vec::new()))
}

/// `U_k` or `Ũ_k` by the three-term recurrence, memoized.
pub fn chebyshev(kind: ChebyshevKind, k: usize) -> IntPoly {
    let sign: i64 = match kind {
        ChebyshevKind::U => 1,
        ChebyshevKind::UTilde => -1,
    };
    let mut table = cache(kind).lock().unwrap_or_else(|e| e.into_inner());
    if table.is_empty() {
        table.push(Poly::constant(BigInt::one()));
        table.push(Poly::monomial(1, BigInt::from(2 * sign)));
    }
    let two_t = Poly::monomial(1, BigInt::from(2 * sign));
    while table.len() <= k {
        let m = table.len();
        let next = &(&two_t * &table[m - 1]) - &table[m - 2].scale(&BigInt::from(sign));
        table.push(next);
    }
    table[k].clone()
}

pub fn u_poly(k: usize) -> IntPoly {
    chebyshev(ChebyshevKind::U, k)
}

pub fn u_tilde_poly(k: usize) -> IntPoly {
    chebyshev(ChebyshevKind::UTilde, k)
}

/// Evaluates an integer polynomial at a scalar of any backend.
pub fn eval_int_poly<S: Scalar>(p: &IntPoly, t: &S) -> S {
    p.coeffs()
        .iter()
        .rev()
        .fold(S::zero(), |acc, c| acc * t.clone() + S::from_bigint(c))
}

/// Expands `i^k U_k(i t)` as a Gaussian-integer polynomial in `t` and returns
/// it if every coefficient is real (it always should be).
pub fn rotate_u(k: usize) -> Option<IntPoly> {
    let i_pow = |e: usize| -> Complex<BigInt> {
        match e % 4 {
            0 => Complex::new(BigInt::one(), BigInt::zero()),
            1 => Complex::new(BigInt::zero(), BigInt::one()),
            2 => Complex::new(-BigInt::one(), BigInt::zero()),
            _ => Complex::new(BigInt::zero(), -BigInt::one()),
        }
    };
    let u = u_poly(k);
    let mut out = Vec::with_capacity(u.coeffs().len());
    for (m, c) in u.coeffs().iter().enumerate() {
        let z = i_pow(k + m) * Complex::new(c.clone(), BigInt::zero());
        if !z.im.is_zero() {
            return None;
        }
        out.push(z.re);
    }
    Some(Poly::new(out))
}

/// Polynomial in `x` whose coefficients are integer polynomials in `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct XtPoly(pub Vec<IntPoly>);

impl XtPoly {
    pub fn x_pow(k: usize) -> Self {
        let mut v = vec![Poly::zero(); k + 1];
        v[k] = Poly::constant(BigInt::one());
        Self(v)
    }

    /// `x^2 + 2t x - 1`.
    pub fn lemma_divisor() -> Self {
        Self(vec![
            Poly::constant(-BigInt::one()),
            Poly::monomial(1, BigInt::from(2)),
            Poly::constant(BigInt::one()),
        ])
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.0.is_empty() || rhs.0.is_empty() {
            return Self(Vec::new());
        }
        let mut out = vec![IntPoly::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Self(out).trimmed()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let len = self.0.len().max(rhs.0.len());
        let get = |v: &Self, k: usize| v.0.get(k).cloned().unwrap_or_else(Poly::zero);
        Self((0..len).map(|k| &get(self, k) + &get(rhs, k)).collect()).trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.0.last().is_some_and(|p| p.is_zero()) {
            self.0.pop();
        }
        self
    }
}

/// `x^{d+2} = (sum_{k<=d} Ũ_k(t) x^{d-k}) (x^2 + 2tx - 1) + Ũ_{d+1}(t) x + Ũ_d(t)`.
#[derive(Clone, Debug)]
pub struct DivisionLemma {
    pub d: usize,
    /// `quotient[k]` multiplies `x^{d-k}`.
    pub quotient: Vec<IntPoly>,
    /// Coefficient of `x` in the remainder, `Ũ_{d+1}`.
    pub remainder_x: IntPoly,
    /// Constant term of the remainder, `Ũ_d`.
    pub remainder_const: IntPoly,
}

pub fn division_lemma(d: usize) -> DivisionLemma {
    DivisionLemma {
        d,
        quotient: (0..=d).map(u_tilde_poly).collect(),
        remainder_x: u_tilde_poly(d + 1),
        remainder_const: u_tilde_poly(d),
    }
}

impl DivisionLemma {
    /// Quotient as a polynomial in `x`.
    pub fn quotient_poly(&self) -> XtPoly {
        let mut v = vec![IntPoly::zero(); self.d + 1];
        for (k, q) in self.quotient.iter().enumerate() {
            v[self.d - k] = q.clone();
        }
        XtPoly(v)
    }

    pub fn remainder_poly(&self) -> XtPoly {
        XtPoly(vec![self.remainder_const.clone(), self.remainder_x.clone()]).trimmed()
    }

    /// Expands the right-hand side and compares it with `x^{d+2}` exactly.
    pub fn holds(&self) -> bool {
        let rhs = self
            .quotient_poly()
            .mul(&XtPoly::lemma_divisor())
            .add(&self.remainder_poly());
        rhs == XtPoly::x_pow(self.d + 2)
    }

    /// Remainder coefficients `(Ũ_{d+1}(t), Ũ_d(t))` at a concrete `t`.
    pub fn remainder_at<S: Scalar>(&self, t: &S) -> (S, S) {
        (
            eval_int_poly(&self.remainder_x, t),
            eval_int_poly(&self.remainder_const, t),
        )
    }
}

/// Coordinates `(constant, y)` of `y^k` in `C[y]/(y^2 + 2ty - 1)` via the lemma.
pub fn reduce_power<S: Scalar>(k: usize, t: &S) -> (S, S) {
    match k {
        0 => (S::one(), S::zero()),
        1 => (S::zero(), S::one()),
        _ => {
            let (x, c) = division_lemma(k - 2).remainder_at(t);
            (c, x)
        }
    }
}
