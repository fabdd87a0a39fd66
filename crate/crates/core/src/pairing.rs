//! The topological pairing `eta(u, v) = Res_w[u v]`.
//!
//! Two independent routes are provided: direct summation of `phi / w''` over
//! the critical points (floating), and the closed forms that follow from the
//! ring structure (exact for rational `c`). Basis vectors carry a `sqrt(t)`
//! normalization throughout, so the matrices are `t`-independent.

use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};
use num_traits::Zero;
use serde::Serialize;

use crate::crt;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{eval_w2, BasisTag, ChiralRing, ModelParams, RingElement, RootData};
use crate::scalar::{Real, Scalar};

/// How basis vectors were normalized when the matrix was formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleNote {
    /// Every basis vector carries a factor `sqrt(t)`, so `eta = t * Res`.
    SqrtT,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairingMatrix<S> {
    pub entries: DMatrix<S>,
    pub basis: BasisTag,
    pub scale_note: ScaleNote,
}

impl<S: Scalar> PairingMatrix<S> {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Largest entry of `eta - eta^T`.
    pub fn asymmetry(&self) -> f64 {
        linalg::max_abs_diff(&self.entries, &self.entries.transpose())
    }
}

/// Minimum root separation below which residue sums are refused.
pub const MIN_ROOT_SEPARATION: f64 = 1e-8;

/// `Res_w[phi] = sum over critical points of phi(x) / w''(x)`.
///
/// Terms are accumulated in order of ascending `|root|`, then argument.
pub fn grothendieck_residue(phi: &RingElement<Complex64>, params: &ModelParams) -> Result<Complex64> {
    if phi.basis != BasisTag::Monomial {
        return Err(Error::BasisMismatch {
            expected: BasisTag::Monomial,
            found: phi.basis,
        });
    }
    if phi.coeffs.len() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            found: phi.coeffs.len(),
        });
    }
    let roots = params.roots();
    let min_distance = roots.min_pairwise_distance();
    if min_distance < MIN_ROOT_SEPARATION {
        return Err(Error::IllConditioned { min_distance });
    }
    let ring = params.ring();
    let mut total = Complex64::zero();
    for r in roots.roots_by_modulus() {
        total += ring.evaluate(phi, &r)? / eval_w2(r, params);
    }
    Ok(total)
}

/// Closed form of `Res_w[x^k]`: zero unless `n | k+1`; otherwise, with
/// `m = (k+1)/n`, `(A^{m-1} + (-1)^m B^{m-1}) / (t (A + B))` where
/// `A = a^n`, `B = b^n`.
pub fn residue_closed_form<T: Real>(k: usize, params: &ModelParams) -> Complex<T> {
    let n = params.n;
    if !(k + 1).is_multiple_of(n) {
        return Complex::zero();
    }
    let m = (k + 1) / n;
    let roots = RootData::<T>::new(params);
    let (a, b) = (roots.a_pow_n, roots.b_pow_n);
    let sign = if m.is_multiple_of(2) { T::one() } else { -T::one() };
    let num = a.powi(m as i32 - 1) + sign * b.powi(m as i32 - 1);
    let t: Complex<T> = crate::model::complex_from(params.t);
    Complex::new(num / (a + b), T::zero()) / t
}

/// `t * Res_w[phi]` computed algebraically: after reduction, only the
/// coefficient of `x^{2n-1}` survives (the leading coefficient of `w'` is `t`).
pub fn normalized_residue<S: Scalar>(ring: &ChiralRing<S>, phi: &RingElement<S>) -> Result<S> {
    if phi.basis != BasisTag::Monomial {
        return Err(Error::BasisMismatch {
            expected: BasisTag::Monomial,
            found: phi.basis,
        });
    }
    Ok(phi.coeffs[ring.dim() - 1].clone())
}

/// `[[0, J], [J, -2c J]]`.
pub fn monomial_block_form<S: Scalar>(n: usize, c: &S) -> DMatrix<S> {
    let j = linalg::exchange::<S>(n);
    let zero = DMatrix::from_element(n, n, S::zero());
    let minus_two_c = -(S::one() + S::one()) * c.clone();
    linalg::block2(&zero, &j, &j, &linalg::scale(&j, &minus_two_c))
}

/// `[[0, J], [J, 0]]`.
pub fn shifted_block_form<S: Scalar>(n: usize) -> DMatrix<S> {
    let j = linalg::exchange::<S>(n);
    let zero = DMatrix::from_element(n, n, S::zero());
    linalg::block2(&zero, &j, &j, &zero)
}

/// Rows are the shifted basis vectors in monomial coordinates:
/// `x^i` for `i < n`, `x^i + c x^{i-n}` for `i >= n`.
pub fn shift_matrix<S: Scalar>(n: usize, c: &S) -> DMatrix<S> {
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i == j {
            S::one()
        } else if i >= n && j == i - n {
            c.clone()
        } else {
            S::zero()
        }
    })
}

/// Exact pairing matrix in the monomial or shifted basis.
pub fn eta_matrix_exact<S: Scalar>(ring: &ChiralRing<S>, basis: BasisTag) -> Result<PairingMatrix<S>> {
    let dim = ring.dim();
    // eta_ij depends only on i + j.
    let diag: Vec<S> = (0..2 * dim - 1)
        .map(|k| normalized_residue(ring, &ring.x_pow(k)))
        .collect::<Result<_>>()?;
    let monomial = PairingMatrix {
        entries: DMatrix::from_fn(dim, dim, |i, j| diag[i + j].clone()),
        basis: BasisTag::Monomial,
        scale_note: ScaleNote::SqrtT,
    };
    match basis {
        BasisTag::Monomial => Ok(monomial),
        BasisTag::Shifted => change_basis(&monomial, &shift_matrix(ring.n(), ring.c()), BasisTag::Shifted),
        other => Err(Error::UnsupportedBasis(other)),
    }
}

/// Pairing matrix from direct residue sums.
///
/// `Interleaved` is served by [`crate::coupling::InterleavedBasis::eta`],
/// which needs the eigen-splitting data.
pub fn eta_matrix(basis: BasisTag, params: &ModelParams) -> Result<PairingMatrix<Complex64>> {
    let dim = params.dim();
    let ring = params.ring();
    match basis {
        BasisTag::Monomial => {
            let diag: Vec<Complex64> = (0..2 * dim - 1)
                .map(|k| grothendieck_residue(&ring.x_pow(k), params).map(|r| r * params.t))
                .collect::<Result<_>>()?;
            Ok(PairingMatrix {
                entries: DMatrix::from_fn(dim, dim, |i, j| diag[i + j]),
                basis: BasisTag::Monomial,
                scale_note: ScaleNote::SqrtT,
            })
        }
        BasisTag::Shifted => {
            let mono = eta_matrix(BasisTag::Monomial, params)?;
            let shift = shift_matrix(params.n, &Complex64::new(params.c, 0.0));
            change_basis(&mono, &shift, BasisTag::Shifted)
        }
        BasisTag::Delta => {
            let deltas = crt::delta_basis(params)?;
            let mut entries = DMatrix::from_element(dim, dim, Complex64::zero());
            for i in 0..dim {
                for j in i..dim {
                    let prod = ring.mul(&deltas[i], &deltas[j])?;
                    let v = grothendieck_residue(&prod, params)? * params.t;
                    entries[(i, j)] = v;
                    entries[(j, i)] = v;
                }
            }
            Ok(PairingMatrix {
                entries,
                basis: BasisTag::Delta,
                scale_note: ScaleNote::SqrtT,
            })
        }
        BasisTag::Interleaved => Err(Error::UnsupportedBasis(basis)),
    }
}

/// The diagonal idempotent-basis pairing in closed form:
/// `1/(n(a^n+b^n)) diag(a^{-(n-1)} omega^j ; b^{-(n-1)} epsilon omega^j)`.
pub fn eta_delta_closed_form(params: &ModelParams) -> PairingMatrix<Complex64> {
    let n = params.n;
    let r = params.roots();
    let pre = 1.0 / (n as f64 * (r.a_pow_n + r.b_pow_n));
    let inner = r.a.powi(-(n as i32 - 1));
    let outer = r.b.powi(-(n as i32 - 1));
    let mut entries = DMatrix::from_element(2 * n, 2 * n, Complex64::zero());
    for j in 0..n {
        let w = r.omega.powu(j as u32);
        entries[(j, j)] = w * inner * pre;
        entries[(n + j, n + j)] = r.epsilon * w * outer * pre;
    }
    PairingMatrix {
        entries,
        basis: BasisTag::Delta,
        scale_note: ScaleNote::SqrtT,
    }
}

/// Congruence `M eta Mᵀ`, where the rows of `M` are the new basis vectors
/// written in the old basis.
pub fn change_basis<S: Scalar>(p: &PairingMatrix<S>, m: &DMatrix<S>, new_basis: BasisTag) -> Result<PairingMatrix<S>> {
    if m.nrows() != p.dim() || m.ncols() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: m.nrows(),
        });
    }
    let det = linalg::determinant(m)?;
    if det.is_negligible(1e-300) {
        return Err(Error::Singular("change-of-basis matrix".into()));
    }
    Ok(PairingMatrix {
        entries: linalg::congruence(m, &p.entries),
        basis: new_basis,
        scale_note: p.scale_note,
    })
}

/// Operator 2-norm of `eta^{-1} g (eta^{-1} g)^* - 1`, `*` being entrywise
/// complex conjugation.
pub fn reality_residual(g: &DMatrix<Complex64>, eta: &PairingMatrix<Complex64>) -> Result<f64> {
    if g.shape() != eta.entries.shape() {
        return Err(Error::DimensionMismatch {
            expected: eta.dim(),
            found: g.nrows(),
        });
    }
    let eta_inv = eta
        .entries
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("pairing matrix".into()))?;
    let m = eta_inv * g;
    let prod = &m * m.map(|z| z.conj());
    let dev = prod - DMatrix::<Complex64>::identity(g.nrows(), g.ncols());
    Ok(dev.svd(false, false).singular_values.max())
}

/// Builds `exp(i [[A, B], [B*, A*]])` with `A`, `B` commuting with the
/// exchange matrix, which satisfies the reality constraint for the shifted
/// pairing `[[0, J], [J, 0]]`.
pub fn reality_compatible_metric(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    let j = linalg::exchange::<Complex64>(n);
    let sym = |m: &DMatrix<Complex64>| (m + &j * m * &j) * Complex64::new(0.5, 0.0);
    let (a, b) = (sym(a), sym(b));
    let conj = |m: &DMatrix<Complex64>| m.map(|z| z.conj());
    let gen = linalg::block2(&a, &b, &conj(&b), &conj(&a));
    (gen * Complex64::i()).exp()
}
