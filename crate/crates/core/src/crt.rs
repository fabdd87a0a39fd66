//! Chinese-remainder idempotents, the Vandermonde change of basis, and the
//! cyclic automorphism `theta: x -> omega x`.
//!
//! Matrix convention (shared with the coupling operator): a matrix `M`
//! attached to a linear map `L` in a basis `e` has rows
//! `L(e_i) = sum_j M_ij e_j`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{BasisTag, ModelParams, RingElement};
use crate::pairing::MIN_ROOT_SEPARATION;
use crate::poly::Poly;

/// Lagrange idempotents `delta_0..delta_{n-1}, delta'_0..delta'_{n-1}` in
/// monomial coordinates; `delta_r` is 1 at its own critical point and 0 at
/// the others.
pub fn delta_basis(params: &ModelParams) -> Result<Vec<RingElement<Complex64>>> {
    let roots = params.roots();
    let min_distance = roots.min_pairwise_distance();
    if min_distance < MIN_ROOT_SEPARATION {
        return Err(Error::IllConditioned { min_distance });
    }
    let ring = params.ring();
    let modulus = ring.modulus().clone();
    roots
        .all_roots()
        .into_iter()
        .map(|r| {
            // modulus / (x - r), then normalise by its value at r.
            let (q, _) = modulus.div_rem_monic(&Poly::new(vec![-r, Complex64::one()]));
            let q = q.scale(&(Complex64::one() / q.eval_same(&r)));
            let mut coeffs = q.into_coeffs();
            coeffs.resize(params.dim(), Complex64::zero());
            ring.element(coeffs)
        })
        .collect()
}

/// Rows are the idempotents in monomial coordinates.
pub fn delta_coordinate_matrix(params: &ModelParams) -> Result<DMatrix<Complex64>> {
    let deltas = delta_basis(params)?;
    let dim = params.dim();
    Ok(DMatrix::from_fn(dim, dim, |i, j| deltas[i].coeffs[j]))
}

/// `V[k][r] = root_r^k`, so `(1, x, ..., x^{2n-1})ᵀ = V (delta)ᵀ`.
pub fn vandermonde(params: &ModelParams) -> DMatrix<Complex64> {
    let roots = params.roots().all_roots();
    let dim = params.dim();
    DMatrix::from_fn(dim, dim, |k, r| roots[r].powu(k as u32))
}

/// Matrix of `theta` in the monomial, shifted, or idempotent basis.
///
/// Monomial and shifted: `diag(1, omega, ..., omega^{n-1})` twice.
/// Idempotent: `theta(delta_j) = delta_{j-1}`, a pair of `n`-cycles.
pub fn theta_matrix(basis: BasisTag, n: usize) -> Result<DMatrix<Complex64>> {
    let dim = 2 * n;
    let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / n as f64);
    match basis {
        BasisTag::Monomial | BasisTag::Shifted => Ok(DMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                omega.powu((i % n) as u32)
            } else {
                Complex64::zero()
            }
        })),
        BasisTag::Delta => Ok(DMatrix::from_fn(dim, dim, |i, j| {
            let same_family = (i < n) == (j < n);
            if same_family && j % n == (i % n + n - 1) % n {
                Complex64::one()
            } else {
                Complex64::zero()
            }
        })),
        other => Err(Error::UnsupportedBasis(other)),
    }
}

/// `theta(u)` for a monomial-basis element: `x^k -> omega^k x^k`.
pub fn theta_apply(u: &RingElement<Complex64>, n: usize) -> Result<RingElement<Complex64>> {
    if u.basis != BasisTag::Monomial {
        return Err(Error::BasisMismatch {
            expected: BasisTag::Monomial,
            found: u.basis,
        });
    }
    let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / n as f64);
    Ok(RingElement {
        coeffs: u
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * omega.powu((k % n) as u32))
            .collect(),
        basis: BasisTag::Monomial,
    })
}

/// Entries allowed in a `theta`-invariant metric: `(i, j)` with `i = j mod n`.
pub fn invariant_pattern(n: usize) -> DMatrix<bool> {
    DMatrix::from_fn(2 * n, 2 * n, |i, j| i % n == j % n)
}

/// Averages `T^k M T^{-k}` over the cyclic group; the result commutes with
/// the monomial-basis `theta` matrix.
pub fn commutant_projection(m: &DMatrix<Complex64>, n: usize) -> DMatrix<Complex64> {
    let t = theta_matrix(BasisTag::Monomial, n).expect("monomial basis");
    let t_inv = t.map(|z| z.conj());
    let mut acc = DMatrix::zeros(m.nrows(), m.ncols());
    let mut tk = DMatrix::identity(m.nrows(), m.ncols());
    let mut tk_inv = tk.clone();
    for _ in 0..n {
        acc += &tk * m * &tk_inv;
        tk = &tk * &t;
        tk_inv = &t_inv * &tk_inv;
    }
    acc / Complex64::new(n as f64, 0.0)
}

/// Largest entry of `m` lying outside `pattern`.
pub fn off_pattern_magnitude(m: &DMatrix<Complex64>, pattern: &DMatrix<bool>) -> f64 {
    m.iter()
        .zip(pattern.iter())
        .filter(|(_, &allowed)| !allowed)
        .map(|(z, _)| z.norm())
        .fold(0.0, f64::max)
}
