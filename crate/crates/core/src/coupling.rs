//! The coupling operator `C`: multiplication by `x - c/(n+1) x^{n+1}` in the
//! chiral ring, its closure on `span{1, x^n}` after `n` steps, the eigen-split
//! of `C^n` there, and the interleaved basis in which `C` is block-cyclic.
//!
//! Matrices use the row convention `L(e_i) = sum_j M_ij e_j`.

use nalgebra::{DMatrix, Matrix2};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::chebyshev;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{BasisTag, ChiralRing, ModelParams, RingElement};
use crate::pairing::{self, PairingMatrix};
use crate::scalar::Scalar;

/// `x - c/(n+1) x^{n+1}`.
pub fn coupling_element<S: Scalar>(ring: &ChiralRing<S>) -> RingElement<S> {
    let n = ring.n();
    let k = ring.c().clone() / S::from_ratio(n as i64 + 1, 1);
    let x = ring.x_pow(1);
    let high = ring.scale(&ring.x_pow(n + 1), &-k);
    ring.add(&x, &high).expect("same basis")
}

/// Matrix of `v -> p v` in the monomial basis: row `i` holds `p x^i`.
pub fn mult_matrix<S: Scalar>(ring: &ChiralRing<S>, p: &RingElement<S>) -> Result<DMatrix<S>> {
    let dim = ring.dim();
    let rows: Vec<RingElement<S>> = (0..dim)
        .map(|i| ring.mul(p, &ring.x_pow(i)))
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(dim, dim, |i, j| rows[i].coeffs[j].clone()))
}

/// `M_x - c/(n+1) M_{x^{n+1}}` in the monomial basis.
pub fn c_matrix<S: Scalar>(ring: &ChiralRing<S>) -> DMatrix<S> {
    let n = ring.n();
    let mx = mult_matrix(ring, &ring.x_pow(1)).expect("monomial");
    let mxn = mult_matrix(ring, &ring.x_pow(n + 1)).expect("monomial");
    let k = ring.c().clone() / S::from_ratio(n as i64 + 1, 1);
    mx - linalg::scale(&mxn, &k)
}

/// Coordinates of `C^n(1) = A_n + B_n x^n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosureData<S> {
    pub a: S,
    pub b: S,
}

/// Reduces `(x - c/(n+1) x^{n+1})^n` in the ring and checks that it lies in
/// `span{1, x^n}`.
pub fn closure_direct<S: Scalar>(ring: &ChiralRing<S>) -> Result<ClosureData<S>> {
    let n = ring.n();
    let p = coupling_element(ring);
    let power = ring.pow(&p, n)?;
    let scale = power.coeffs.iter().map(Scalar::magnitude).fold(1.0, f64::max);
    for (k, v) in power.coeffs.iter().enumerate() {
        if k != 0 && k != n && !v.is_negligible(1e-12 * scale) {
            return Err(Error::Inconsistent(format!(
                "C^n(1) has coefficient {:e} on x^{k}, outside span{{1, x^n}}",
                v.magnitude()
            )));
        }
    }
    Ok(ClosureData {
        a: power.coeffs[0].clone(),
        b: power.coeffs[n].clone(),
    })
}

/// Same quantity through the Chebyshev division lemma in `y = x^n`:
/// `y (1 - k y)^n` reduced modulo `y^2 + 2cy - 1`, `k = c/(n+1)`.
pub fn closure_via_lemma<S: Scalar>(n: usize, c: &S) -> ClosureData<S> {
    let k = c.clone() / S::from_ratio(n as i64 + 1, 1);
    let mut a = S::zero();
    let mut b = S::zero();
    let mut binom = BigInt::one();
    let mut neg_k_pow = S::one();
    for m in 0..=n {
        let weight = S::from_bigint(&binom) * neg_k_pow.clone();
        let (y0, y1) = chebyshev::reduce_power(m + 1, c);
        a += weight.clone() * y0;
        b += weight * y1;
        binom = binom * BigInt::from(n - m) / BigInt::from(m + 1);
        neg_k_pow *= -k.clone();
    }
    ClosureData { a, b }
}

/// Closure data from direct reduction, cross-checked against the lemma route.
pub fn closure_data<S: Scalar>(ring: &ChiralRing<S>) -> Result<ClosureData<S>> {
    let direct = closure_direct(ring)?;
    let lemma = closure_via_lemma(ring.n(), ring.c());
    let scale = 1.0_f64.max(direct.a.magnitude()).max(direct.b.magnitude());
    let da = (direct.a.clone() - lemma.a).magnitude();
    let db = (direct.b.clone() - lemma.b).magnitude();
    let agree = if S::is_exact() {
        da == 0.0 && db == 0.0
    } else {
        da.max(db) <= 1e-10 * scale
    };
    if !agree {
        return Err(Error::Inconsistent(format!(
            "closure data disagrees between reduction and Chebyshev routes ({da:e}, {db:e})"
        )));
    }
    Ok(direct)
}

/// Eigenvalues `lambda`, `mu` of `C^n` on `span{1, x^n}` and their
/// eigen-elements `phi = 1 + ((lambda - A)/B) x^n`, `phi'` likewise.
#[derive(Clone, Debug)]
pub struct EigenSplit {
    pub closure: ClosureData<Complex64>,
    pub lambda: Complex64,
    pub mu: Complex64,
    pub phi: RingElement<Complex64>,
    pub phi_prime: RingElement<Complex64>,
}

/// Threshold on `|B_n|` below which the eigen-split is refused.
pub const DEGENERATE_B: f64 = 1e-12;

pub fn eigen_split(params: &ModelParams) -> Result<EigenSplit> {
    let ring = params.ring();
    let closure = closure_data(&ring)?;
    let (a, b) = (closure.a, closure.b);
    if b.norm() < DEGENERATE_B {
        return Err(Error::DegenerateSplitting(b.norm()));
    }
    let c = params.c;
    let s = (1.0 + c * c).sqrt();
    let lambda = a - (c - s) * b;
    let mu = a - (c + s) * b;
    let eigen_element = |value: Complex64| {
        let mut coeffs = vec![Complex64::zero(); params.dim()];
        coeffs[0] = Complex64::one();
        coeffs[params.n] = (value - a) / b;
        ring.element(coeffs).expect("dimension")
    };
    Ok(EigenSplit {
        phi: eigen_element(lambda),
        phi_prime: eigen_element(mu),
        closure,
        lambda,
        mu,
    })
}

/// Which `n`-th root of `lambda` and `mu` to use: the principal root times
/// `exp(2 pi i k / n)`. The default is the principal branch for both.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RootBranch {
    pub lambda: usize,
    pub mu: usize,
}

pub fn nth_root(z: Complex64, n: usize, branch: usize) -> Complex64 {
    let principal = z.powf(1.0 / n as f64);
    principal * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (branch % n) as f64 / n as f64)
}

/// Basis `phi_0, phi'_0, ..., phi_{n-1}, phi'_{n-1}` with
/// `phi_j = C^j(phi) / (lambda^{1/n})^j` and `phi'_j` likewise for `mu`.
#[derive(Clone, Debug)]
pub struct InterleavedBasis {
    pub n: usize,
    pub split: EigenSplit,
    pub branch: RootBranch,
    pub lambda_root: Complex64,
    pub mu_root: Complex64,
    /// Basis elements in interleaved order, monomial coordinates.
    pub vectors: Vec<RingElement<Complex64>>,
    /// Rows are `vectors`.
    pub change: DMatrix<Complex64>,
    /// `C` expressed in this basis.
    pub c_matrix: DMatrix<Complex64>,
}

pub fn interleaved_basis(params: &ModelParams, branch: RootBranch) -> Result<InterleavedBasis> {
    let n = params.n;
    let dim = params.dim();
    let split = eigen_split(params)?;
    if split.lambda.norm() == 0.0 || split.mu.norm() == 0.0 {
        return Err(Error::ZeroEigenvalue);
    }
    let lambda_root = nth_root(split.lambda, n, branch.lambda);
    let mu_root = nth_root(split.mu, n, branch.mu);
    let ring = params.ring();
    let p = coupling_element(&ring);
    let mut vectors = Vec::with_capacity(dim);
    let mut cur = split.phi.clone();
    let mut cur_prime = split.phi_prime.clone();
    for _ in 0..n {
        vectors.push(cur.clone());
        vectors.push(cur_prime.clone());
        cur = ring.scale(&ring.mul(&p, &cur)?, &(Complex64::one() / lambda_root));
        cur_prime = ring.scale(&ring.mul(&p, &cur_prime)?, &(Complex64::one() / mu_root));
    }
    let change = DMatrix::from_fn(dim, dim, |i, j| vectors[i].coeffs[j]);
    let change_inv = change
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("interleaved change of basis".into()))?;
    let c_mono = c_matrix(&ring);
    let c_matrix = &change * c_mono * change_inv;
    Ok(InterleavedBasis {
        n,
        split,
        branch,
        lambda_root,
        mu_root,
        vectors,
        change,
        c_matrix,
    })
}

impl InterleavedBasis {
    /// `diag(lambda^{1/n}, mu^{1/n})`.
    pub fn d_block(&self) -> Matrix2<Complex64> {
        Matrix2::new(self.lambda_root, Complex64::zero(), Complex64::zero(), self.mu_root)
    }

    /// The ideal block-cyclic matrix: `D` in block `(j, j+1 mod n)`.
    pub fn block_cyclic(&self) -> DMatrix<Complex64> {
        block_cyclic(self.n, &self.d_block())
    }

    /// Largest entry of `C` outside the block-cyclic pattern.
    pub fn off_pattern(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..2 * n {
            for j in 0..2 * n {
                let allowed = j / 2 == (i / 2 + 1) % n && i % 2 == j % 2;
                if !allowed {
                    worst = worst.max(self.c_matrix[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// Pairing in this basis.
    pub fn eta(&self, params: &ModelParams) -> Result<PairingMatrix<Complex64>> {
        let mono = PairingMatrix {
            entries: pairing::monomial_block_form(params.n, &Complex64::new(params.c, 0.0)),
            basis: BasisTag::Monomial,
            scale_note: pairing::ScaleNote::SqrtT,
        };
        pairing::change_basis(&mono, &self.change, BasisTag::Interleaved)
    }

    /// Rewrites a hermitian metric from this basis into the monomial basis:
    /// `g_mono = P^{-1} g P^{-†}`.
    pub fn metric_to_monomial(&self, g: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        let inv = self
            .change
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("interleaved change of basis".into()))?;
        Ok(&inv * g * inv.adjoint())
    }
}

/// `2n x 2n` matrix with the `2 x 2` block `d` at block positions `(j, j+1 mod n)`.
pub fn block_cyclic(n: usize, d: &Matrix2<Complex64>) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        let k = (j + 1) % n;
        for a in 0..2 {
            for b in 0..2 {
                m[(2 * j + a, 2 * k + b)] += d[(a, b)];
            }
        }
    }
    m
}

/// Eigen data attached to a [`CouplingOperator`].
#[derive(Clone, Debug, Serialize)]
pub struct EigenSummary {
    pub lambda: Complex64,
    pub mu: Complex64,
    pub lambda_root: Complex64,
    pub mu_root: Complex64,
    pub branch: RootBranch,
}

/// `C` in a tagged basis together with its closure and eigen data.
#[derive(Clone, Debug)]
pub struct CouplingOperator {
    pub matrix: DMatrix<Complex64>,
    pub basis: BasisTag,
    pub closure: ClosureData<Complex64>,
    pub eigen: Option<EigenSummary>,
    /// `-2nt/(2n+1)`: the factor relating `w` in the ring to the coupling
    /// element. Not multiplied into `matrix`.
    pub prefactor: Complex64,
}

impl CouplingOperator {
    /// `matrix` with the prefactor multiplied in.
    pub fn scaled_matrix(&self) -> DMatrix<Complex64> {
        &self.matrix * self.prefactor
    }
}

/// `C` in the monomial basis; eigen data is attached when the split exists.
pub fn c_operator(params: &ModelParams) -> Result<CouplingOperator> {
    c_operator_in(params, BasisTag::Monomial, RootBranch::default())
}

pub fn c_operator_in(params: &ModelParams, basis: BasisTag, branch: RootBranch) -> Result<CouplingOperator> {
    let ring = params.ring();
    let closure = closure_data(&ring)?;
    let interleaved = match basis {
        BasisTag::Monomial => interleaved_basis(params, branch).ok(),
        BasisTag::Interleaved => Some(interleaved_basis(params, branch)?),
        other => return Err(Error::UnsupportedBasis(other)),
    };
    let eigen = interleaved.as_ref().map(|ib| EigenSummary {
        lambda: ib.split.lambda,
        mu: ib.split.mu,
        lambda_root: ib.lambda_root,
        mu_root: ib.mu_root,
        branch,
    });
    let matrix = match (basis, interleaved) {
        (BasisTag::Interleaved, Some(ib)) => ib.c_matrix,
        _ => c_matrix(&ring),
    };
    Ok(CouplingOperator {
        matrix,
        basis,
        closure,
        eigen,
        prefactor: params.coupling_prefactor(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crt;
    use num_rational::BigRational;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    fn params(n: usize, c: f64) -> ModelParams {
        ModelParams::new(n, c, Complex64::one()).unwrap()
    }

    fn rmat(rows: usize, vals: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, rows, vals)
    }

    #[test]
    fn mult_matrix_small_cases() {
        let c = rat(3, 4);
        let ring = ChiralRing::new(1, c.clone()).unwrap();
        let mx = mult_matrix(&ring, &ring.x_pow(1)).unwrap();
        assert_eq!(mx, DMatrix::from_row_slice(2, 2, &[rat(0, 1), rat(1, 1), rat(1, 1), rat(-3, 2)]));
        assert_eq!(mult_matrix(&ring, &ring.one()).unwrap(), linalg::identity(2));

        // n = 2, c = 1/2: rows x^3, x^4, x^5, x^6 reduced by hand.
        let ring = ChiralRing::new(2, 0.5f64).unwrap();
        let m = mult_matrix(&ring, &ring.x_pow(3)).unwrap();
        let expect = rmat(4, &[0., 0., 0., 1., 1., 0., -1., 0., 0., 1., 0., -1., -1., 0., 2., 0.]);
        assert!(linalg::max_abs_diff(&m, &expect) < 1e-15);
    }

    #[test]
    fn c_matrix_matches_multiplication_by_coupling_element() {
        for n in 1..=5 {
            let ring = ChiralRing::new(n, rat(2, 7)).unwrap();
            let direct = mult_matrix(&ring, &coupling_element(&ring)).unwrap();
            assert_eq!(c_matrix(&ring), direct);
        }
    }

    #[test]
    fn c_matrix_undeformed_is_cyclic_shift() {
        for n in 1..=5 {
            let ring = ChiralRing::new(n, rat(0, 1)).unwrap();
            let dim = 2 * n;
            let shift = DMatrix::from_fn(dim, dim, |i, j| if j == (i + 1) % dim { rat(1, 1) } else { rat(0, 1) });
            assert_eq!(c_matrix(&ring), shift);
        }
    }

    #[test]
    fn c_matrix_n1_example() {
        let ring = ChiralRing::new(1, 0.75f64).unwrap();
        let expect = rmat(2, &[-0.375, 1.5625, 1.5625, -2.71875]);
        assert!(linalg::max_abs_diff(&c_matrix(&ring), &expect) < 1e-15);
    }

    #[test]
    fn c_has_theta_weight_one() {
        for n in 1..=5 {
            let p = params(n, 0.9);
            let op = c_operator(&p).unwrap();
            let t = crt::theta_matrix(BasisTag::Monomial, n).unwrap();
            let t_inv = t.map(|z| z.conj());
            let omega = p.roots().omega;
            let lhs = &t_inv * &op.matrix * &t;
            assert!(linalg::max_abs_diff(&lhs, &(&op.matrix * omega)) < 1e-12, "n={n}");
        }
    }

    #[test]
    fn closure_examples() {
        for c in [rat(0, 1), rat(3, 4), rat(-2, 5)] {
            let ring = ChiralRing::new(1, c.clone()).unwrap();
            let cl = closure_data(&ring).unwrap();
            assert_eq!(cl.a, -c.clone() / rat(2, 1));
            assert_eq!(cl.b, rat(1, 1) + c.clone() * c.clone());
        }
        for n in 1..=6 {
            let cl = closure_data(&ChiralRing::new(n, rat(0, 1)).unwrap()).unwrap();
            assert_eq!((cl.a, cl.b), (rat(0, 1), rat(1, 1)));
        }
    }

    #[test]
    fn closure_second_row() {
        for n in 1..=5 {
            let c = rat(5, 3);
            let ring = ChiralRing::new(n, c.clone()).unwrap();
            let cl = closure_data(&ring).unwrap();
            let p = coupling_element(&ring);
            let image = ring.mul(&ring.pow(&p, n).unwrap(), &ring.x_pow(n)).unwrap();
            let mut expect = vec![rat(0, 1); 2 * n];
            expect[0] = cl.b.clone();
            expect[n] = cl.a.clone() - rat(2, 1) * c.clone() * cl.b.clone();
            assert_eq!(image.coeffs, expect);
        }
    }

    #[test]
    fn closure_routes_agree_exactly() {
        for n in 1..=6 {
            for c in [rat(0, 1), rat(3, 10), rat(3, 2), rat(-7, 3)] {
                let ring = ChiralRing::new(n, c.clone()).unwrap();
                assert_eq!(closure_direct(&ring).unwrap(), closure_via_lemma(n, &c));
            }
        }
    }

    #[test]
    fn cayley_hamilton_on_closure() {
        for n in 1..=5 {
            for c in [0.3, 1.5] {
                let ring = params(n, c).ring();
                let cl = closure_data(&ring).unwrap();
                let cc = Complex64::new(c, 0.0);
                let tr = 2.0 * (cl.a - cc * cl.b);
                let det = cl.a * cl.a - 2.0 * cc * cl.a * cl.b - cl.b * cl.b;
                let pn = ring.pow(&coupling_element(&ring), n).unwrap();
                for v in [ring.one(), ring.x_pow(n)] {
                    let once = ring.mul(&pn, &v).unwrap();
                    let twice = ring.mul(&pn, &once).unwrap();
                    let res = twice.coeffs.iter().zip(&once.coeffs).zip(&v.coeffs).map(|((t2, t1), t0)| (t2 - tr * t1 + det * t0).norm()).fold(0.0, f64::max);
                    assert!(res < 1e-10, "n={n} c={c} res={res}");
                }
            }
        }
    }

    #[test]
    fn eigen_examples() {
        let s = eigen_split(&params(3, 0.0)).unwrap();
        assert!((s.lambda - 1.0).norm() < 1e-14 && (s.mu + 1.0).norm() < 1e-14);
        assert!((s.phi.coeffs[3] - 1.0).norm() < 1e-14);
        assert!((s.phi_prime.coeffs[3] + 1.0).norm() < 1e-14);

        let s = eigen_split(&params(1, 0.75)).unwrap();
        assert!((s.closure.a + 0.375).norm() < 1e-15 && (s.closure.b - 1.5625).norm() < 1e-15);
        assert!((s.lambda - 0.40625).norm() < 1e-14);
        assert!((s.mu + 3.5).norm() < 1e-14);
    }

    #[test]
    fn eigen_elements_and_vieta() {
        for n in 1..=5 {
            for c in [0.3, 1.5, -0.8] {
                let p = params(n, c);
                let ring = p.ring();
                let s = eigen_split(&p).unwrap();
                let cc = Complex64::new(c, 0.0);
                assert!((s.lambda + s.mu - 2.0 * (s.closure.a - cc * s.closure.b)).norm() < 1e-12);
                let det = s.closure.a * s.closure.a - 2.0 * cc * s.closure.a * s.closure.b - s.closure.b * s.closure.b;
                assert!((s.lambda * s.mu - det).norm() < 1e-12 * (1.0 + det.norm()));
                let pn = ring.pow(&coupling_element(&ring), n).unwrap();
                for (v, ev) in [(&s.phi, s.lambda), (&s.phi_prime, s.mu)] {
                    let img = ring.mul(&pn, v).unwrap();
                    let err = img.coeffs.iter().zip(&v.coeffs).map(|(a, b)| (a - ev * b).norm()).fold(0.0, f64::max);
                    assert!(err < 1e-10, "n={n} c={c}");
                }
                // Independent oracle: eigenvalues of C^n are p(r)^n at the critical points.
                let roots = p.roots();
                let k = c / (n as f64 + 1.0);
                let at = |r: Complex64| (r - k * r.powu(n as u32 + 1)).powu(n as u32);
                assert!((at(roots.a_roots[0]) - s.lambda).norm() < 1e-10 * (1.0 + s.lambda.norm()));
                assert!((at(roots.b_roots[0]) - s.mu).norm() < 1e-10 * (1.0 + s.mu.norm()));
            }
        }
    }

    #[test]
    fn interleaved_shift_relations() {
        for n in 1..=5 {
            for c in [0.3, 1.5] {
                let p = params(n, c);
                let ib = interleaved_basis(&p, RootBranch::default()).unwrap();
                let ring = p.ring();
                let cel = coupling_element(&ring);
                for j in 0..n {
                    for (fam, root) in [(0, ib.lambda_root), (1, ib.mu_root)] {
                        let img = ring.mul(&cel, &ib.vectors[2 * j + fam]).unwrap();
                        let target = &ib.vectors[2 * ((j + 1) % n) + fam];
                        let err = img.coeffs.iter().zip(&target.coeffs).map(|(a, b)| (a - root * b).norm()).fold(0.0, f64::max);
                        assert!(err < 1e-10, "n={n} c={c} j={j} fam={fam}");
                    }
                }
                assert!(ib.off_pattern() < 1e-12, "n={n} c={c} off={}", ib.off_pattern());
                assert!(linalg::max_abs_diff(&ib.c_matrix, &ib.block_cyclic()) < 1e-10);
                assert!(ib.change.clone().determinant().norm() > 1e-12);
            }
        }
    }

    #[test]
    fn branch_choice_is_consistent() {
        let p = params(3, 0.5);
        let br = RootBranch { lambda: 1, mu: 2 };
        let ib = interleaved_basis(&p, br).unwrap();
        assert!((ib.lambda_root.powu(3) - ib.split.lambda).norm() < 1e-12);
        assert!((ib.mu_root.powu(3) - ib.split.mu).norm() < 1e-12);
        assert!(ib.off_pattern() < 1e-12);
    }

    #[test]
    fn interleaved_pairing_is_antiblock_diagonal() {
        for n in 1..=5 {
            for c in [0.3, 1.5] {
                let p = params(n, c);
                let ib = interleaved_basis(&p, RootBranch::default()).unwrap();
                let eta = ib.eta(&p).unwrap();
                let scale = linalg::max_abs(&eta.entries);
                for i in 0..2 * n {
                    for j in 0..2 * n {
                        let allowed = i / 2 + j / 2 == n - 1 && i % 2 == j % 2;
                        if !allowed {
                            assert!(eta.entries[(i, j)].norm() < 1e-10 * scale, "n={n} c={c} ({i},{j})");
                        }
                    }
                }
                // The paired blocks do not depend on the block index.
                for j in 0..n {
                    let k = n - 1 - j;
                    for f in 0..2 {
                        let d = eta.entries[(2 * j + f, 2 * k + f)] - eta.entries[(f, 2 * (n - 1) + f)];
                        assert!(d.norm() < 1e-10 * scale);
                    }
                }
            }
        }
    }

    #[test]
    fn block_diagonal_metric_maps_into_invariant_pattern() {
        for n in 1..=5 {
            let p = params(n, 0.7);
            let ib = interleaved_basis(&p, RootBranch::default()).unwrap();
            let mut g = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
            for j in 0..n {
                let z = Complex64::new(0.2 * j as f64, 0.1);
                g[(2 * j, 2 * j)] = Complex64::new(1.5 + j as f64, 0.0);
                g[(2 * j + 1, 2 * j + 1)] = Complex64::new(0.7, 0.0);
                g[(2 * j, 2 * j + 1)] = z;
                g[(2 * j + 1, 2 * j)] = z.conj();
            }
            let mono = ib.metric_to_monomial(&g).unwrap();
            let off = crt::off_pattern_magnitude(&mono, &crt::invariant_pattern(n));
            assert!(off < 1e-10 * linalg::max_abs(&mono), "n={n} off={off}");
        }
    }

    #[test]
    fn prefactor_metadata() {
        let p = ModelParams::new(2, 0.4, Complex64::new(3.0, 0.0)).unwrap();
        let op = c_operator(&p).unwrap();
        assert!((op.prefactor - Complex64::new(-2.4, 0.0)).norm() < 1e-15);
        assert!(op.eigen.is_some());
        let scaled = op.scaled_matrix();
        assert!((scaled[(0, 1)] - op.prefactor * op.matrix[(0, 1)]).norm() < 1e-15);
        assert!(c_operator_in(&p, BasisTag::Delta, RootBranch::default()).is_err());
    }
}
