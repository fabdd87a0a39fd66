//! Discretization of
//! `dbar(G_j d G_j^{-1}) - T G_{j+1} T^† G_j^{-1} + G_j T^† G_{j-1}^{-1} T = 0`
//! on a radial grid.
//!
//! For radial data `dbar(G d G^{-1}) = -FLOW_PREFACTOR (1/r)(r G' G^{-1})'`.
//! The derivative is taken in the form
//! `(1/(r h^2)) sum_± r_{i±1/2} (G_{i±1} G_i^{-1} - G_i G_{i±1}^{-1}) / 2`,
//! second order, covariant under `G -> N G N^†`, and odd under `G -> G^{-1}`
//! exactly, so the discrete system inherits the symmetries of the continuum one.
//!
//! Newton works with the hermitian form `H_j = (residual) G_j`, symmetrized
//! back to `(H_j G_j^{-1} + G_j^{-1} H_j)/2`, in log-coordinates around the
//! current iterate. In the scalar case this makes the flow term odd in the
//! unknowns, which keeps Newton steps accurate for rough starting data.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::block::{components, exp_hermitian, frobenius, hermitian_basis, hermitize, invert, sqrt_hpd, M2};
use super::grid::RadialGrid;
use super::state::TodaState;
use crate::error::{Error, Result};

/// `d dbar -> FLOW_PREFACTOR (d^2/dr^2 + (1/r) d/dr)` on radial functions.
pub const FLOW_PREFACTOR: f64 = 0.25;

/// Discrete operator with twist `T` and an optional hermitian source `S_j(r_i)`
/// subtracted from `H_j`.
#[derive(Clone, Debug)]
pub struct TodaOperator {
    pub grid: RadialGrid,
    pub twist: M2,
    pub source: Option<Vec<Vec<M2>>>,
}

/// `|residual|_F` per block and node; boundary nodes hold zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualField {
    pub values: Vec<Vec<f64>>,
}

impl ResidualField {
    pub fn max(&self) -> f64 {
        self.values.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// `sqrt(sum_j |R_j(r_i)|^2)`.
    pub fn combined(&self, i: usize) -> f64 {
        self.values.iter().map(|row| row[i] * row[i]).sum::<f64>().sqrt()
    }
}

/// One block row of the Newton system at an interior node.
#[derive(Clone, Debug)]
pub struct JacobianRow {
    pub lower: DMatrix<f64>,
    pub diag: DMatrix<f64>,
    pub upper: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

impl TodaOperator {
    pub fn new(grid: RadialGrid) -> Self {
        Self {
            grid,
            twist: M2::identity(),
            source: None,
        }
    }

    pub fn with_twist(mut self, twist: M2) -> Self {
        self.twist = twist;
        self
    }

    pub fn with_source(mut self, source: Vec<Vec<M2>>) -> Self {
        self.source = Some(source);
        self
    }

    fn stencil(&self, i: usize) -> (f64, f64, f64) {
        let h = self.grid.h();
        let r = self.grid.r(i);
        let k = -FLOW_PREFACTOR / (2.0 * r * h * h);
        (k, r - 0.5 * h, r + 0.5 * h)
    }

    fn check_shape(&self, g: &[Vec<M2>]) -> Result<()> {
        for row in g {
            if row.len() != self.grid.points {
                return Err(Error::DimensionMismatch {
                    expected: self.grid.points,
                    found: row.len(),
                });
            }
        }
        Ok(())
    }

    /// `H_j(r_i) - S_j(r_i)` at an interior node.
    pub fn hermitian_form(&self, g: &[Vec<M2>], j: usize, i: usize) -> Result<M2> {
        let n = g.len();
        let (k, wm, wp) = self.stencil(i);
        let t = &self.twist;
        let gc = &g[j][i];
        let gm = &g[j][i - 1];
        let gp = &g[j][i + 1];
        let flow = (gp - gc * invert(gp)? * gc) * Complex64::new(k * wp, 0.0)
            + (gm - gc * invert(gm)? * gc) * Complex64::new(k * wm, 0.0);
        let next = &g[(j + 1) % n][i];
        let prev_inv = invert(&g[(j + n - 1) % n][i])?;
        let coupling = -(t * next * t.adjoint()) + gc * t.adjoint() * prev_inv * t * gc;
        let mut h = flow + coupling;
        if let Some(s) = &self.source {
            h -= s[j][i];
        }
        Ok(h)
    }

    /// `(H_j - S_j) G_j^{-1}`; without a source this is the left side of the
    /// discretized equation.
    pub fn residual_at(&self, g: &[Vec<M2>], j: usize, i: usize) -> Result<M2> {
        Ok(self.hermitian_form(g, j, i)? * invert(&g[j][i])?)
    }

    pub fn residual_field(&self, state: &TodaState) -> Result<ResidualField> {
        let g = state.matrices();
        self.check_shape(&g)?;
        let n = g.len();
        let points = self.grid.points;
        let interior: Vec<Vec<f64>> = self
            .grid
            .interior()
            .into_par_iter()
            .map(|i| (0..n).map(|j| self.residual_at(&g, j, i).map(|r| frobenius(&r))).collect())
            .collect::<Result<_>>()?;
        let mut values = vec![vec![0.0; points]; n];
        for (k, col) in interior.iter().enumerate() {
            for j in 0..n {
                values[j][k + 1] = col[j];
            }
        }
        Ok(ResidualField { values })
    }

    /// `H_j - S_j` at every interior node, indexed `[j][i]` (boundary entries zero).
    pub fn hermitian_field(&self, g: &[Vec<M2>]) -> Result<Vec<Vec<M2>>> {
        self.check_shape(g)?;
        let n = g.len();
        let interior: Vec<Vec<M2>> = self
            .grid
            .interior()
            .into_par_iter()
            .map(|i| (0..n).map(|j| self.hermitian_form(g, j, i)).collect())
            .collect::<Result<_>>()?;
        let mut out = vec![vec![M2::zeros(); self.grid.points]; n];
        for (k, col) in interior.into_iter().enumerate() {
            for (j, h) in col.into_iter().enumerate() {
                out[j][k + 1] = h;
            }
        }
        Ok(out)
    }

    /// `(H_j G_j^{-1} + G_j^{-1} H_j) / 2`: hermitian, and zero exactly when
    /// `H_j` is (the Lyapunov operator of a positive matrix is invertible).
    pub fn newton_form(&self, g: &[Vec<M2>], j: usize, i: usize) -> Result<M2> {
        let h = self.hermitian_form(g, j, i)?;
        let gi = invert(&g[j][i])?;
        Ok(hermitize(&(h * gi)))
    }

    /// Derivatives of the components of [`Self::newton_form`] at `r_i` with
    /// respect to log-coordinates `X` of the blocks at `r_{i-1}, r_i, r_{i+1}`,
    /// where a block moves as `G -> G^{1/2} exp(X) G^{1/2}`.
    pub fn jacobian_row(&self, g: &[Vec<M2>], i: usize) -> Result<JacobianRow> {
        let n = g.len();
        let size = 4 * n;
        let (k, wm, wp) = self.stencil(i);
        let t = &self.twist;
        let td = t.adjoint();
        let basis = hermitian_basis();
        let roots: Vec<[M2; 3]> = (0..n)
            .map(|l| [sqrt_hpd(&g[l][i - 1]), sqrt_hpd(&g[l][i]), sqrt_hpd(&g[l][i + 1])])
            .collect();
        let mut lower = DMatrix::zeros(size, size);
        let mut diag = DMatrix::zeros(size, size);
        let mut upper = DMatrix::zeros(size, size);
        let mut rhs = DVector::zeros(size);
        let put = |m: &mut DMatrix<f64>, row: usize, col: usize, h: &M2| {
            for (b, v) in components(h).iter().enumerate() {
                m[(row + b, col)] += v;
            }
        };
        for j in 0..n {
            let row = 4 * j;
            let gc = &g[j][i];
            let gc_inv = invert(gc)?;
            let gp_inv = invert(&g[j][i + 1])?;
            let gm_inv = invert(&g[j][i - 1])?;
            let jm = (j + n - 1) % n;
            let jp = (j + 1) % n;
            let prev_inv = invert(&g[jm][i])?;
            let q = td * prev_inv * t;
            let kp = Complex64::new(k * wp, 0.0);
            let km = Complex64::new(k * wm, 0.0);
            let h = self.hermitian_form(g, j, i)?;
            // dH -> dF for F = herm(H G^{-1}) at fixed G.
            let lift = |dh: M2| hermitize(&(dh * gc_inv));
            let scaled = |l: usize, node: usize, e: &M2| roots[l][node] * e * roots[l][node];
            for (a, e0) in basis.iter().enumerate() {
                let e = scaled(j, 1, e0);
                let center = (-(e * gp_inv * gc) - gc * gp_inv * e) * kp
                    + (-(e * gm_inv * gc) - gc * gm_inv * e) * km
                    + e * q * gc
                    + gc * q * e;
                let through_inverse = -hermitize(&(h * gc_inv * e * gc_inv));
                put(&mut diag, row, 4 * j + a, &(lift(center) + through_inverse));
                let e = scaled(jp, 1, e0);
                put(&mut diag, row, 4 * jp + a, &lift(-(t * e * td)));
                let e = scaled(jm, 1, e0);
                put(&mut diag, row, 4 * jm + a, &lift(-(gc * td * prev_inv * e * prev_inv * t * gc)));
                if i + 2 < self.grid.points {
                    let e = scaled(j, 2, e0);
                    put(&mut upper, row, 4 * j + a, &lift((e + gc * gp_inv * e * gp_inv * gc) * kp));
                }
                if i >= 2 {
                    let e = scaled(j, 0, e0);
                    put(&mut lower, row, 4 * j + a, &lift((e + gc * gm_inv * e * gm_inv * gc) * km));
                }
            }
            for (b, v) in components(&hermitize(&(h * gc_inv))).iter().enumerate() {
                rhs[row + b] = *v;
            }
        }
        Ok(JacobianRow {
            lower,
            diag,
            upper,
            rhs,
        })
    }
}

/// Moves a block along log-coordinates: `G^{1/2} exp(x) G^{1/2}`.
pub fn log_step(g: &M2, x: &M2) -> M2 {
    let s = sqrt_hpd(g);
    hermitize(&(s * exp_hermitian(x) * s))
}

/// Residual field of the untwisted equation without source.
pub fn toda_residual(state: &TodaState) -> Result<ResidualField> {
    TodaOperator::new(state.grid).residual_field(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toda::block::{from_components, MetricBlock};

    fn sample_state(n: usize, points: usize) -> TodaState {
        let grid = RadialGrid::new(1.0, 2.0, points).unwrap();
        TodaState::from_fn(n, grid, |j, r| {
            let z = Complex64::new(0.2 * (r + j as f64).sin(), 0.1 * (2.0 * r - j as f64).cos());
            MetricBlock::hermitian(1.5 + 0.3 * (r * (j + 1) as f64).cos(), 0.8 + 0.2 * r, z)
        })
        .unwrap()
    }

    #[test]
    fn identity_blocks_have_zero_residual() {
        let grid = RadialGrid::new(0.5, 3.0, 17).unwrap();
        for n in 1..=4 {
            let s = TodaState::from_fn(n, grid, |_, _| MetricBlock::identity()).unwrap();
            assert_eq!(toda_residual(&s).unwrap().max(), 0.0);
        }
    }

    #[test]
    fn single_block_reduces_to_flow_term() {
        let s = sample_state(1, 11);
        let g = s.matrices();
        let op = TodaOperator::new(s.grid);
        let field = op.residual_field(&s).unwrap();
        for i in s.grid.interior() {
            let (k, wm, wp) = op.stencil(i);
            let gc = g[0][i];
            let flow = ((g[0][i + 1] - gc * g[0][i + 1].try_inverse().unwrap() * gc) * Complex64::new(k * wp, 0.0)
                + (g[0][i - 1] - gc * g[0][i - 1].try_inverse().unwrap() * gc) * Complex64::new(k * wm, 0.0))
                * gc.try_inverse().unwrap();
            assert!((frobenius(&flow) - field.values[0][i]).abs() < 1e-12);
        }
    }

    #[test]
    fn hermitian_form_is_hermitian() {
        let s = sample_state(3, 9);
        let op = TodaOperator::new(s.grid).with_twist(M2::new(
            Complex64::new(1.2, 0.3),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -0.7),
        ));
        let g = s.matrices();
        for j in 0..3 {
            for i in s.grid.interior() {
                let h = op.hermitian_form(&g, j, i).unwrap();
                assert!((h - h.adjoint()).norm() < 1e-10 * (1.0 + h.norm()));
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        for n in 1..=3 {
            let s = sample_state(n, 7);
            let twist = M2::new(
                Complex64::new(0.9, 0.2),
                Complex64::new(0.1, 0.0),
                Complex64::new(0.0, 0.3),
                Complex64::new(1.1, 0.0),
            );
            let mut op = TodaOperator::new(s.grid).with_twist(twist);
            let g = s.matrices();
            // A nonzero source so the through-inverse term is exercised.
            op.source = Some(vec![vec![from_components(&[0.3, -0.1, 0.2, 0.05]); 7]; n]);
            let i = 3;
            let row = op.jacobian_row(&g, i).unwrap();
            let eps = 1e-6;
            for (offset, block) in [(-1isize, &row.lower), (0, &row.diag), (1, &row.upper)] {
                let node = (i as isize + offset) as usize;
                for l in 0..n {
                    for a in 0..4 {
                        let mut dir = [0.0; 4];
                        dir[a] = eps;
                        let x = from_components(&dir);
                        let mut gp = g.clone();
                        gp[l][node] = log_step(&g[l][node], &x);
                        let mut gm = g.clone();
                        gm[l][node] = log_step(&g[l][node], &(-x));
                        for j in 0..n {
                            let hp = components(&op.newton_form(&gp, j, i).unwrap());
                            let hm = components(&op.newton_form(&gm, j, i).unwrap());
                            for b in 0..4 {
                                let fd = (hp[b] - hm[b]) / (2.0 * eps);
                                let an = block[(4 * j + b, 4 * l + a)];
                                assert!((fd - an).abs() < 1e-5 * (1.0 + an.abs()), "n={n} off={offset} l={l} a={a} j={j} b={b}: {fd} vs {an}");
                            }
                        }
                        assert!(row.rhs.iter().zip(components(&op.newton_form(&g, 0, i).unwrap())).all(|(x, y)| *x == y));
                    }
                }
            }
        }
    }

    #[test]
    fn gauge_invariance() {
        let s = sample_state(3, 13);
        let base = toda_residual(&s).unwrap();
        let u = M2::new(
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
            Complex64::new(0.0, 0.8),
            Complex64::new(0.6, 0.0),
        );
        assert!((u * u.adjoint() - M2::identity()).norm() < 1e-15);
        let rotated = toda_residual(&s.conjugated(&u)).unwrap();
        for (a, b) in base.values.iter().flatten().zip(rotated.values.iter().flatten()) {
            assert!((a - b).abs() < 1e-12 * (1.0 + a));
        }
    }

    #[test]
    fn index_periodicity() {
        let s = sample_state(4, 9);
        let base = toda_residual(&s).unwrap();
        let shifted = toda_residual(&s.shifted(1)).unwrap();
        for j in 0..4 {
            assert_eq!(shifted.values[j], base.values[(j + 1) % 4]);
        }
    }

    #[test]
    fn inversion_symmetry_is_exact() {
        // G_j -> conj(G_{n-1-j})^{-1} maps solutions of the untwisted system to solutions:
        // the hermitian forms transform into each other up to rounding.
        let s = sample_state(3, 9);
        let n = 3;
        let g = s.matrices();
        let mirrored: Vec<Vec<M2>> = (0..n)
            .map(|j| g[n - 1 - j].iter().map(|b| b.map(|z| z.conj()).try_inverse().unwrap()).collect())
            .collect();
        let op = TodaOperator::new(s.grid);
        for j in 0..n {
            for i in s.grid.interior() {
                let r = op.residual_at(&g, n - 1 - j, i).unwrap();
                let rm = op.residual_at(&mirrored, j, i).unwrap();
                // flow(X) = -X conj(flow(G)) X^{-1} with X = conj(G)^{-1}
                let x = mirrored[j][i];
                let expect = -(x * r.map(|z| z.conj()) * x.try_inverse().unwrap());
                assert!((rm - expect).norm() < 1e-9 * (1.0 + r.norm()), "j={j} i={i}");
            }
        }
    }
}
