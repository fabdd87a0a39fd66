//! The unreduced equation `dbar(g d g^{-1}) - [C, g C^† g^{-1}] = 0` for the
//! full `2n x 2n` metric, and the reality constraint along a solution.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use super::block::{invert, MetricBlock, M2};
use super::grid::RadialGrid;
use super::operator::{TodaOperator, FLOW_PREFACTOR};
use super::state::TodaState;
use crate::coupling::{CouplingOperator, InterleavedBasis};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::pairing::{self, PairingMatrix};

/// Block-diagonal `diag(G_0, ..., G_{n-1})` at node `i`.
pub fn assemble_metric(state: &TodaState, i: usize) -> DMatrix<Complex64> {
    let n = state.n();
    let mut g = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        g.view_mut((2 * j, 2 * j), (2, 2)).copy_from(&state.blocks[j][i].g);
    }
    g
}

fn full_inverse(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    m.clone().try_inverse().ok_or_else(|| Error::Singular("assembled metric".into()))
}

/// Frobenius norm of the discretized left side at each interior node of `grid`;
/// boundary entries are zero. `g` holds one full metric per node.
pub fn zero_curvature_field(g: &[DMatrix<Complex64>], grid: &RadialGrid, c: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    if g.len() != grid.points {
        return Err(Error::DimensionMismatch {
            expected: grid.points,
            found: g.len(),
        });
    }
    let h = grid.h();
    let cd = c.adjoint();
    let mut out = vec![0.0; grid.points];
    for i in grid.interior() {
        let r = grid.r(i);
        let k = Complex64::new(-FLOW_PREFACTOR / (2.0 * r * h * h), 0.0);
        let gi = full_inverse(&g[i])?;
        let mut flow = DMatrix::zeros(g[i].nrows(), g[i].ncols());
        for (nb, w) in [(i + 1, r + 0.5 * h), (i - 1, r - 0.5 * h)] {
            let nb_inv = full_inverse(&g[nb])?;
            flow += (&g[nb] * &gi - &g[i] * nb_inv) * (k * w);
        }
        let x = &g[i] * &cd * &gi;
        let residual = flow - (c * &x - &x * c);
        out[i] = residual.norm();
    }
    Ok(out)
}

/// Largest node value of [`zero_curvature_field`].
pub fn zero_curvature_residual(g: &[DMatrix<Complex64>], grid: &RadialGrid, c: &CouplingOperator) -> Result<f64> {
    Ok(zero_curvature_field(g, grid, &c.matrix)?.into_iter().fold(0.0, f64::max))
}

/// `sqrt(sum_j |R_j|^2)` per node for the block system with twist `T`.
pub fn block_residual_combined(state: &TodaState, twist: &M2) -> Result<Vec<f64>> {
    let field = TodaOperator::new(state.grid).with_twist(*twist).residual_field(state)?;
    Ok((0..state.points()).map(|i| field.combined(i)).collect())
}

/// The constant block `N = eta(phi_j, phi_{n-1-j})` of the interleaved pairing.
pub fn reflection_block(basis: &InterleavedBasis, params: &ModelParams) -> Result<(M2, PairingMatrix<Complex64>)> {
    let eta = basis.eta(params)?;
    let n = params.n;
    let block = M2::from_fn(|a, b| eta.entries[(a, 2 * (n - 1) + b)]);
    let scale = block.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let off = block[(0, 1)].norm().max(block[(1, 0)].norm());
    if off > 1e-10 * scale {
        return Err(Error::Inconsistent(format!("interleaved pairing block is not diagonal ({off:e})")));
    }
    Ok((Matrix2::new(block[(0, 0)], Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), block[(1, 1)]), eta))
}

/// `N conj(G)^{-1} conj(N)`: the partner of `G` under the reality constraint.
pub fn reflect(g: &MetricBlock, nb: &M2) -> Result<MetricBlock> {
    let inv = invert(&g.g.map(|z| z.conj()))?;
    let mut out = nb * inv * nb.map(|z| z.conj());
    // Restore exact hermiticity lost to rounding.
    out = (out + out.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(MetricBlock { g: out })
}

/// Overwrites blocks `j > n-1-j` with the reflections of their partners and
/// sets a self-paired middle block to `diag(|N_11|, |N_22|)`.
pub fn impose_reality(blocks: &mut [MetricBlock], nb: &M2) -> Result<()> {
    let n = blocks.len();
    for j in 0..n {
        let k = n - 1 - j;
        if j < k {
            blocks[k] = reflect(&blocks[j], nb)?;
        } else if j == k {
            blocks[j] = MetricBlock::diagonal(nb[(0, 0)].norm(), nb[(1, 1)].norm());
        }
    }
    Ok(())
}

/// Largest reality residual of the assembled metric over all nodes.
pub fn reality_along(state: &TodaState, eta: &PairingMatrix<Complex64>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..state.points() {
        worst = worst.max(pairing::reality_residual(&assemble_metric(state, i), eta)?);
    }
    Ok(worst)
}
