//! Diagonal blocks decouple into two scalar periodic Toda chains.

use super::grid::RadialGrid;
use super::operator::FLOW_PREFACTOR;
use super::state::TodaState;
use crate::error::{Error, Result};

/// Off-diagonal magnitude tolerated by [`abelian_reduce`].
pub const DIAGONAL_TOL: f64 = 1e-10;

/// Scalar fields `q[c][j][i] = log G_j(r_i)_{cc}` and the residual of
///
/// `-(1/(4 r h^2)) sum_± r_{i±1/2} sinh(q_{i±1} - q_i) - e^{q_{j+1} - q_j} + e^{q_j - q_{j-1}}`
///
/// at interior nodes (zero at the boundary).
#[derive(Clone, Debug)]
pub struct AbelianReduction {
    pub grid: RadialGrid,
    pub q: [Vec<Vec<f64>>; 2],
    pub residual: [Vec<Vec<f64>>; 2],
}

impl AbelianReduction {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().flatten().flatten().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

pub fn abelian_reduce(state: &TodaState) -> Result<AbelianReduction> {
    let off = state.max_off_diagonal();
    if off > DIAGONAL_TOL {
        return Err(Error::NotDiagonal(off));
    }
    let grid = state.grid;
    let n = state.n();
    let q: [Vec<Vec<f64>>; 2] = std::array::from_fn(|c| {
        state
            .blocks
            .iter()
            .map(|row| row.iter().map(|b| b.g[(c, c)].re.ln()).collect())
            .collect()
    });
    let h = grid.h();
    let residual = std::array::from_fn(|c| {
        let q = &q[c];
        let mut out = vec![vec![0.0; grid.points]; n];
        for j in 0..n {
            let next = &q[(j + 1) % n];
            let prev = &q[(j + n - 1) % n];
            for i in grid.interior() {
                let r = grid.r(i);
                let flow = (r + 0.5 * h) * (q[j][i + 1] - q[j][i]).sinh() + (r - 0.5 * h) * (q[j][i - 1] - q[j][i]).sinh();
                out[j][i] = -FLOW_PREFACTOR * flow / (r * h * h) - (next[i] - q[j][i]).exp() + (q[j][i] - prev[i]).exp();
            }
        }
        out
    });
    Ok(AbelianReduction { grid, q, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toda::block::MetricBlock;
    use crate::toda::manufactured::{FamilyKind, ManufacturedFamily};
    use crate::toda::operator::toda_residual;
    use crate::toda::operator::TodaOperator;
    use num_complex::Complex64;

    #[test]
    fn identity_reduces_to_zero() {
        let grid = RadialGrid::new(1.0, 2.0, 9).unwrap();
        let s = TodaState::from_fn(2, grid, |_, _| MetricBlock::identity()).unwrap();
        let red = abelian_reduce(&s).unwrap();
        assert!(red.q.iter().flatten().flatten().all(|&v| v == 0.0));
        assert_eq!(red.max_residual(), 0.0);
    }

    #[test]
    fn scalar_residual_is_block_diagonal() {
        let grid = RadialGrid::new(1.0, 2.0, 17).unwrap();
        for n in 1..=4 {
            let s = ManufacturedFamily::standard(FamilyKind::Diagonal, n).state(grid).unwrap();
            let red = abelian_reduce(&s).unwrap();
            let op = TodaOperator::new(grid);
            let g = s.matrices();
            for j in 0..n {
                for i in grid.interior() {
                    let r = op.residual_at(&g, j, i).unwrap();
                    for c in 0..2 {
                        let d = (r[(c, c)].re - red.residual[c][j][i]).abs();
                        assert!(d < 1e-12 * (1.0 + r[(c, c)].norm()), "n={n} j={j} i={i} c={c} d={d}");
                    }
                    assert!(r[(0, 1)].norm() < 1e-12 && r[(1, 0)].norm() < 1e-12);
                }
            }
            let field = toda_residual(&s).unwrap();
            assert!(field.max() > 0.0);
        }
    }

    #[test]
    fn rejects_off_diagonal_input() {
        let grid = RadialGrid::new(1.0, 2.0, 5).unwrap();
        let s = TodaState::from_fn(2, grid, |_, _| MetricBlock::hermitian(1.0, 1.0, Complex64::new(1e-6, 0.0))).unwrap();
        assert!(matches!(abelian_reduce(&s), Err(Error::NotDiagonal(_))));
    }
}
