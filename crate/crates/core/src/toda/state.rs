use num_complex::Complex64;

use super::block::{MetricBlock, M2};
use super::grid::RadialGrid;
use crate::error::{Error, Result};

/// Blocks `G_j(r_i)` for `j = 0..n`, indexed `[j][i]`. Indices in `j` are
/// read modulo `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct TodaState {
    pub blocks: Vec<Vec<MetricBlock>>,
    pub grid: RadialGrid,
    pub period_n: usize,
}

impl TodaState {
    pub fn new(blocks: Vec<Vec<MetricBlock>>, grid: RadialGrid) -> Result<Self> {
        let n = blocks.len();
        if n == 0 {
            return Err(Error::InvalidParams("state needs at least one block".into()));
        }
        for (j, row) in blocks.iter().enumerate() {
            if row.len() != grid.points {
                return Err(Error::DimensionMismatch {
                    expected: grid.points,
                    found: row.len(),
                });
            }
            for (i, b) in row.iter().enumerate() {
                if b.hermiticity_defect() > super::block::HERMITIAN_TOL || !b.is_positive_definite() {
                    return Err(Error::NotPositiveDefinite { j, point: i });
                }
            }
        }
        Ok(Self {
            blocks,
            grid,
            period_n: n,
        })
    }

    pub fn from_fn(n: usize, grid: RadialGrid, f: impl Fn(usize, f64) -> MetricBlock) -> Result<Self> {
        let blocks = (0..n)
            .map(|j| (0..grid.points).map(|i| f(j, grid.r(i))).collect())
            .collect();
        Self::new(blocks, grid)
    }

    /// Linear interpolation between boundary blocks; stays positive definite.
    pub fn interpolate(grid: RadialGrid, inner: &[MetricBlock], outer: &[MetricBlock]) -> Result<Self> {
        if inner.len() != outer.len() {
            return Err(Error::DimensionMismatch {
                expected: inner.len(),
                found: outer.len(),
            });
        }
        let span = grid.r_max - grid.r_min;
        Self::from_fn(inner.len(), grid, |j, r| {
            let s = (r - grid.r_min) / span;
            MetricBlock {
                g: inner[j].g * Complex64::new(1.0 - s, 0.0) + outer[j].g * Complex64::new(s, 0.0),
            }
        })
    }

    pub fn n(&self) -> usize {
        self.period_n
    }

    pub fn points(&self) -> usize {
        self.grid.points
    }

    /// `G_j` at node `i`, with `j` taken modulo `n`.
    pub fn block(&self, j: isize, i: usize) -> &MetricBlock {
        let n = self.period_n as isize;
        &self.blocks[j.rem_euclid(n) as usize][i]
    }

    pub fn matrices(&self) -> Vec<Vec<M2>> {
        self.blocks.iter().map(|row| row.iter().map(|b| b.g).collect()).collect()
    }

    /// Relabels `j -> j + k`: block `j` of the result is block `j + k` of `self`.
    pub fn shifted(&self, k: isize) -> Self {
        let n = self.period_n as isize;
        let blocks = (0..n).map(|j| self.blocks[(j + k).rem_euclid(n) as usize].clone()).collect();
        Self {
            blocks,
            grid: self.grid,
            period_n: self.period_n,
        }
    }

    /// `G_j -> U G_j U^†` for every block.
    pub fn conjugated(&self, u: &M2) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|row| row.iter().map(|b| MetricBlock { g: u * b.g * u.adjoint() }).collect())
            .collect();
        Self {
            blocks,
            grid: self.grid,
            period_n: self.period_n,
        }
    }

    fn fold(&self, f: impl Fn(&MetricBlock) -> f64, init: f64, pick: fn(f64, f64) -> f64) -> f64 {
        self.blocks.iter().flatten().map(f).fold(init, pick)
    }

    pub fn hermiticity_drift(&self) -> f64 {
        self.fold(MetricBlock::hermiticity_defect, 0.0, f64::max)
    }

    /// `max |det G - 1|`.
    pub fn det_drift(&self) -> f64 {
        self.fold(|b| (b.det() - 1.0).abs(), 0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.fold(MetricBlock::min_eigenvalue, f64::INFINITY, f64::min)
    }

    pub fn max_off_diagonal(&self) -> f64 {
        self.fold(MetricBlock::off_diagonal, 0.0, f64::max)
    }

    /// Largest entrywise difference between two states on the same grid.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .zip(other.blocks.iter().flatten())
            .map(|(a, b)| (a.g - b.g).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }
}
