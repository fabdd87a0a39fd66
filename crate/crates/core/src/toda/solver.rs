//! Damped Newton on the symmetrized residual of the discrete system.
//!
//! Unknowns are the four real log-coordinates of every interior block. The Newton
//! matrix is block tridiagonal in the radial index (blocks of size `4n`) and is
//! factored by block elimination. Steps that break positive definiteness or
//! fail to reduce the residual are rejected and the damping halved.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::block::{from_components, MetricBlock, M2};
use super::manufactured::ManufacturedFamily;
use super::operator::{log_step, JacobianRow, TodaOperator};
use super::state::TodaState;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Global Newton over all blocks and nodes.
    #[default]
    Newton,
    /// One local Newton update per `(j, node)`, ascending `j` then ascending `r`.
    GaussSeidel,
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "newton" => Ok(Self::Newton),
            "gauss-seidel" | "gauss_seidel" | "gs" => Ok(Self::GaussSeidel),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

#[derive(Clone, Debug)]
pub enum BoundaryCondition {
    /// Boundary blocks and source taken from a closed-form family, so that the
    /// family sampled on the grid solves the discrete system exactly.
    Manufactured(ManufacturedFamily),
    /// Fixed blocks at `r_min` and `r_max`, no source.
    UserSupplied {
        inner: Vec<MetricBlock>,
        outer: Vec<MetricBlock>,
    },
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Target for the largest node residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial step length in `(0, 1]`.
    pub damping: f64,
    pub bc_mode: BoundaryCondition,
    pub method: Method,
    /// `T` in `T G_{j+1} T^†`; identity by default. An overall scalar such as
    /// the coupling prefactor may be folded in here.
    pub twist: M2,
    /// Worker threads; `0` uses the ambient pool.
    pub threads: usize,
    /// Iterations without improvement before giving up.
    pub patience: usize,
    /// Halvings tried per iteration before the step is abandoned.
    pub max_backtracks: usize,
    /// Rescale every interior block to unit determinant after each step.
    pub renormalize_det: bool,
}

impl SolverConfig {
    pub fn new(bc_mode: BoundaryCondition) -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            damping: 1.0,
            bc_mode,
            method: Method::Newton,
            twist: M2::identity(),
            threads: 0,
            patience: 5,
            max_backtracks: 30,
            renormalize_det: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidConfig(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be positive".into()));
        }
        if self.patience == 0 {
            return Err(Error::InvalidConfig("patience must be positive".into()));
        }
        Ok(())
    }

    fn block_count(&self) -> usize {
        match &self.bc_mode {
            BoundaryCondition::Manufactured(f) => f.n(),
            BoundaryCondition::UserSupplied { inner, .. } => inner.len(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub method: Method,
    pub converged: bool,
    pub iterations: usize,
    pub initial_residual: f64,
    pub final_residual: f64,
    pub residual_history: Vec<f64>,
    pub rejected_steps: usize,
    /// `max |det G - 1|` over the final state.
    pub det_drift: f64,
    pub hermiticity_drift: f64,
    pub min_eigenvalue: f64,
    pub threads: usize,
}

pub fn solve(initial: &TodaState, cfg: &SolverConfig) -> Result<(TodaState, ConvergenceReport)> {
    cfg.validate()?;
    if cfg.block_count() != initial.n() {
        return Err(Error::DimensionMismatch {
            expected: initial.n(),
            found: cfg.block_count(),
        });
    }
    if cfg.threads == 0 {
        return Solver::new(initial, cfg)?.run();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| Solver::new(initial, cfg)?.run())
}

struct Solver<'a> {
    cfg: &'a SolverConfig,
    op: TodaOperator,
    state: TodaState,
}

impl<'a> Solver<'a> {
    fn new(initial: &TodaState, cfg: &'a SolverConfig) -> Result<Self> {
        let grid = initial.grid;
        let mut op = TodaOperator::new(grid).with_twist(cfg.twist);
        let mut state = initial.clone();
        let last = grid.points - 1;
        match &cfg.bc_mode {
            BoundaryCondition::Manufactured(family) => {
                let exact = family.state(grid)?;
                op.source = Some(op.hermitian_field(&exact.matrices())?);
                for j in 0..state.n() {
                    state.blocks[j][0] = exact.blocks[j][0];
                    state.blocks[j][last] = exact.blocks[j][last];
                }
            }
            BoundaryCondition::UserSupplied { inner, outer } => {
                if outer.len() != inner.len() {
                    return Err(Error::DimensionMismatch {
                        expected: inner.len(),
                        found: outer.len(),
                    });
                }
                for j in 0..state.n() {
                    state.blocks[j][0] = inner[j];
                    state.blocks[j][last] = outer[j];
                }
            }
        }
        for (j, row) in state.blocks.iter().enumerate() {
            for (i, b) in row.iter().enumerate() {
                if !b.is_positive_definite() {
                    return Err(Error::NotPositiveDefinite { j, point: i });
                }
            }
        }
        Ok(Self { cfg, op, state })
    }

    fn residual(&self, state: &TodaState) -> Result<f64> {
        Ok(self.op.residual_field(state)?.max())
    }

    /// Euclidean norm of the Newton function over all interior blocks.
    fn merit(&self, state: &TodaState) -> Result<f64> {
        let g = state.matrices();
        let n = g.len();
        let parts: Vec<f64> = self
            .op
            .grid
            .interior()
            .into_par_iter()
            .map(|i| (0..n).map(|j| self.op.newton_form(&g, j, i).map(|f| f.norm_squared())).sum::<Result<f64>>())
            .collect::<Result<_>>()?;
        Ok(parts.iter().sum::<f64>().sqrt())
    }

    fn run(mut self) -> Result<(TodaState, ConvergenceReport)> {
        let cfg = self.cfg;
        let mut history = vec![self.residual(&self.state)?];
        let mut rejected = 0;
        let mut best = history[0];
        let mut stale = 0;
        let mut iterations = 0;
        while history[iterations] >= cfg.tol && iterations < cfg.max_iter {
            let accepted = match cfg.method {
                Method::Newton => self.newton_step(&mut rejected)?,
                Method::GaussSeidel => self.gauss_seidel_sweep(&mut rejected)?,
            };
            iterations += 1;
            let res = self.residual(&self.state)?;
            history.push(res);
            if accepted && res < best {
                best = res;
                stale = 0;
            } else {
                stale += 1;
                if stale >= cfg.patience {
                    return Err(Error::Diverged {
                        iterations,
                        residual: res,
                    });
                }
            }
        }
        let final_residual = history[iterations];
        let report = ConvergenceReport {
            method: cfg.method,
            converged: final_residual < cfg.tol,
            iterations,
            initial_residual: history[0],
            final_residual,
            residual_history: history,
            rejected_steps: rejected,
            det_drift: self.state.det_drift(),
            hermiticity_drift: self.state.hermiticity_drift(),
            min_eigenvalue: self.state.min_eigenvalue(),
            threads: cfg.threads,
        };
        Ok((self.state, report))
    }

    fn apply(&self, base: &TodaState, step: &[DVector<f64>], alpha: f64) -> Option<TodaState> {
        let mut next = base.clone();
        for (k, x) in step.iter().enumerate() {
            let i = k + 1;
            for j in 0..next.n() {
                let u: Vec<f64> = (0..4).map(|a| alpha * x[4 * j + a]).collect();
                let mut g = log_step(&base.blocks[j][i].g, &from_components(&u));
                if self.cfg.renormalize_det {
                    g /= Complex64::new(MetricBlock { g }.det().abs().sqrt(), 0.0);
                }
                let b = MetricBlock { g };
                if !b.is_positive_definite() {
                    return None;
                }
                next.blocks[j][i] = b;
            }
        }
        Some(next)
    }

    fn newton_step(&mut self, rejected: &mut usize) -> Result<bool> {
        let g = self.state.matrices();
        let rows: Vec<JacobianRow> = self
            .op
            .grid
            .interior()
            .into_par_iter()
            .map(|i| self.op.jacobian_row(&g, i))
            .collect::<Result<_>>()?;
        let step = block_tridiagonal_solve(&rows)?;
        let current = self.merit(&self.state)?;
        let mut alpha = self.cfg.damping;
        for _ in 0..=self.cfg.max_backtracks {
            if let Some(candidate) = self.apply(&self.state, &step, alpha) {
                if self.merit(&candidate)? < current {
                    self.state = candidate;
                    return Ok(true);
                }
            }
            *rejected += 1;
            alpha *= 0.5;
        }
        Ok(false)
    }

    fn gauss_seidel_sweep(&mut self, rejected: &mut usize) -> Result<bool> {
        let n = self.state.n();
        let mut moved = false;
        for j in 0..n {
            for i in self.op.grid.interior() {
                let g = self.state.matrices();
                let row = self.op.jacobian_row(&g, i)?;
                let local = row.diag.view((4 * j, 4 * j), (4, 4)).into_owned();
                let rhs = -row.rhs.rows(4 * j, 4).into_owned();
                let delta = local
                    .lu()
                    .solve(&rhs)
                    .ok_or_else(|| Error::Singular(format!("local Newton matrix at j={j}, point {i}")))?;
                let mut alpha = self.cfg.damping;
                let mut done = false;
                for _ in 0..=self.cfg.max_backtracks {
                    let u: Vec<f64> = delta.iter().map(|v| alpha * v).collect();
                    let mut cand = log_step(&g[j][i], &from_components(&u));
                    if self.cfg.renormalize_det {
                        cand /= Complex64::new(MetricBlock { g: cand }.det().abs().sqrt(), 0.0);
                    }
                    let b = MetricBlock { g: cand };
                    if b.is_positive_definite() {
                        self.state.blocks[j][i] = b;
                        done = true;
                        break;
                    }
                    *rejected += 1;
                    alpha *= 0.5;
                }
                moved |= done;
            }
        }
        Ok(moved)
    }
}

/// Solves `J x = -rhs` for a block-tridiagonal `J` by block elimination.
fn block_tridiagonal_solve(rows: &[JacobianRow]) -> Result<Vec<DVector<f64>>> {
    let m = rows.len();
    let mut cp: Vec<DMatrix<f64>> = Vec::with_capacity(m);
    let mut dp: Vec<DVector<f64>> = Vec::with_capacity(m);
    for (k, row) in rows.iter().enumerate() {
        let mut b = row.diag.clone();
        let mut d = -&row.rhs;
        if k > 0 {
            b -= &row.lower * &cp[k - 1];
            d -= &row.lower * &dp[k - 1];
        }
        let lu = b.lu();
        let singular = || Error::Singular(format!("Newton pivot block {k}"));
        cp.push(lu.solve(&row.upper).ok_or_else(singular)?);
        dp.push(lu.solve(&d).ok_or_else(singular)?);
    }
    let mut x = dp;
    for k in (0..m.saturating_sub(1)).rev() {
        let next = x[k + 1].clone();
        x[k] -= &cp[k] * next;
    }
    Ok(x)
}
