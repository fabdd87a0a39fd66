//! Radial boundary-value solver for the periodic non-Abelian `2 x 2` Toda
//! system of the tt* equations in the interleaved basis.

pub mod abelian;
pub mod block;
pub mod curvature;
pub mod grid;
pub mod manufactured;
pub mod operator;
pub mod solver;
pub mod state;

pub use abelian::{abelian_reduce, AbelianReduction};
pub use block::MetricBlock;
pub use curvature::{assemble_metric, zero_curvature_residual};
pub use grid::RadialGrid;
pub use manufactured::{FamilyKind, ManufacturedFamily};
pub use operator::{toda_residual, ResidualField, TodaOperator, FLOW_PREFACTOR};
pub use solver::{solve, BoundaryCondition, ConvergenceReport, Method, SolverConfig};
pub use state::TodaState;
