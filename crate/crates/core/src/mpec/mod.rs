//! Leader layer: search over the leader box for a local Stackelberg
//! equilibrium, with the follower equilibrium as an exact inner oracle.

mod certify;
mod grid;
mod objective;
mod search;

pub use certify::{certify_lse, Certificate, CertifyOptions};
pub use grid::{grid_oracle, GridPoint, GridResult, GRID_LIMIT};
pub use objective::{leader_objective, Evaluator};
pub use search::{solve_lse, EquilibriumResult, Phase, SearchOptions, StartOrigin, StartReport, TraceEntry};

use crate::vgne::VgneError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MpecError {
    #[error("every start failed:\n{}", .diagnostics.join("\n"))]
    AllStartsFailed { diagnostics: Vec<String> },
    #[error("grid has {points:e} points, above the limit of {limit:e}")]
    GridTooLarge { points: f64, limit: f64 },
    #[error("leader decision has length {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("follower solve at the final point failed: {0}")]
    Solve(VgneError),
}
