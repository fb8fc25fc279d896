//! Linear complementarity problems: find `z ≥ 0` with `w = Mz + q ≥ 0` and `zᵀw = 0`.
//!
//! Two independent routes are provided: complementary pivoting ([`lemke`]) and a
//! projected extragradient iteration followed by block principal pivoting on the
//! identified active set ([`splitting`]).

pub mod lemke;
pub mod principal;
pub mod splitting;

use nalgebra::{DMatrix, DVector};

pub use lemke::{LemkeOptions, LemkeSolver};
pub use splitting::{SplittingOptions, SplittingReport};

/// Dense LCP data.
#[derive(Debug, Clone)]
pub struct Lcp {
    pub m: DMatrix<f64>,
    pub q: DVector<f64>,
}

impl Lcp {
    pub fn new(m: DMatrix<f64>, q: DVector<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        assert_eq!(m.nrows(), q.len());
        Lcp { m, q }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// `w = Mz + q`.
    pub fn slack(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.m * z + &self.q
    }

    /// Natural residual `‖min(z, Mz + q)‖∞`.
    pub fn natural_residual(&self, z: &DVector<f64>) -> f64 {
        let w = self.slack(z);
        z.iter().zip(w.iter()).map(|(a, b)| a.min(*b).abs()).fold(0.0, f64::max)
    }
}

/// Solution of an LCP with the slack it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct LcpSolution {
    pub z: DVector<f64>,
    pub w: DVector<f64>,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LcpError {
    /// Lemke's path left through an unbounded edge. With a positive covering
    /// vector and a copositive-plus matrix this certifies infeasibility.
    #[error("ray termination after {pivots} pivots (entering variable {entering})")]
    Ray { pivots: usize, entering: usize },
    #[error("pivot limit of {limit} reached")]
    PivotLimit { limit: usize },
    #[error("iteration limit of {limit} reached with natural residual {residual:e}")]
    IterationLimit { limit: usize, residual: f64 },
    #[error("numerical breakdown: {0}")]
    Numerical(String),
}
