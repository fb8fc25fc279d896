//! Variational generalized Nash equilibria of the followers' game.
//!
//! The VI `(w − x)ᵀH(z0, x) ≥ 0` over the collective feasible set is solved
//! through its KKT system with a common multiplier on every coupling row.

pub mod kkt;
pub mod solver;
mod sparse;
pub mod vi;

pub use kkt::{kkt_residual, KktReport};
pub use solver::{solve_vgne, KktSystem, Method, VgneError, VgneOptions, VgneSolution, VgneSolver};
pub use vi::{verify_vi, FeasibleSampler, ViError, ViReport};
