//! Market domain types and closed-form evaluation of rewards, prices, costs
//! and constraint residuals. Nothing here depends on a solver.

pub mod costs;
pub mod residuals;
pub mod rewards;
pub mod scenario;

pub use costs::{
    eval_dso_cost, eval_dso_cost_epigraph, eval_prosumer_cost, eval_prosumer_cost_epigraph,
};
pub use residuals::{constraint_residuals, ConstraintKind, Residual, ResidualReport};
pub use rewards::{
    eval_phi_r, eval_pi_b, eval_pi_r, eval_price, individual_incentive, rebound_reward,
    response_reward, RewardLedger,
};
pub use scenario::{
    aggregate, split_collective, stack_collective, FollowerDecision, IntervalClass, Issue,
    LeaderDecision, ProsumerSpec, Scenario, Validated, ValidationError,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension { what: &'static str, expected: usize, got: usize },
}
