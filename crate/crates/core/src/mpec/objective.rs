use crate::assembler::AssembledGame;
use crate::vgne::{KktSystem, VgneError, VgneOptions, VgneSolution, VgneSolver};
use std::collections::HashMap;

/// `J^DSO(z0, x(z0))` with `x(z0)` the followers' variational equilibrium.
pub fn leader_objective(
    z0: &[f64],
    game: &AssembledGame,
    opts: &VgneOptions,
) -> Result<(f64, VgneSolution), VgneError> {
    let sol = crate::vgne::solve_vgne(game, z0, opts)?;
    Ok((game.leader_cost(z0, &sol.x), sol))
}

/// Leader objective with a warm-started follower solver and a cache keyed on
/// the exact bits of `z0`. Failed follower solves count as infeasible points.
pub struct Evaluator<'s> {
    solver: VgneSolver<'s>,
    cache: HashMap<Vec<u64>, Option<f64>>,
    solves: usize,
    failures: usize,
    last_error: Option<VgneError>,
}

impl<'s> Evaluator<'s> {
    pub fn new(sys: &'s KktSystem<'s>, opts: VgneOptions) -> Self {
        Evaluator { solver: VgneSolver::new(sys, opts), cache: HashMap::new(), solves: 0, failures: 0, last_error: None }
    }

    pub fn game(&self) -> &AssembledGame {
        self.solver.system().game
    }

    pub fn cost(&mut self, z0: &[f64]) -> Option<f64> {
        let key: Vec<u64> = z0.iter().map(|v| v.to_bits()).collect();
        if let Some(c) = self.cache.get(&key) {
            return *c;
        }
        self.solves += 1;
        let out = match self.solver.solve(z0) {
            Ok(sol) => Some(self.game().leader_cost(z0, &sol.x)),
            Err(e) => {
                log::debug!("follower solve failed: {e}");
                self.failures += 1;
                self.solver.reset();
                self.last_error = Some(e);
                None
            }
        };
        self.cache.insert(key, out);
        out
    }

    /// Follower solve that ignores the stored basis, so the result depends on `z0` only.
    pub fn solve_cold(&mut self, z0: &[f64]) -> Result<VgneSolution, VgneError> {
        self.solver.solve_cold(z0)
    }

    pub fn solves(&self) -> usize {
        self.solves
    }

    pub fn failures(&self) -> usize {
        self.failures
    }

    pub fn last_error(&self) -> Option<&VgneError> {
        self.last_error.as_ref()
    }
}
