use super::objective::Evaluator;
use super::MpecError;
use crate::assembler::AssembledGame;
use crate::vgne::{KktSystem, VgneOptions};
use serde::{Deserialize, Serialize};

/// Largest grid `grid_oracle` will enumerate.
pub const GRID_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub z0: Vec<f64>,
    /// `None` when the follower game could not be solved.
    pub cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub resolution: usize,
    pub best_z0: Vec<f64>,
    pub best_cost: f64,
    pub trace: Vec<GridPoint>,
}

/// Values of one coordinate: `lo + (hi − lo)·k/(R − 1)`, or the midpoint when `R = 1`
/// or the interval is degenerate.
fn axis(lo: f64, hi: f64, res: usize) -> Vec<f64> {
    if res == 1 || hi <= lo {
        return vec![0.5 * (lo + hi)];
    }
    (0..res).map(|k| if k + 1 == res { hi } else { lo + (hi - lo) * k as f64 / (res - 1) as f64 }).collect()
}

/// Exhaustive leader grid with `resolution` points per coordinate of Γ.
///
/// Points are visited in lexicographic order (last coordinate fastest); the
/// first minimizer in that order wins ties.
pub fn grid_oracle(game: &AssembledGame, resolution: usize, opts: &VgneOptions) -> Result<GridResult, MpecError> {
    let resolution = resolution.max(1);
    let axes: Vec<Vec<f64>> =
        game.gamma.lo.iter().zip(&game.gamma.hi).map(|(l, h)| axis(*l, *h, resolution)).collect();
    let points = axes.iter().map(|a| a.len() as f64).product::<f64>();
    if points > GRID_LIMIT {
        return Err(MpecError::GridTooLarge { points, limit: GRID_LIMIT });
    }
    let sys = KktSystem::new(game, opts.tikhonov);
    let mut ev = Evaluator::new(&sys, *opts);
    let mut idx = vec![0usize; axes.len()];
    let mut trace = Vec::with_capacity(points as usize);
    let mut best: Option<(f64, Vec<f64>)> = None;
    loop {
        let z: Vec<f64> = idx.iter().zip(&axes).map(|(k, a)| a[*k]).collect();
        let cost = ev.cost(&z);
        if let Some(c) = cost {
            if best.as_ref().is_none_or(|(b, _)| c < *b) {
                best = Some((c, z.clone()));
            }
        }
        trace.push(GridPoint { z0: z, cost });
        // odometer increment
        let mut j = axes.len();
        loop {
            if j == 0 {
                let (best_cost, best_z0) = best.ok_or_else(|| MpecError::AllStartsFailed {
                    diagnostics: vec![format!(
                        "no grid point admits a follower equilibrium; last error: {}",
                        ev.last_error().map(|e| e.to_string()).unwrap_or_default()
                    )],
                })?;
                return Ok(GridResult { resolution, best_z0, best_cost, trace });
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < axes[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
}
