use super::objective::Evaluator;
use crate::assembler::AssembledGame;
use crate::vgne::{KktSystem, VgneOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub seed: u64,
    pub tol_improve: f64,
    pub vgne: VgneOptions,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { seed: 1, tol_improve: 1e-6, vgne: VgneOptions::default() }
    }
}

/// Sampled local-optimality report around a leader decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub radius: f64,
    /// Points requested.
    pub samples: usize,
    /// Points whose follower game could not be solved; they are skipped.
    pub failed: usize,
    pub seed: u64,
    /// Cost at the certified point.
    pub cost: f64,
    /// `min (J(sample) − J(z0))`; zero when nothing was sampled.
    pub worst_improvement: f64,
    /// Sample attaining `worst_improvement`, when it improves.
    pub best_point: Option<Vec<f64>>,
    pub tol_improve: f64,
    pub passed: bool,
}

/// Uniform point in the Euclidean ball of `radius` around `z0`, projected onto the leader box.
pub(crate) fn ball_sample<R: Rng>(rng: &mut R, game: &AssembledGame, z0: &[f64], radius: f64) -> Vec<f64> {
    let d = z0.len();
    let dir: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
    let mut z: Vec<f64> = z0.iter().zip(&dir).map(|(a, u)| a + r * u / norm).collect();
    game.gamma.project(&mut z);
    z
}

pub(crate) fn certify_with(
    ev: &mut Evaluator<'_>,
    z0: &[f64],
    cost: f64,
    radius: f64,
    samples: usize,
    opts: &CertifyOptions,
) -> Certificate {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst = 0.0f64;
    let mut best_point = None;
    let mut failed = 0;
    if radius > 0.0 {
        for _ in 0..samples {
            let z = ball_sample(&mut rng, ev.game(), z0, radius);
            match ev.cost(&z) {
                Some(c) => {
                    if c - cost < worst {
                        worst = c - cost;
                        best_point = Some(z);
                    }
                }
                None => failed += 1,
            }
        }
    }
    Certificate {
        radius,
        samples: if radius > 0.0 { samples } else { 0 },
        failed,
        seed: opts.seed,
        cost,
        worst_improvement: worst,
        best_point,
        tol_improve: opts.tol_improve,
        passed: worst >= -opts.tol_improve,
    }
}

/// Samples `samples` leader decisions uniformly in the `radius`-ball around
/// `z0` (projected onto Γ), re-solves the followers and records the largest
/// cost decrease relative to `J^DSO(z0, x)`.
pub fn certify_lse(
    game: &AssembledGame,
    z0: &[f64],
    x: &[f64],
    radius: f64,
    samples: usize,
    opts: &CertifyOptions,
) -> Certificate {
    let sys = KktSystem::new(game, opts.vgne.tikhonov);
    let mut ev = Evaluator::new(&sys, opts.vgne);
    certify_with(&mut ev, z0, game.leader_cost(z0, x), radius, samples, opts)
}
