//! Sampled check of the variational inequality `(w − x)ᵀH(z0, x) ≥ 0`.

use crate::assembler::{feasibility_probe, AssembledGame, ProbeError, Reduction};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViReport {
    /// `min_w (w − x)ᵀH(z0, x)` over the sample, including `w = x`.
    pub worst: f64,
    pub samples: usize,
    /// Distance of the sampler's starting point from the nearest inequality.
    pub interior_margin: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ViError {
    #[error("cannot generate feasible samples: {0}")]
    Sampling(#[from] ProbeError),
}

/// Hit-and-run sampler over `{u ≥ 0, G u ≤ h}` started at the Chebyshev centre.
pub struct FeasibleSampler {
    red: Reduction,
    g: nalgebra::DMatrix<f64>,
    h: DVector<f64>,
    u: DVector<f64>,
    margin: f64,
    rng: ChaCha8Rng,
}

impl FeasibleSampler {
    pub fn new(game: &AssembledGame, seed: u64) -> Result<Self, ProbeError> {
        let red = Reduction::new(game);
        let probe = feasibility_probe(game, &red, 1.0)?;
        let (g, h) = red.rows(game);
        Ok(FeasibleSampler { u: probe.u, margin: probe.margin, red, g, h, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Next collective point; stays put when the chord through the current point is degenerate.
    pub fn next_point(&mut self) -> DVector<f64> {
        let n = self.u.len();
        let d = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut self.rng));
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for j in 0..n {
            if d[j] > 0.0 {
                lo = lo.max(-self.u[j] / d[j]);
            } else if d[j] < 0.0 {
                hi = hi.min(-self.u[j] / d[j]);
            }
        }
        let gd = &self.g * &d;
        let slack = &self.h - &self.g * &self.u;
        for r in 0..gd.len() {
            let s = slack[r].max(0.0);
            if gd[r] > 0.0 {
                hi = hi.min(s / gd[r]);
            } else if gd[r] < 0.0 {
                lo = lo.max(s / gd[r]);
            }
        }
        if lo.is_finite() && hi.is_finite() && hi > lo {
            let step = Uniform::new_inclusive(lo, hi).expect("finite chord").sample(&mut self.rng);
            self.u += d * step;
            for v in self.u.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        self.red.lift(&self.u)
    }
}

/// Worst VI value over `samples` feasible points from a hit-and-run walk plus `w = x`.
/// `tikhonov` must match the regularization used to compute `x`.
pub fn verify_vi(
    game: &AssembledGame,
    z0: &[f64],
    x: &[f64],
    samples: usize,
    seed: u64,
    tikhonov: f64,
) -> Result<ViReport, ViError> {
    let xv = DVector::from_column_slice(x);
    let hvec = game.pseudo_gradient(z0, x) + &xv * (2.0 * tikhonov);
    let mut sampler = FeasibleSampler::new(game, seed)?;
    let mut worst = 0.0f64; // w = x
    for _ in 0..samples {
        let w = sampler.next_point();
        worst = worst.min((w - &xv).dot(&hvec));
    }
    Ok(ViReport { worst, samples: samples + 1, interior_margin: sampler.margin() })
}
