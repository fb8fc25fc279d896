//! Block principal pivoting for monotone LCPs.
//!
//! Starting from a guess of the index set `F` where `z` is allowed to be
//! positive, each step solves `M_FF z_F = −q_F` and swaps the indices whose sign
//! conditions fail. Subsystems are solved with a proximal shift `M_FF + δI`
//! followed by iterative refinement against the unshifted matrix, so rank
//! deficient blocks (degenerate active sets) still give a consistent solution.
//! After `max_block_flips` unsuccessful block swaps the method falls back to
//! Murty's single-index rule (least index first), which cannot cycle.

use super::Lcp;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalOptions {
    /// Sign tolerance for accepting `z_F ≥ 0` and `w_{¬F} ≥ 0`.
    pub tol: f64,
    /// Proximal shift relative to the largest diagonal magnitude.
    pub shift: f64,
    pub refine_steps: usize,
    pub max_block_flips: usize,
    pub max_iter: usize,
}

impl Default for PrincipalOptions {
    fn default() -> Self {
        PrincipalOptions { tol: 1e-10, shift: 1e-10, refine_steps: 60, max_block_flips: 10, max_iter: 500 }
    }
}

/// Solves the square system `M_FF z_F = b` (least-squares consistent) by shifted refinement.
fn solve_block(lcp: &Lcp, free: &[usize], opts: &PrincipalOptions) -> Option<DVector<f64>> {
    let k = free.len();
    if k == 0 {
        return Some(DVector::zeros(0));
    }
    let sub = DMatrix::from_fn(k, k, |a, b| lcp.m[(free[a], free[b])]);
    let b = DVector::from_fn(k, |a, _| -lcp.q[free[a]]);
    let scale = sub.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let delta = opts.shift * scale;
    let mut shifted = sub.clone();
    for a in 0..k {
        shifted[(a, a)] += delta;
    }
    let lu = shifted.lu();
    let mut z = lu.solve(&b)?;
    let bnorm = b.amax().max(1.0);
    for _ in 0..opts.refine_steps {
        let r = &b - &sub * &z;
        if r.amax() <= 1e-14 * bnorm {
            break;
        }
        z += lu.solve(&r)?;
    }
    if !z.iter().all(|v| v.is_finite()) {
        return None;
    }
    Some(z)
}

/// Runs block principal pivoting from the initial free set `free0`.
/// Returns `z` with `min(z, Mz + q)` within tolerance, or `None` on failure.
pub fn solve_from(lcp: &Lcp, free0: &[bool], opts: &PrincipalOptions) -> Option<DVector<f64>> {
    let n = lcp.dim();
    let mut in_free = free0.to_vec();
    let mut best_bad = usize::MAX;
    let mut stalled = 0;
    let qscale = lcp.q.amax().max(1.0);
    let tol = opts.tol * qscale;
    for _ in 0..opts.max_iter {
        let free: Vec<usize> = (0..n).filter(|&i| in_free[i]).collect();
        let zf = solve_block(lcp, &free, opts)?;
        let mut z = DVector::zeros(n);
        for (a, &i) in free.iter().enumerate() {
            z[i] = zf[a];
        }
        let w = lcp.slack(&z);
        let bad: Vec<usize> = (0..n)
            .filter(|&i| if in_free[i] { z[i] < -tol } else { w[i] < -tol })
            .collect();
        if bad.is_empty() {
            // consistency of the block solve
            let worst = free.iter().map(|&i| w[i].abs()).fold(0.0, f64::max);
            if worst > 1e-8 * qscale {
                return None;
            }
            for v in z.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            return Some(z);
        }
        if bad.len() < best_bad {
            best_bad = bad.len();
            stalled = 0;
        } else {
            stalled += 1;
        }
        if stalled < opts.max_block_flips {
            for &i in &bad {
                in_free[i] = !in_free[i];
            }
        } else {
            let i = bad[0];
            in_free[i] = !in_free[i];
        }
    }
    None
}
