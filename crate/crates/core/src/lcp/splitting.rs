//! Projected extragradient iteration for monotone LCPs.
//!
//! `z ← Π₊(z − γ(M Π₊(z − γ(Mz + q)) + q))` with a fixed step `γ < 1/‖M‖₂`.
//! The iteration identifies the active set long before it converges to machine
//! precision, so every `polish_every` steps the current support is handed to
//! [`principal::solve_from`](super::principal::solve_from) for an exact finish.

use super::principal::{self, PrincipalOptions};
use super::{Lcp, LcpError};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingOptions {
    /// Step as a fraction of `1/‖M‖₂`.
    pub step_factor: f64,
    pub max_iter: usize,
    pub polish_every: usize,
    /// Natural-residual target for the polished point, relative to `max(1, ‖q‖∞)`.
    pub tol: f64,
    pub principal: PrincipalOptions,
}

impl Default for SplittingOptions {
    fn default() -> Self {
        SplittingOptions {
            step_factor: 0.9,
            max_iter: 200_000,
            polish_every: 200,
            tol: 1e-10,
            principal: PrincipalOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplittingReport {
    pub z: DVector<f64>,
    pub iterations: usize,
    pub polish_attempts: usize,
    pub step: f64,
    pub residual: f64,
}

/// Spectral norm estimate by power iteration on `MᵀM`, padded by 1%.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    let n = m.ncols();
    if n == 0 {
        return 0.0;
    }
    let mut v = DVector::from_fn(n, |i, _| 1.0 + (i % 7) as f64 * 0.1);
    v /= v.norm();
    let mut est = 0.0;
    for _ in 0..500 {
        let u = m * &v;
        let nv = m.transpose() * u;
        let norm = nv.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm.sqrt();
        v = nv / norm;
        if (next - est).abs() <= 1e-10 * next {
            est = next;
            break;
        }
        est = next;
    }
    // power iteration underestimates; the Frobenius norm is a hard upper bound
    (est * 1.01).min(m.norm())
}

fn project(v: &mut DVector<f64>) {
    for x in v.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

/// Solves `LCP(M, q)` for monotone `M`.
pub fn solve(lcp: &Lcp, opts: &SplittingOptions) -> Result<SplittingReport, LcpError> {
    let n = lcp.dim();
    let lip = spectral_norm(&lcp.m);
    let step = if lip > 0.0 { opts.step_factor / lip } else { 1.0 };
    let scale = lcp.q.amax().max(1.0);
    let mut z = DVector::zeros(n);
    project(&mut z);
    let mut polish_attempts = 0;
    for it in 1..=opts.max_iter {
        let mut half = &z - (&lcp.m * &z + &lcp.q) * step;
        project(&mut half);
        let mut next = &z - (&lcp.m * &half + &lcp.q) * step;
        project(&mut next);
        z = next;
        if it % opts.polish_every == 0 || it == opts.max_iter {
            let w = lcp.slack(&z);
            let free: Vec<bool> = (0..n).map(|i| z[i] > w[i]).collect();
            polish_attempts += 1;
            if let Some(p) = principal::solve_from(lcp, &free, &opts.principal) {
                let residual = lcp.natural_residual(&p);
                if residual <= opts.tol * scale {
                    return Ok(SplittingReport { z: p, iterations: it, polish_attempts, step, residual });
                }
            }
        }
    }
    Err(LcpError::IterationLimit { limit: opts.max_iter, residual: lcp.natural_residual(&z) })
}
