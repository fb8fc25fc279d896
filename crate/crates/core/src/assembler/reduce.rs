//! Elimination of the equality constraints.
//!
//! Every feasible `x` is `x0 + S u` with `u ≥ 0`: masked variables are dropped,
//! storage levels follow from the cumulative dynamics, and the sign-constrained
//! variables `k ≤ 0`, `t ≤ 0` enter through `k = −k'`, `t = −t'`. The sign rows
//! of `F` become the bounds `u ≥ 0`; the remaining rows act on `u` through `S`.

use super::game::AssembledGame;
use super::layout::Block;
use crate::model::ConstraintKind;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct Reduction {
    /// `nx × nu` basis of the equality null space.
    pub s: DMatrix<f64>,
    /// Particular solution of the equalities (initial storage carried forward).
    pub x0: DVector<f64>,
    /// Follower, block and interval of each reduced coordinate.
    pub coords: Vec<(usize, Block, usize)>,
    /// For each reduced coordinate, the local sign row it replaces.
    pub sign_row: Vec<usize>,
    /// Local rows that are not sign rows, in assembly order.
    pub kept_local: Vec<usize>,
}

fn sign_block(kind: ConstraintKind) -> Option<Block> {
    use ConstraintKind::*;
    match kind {
        PurchaseNonnegative => Some(Block::P),
        ResponseNonnegative => Some(Block::Y),
        ChargeLower => Some(Block::Charge),
        DischargeLower => Some(Block::Discharge),
        ReboundNonpositive => Some(Block::K),
        EpigraphNonpositive => Some(Block::T),
        _ => None,
    }
}

impl Reduction {
    pub fn new(game: &AssembledGame) -> Self {
        let scen = &game.scenario;
        let lay = game.layout;
        let (n, t) = (lay.n, lay.t);
        let mut coords = Vec::new();
        for i in 0..n {
            for b in [Block::P, Block::Y, Block::Charge, Block::Discharge, Block::K, Block::T] {
                for tau in 0..t {
                    let live = match b {
                        Block::Y | Block::T => scen.is_response(tau),
                        Block::K => scen.is_rebound(tau),
                        _ => true,
                    };
                    if live {
                        coords.push((i, b, tau));
                    }
                }
            }
        }
        let nu = coords.len();
        let mut s = DMatrix::zeros(lay.len(), nu);
        for (u, &(i, b, tau)) in coords.iter().enumerate() {
            let spec = &scen.prosumers[i];
            match b {
                Block::K | Block::T => s[(lay.idx(i, b, tau), u)] = -1.0,
                Block::Charge | Block::Discharge => {
                    s[(lay.idx(i, b, tau), u)] = 1.0;
                    let gain = if b == Block::Charge {
                        scen.dt * spec.eta_c
                    } else {
                        -scen.dt * spec.eta_dc
                    };
                    for later in tau..t {
                        s[(lay.idx(i, Block::E, later), u)] = gain;
                    }
                }
                _ => s[(lay.idx(i, b, tau), u)] = 1.0,
            }
        }
        let mut x0 = DVector::zeros(lay.len());
        for (i, spec) in scen.prosumers.iter().enumerate() {
            for tau in 0..t {
                x0[lay.idx(i, Block::E, tau)] = spec.e0;
            }
        }

        let mut sign_row = vec![usize::MAX; nu];
        let mut kept_local = Vec::new();
        let lookup: std::collections::HashMap<(usize, Block, usize), usize> =
            coords.iter().enumerate().map(|(u, c)| (*c, u)).collect();
        for (r, tag) in game.local_rows.iter().enumerate() {
            let hit = sign_block(tag.kind)
                .and_then(|b| lookup.get(&(tag.prosumer.expect("local row"), b, tag.tau)));
            match hit {
                Some(&u) => sign_row[u] = r,
                None => kept_local.push(r),
            }
        }
        debug_assert!(sign_row.iter().all(|r| *r != usize::MAX));
        Reduction { s, x0, coords, sign_row, kept_local }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn lift(&self, u: &DVector<f64>) -> DVector<f64> {
        &self.x0 + &self.s * u
    }

    /// Non-sign inequality rows in reduced coordinates: kept local rows followed
    /// by the coupling rows, as `G u ≤ h`.
    pub fn rows(&self, game: &AssembledGame) -> (DMatrix<f64>, DVector<f64>) {
        let nk = self.kept_local.len();
        let nc = game.a_coup.nrows();
        let mut full = DMatrix::zeros(nk + nc, game.num_vars());
        let mut rhs = DVector::zeros(nk + nc);
        for (k, &r) in self.kept_local.iter().enumerate() {
            full.row_mut(k).copy_from(&game.f_local.row(r));
            rhs[k] = game.f_rhs[r];
        }
        full.rows_mut(nk, nc).copy_from(&game.a_coup);
        rhs.rows_mut(nk, nc).copy_from(&game.b_coup);
        let h = rhs - &full * &self.x0;
        (full * &self.s, h)
    }
}
