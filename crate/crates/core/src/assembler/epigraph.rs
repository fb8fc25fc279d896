//! Epigraph form of the response incentive.
//!
//! On a response interval the follower maximizes the concave piecewise-affine
//! `α·φ_i`, i.e. minimizes `α·t_i` with `t_i ≥ −φ_i` split into its two affine
//! pieces plus `t_i ≤ 0`. The second piece involves the other followers'
//! response, so that row is a coupling constraint.

use super::layout::{Block, Layout, RowTag};
use crate::model::{ConstraintKind, Scenario};

/// One emitted inequality `Σ coeff·x ≤ rhs` over collective indices.
#[derive(Debug, Clone, PartialEq)]
pub struct EpigraphRow {
    pub tag: RowTag,
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
    /// True when the row references another follower's variables.
    pub coupling: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Epigraph {
    pub rows: Vec<EpigraphRow>,
    /// `(prosumer, tau)` pairs where `t` is fixed to zero.
    pub masks: Vec<(usize, usize)>,
}

pub fn build_epigraph(scen: &Scenario) -> Epigraph {
    let (n, t) = (scen.num_prosumers(), scen.horizon());
    let lay = Layout::new(n, t);
    let mut out = Epigraph::default();
    for i in 0..n {
        for tau in 0..t {
            let r = scen.request[tau];
            if r <= 0.0 {
                out.masks.push((i, tau));
                continue;
            }
            let ti = lay.idx(i, Block::T, tau);
            let yi = lay.idx(i, Block::Y, tau);
            let tag = |kind| RowTag { kind, prosumer: Some(i), tau };
            out.rows.push(EpigraphRow {
                tag: tag(ConstraintKind::EpigraphNonpositive),
                coeffs: vec![(ti, 1.0)],
                rhs: 0.0,
                coupling: false,
            });
            out.rows.push(EpigraphRow {
                tag: tag(ConstraintKind::EpigraphLocal),
                coeffs: vec![(ti, -1.0), (yi, -scen.p_bar)],
                rhs: 0.0,
                coupling: false,
            });
            let mut coeffs = vec![(ti, -1.0), (yi, -(scen.p_bar - scen.beta))];
            for j in (0..n).filter(|&j| j != i) {
                coeffs.push((lay.idx(j, Block::Y, tau), scen.beta));
            }
            out.rows.push(EpigraphRow {
                tag: tag(ConstraintKind::EpigraphCoupling),
                coeffs,
                rhs: scen.beta * r,
                coupling: true,
            });
        }
    }
    out
}
