//! Interior-point probe for the collective feasible set.
//!
//! Solves the Chebyshev-centre LP `max s` subject to `G u + ‖G_r‖ s ≤ h`,
//! `u ≥ s`, `0 ≤ s ≤ cap` in reduced coordinates. A positive optimal `s` is a
//! Slater point; `s = 0` means feasible without interior; LP infeasibility means
//! the followers' game has no feasible collective decision at all.

use super::game::AssembledGame;
use super::reduce::Reduction;
use crate::lcp::{lemke, Lcp, LcpError, LemkeOptions};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct FeasibilityProbe {
    /// Reduced coordinates of the centre.
    pub u: DVector<f64>,
    /// Collective decision at the centre.
    pub x: DVector<f64>,
    /// Euclidean distance (in reduced coordinates) to the nearest inequality, capped.
    pub margin: f64,
}

impl FeasibilityProbe {
    pub fn is_strictly_feasible(&self) -> bool {
        self.margin > 1e-9
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProbeError {
    #[error("the collective feasible set is empty")]
    Infeasible,
    #[error("probe LP failed: {0}")]
    Solver(LcpError),
}

pub fn feasibility_probe(game: &AssembledGame, red: &Reduction, cap: f64) -> Result<FeasibilityProbe, ProbeError> {
    let (g, h) = red.rows(game);
    let nu = red.dim();
    let ng = g.nrows();
    // variables v = (u, s), rows: [G | ‖G_r‖] v ≤ h, [−I | 1] v ≤ 0, s ≤ cap
    let nv = nu + 1;
    let nr = ng + nu + 1;
    let mut a = DMatrix::zeros(nr, nv);
    let mut b = DVector::zeros(nr);
    for r in 0..ng {
        a.view_mut((r, 0), (1, nu)).copy_from(&g.row(r));
        a[(r, nu)] = g.row(r).norm();
        b[r] = h[r];
    }
    for j in 0..nu {
        a[(ng + j, j)] = -1.0;
        a[(ng + j, nu)] = 1.0;
    }
    a[(ng + nu, nu)] = 1.0;
    b[ng + nu] = cap;
    let mut c = DVector::zeros(nv);
    c[nu] = -1.0;

    let dim = nv + nr;
    let mut m = DMatrix::zeros(dim, dim);
    m.view_mut((0, nv), (nv, nr)).copy_from(&a.transpose());
    m.view_mut((nv, 0), (nr, nv)).copy_from(&(-&a));
    let mut q = DVector::zeros(dim);
    q.rows_mut(0, nv).copy_from(&c);
    q.rows_mut(nv, nr).copy_from(&b);
    let sol = match lemke::solve(&Lcp::new(m, q), LemkeOptions::default()) {
        Ok(s) => s,
        Err(LcpError::Ray { .. }) => return Err(ProbeError::Infeasible),
        Err(e) => return Err(ProbeError::Solver(e)),
    };
    let u = sol.z.rows(0, nu).into_owned();
    let margin = sol.z[nu];
    let x = red.lift(&u);
    Ok(FeasibilityProbe { u, x, margin })
}
