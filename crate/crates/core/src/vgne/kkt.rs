use super::sparse::Csr;
use crate::assembler::AssembledGame;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// KKT residuals of the followers' variational problem.
///
/// Feasibility is measured per row after dividing by the row's largest
/// coefficient; stationarity is absolute in the max-norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub stationarity: f64,
    pub primal_feasibility: f64,
    pub dual_feasibility: f64,
    pub complementarity: f64,
    /// `|λ_j · slack_j|` per local inequality row.
    pub comp_local: Vec<f64>,
    /// `|λ_j · slack_j|` per coupling row.
    pub comp_coupling: Vec<f64>,
}

impl KktReport {
    pub fn within(&self, tol_stat: f64, tol_feas: f64, tol_comp: f64) -> bool {
        self.stationarity <= tol_stat
            && self.primal_feasibility <= tol_feas
            && self.dual_feasibility <= tol_feas
            && self.complementarity <= tol_comp
    }
}

/// Equality multipliers minimizing `‖g + Eᵀν‖₂`.
pub(crate) fn equality_multipliers(e: &DMatrix<f64>, g: &DVector<f64>) -> DVector<f64> {
    if e.nrows() == 0 {
        return DVector::zeros(0);
    }
    let gram = e * e.transpose();
    let rhs = -(e * g);
    match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => gram.svd(true, true).solve(&rhs, 1e-12).unwrap_or_else(|_| DVector::zeros(e.nrows())),
    }
}

/// Sparse copies of the game operators used by the residual computation.
#[derive(Debug, Clone)]
pub(crate) struct GameOps {
    q: Csr,
    c: Csr,
    pub f: Csr,
    pub a: Csr,
    pub e: Csr,
    f_scale: Vec<f64>,
    a_scale: Vec<f64>,
    e_scale: Vec<f64>,
}

impl GameOps {
    pub fn new(game: &AssembledGame) -> Self {
        let (f, a, e) = (Csr::from_dense(&game.f_local), Csr::from_dense(&game.a_coup), Csr::from_dense(&game.e_local));
        GameOps {
            q: Csr::from_dense(&game.big_q),
            c: Csr::from_dense(&game.c_map),
            f_scale: f.row_scales(),
            a_scale: a.row_scales(),
            e_scale: e.row_scales(),
            f,
            a,
            e,
        }
    }

    /// `H(z0, x) + 2εx + F_locᵀλ_loc + Aᵀλ`.
    pub fn lagrangian_gradient(
        &self,
        game: &AssembledGame,
        z0: &[f64],
        x: &[f64],
        lambda: &[f64],
        lambda_local: &[f64],
        tikhonov: f64,
    ) -> DVector<f64> {
        let mut g = self.q.mul(x) + self.c.mul(z0) + &game.q_lin;
        for (gk, xk) in g.iter_mut().zip(x) {
            *gk += 2.0 * tikhonov * xk;
        }
        self.f.tr_mul_add(lambda_local, &mut g);
        self.a.tr_mul_add(lambda, &mut g);
        g
    }
}

/// Residuals of the KKT system at `(x, λ, λ_local, ν)`.
///
/// `nu = None` uses the least-squares equality multipliers. `tikhonov` is the weight `ε` of `ε‖x‖²` and adds `2εx`
/// to the pseudo-gradient, matching a solve with the same regularization.
pub fn kkt_residual(
    game: &AssembledGame,
    z0: &[f64],
    x: &[f64],
    lambda: &[f64],
    lambda_local: &[f64],
    nu: Option<&[f64]>,
    tikhonov: f64,
) -> KktReport {
    kkt_residual_with(&GameOps::new(game), game, z0, x, lambda, lambda_local, nu, tikhonov)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn kkt_residual_with(
    ops: &GameOps,
    game: &AssembledGame,
    z0: &[f64],
    x: &[f64],
    lambda: &[f64],
    lambda_local: &[f64],
    nu: Option<&[f64]>,
    tikhonov: f64,
) -> KktReport {
    let mut g = ops.lagrangian_gradient(game, z0, x, lambda, lambda_local, tikhonov);
    let nu = match nu {
        Some(v) => DVector::from_column_slice(v),
        None => equality_multipliers(&game.e_local, &g),
    };
    ops.e.tr_mul_add(nu.as_slice(), &mut g);
    let stationarity = g.amax();

    let mut primal: f64 = 0.0;
    let slack_l = &game.f_rhs - ops.f.mul(x);
    let slack_c = &game.b_coup - ops.a.mul(x);
    for (s, sc) in slack_l.iter().zip(&ops.f_scale).chain(slack_c.iter().zip(&ops.a_scale)) {
        primal = primal.max(-s / sc);
    }
    let eq = ops.e.mul(x) - &game.e_rhs;
    for (v, sc) in eq.iter().zip(&ops.e_scale) {
        primal = primal.max(v.abs() / sc);
    }
    let dual = lambda.iter().chain(lambda_local).fold(0.0f64, |m, v| m.max(-v));
    let comp_local: Vec<f64> = lambda_local.iter().zip(slack_l.iter()).map(|(l, s)| (l * s).abs()).collect();
    let comp_coupling: Vec<f64> = lambda.iter().zip(slack_c.iter()).map(|(l, s)| (l * s).abs()).collect();
    let complementarity = comp_local.iter().chain(&comp_coupling).fold(0.0f64, |m, v| m.max(*v));
    KktReport {
        stationarity,
        primal_feasibility: primal.max(0.0),
        dual_feasibility: dual.max(0.0),
        complementarity,
        comp_local,
        comp_coupling,
    }
}
