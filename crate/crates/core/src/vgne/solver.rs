use super::kkt::{kkt_residual_with, GameOps, KktReport};
use crate::assembler::{AssembledGame, Reduction};
use crate::lcp::{splitting, Lcp, LcpError, LemkeOptions, LemkeSolver, SplittingOptions};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Pivoting first, splitting when pivoting fails or misses the tolerances.
    Auto,
    Pivoting,
    Splitting,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VgneOptions {
    pub method: Method,
    /// Weight `ε` of the selection term `ε‖x‖²` in every follower's cost.
    pub tikhonov: f64,
    pub tol_stat: f64,
    pub tol_feas: f64,
    pub tol_comp: f64,
    pub lemke: LemkeOptions,
    pub splitting: SplittingOptions,
}

impl Default for VgneOptions {
    fn default() -> Self {
        VgneOptions {
            method: Method::Auto,
            tikhonov: 1e-6,
            tol_stat: 1e-6,
            tol_feas: 1e-6,
            tol_comp: 1e-8,
            lemke: LemkeOptions::default(),
            splitting: SplittingOptions::default(),
        }
    }
}

/// A point of `S(z0)` with its multipliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VgneSolution {
    pub x: Vec<f64>,
    /// Shared multipliers of the coupling rows.
    pub lambda: Vec<f64>,
    /// Multipliers of the local inequality rows.
    pub lambda_local: Vec<f64>,
    /// Multipliers of the equality rows (dynamics and masks).
    pub nu: Vec<f64>,
    pub stat_residual: f64,
    pub comp_residual: f64,
    pub feas_residual: f64,
    pub dual_residual: f64,
    pub method: Method,
    pub pivots: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VgneError {
    #[error("leader decision has length {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("leader decision lies outside the leader box")]
    Inadmissible,
    #[error("follower game is infeasible: {certificate}")]
    Infeasible { certificate: String },
    #[error("iteration limit {limit} reached; natural residual {residual:e}")]
    IterationLimit { limit: usize, residual: f64 },
    #[error(
        "residuals above tolerance: stationarity {:e}, feasibility {:e}, complementarity {:e}",
        .report.stationarity, .report.primal_feasibility, .report.complementarity
    )]
    Tolerance { report: Box<KktReport> },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Reduced KKT system of the followers' VI, independent of `z0` except through `q`.
///
/// The LCP variable is `(u, λ)` where `x = x0 + S u` and `λ` covers the
/// non-sign local rows followed by the coupling rows.
#[derive(Debug, Clone)]
pub struct KktSystem<'g> {
    pub game: &'g AssembledGame,
    pub red: Reduction,
    pub tikhonov: f64,
    matrix: DMatrix<f64>,
    c_base: DVector<f64>,
    stc: DMatrix<f64>,
    h: DVector<f64>,
    eq_chol: Option<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
    ops: GameOps,
}

impl<'g> KktSystem<'g> {
    pub fn new(game: &'g AssembledGame, tikhonov: f64) -> Self {
        let red = Reduction::new(game);
        let mut qe = game.big_q.clone();
        for k in 0..qe.nrows() {
            qe[(k, k)] += 2.0 * tikhonov;
        }
        let qs = &qe * &red.s;
        let p = red.s.tr_mul(&qs);
        let (g, h) = red.rows(game);
        let nu = red.dim();
        let ng = g.nrows();
        let mut m = DMatrix::zeros(nu + ng, nu + ng);
        m.view_mut((0, 0), (nu, nu)).copy_from(&p);
        m.view_mut((0, nu), (nu, ng)).copy_from(&g.transpose());
        m.view_mut((nu, 0), (ng, nu)).copy_from(&(-&g));
        let c_base = red.s.tr_mul(&(&qe * &red.x0 + &game.q_lin));
        let stc = red.s.tr_mul(&game.c_map);
        let eq_chol = (game.e_local.nrows() > 0)
            .then(|| (&game.e_local * game.e_local.transpose()).cholesky())
            .flatten();
        KktSystem { game, red, tikhonov, matrix: m, c_base, stc, h, eq_chol, ops: GameOps::new(game) }
    }

    pub fn lcp_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn lcp_q(&self, z0: &[f64]) -> DVector<f64> {
        let nu = self.red.dim();
        let mut q = DVector::zeros(self.lcp_dim());
        let cu = &self.c_base + &self.stc * DVector::from_column_slice(z0);
        q.rows_mut(0, nu).copy_from(&cu);
        q.rows_mut(nu, self.h.len()).copy_from(&self.h);
        q
    }

    pub fn lcp(&self, z0: &[f64]) -> Lcp {
        Lcp::new(self.matrix.clone(), self.lcp_q(z0))
    }

    /// Maps an LCP solution back to `(x, λ, λ_local, ν)` and its KKT report.
    fn recover(&self, z0: &[f64], z: &DVector<f64>, w: &DVector<f64>) -> (VgneSolution, KktReport) {
        let game = self.game;
        let nu = self.red.dim();
        let nk = self.red.kept_local.len();
        let u = z.rows(0, nu).into_owned();
        let x = self.red.lift(&u);
        let mut lambda_local = vec![0.0; game.f_local.nrows()];
        for (j, &r) in self.red.sign_row.iter().enumerate() {
            lambda_local[r] = w[j].max(0.0);
        }
        for (k, &r) in self.red.kept_local.iter().enumerate() {
            lambda_local[r] = z[nu + k];
        }
        let lambda: Vec<f64> = (0..game.a_coup.nrows()).map(|k| z[nu + nk + k]).collect();

        let g = self.ops.lagrangian_gradient(game, z0, x.as_slice(), &lambda, &lambda_local, self.tikhonov);
        let nu_vec = match &self.eq_chol {
            Some(ch) => ch.solve(&-self.ops.e.mul(g.as_slice())),
            None => super::kkt::equality_multipliers(&game.e_local, &g),
        };
        let report = kkt_residual_with(
            &self.ops,
            game,
            z0,
            x.as_slice(),
            &lambda,
            &lambda_local,
            Some(nu_vec.as_slice()),
            self.tikhonov,
        );
        let sol = VgneSolution {
            x: x.as_slice().to_vec(),
            lambda,
            lambda_local,
            nu: nu_vec.as_slice().to_vec(),
            stat_residual: report.stationarity,
            comp_residual: report.complementarity,
            feas_residual: report.primal_feasibility,
            dual_residual: report.dual_feasibility,
            method: Method::Pivoting,
            pivots: 0,
            iterations: 0,
        };
        (sol, report)
    }
}

/// Follower-equilibrium oracle for a fixed game that keeps its pivoting basis
/// between calls, so nearby leader decisions re-solve in a few pivots.
#[derive(Debug, Clone)]
pub struct VgneSolver<'s> {
    sys: &'s KktSystem<'s>,
    opts: VgneOptions,
    lemke: Option<LemkeSolver>,
}

impl<'s> VgneSolver<'s> {
    pub fn new(sys: &'s KktSystem<'s>, opts: VgneOptions) -> Self {
        VgneSolver { sys, opts, lemke: None }
    }

    pub fn options(&self) -> &VgneOptions {
        &self.opts
    }

    pub fn system(&self) -> &KktSystem<'s> {
        self.sys
    }

    /// Forgets the stored basis.
    pub fn reset(&mut self) {
        if let Some(l) = self.lemke.as_mut() {
            l.reset();
        }
    }

    fn check(&self, z0: &[f64]) -> Result<(), VgneError> {
        let expected = 2 * self.sys.game.layout.t;
        if z0.len() != expected {
            return Err(VgneError::Dimension { expected, got: z0.len() });
        }
        if !self.sys.game.gamma.contains(z0, 1e-12) {
            return Err(VgneError::Inadmissible);
        }
        Ok(())
    }

    fn pivoting(&mut self, z0: &[f64]) -> Result<(VgneSolution, KktReport), VgneError> {
        let q = self.sys.lcp_q(z0);
        let opts = self.opts.lemke;
        let lemke = self.lemke.get_or_insert_with(|| LemkeSolver::new(self.sys.matrix.clone(), opts));
        let sol = lemke.solve(&q).map_err(|e| match e {
            LcpError::Ray { pivots, entering } => VgneError::Infeasible {
                certificate: format!(
                    "complementary pivoting left along an unbounded ray after {pivots} pivots \
                     (entering variable {entering})"
                ),
            },
            LcpError::PivotLimit { limit } => VgneError::IterationLimit { limit, residual: f64::NAN },
            LcpError::IterationLimit { limit, residual } => VgneError::IterationLimit { limit, residual },
            LcpError::Numerical(m) => VgneError::Numerical(m),
        })?;
        let (mut out, rep) = self.sys.recover(z0, &sol.z, &sol.w);
        out.method = Method::Pivoting;
        out.pivots = sol.pivots;
        Ok((out, rep))
    }

    fn splitting(&self, z0: &[f64]) -> Result<(VgneSolution, KktReport), VgneError> {
        let lcp = self.sys.lcp(z0);
        let rep = splitting::solve(&lcp, &self.opts.splitting).map_err(|e| match e {
            LcpError::IterationLimit { limit, residual } => VgneError::IterationLimit { limit, residual },
            other => VgneError::Numerical(other.to_string()),
        })?;
        let w = lcp.slack(&rep.z);
        let (mut out, kkt) = self.sys.recover(z0, &rep.z, &w);
        out.method = Method::Splitting;
        out.iterations = rep.iterations;
        Ok((out, kkt))
    }

    fn accept(&self, r: &KktReport) -> bool {
        r.within(self.opts.tol_stat, self.opts.tol_feas, self.opts.tol_comp)
    }

    pub fn solve(&mut self, z0: &[f64]) -> Result<VgneSolution, VgneError> {
        self.check(z0)?;
        match self.opts.method {
            Method::Pivoting => {
                let (sol, rep) = self.pivoting(z0)?;
                if self.accept(&rep) {
                    Ok(sol)
                } else {
                    Err(VgneError::Tolerance { report: Box::new(rep) })
                }
            }
            Method::Splitting => {
                let (sol, rep) = self.splitting(z0)?;
                if self.accept(&rep) {
                    Ok(sol)
                } else {
                    Err(VgneError::Tolerance { report: Box::new(rep) })
                }
            }
            Method::Auto => {
                let first = self.pivoting(z0);
                let failure = match first {
                    Ok((sol, rep)) if self.accept(&rep) => return Ok(sol),
                    Err(e @ VgneError::Infeasible { .. }) => return Err(e),
                    Ok((_, rep)) => VgneError::Tolerance { report: Box::new(rep) },
                    Err(e) => e,
                };
                log::debug!("pivoting path failed ({failure}); switching to splitting");
                self.reset();
                match self.splitting(z0) {
                    Ok((sol, rep)) if self.accept(&rep) => Ok(sol),
                    Ok((_, rep)) => Err(VgneError::Tolerance { report: Box::new(rep) }),
                    Err(_) => Err(failure),
                }
            }
        }
    }

    /// Solves without reusing the stored basis; the result depends only on `z0`.
    pub fn solve_cold(&mut self, z0: &[f64]) -> Result<VgneSolution, VgneError> {
        self.reset();
        self.solve(z0)
    }
}

/// One-shot solve of the followers' vGNE at `z0`.
pub fn solve_vgne(game: &AssembledGame, z0: &[f64], opts: &VgneOptions) -> Result<VgneSolution, VgneError> {
    let sys = KktSystem::new(game, opts.tikhonov);
    VgneSolver::new(&sys, *opts).solve(z0)
}
