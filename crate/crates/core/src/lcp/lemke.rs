//! Lemke's complementary pivoting on a dense tableau.
//!
//! The tableau stores `B⁻¹ [I | −M | −d | q]` for the current basis `B`, so the
//! identity block always holds `B⁻¹`. That makes two things cheap:
//!
//! * lexicographic ratio tests (rows of `B⁻¹`), and
//! * re-solving for a new `q` with the same `M`: the old complementary basis is
//!   reused and, if it is no longer feasible, the path restarts from the old
//!   solution with covering vector `q_old − q_new`.
//!
//! Variables are numbered `w_0..w_{m-1}`, `z_0..z_{m-1}`, then the artificial `s`.

use super::{Lcp, LcpError, LcpSolution};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemkeOptions {
    /// Entries below this magnitude are not eligible as pivots.
    pub pivot_tol: f64,
    /// Entries below this fraction of the entering column's largest entry are not eligible either.
    pub pivot_rel: f64,
    /// Ratio-test ties are detected with this absolute tolerance.
    pub tie_tol: f64,
    /// Basic values above `-feas_tol·(1 + ‖q‖∞)` count as nonnegative. Keep this near
    /// roundoff: a wrongly accepted basis is a different point when `M` is nearly singular.
    pub feas_tol: f64,
    /// Pivot limit as a multiple of the problem size.
    pub max_pivots_factor: usize,
    /// Residual `‖w − Mz − q‖∞` that triggers refactorization.
    pub refactor_tol: f64,
}

impl Default for LemkeOptions {
    fn default() -> Self {
        LemkeOptions {
            pivot_tol: 1e-11,
            pivot_rel: 1e-9,
            tie_tol: 1e-12,
            feas_tol: 1e-12,
            max_pivots_factor: 50,
            refactor_tol: 1e-9,
        }
    }
}

/// Dot product with four independent accumulators, so it vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

enum WarmOutcome {
    /// The previous basis stays feasible; carries the polished residual.
    Polished(f64),
    Pivoted(usize),
}

/// Reusable Lemke solver for a fixed matrix `M`.
#[derive(Debug, Clone)]
pub struct LemkeSolver {
    m: usize,
    mat: DMatrix<f64>,
    width: usize,
    tab: Vec<f64>,
    basis: Vec<usize>,
    /// Row holding each variable, `usize::MAX` when nonbasic.
    row_of: Vec<usize>,
    warm: bool,
    opts: LemkeOptions,
    total_pivots: usize,
    scratch_idx: Vec<usize>,
    scratch_val: Vec<f64>,
}

const NONBASIC: usize = usize::MAX;

enum Leave {
    Row(usize),
    Ray,
}

impl LemkeSolver {
    pub fn new(mat: DMatrix<f64>, opts: LemkeOptions) -> Self {
        let m = mat.nrows();
        assert_eq!(m, mat.ncols());
        let width = 2 * m + 2;
        LemkeSolver {
            m,
            mat,
            width,
            tab: vec![0.0; m * width],
            basis: (0..m).collect(),
            row_of: vec![NONBASIC; 2 * m + 1],
            warm: false,
            opts,
            total_pivots: 0,
            scratch_idx: Vec::with_capacity(width),
            scratch_val: Vec::with_capacity(width),
        }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    /// Total pivots performed over the lifetime of this solver.
    pub fn total_pivots(&self) -> usize {
        self.total_pivots
    }

    /// Drops the stored basis so the next solve starts cold.
    pub fn reset(&mut self) {
        self.warm = false;
    }

    fn s_var(&self) -> usize {
        2 * self.m
    }

    fn rhs_col(&self) -> usize {
        2 * self.m + 1
    }

    fn complement(&self, v: usize) -> usize {
        if v < self.m {
            v + self.m
        } else {
            v - self.m
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.tab[i * self.width + j]
    }

    fn init_cold(&mut self, q: &DVector<f64>) {
        let (m, w) = (self.m, self.width);
        self.tab.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..m {
            let row = &mut self.tab[i * w..(i + 1) * w];
            row[i] = 1.0;
            for j in 0..m {
                row[m + j] = -self.mat[(i, j)];
            }
            row[2 * m] = -1.0;
            row[2 * m + 1] = q[i];
        }
        self.basis = (0..m).collect();
        self.row_of.iter_mut().for_each(|r| *r = NONBASIC);
        for i in 0..m {
            self.row_of[i] = i;
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let piv = self.tab[r * w + c];
        {
            let row = &mut self.tab[r * w..(r + 1) * w];
            let inv = 1.0 / piv;
            for v in row.iter_mut() {
                *v *= inv;
            }
            row[c] = 1.0;
        }
        self.scratch_idx.clear();
        self.scratch_val.clear();
        for j in 0..w {
            let v = self.tab[r * w + j];
            if v != 0.0 {
                self.scratch_idx.push(j);
                self.scratch_val.push(v);
            }
        }
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.tab[i * w + c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.tab[i * w..(i + 1) * w];
            for (&j, &v) in self.scratch_idx.iter().zip(&self.scratch_val) {
                row[j] -= f * v;
            }
            row[c] = 0.0;
        }
        let leaving = self.basis[r];
        self.row_of[leaving] = NONBASIC;
        self.basis[r] = c;
        self.row_of[c] = r;
        self.total_pivots += 1;
    }

    /// Lexicographic tie-break among `rows` for entering column `c`, least basis index last.
    fn lex_select(&self, mut rows: Vec<usize>, c: usize) -> usize {
        let tol = self.opts.tie_tol;
        for j in 0..self.m {
            if rows.len() <= 1 {
                break;
            }
            let vals: Vec<f64> = rows.iter().map(|&i| self.at(i, j) / self.at(i, c)).collect();
            let best = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            rows = rows
                .into_iter()
                .zip(vals)
                .filter(|(_, v)| *v <= best + tol)
                .map(|(i, _)| i)
                .collect();
        }
        rows.into_iter().min_by_key(|&i| self.basis[i]).expect("nonempty tie set")
    }

    fn ratio_test(&self, c: usize) -> Leave {
        let rhs = self.rhs_col();
        let colmax = (0..self.m).map(|i| self.at(i, c).abs()).fold(0.0, f64::max);
        let tol = self.opts.pivot_tol.max(self.opts.pivot_rel * colmax);
        let mut best = f64::INFINITY;
        for i in 0..self.m {
            let a = self.at(i, c);
            if a > tol {
                let ratio = self.at(i, rhs).max(0.0) / a;
                if ratio < best {
                    best = ratio;
                }
            }
        }
        if !best.is_finite() {
            return Leave::Ray;
        }
        let ties: Vec<usize> = (0..self.m)
            .filter(|&i| {
                let a = self.at(i, c);
                a > tol && self.at(i, rhs).max(0.0) / a <= best + self.opts.tie_tol
            })
            .collect();
        let s = self.s_var();
        if let Some(&i) = ties.iter().find(|&&i| self.basis[i] == s) {
            return Leave::Row(i);
        }
        Leave::Row(self.lex_select(ties, c))
    }

    /// Follows the almost-complementary path from entering variable `enter`
    /// until the artificial leaves.
    fn run_path(&mut self, mut enter: usize, budget: usize, used: &mut usize) -> Result<(), LcpError> {
        let s = self.s_var();
        loop {
            if *used >= budget {
                return Err(LcpError::PivotLimit { limit: budget });
            }
            let r = match self.ratio_test(enter) {
                Leave::Row(r) => r,
                Leave::Ray => return Err(LcpError::Ray { pivots: *used, entering: enter }),
            };
            let leaving = self.basis[r];
            self.pivot(r, enter);
            *used += 1;
            if leaving == s {
                return Ok(());
            }
            enter = self.complement(leaving);
        }
    }

    fn solve_cold(&mut self, q: &DVector<f64>) -> Result<usize, LcpError> {
        self.init_cold(q);
        self.warm = false;
        let budget = self.opts.max_pivots_factor * self.m.max(1);
        let mut used = 0;
        let rhs = self.rhs_col();
        let qmin = (0..self.m).map(|i| q[i]).fold(f64::INFINITY, f64::min);
        if self.m == 0 || qmin >= 0.0 {
            self.warm = true;
            return Ok(0);
        }
        // The artificial enters; the most negative q leaves (lexicographic on ties).
        let ties: Vec<usize> =
            (0..self.m).filter(|&i| self.at(i, rhs) <= qmin + self.opts.tie_tol).collect();
        let s = self.s_var();
        let r = if ties.len() == 1 { ties[0] } else { self.lex_select(ties, s) };
        let leaving = self.basis[r];
        self.pivot(r, s);
        used += 1;
        self.run_path(self.complement(leaving), budget, &mut used)?;
        self.warm = true;
        Ok(used)
    }

    fn solve_warm(&mut self, q: &DVector<f64>) -> Result<WarmOutcome, LcpError> {
        let (m, w) = (self.m, self.width);
        let rhs = self.rhs_col();
        let s = self.s_var();
        let mut a = vec![0.0; m];
        for (i, ai) in a.iter_mut().enumerate() {
            let row = &self.tab[i * w..i * w + m];
            *ai = dot(row, q.as_slice());
        }
        // The stored inverse carries the error of every pivot since the last
        // refactorization, so polish `a` against the true basis before the sign test.
        let res = self.polish(&mut a, q);
        let feas = self.opts.feas_tol * (1.0 + q.amax());
        if a.iter().all(|v| *v >= -feas) {
            for (i, ai) in a.iter().enumerate() {
                self.tab[i * w + rhs] = *ai;
            }
            return Ok(WarmOutcome::Polished(res));
        }
        // Homotopy from the previous solution (s = 1) towards q (s = 0).
        let mut r_best = None;
        let mut s_best = f64::NEG_INFINITY;
        for i in 0..m {
            let old = self.tab[i * w + rhs];
            let c = a[i] - old;
            self.tab[i * w + s] = c;
            if a[i] < -feas {
                if c >= 0.0 {
                    return Err(LcpError::Numerical("inconsistent warm basis".into()));
                }
                let si = a[i] / c;
                if si > s_best + self.opts.tie_tol
                    || (si >= s_best - self.opts.tie_tol
                        && r_best.is_none_or(|rb: usize| self.basis[i] < self.basis[rb]))
                {
                    if si > s_best {
                        s_best = si;
                    }
                    r_best = Some(i);
                }
            }
        }
        for (i, ai) in a.iter().enumerate() {
            self.tab[i * w + rhs] = *ai;
        }
        let r = r_best.expect("some row is infeasible");
        let leaving = self.basis[r];
        self.pivot(r, s);
        let budget = self.opts.max_pivots_factor * m.max(1);
        let mut used = 1;
        self.run_path(self.complement(leaving), budget, &mut used)?;
        Ok(WarmOutcome::Pivoted(used))
    }

    fn extract(&self) -> (DVector<f64>, DVector<f64>) {
        let m = self.m;
        let rhs = self.rhs_col();
        let mut z = DVector::zeros(m);
        let mut w = DVector::zeros(m);
        for (i, &v) in self.basis.iter().enumerate() {
            let val = self.at(i, rhs);
            if v < m {
                w[v] = val;
            } else if v < 2 * m {
                z[v - m] = val;
            }
        }
        (z, w)
    }

    /// `q − (w − Mz)` for basic values `a`, skipping the columns of zero `z`.
    fn basic_residual_of(&self, a: &[f64], q: &DVector<f64>) -> DVector<f64> {
        let m = self.m;
        let mut res = q.clone();
        for (&v, &val) in self.basis.iter().zip(a) {
            if v < m {
                res[v] -= val;
            } else if v < 2 * m && val != 0.0 {
                res.axpy(val, &self.mat.column(v - m), 1.0);
            }
        }
        res
    }

    /// Iterative refinement of basic values `a` with the tableau's `B⁻¹`; returns
    /// the final residual in the max-norm.
    fn polish(&self, a: &mut [f64], q: &DVector<f64>) -> f64 {
        let (m, w) = (self.m, self.width);
        let mut res = self.basic_residual_of(a, q);
        for _ in 0..3 {
            if res.amax() <= 1e-14 * (1.0 + q.amax()) {
                break;
            }
            for (i, ai) in a.iter_mut().enumerate() {
                let row = &self.tab[i * w..i * w + m];
                *ai += dot(row, res.as_slice());
            }
            res = self.basic_residual_of(a, q);
        }
        res.amax()
    }

    /// Polishes the basic values stored in the tableau.
    fn refine(&mut self, q: &DVector<f64>) -> f64 {
        let (m, w) = (self.m, self.width);
        let rhs = self.rhs_col();
        let mut a: Vec<f64> = (0..m).map(|i| self.tab[i * w + rhs]).collect();
        let res = self.polish(&mut a, q);
        for (i, ai) in a.iter().enumerate() {
            self.tab[i * w + rhs] = *ai;
        }
        res
    }

    /// Rebuilds the tableau for the current basis from the original data.
    fn refactor(&mut self, q: &DVector<f64>) -> Result<(), LcpError> {
        let m = self.m;
        let s = self.s_var();
        if self.basis.contains(&s) {
            return Err(LcpError::Numerical("cannot refactor with artificial in basis".into()));
        }
        let mut b = DMatrix::zeros(m, m);
        for (k, &v) in self.basis.iter().enumerate() {
            if v < m {
                b[(v, k)] = 1.0;
            } else {
                for i in 0..m {
                    b[(i, k)] = -self.mat[(i, v - m)];
                }
            }
        }
        let binv = b
            .lu()
            .try_inverse()
            .ok_or_else(|| LcpError::Numerical("singular complementary basis".into()))?;
        let w = self.width;
        let bm = &binv * &self.mat;
        let bq = &binv * q;
        for i in 0..m {
            let row = &mut self.tab[i * w..(i + 1) * w];
            for j in 0..m {
                row[j] = binv[(i, j)];
                row[m + j] = -bm[(i, j)];
            }
            row[2 * m] = 0.0;
            row[2 * m + 1] = bq[i];
        }
        for (k, &v) in self.basis.iter().enumerate() {
            // exact unit columns for basic variables
            for i in 0..m {
                self.tab[i * w + v] = if i == k { 1.0 } else { 0.0 };
            }
        }
        Ok(())
    }

    fn finish(&mut self, q: &DVector<f64>, pivots: usize, polished: Option<f64>) -> Result<LcpSolution, LcpError> {
        let mut res = match polished {
            Some(r) => r,
            None => self.refine(q),
        };
        if res > self.opts.refactor_tol {
            self.refactor(q)?;
            res = self.refine(q);
        }
        if res > self.opts.refactor_tol * 1e3 {
            return Err(LcpError::Numerical(format!("basic residual {res:e} after refactorization")));
        }
        let (z, w) = self.extract();
        let low = z.iter().chain(w.iter()).fold(0.0f64, |m, v| m.min(*v));
        if low < -self.opts.feas_tol * (1.0 + q.amax()) {
            return Err(LcpError::Numerical(format!("basic value {low:e} after the path")));
        }
        Ok(LcpSolution { z, w, pivots })
    }

    /// Solves `LCP(M, q)`, reusing the previous complementary basis when available.
    pub fn solve(&mut self, q: &DVector<f64>) -> Result<LcpSolution, LcpError> {
        assert_eq!(q.len(), self.m);
        if self.warm {
            let attempt = match self.solve_warm(q) {
                Ok(WarmOutcome::Polished(r)) => self.finish(q, 0, Some(r)),
                Ok(WarmOutcome::Pivoted(p)) => self.finish(q, p, None),
                Err(e) => Err(e),
            };
            if let Ok(sol) = attempt {
                return Ok(sol);
            }
        }
        let pivots = self.solve_cold(q)?;
        self.finish(q, pivots, None)
    }

    /// Solves from scratch, ignoring any stored basis.
    pub fn solve_cold_start(&mut self, q: &DVector<f64>) -> Result<LcpSolution, LcpError> {
        let pivots = self.solve_cold(q)?;
        self.finish(q, pivots, None)
    }
}

/// One-shot cold Lemke solve.
pub fn solve(lcp: &Lcp, opts: LemkeOptions) -> Result<LcpSolution, LcpError> {
    LemkeSolver::new(lcp.m.clone(), opts).solve_cold_start(&lcp.q)
}
