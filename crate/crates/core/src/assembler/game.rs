use super::epigraph::build_epigraph;
use super::layout::{Block, Layout, RowSet, RowTag};
use crate::model::{ConstraintKind, Scenario, ValidationError};
use nalgebra::{DMatrix, DVector};

/// Leader box `Γ = {z0 : F z0 ≤ g}` with `z0 = col(c0, α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaderPolytope {
    pub f: DMatrix<f64>,
    pub g: DVector<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl LeaderPolytope {
    pub fn contains(&self, z0: &[f64], tol: f64) -> bool {
        let z = DVector::from_column_slice(z0);
        (&self.f * z - &self.g).iter().all(|v| *v <= tol)
    }

    /// Exact projection onto the box.
    pub fn project(&self, z0: &mut [f64]) {
        for ((z, l), h) in z0.iter_mut().zip(&self.lo).zip(&self.hi) {
            *z = z.clamp(*l, *h);
        }
    }
}

/// Stacked matrices of the followers' game and the leader objective.
///
/// Follower `i` minimizes `½ x_iᵀ(2Q)x_i + (Q Σ_{j≠i} x_j + C_i z0 + q_i)ᵀ x_i`
/// subject to `F_i x_i ≤ f_i`, `E_i x_i = e_i` and the shared `A x ≤ b`.
#[derive(Debug, Clone)]
pub struct AssembledGame {
    pub scenario: Scenario,
    pub layout: Layout,
    /// Per-follower block `Q`, diagonal with `c1` on the purchase entries.
    pub q_block: DMatrix<f64>,
    /// `(I_N + 1 1ᵀ) ⊗ Q`.
    pub big_q: DMatrix<f64>,
    /// Maps `z0` into the pseudo-gradient.
    pub c_map: DMatrix<f64>,
    /// Constant gradient term carrying `μ` and `δ`.
    pub q_lin: DVector<f64>,
    pub f_local: DMatrix<f64>,
    pub f_rhs: DVector<f64>,
    pub local_rows: Vec<RowTag>,
    pub e_local: DMatrix<f64>,
    pub e_rhs: DVector<f64>,
    pub eq_rows: Vec<RowTag>,
    pub a_coup: DMatrix<f64>,
    pub b_coup: DVector<f64>,
    pub coup_rows: Vec<RowTag>,
    pub gamma: LeaderPolytope,
    /// `λ_max(big_q)`, the Lipschitz constant of the pseudo-gradient in `x`.
    pub lipschitz: f64,
}

pub fn assemble(scen: &Scenario) -> Result<AssembledGame, ValidationError> {
    scen.validate()?;
    Ok(assemble_unchecked(scen))
}

pub(crate) fn assemble_unchecked(scen: &Scenario) -> AssembledGame {
    use ConstraintKind::*;
    let (n, t) = (scen.num_prosumers(), scen.horizon());
    let lay = Layout::new(n, t);
    let nx = lay.len();
    let per = lay.per_follower();

    let mut q_block = DMatrix::zeros(per, per);
    for tau in 0..t {
        q_block[(tau, tau)] = scen.c1[tau];
    }
    let mut big_q = DMatrix::zeros(nx, nx);
    for i in 0..n {
        for j in 0..n {
            let w = if i == j { 2.0 } else { 1.0 };
            for tau in 0..t {
                big_q[(lay.idx(i, Block::P, tau), lay.idx(j, Block::P, tau))] = w * scen.c1[tau];
            }
        }
    }

    let mut c_map = DMatrix::zeros(nx, 2 * t);
    let mut q_lin = DVector::zeros(nx);
    for i in 0..n {
        for tau in 0..t {
            c_map[(lay.idx(i, Block::P, tau), tau)] = 1.0;
            c_map[(lay.idx(i, Block::T, tau), t + tau)] = 1.0;
            q_lin[lay.idx(i, Block::Y, tau)] = scen.mu;
            q_lin[lay.idx(i, Block::Charge, tau)] = scen.delta;
            q_lin[lay.idx(i, Block::Discharge, tau)] = scen.delta;
        }
    }

    let epi = build_epigraph(scen);
    let mut local = RowSet::default();
    let mut eq = RowSet::default();
    let mut coup = RowSet::default();
    for (i, spec) in scen.prosumers.iter().enumerate() {
        let tag = |kind, tau| RowTag { kind, prosumer: Some(i), tau };
        let ix = |b, tau| lay.idx(i, b, tau);
        for tau in 0..t {
            let r = scen.request[tau];
            local.push(tag(PurchaseNonnegative, tau), vec![(ix(Block::P, tau), -1.0)], 0.0);
            if r > 0.0 {
                local.push(tag(ResponseNonnegative, tau), vec![(ix(Block::Y, tau), -1.0)], 0.0);
            }
            if r < 0.0 {
                local.push(tag(ReboundNonpositive, tau), vec![(ix(Block::K, tau), 1.0)], 0.0);
            }
            local.push(tag(ChargeLower, tau), vec![(ix(Block::Charge, tau), -1.0)], 0.0);
            local.push(tag(ChargeUpper, tau), vec![(ix(Block::Charge, tau), 1.0)], spec.p_max);
            local.push(tag(DischargeLower, tau), vec![(ix(Block::Discharge, tau), -1.0)], 0.0);
            local.push(tag(DischargeUpper, tau), vec![(ix(Block::Discharge, tau), 1.0)], spec.p_max);
            local.push(tag(StorageLower, tau), vec![(ix(Block::E, tau), -1.0)], 0.0);
            local.push(tag(StorageUpper, tau), vec![(ix(Block::E, tau), 1.0)], spec.e_max);
            local.push(
                tag(DemandBalance, tau),
                vec![
                    (ix(Block::P, tau), -1.0),
                    (ix(Block::K, tau), 1.0),
                    (ix(Block::Charge, tau), 1.0),
                    (ix(Block::Discharge, tau), -1.0),
                ],
                -(spec.demand[tau] - spec.solar[tau]),
            );

            let mut dynamics = vec![
                (ix(Block::E, tau), 1.0),
                (ix(Block::Charge, tau), -scen.dt * spec.eta_c),
                (ix(Block::Discharge, tau), scen.dt * spec.eta_dc),
            ];
            if tau > 0 {
                dynamics.push((ix(Block::E, tau - 1), -1.0));
            }
            eq.push(tag(StorageDynamics, tau), dynamics, if tau == 0 { spec.e0 } else { 0.0 });
            if r <= 0.0 {
                eq.push(tag(ResponseMask, tau), vec![(ix(Block::Y, tau), 1.0)], 0.0);
            }
            if r >= 0.0 {
                eq.push(tag(ReboundMask, tau), vec![(ix(Block::K, tau), 1.0)], 0.0);
            }
        }
    }
    for row in &epi.rows {
        let target = if row.coupling { &mut coup } else { &mut local };
        target.push(row.tag, row.coeffs.clone(), row.rhs);
    }
    for &(i, tau) in &epi.masks {
        eq.push(
            RowTag { kind: EpigraphMask, prosumer: Some(i), tau },
            vec![(lay.idx(i, Block::T, tau), 1.0)],
            0.0,
        );
    }
    let cap = scen.effective_capacity();
    for tau in 0..t {
        let mut coeffs = Vec::with_capacity(3 * n);
        for i in 0..n {
            coeffs.push((lay.idx(i, Block::P, tau), 1.0));
            if scen.request[tau] > 0.0 {
                coeffs.push((lay.idx(i, Block::Y, tau), 1.0));
            }
            if scen.request[tau] < 0.0 {
                coeffs.push((lay.idx(i, Block::K, tau), -1.0));
            }
        }
        coup.push(RowTag { kind: GridCapacity, prosumer: None, tau }, coeffs, cap[tau]);
    }
    for tau in 0..t {
        if scen.request[tau] < 0.0 {
            let coeffs = (0..n).map(|i| (lay.idx(i, Block::K, tau), -1.0)).collect();
            coup.push(RowTag { kind: ReboundCap, prosumer: None, tau }, coeffs, -scen.request[tau]);
        }
    }
    let (f_local, f_rhs) = local.dense(nx);
    let (e_local, e_rhs) = eq.dense(nx);
    let (a_coup, b_coup) = coup.dense(nx);

    let mut gf = DMatrix::zeros(4 * t, 2 * t);
    let mut gg = DVector::zeros(4 * t);
    for tau in 0..t {
        gf[(tau, tau)] = -1.0;
        gg[tau] = -scen.c0_lo[tau];
        gf[(t + tau, tau)] = 1.0;
        gg[t + tau] = scen.c0_hi[tau];
        gf[(2 * t + tau, t + tau)] = -1.0;
        gf[(3 * t + tau, t + tau)] = 1.0;
        gg[3 * t + tau] = 1.0;
    }
    let gamma = LeaderPolytope {
        f: gf,
        g: gg,
        lo: scen.c0_lo.iter().copied().chain(std::iter::repeat_n(0.0, t)).collect(),
        hi: scen.c0_hi.iter().copied().chain(std::iter::repeat_n(1.0, t)).collect(),
    };
    let lipschitz = (n as f64 + 1.0) * scen.c1.iter().cloned().fold(0.0, f64::max);

    AssembledGame {
        scenario: scen.clone(),
        layout: lay,
        q_block,
        big_q,
        c_map,
        q_lin,
        f_local,
        f_rhs,
        local_rows: local.tags,
        e_local,
        e_rhs,
        eq_rows: eq.tags,
        a_coup,
        b_coup,
        coup_rows: coup.tags,
        gamma,
        lipschitz,
    }
}

impl AssembledGame {
    pub fn num_vars(&self) -> usize {
        self.layout.len()
    }

    /// `H(z0, x) = 𝐐x + C z0 + q`.
    pub fn pseudo_gradient(&self, z0: &[f64], x: &[f64]) -> DVector<f64> {
        let x = DVector::from_column_slice(x);
        let z = DVector::from_column_slice(z0);
        &self.big_q * x + &self.c_map * z + &self.q_lin
    }

    /// Leader cost term independent of `x`; identically zero for this market.
    pub fn f0(&self, _z0: &[f64]) -> f64 {
        0.0
    }

    /// `−(Σp)ᵀC1(Σp) + 1ᵀΣt + p̃·1ᵀΣk` (rebound intervals).
    pub fn fx(&self, x: &[f64]) -> f64 {
        let s = &self.scenario;
        let lay = self.layout;
        let mut out = 0.0;
        for tau in 0..lay.t {
            let (mut ps, mut ts, mut ks) = (0.0, 0.0, 0.0);
            for i in 0..lay.n {
                ps += x[lay.idx(i, Block::P, tau)];
                ts += x[lay.idx(i, Block::T, tau)];
                ks += x[lay.idx(i, Block::K, tau)];
            }
            out += -s.c1[tau] * ps * ps + ts;
            if s.request[tau] < 0.0 {
                out += s.p_tilde * ks;
            }
        }
        out
    }

    /// `f0i(x_i) = col(−p_i, −t_i)`.
    pub fn f0i(&self, i: usize, x: &[f64]) -> Vec<f64> {
        let lay = self.layout;
        let t = lay.t;
        let mut out = vec![0.0; 2 * t];
        for tau in 0..t {
            out[tau] = -x[lay.idx(i, Block::P, tau)];
            out[t + tau] = -x[lay.idx(i, Block::T, tau)];
        }
        out
    }

    /// `J^DSO = f0 + fx + (Σ_i f0i)ᵀ z0`.
    pub fn leader_cost(&self, z0: &[f64], x: &[f64]) -> f64 {
        let mut lin = 0.0;
        for i in 0..self.layout.n {
            lin += self.f0i(i, x).iter().zip(z0).map(|(a, b)| a * b).sum::<f64>();
        }
        self.f0(z0) + self.fx(x) + lin
    }

    /// Follower `i`'s epigraph-form cost reconstructed from the matrix data:
    /// `½x_iᵀ(2Q)x_i + (QΣ_{j≠i}x_j + C_i z0 + q_i)ᵀx_i`.
    pub fn follower_cost(&self, i: usize, z0: &[f64], x: &[f64]) -> f64 {
        let per = self.layout.per_follower();
        let xi = DVector::from_column_slice(&x[i * per..(i + 1) * per]);
        let mut others = DVector::zeros(per);
        for j in (0..self.layout.n).filter(|&j| j != i) {
            others += DVector::from_column_slice(&x[j * per..(j + 1) * per]);
        }
        let z = DVector::from_column_slice(z0);
        let ci = self.c_map.rows(i * per, per) * z;
        let qi = self.q_lin.rows(i * per, per);
        let quad = (xi.transpose() * &self.q_block * &xi)[(0, 0)];
        let lin = (&self.q_block * others + ci + qi).dot(&xi);
        quad + lin
    }
}
