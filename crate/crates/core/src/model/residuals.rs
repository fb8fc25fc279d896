use super::scenario::{FollowerDecision, Scenario};
use serde::{Deserialize, Serialize};

/// Physical constraint families of the follower level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    StorageDynamics,
    PurchaseNonnegative,
    ResponseNonnegative,
    ReboundNonpositive,
    EpigraphNonpositive,
    ChargeLower,
    ChargeUpper,
    DischargeLower,
    DischargeUpper,
    StorageLower,
    StorageUpper,
    DemandBalance,
    ResponseMask,
    ReboundMask,
    EpigraphMask,
    /// `t ≥ −p̄·y` on response intervals.
    EpigraphLocal,
    /// `t_i ≥ −((p̄ − β)y_i + β(r − Σ_{j≠i} y_j))`, shared between followers.
    EpigraphCoupling,
    GridCapacity,
    ReboundCap,
}

/// One signed residual. Inequalities are feasible when `value ≤ 0`,
/// equalities when `value = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub kind: ConstraintKind,
    pub prosumer: Option<usize>,
    pub tau: usize,
    pub equality: bool,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub entries: Vec<Residual>,
}

impl ResidualReport {
    /// Largest violation: `max(value, 0)` for inequalities, `|value|` for equalities.
    pub fn max_violation(&self) -> f64 {
        self.entries.iter().map(violation).fold(0.0, f64::max)
    }

    pub fn max_violation_of(&self, kinds: &[ConstraintKind]) -> f64 {
        self.entries.iter().filter(|e| kinds.contains(&e.kind)).map(violation).fold(0.0, f64::max)
    }

    pub fn violated(&self, tol: f64) -> impl Iterator<Item = &Residual> {
        self.entries.iter().filter(move |e| violation(e) > tol)
    }
}

fn violation(e: &Residual) -> f64 {
    if e.equality {
        e.value.abs()
    } else {
        e.value.max(0.0)
    }
}

/// Signed residuals of every local and coupling constraint at `xs`.
pub fn constraint_residuals(xs: &[FollowerDecision], scen: &Scenario) -> ResidualReport {
    use ConstraintKind::*;
    let t = scen.horizon();
    let mut out = Vec::new();
    let mut push = |kind, prosumer, tau, equality, value| {
        out.push(Residual { kind, prosumer, tau, equality, value })
    };
    for (i, (x, spec)) in xs.iter().zip(&scen.prosumers).enumerate() {
        let who = Some(i);
        for k in 0..t {
            let prev = if k == 0 { spec.e0 } else { x.e[k - 1] };
            let dyn_res = x.e[k]
                - prev
                - scen.dt * (spec.eta_c * x.p_charge[k] - spec.eta_dc * x.p_discharge[k]);
            push(StorageDynamics, who, k, true, dyn_res);
            push(PurchaseNonnegative, who, k, false, -x.p[k]);
            push(ResponseNonnegative, who, k, false, -x.y[k]);
            push(ReboundNonpositive, who, k, false, x.k[k]);
            push(EpigraphNonpositive, who, k, false, x.t[k]);
            push(ChargeLower, who, k, false, -x.p_charge[k]);
            push(ChargeUpper, who, k, false, x.p_charge[k] - spec.p_max);
            push(DischargeLower, who, k, false, -x.p_discharge[k]);
            push(DischargeUpper, who, k, false, x.p_discharge[k] - spec.p_max);
            push(StorageLower, who, k, false, -x.e[k]);
            push(StorageUpper, who, k, false, x.e[k] - spec.e_max);
            let need = spec.demand[k] - spec.solar[k] + x.p_charge[k] - x.p_discharge[k];
            push(DemandBalance, who, k, false, need - (x.p[k] - x.k[k]));
            if scen.request[k] <= 0.0 {
                push(ResponseMask, who, k, true, x.y[k]);
                push(EpigraphMask, who, k, true, x.t[k]);
            }
            if scen.request[k] >= 0.0 {
                push(ReboundMask, who, k, true, x.k[k]);
            }
        }
    }
    let cap = scen.effective_capacity();
    for k in 0..t {
        let load: f64 = xs.iter().map(|x| x.p[k] + x.y[k] - x.k[k]).sum();
        push(GridCapacity, None, k, false, load - cap[k]);
        if scen.request[k] < 0.0 {
            let absorbed: f64 = xs.iter().map(|x| -x.k[k]).sum();
            push(ReboundCap, None, k, false, absorbed + scen.request[k]);
        }
    }
    ResidualReport { entries: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::scenario::tests::tiny;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn feasible_point(s: &Scenario) -> Vec<FollowerDecision> {
        s.prosumers
            .iter()
            .map(|spec| {
                let mut x = FollowerDecision::zeros(3);
                x.p = spec.net_load();
                x.e = vec![spec.e0; 3];
                x
            })
            .collect()
    }

    #[test]
    fn constructed_feasible_point_has_no_violation() {
        let s = tiny();
        let r = constraint_residuals(&feasible_point(&s), &s);
        assert_eq!(r.max_violation(), 0.0);
        assert!(r.entries.iter().any(|e| e.kind == ConstraintKind::ReboundCap));
    }

    #[test]
    fn one_step_dynamics() {
        let mut s = tiny();
        s.prosumers[0].e0 = 0.0;
        let mut xs = feasible_point(&s);
        let spec = &s.prosumers[0];
        xs[0].p_charge[0] = spec.p_max;
        xs[0].e[0] = s.dt * spec.eta_c * spec.p_max;
        xs[0].e[1] = xs[0].e[0];
        xs[0].e[2] = xs[0].e[0];
        xs[0].p[0] += spec.p_max;
        let r = constraint_residuals(&xs, &s);
        assert_eq!(r.max_violation_of(&[ConstraintKind::StorageDynamics]), 0.0);
        assert_eq!(r.max_violation(), 0.0);
    }

    #[test]
    fn random_points_match_naive_recomputation() {
        let s = tiny();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let xs: Vec<FollowerDecision> = (0..2)
                .map(|_| {
                    let v: Vec<f64> = (0..21).map(|_| rng.random_range(-3.0..3.0)).collect();
                    FollowerDecision::from_slice(&v)
                })
                .collect();
            let r = constraint_residuals(&xs, &s);
            // capacity at interval 2 (rebound): g − r = 21
            let load: f64 = xs.iter().map(|x| x.p[2] + x.y[2] - x.k[2]).sum();
            let cap = r.entries.iter().find(|e| e.kind == ConstraintKind::GridCapacity && e.tau == 2).unwrap();
            assert_eq!(cap.value, load - 21.0);
            // demand balance of prosumer 1 at interval 0
            let x = &xs[1];
            let naive = 3.0 - 1.0 + x.p_charge[0] - x.p_discharge[0] - x.p[0] + x.k[0];
            let db = r
                .entries
                .iter()
                .find(|e| e.kind == ConstraintKind::DemandBalance && e.prosumer == Some(1) && e.tau == 0)
                .unwrap();
            assert!((db.value - naive).abs() < 1e-12);
            // storage dynamics of prosumer 0 at interval 1
            let x = &xs[0];
            let naive = x.e[1] - x.e[0] - (0.95 * x.p_charge[1] - 1.05 * x.p_discharge[1]);
            let sd = r
                .entries
                .iter()
                .find(|e| e.kind == ConstraintKind::StorageDynamics && e.prosumer == Some(0) && e.tau == 1)
                .unwrap();
            assert!((sd.value - naive).abs() < 1e-12);
            let worst = r.max_violation();
            assert!(r.entries.iter().all(|e| if e.equality { e.value.abs() <= worst } else { e.value <= worst }));
        }
    }
}
