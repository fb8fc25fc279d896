//! DSO and prosumer costs evaluated straight from the market definitions.
//!
//! The `*_epigraph` variants replace the incentive `φ_i` by the auxiliary
//! variable `t_i` carried in [`FollowerDecision::t`]; both agree whenever
//! `t_i = −φ_i`.

use super::rewards::{eval_pi_b, eval_pi_r, incentives};
use super::scenario::{aggregate, FollowerDecision, LeaderDecision, Scenario};
use super::ModelError;

fn check(z0: &LeaderDecision, xs: &[FollowerDecision], scen: &Scenario) -> Result<(), ModelError> {
    let t = scen.horizon();
    if xs.len() != scen.num_prosumers() {
        return Err(ModelError::Dimension { what: "followers", expected: scen.num_prosumers(), got: xs.len() });
    }
    if z0.c0.len() != t || z0.alpha.len() != t {
        return Err(ModelError::Dimension { what: "leader", expected: t, got: z0.c0.len().min(z0.alpha.len()) });
    }
    for x in xs {
        for b in x.blocks() {
            if b.len() != t {
                return Err(ModelError::Dimension { what: "follower block", expected: t, got: b.len() });
            }
        }
    }
    Ok(())
}

fn energy_revenue(z0: &LeaderDecision, pbar: &[f64], scen: &Scenario) -> f64 {
    (0..scen.horizon()).map(|k| (scen.c1[k] * pbar[k] + z0.c0[k]) * pbar[k]).sum()
}

/// DSO cost from the reward functions:
/// `−(C1Σp + c0)ᵀΣp − 1ᵀ((I − Λ)Σφ_i) − 1ᵀπ^B`.
pub fn eval_dso_cost(
    z0: &LeaderDecision,
    xs: &[FollowerDecision],
    scen: &Scenario,
) -> Result<f64, ModelError> {
    check(z0, xs, scen)?;
    let pbar = aggregate(xs, |x| &x.p);
    let kbar = aggregate(xs, |x| &x.k);
    let phi = incentives(xs, scen)?;
    let pi_b = eval_pi_b(&kbar, scen)?;
    let net_response: f64 = (0..scen.horizon())
        .map(|k| (1.0 - z0.alpha[k]) * phi.iter().map(|row| row[k]).sum::<f64>())
        .sum();
    Ok(-energy_revenue(z0, &pbar, scen) - net_response - pi_b.iter().sum::<f64>())
}

/// DSO cost with the response incentive read from the epigraph variables.
pub fn eval_dso_cost_epigraph(
    z0: &LeaderDecision,
    xs: &[FollowerDecision],
    scen: &Scenario,
) -> Result<f64, ModelError> {
    check(z0, xs, scen)?;
    let pbar = aggregate(xs, |x| &x.p);
    let kbar = aggregate(xs, |x| &x.k);
    let tbar = aggregate(xs, |x| &x.t);
    let pi_b = eval_pi_b(&kbar, scen)?;
    let response: f64 = (0..scen.horizon()).map(|k| (1.0 - z0.alpha[k]) * tbar[k]).sum();
    Ok(-energy_revenue(z0, &pbar, scen) + response - pi_b.iter().sum::<f64>())
}

fn private_terms(i: usize, z0: &LeaderDecision, xs: &[FollowerDecision], scen: &Scenario) -> f64 {
    let pbar = aggregate(xs, |x| &x.p);
    let x = &xs[i];
    let t = scen.horizon();
    let purchase: f64 = (0..t).map(|k| (scen.c1[k] * pbar[k] + z0.c0[k]) * x.p[k]).sum();
    let degradation: f64 = scen.delta * x.p_charge.iter().chain(&x.p_discharge).sum::<f64>();
    let discomfort: f64 = scen.mu * x.y.iter().sum::<f64>();
    purchase + degradation + discomfort
}

/// Cost of prosumer `i`: purchase + degradation + discomfort − `Σ_τ α_τ φ_{i,τ}`.
pub fn eval_prosumer_cost(
    i: usize,
    z0: &LeaderDecision,
    xs: &[FollowerDecision],
    scen: &Scenario,
) -> Result<f64, ModelError> {
    check(z0, xs, scen)?;
    if i >= xs.len() {
        return Err(ModelError::Dimension { what: "prosumer index", expected: xs.len(), got: i });
    }
    let phi = incentives(xs, scen)?;
    let incentive: f64 = phi[i].iter().zip(&z0.alpha).map(|(f, a)| a * f).sum();
    Ok(private_terms(i, z0, xs, scen) - incentive)
}

/// Cost of prosumer `i` with the incentive replaced by `Σ_τ α_τ t_{i,τ}`.
pub fn eval_prosumer_cost_epigraph(
    i: usize,
    z0: &LeaderDecision,
    xs: &[FollowerDecision],
    scen: &Scenario,
) -> Result<f64, ModelError> {
    check(z0, xs, scen)?;
    if i >= xs.len() {
        return Err(ModelError::Dimension { what: "prosumer index", expected: xs.len(), got: i });
    }
    let incentive: f64 = xs[i].t.iter().zip(&z0.alpha).map(|(t, a)| a * t).sum();
    Ok(private_terms(i, z0, xs, scen) + incentive)
}

/// Per-interval aggregate response reward at a collective decision; convenience for reports.
pub fn aggregate_response_reward(xs: &[FollowerDecision], scen: &Scenario) -> Result<Vec<f64>, ModelError> {
    eval_pi_r(&aggregate(xs, |x| &x.y), scen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::scenario::ProsumerSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one_by_one() -> Scenario {
        Scenario {
            dt: 1.0,
            request: vec![0.0],
            p_bar: 1.0,
            p_tilde: 0.5,
            beta: 1.0,
            c1: vec![0.1],
            c0_lo: vec![0.0],
            c0_hi: vec![5.0],
            grid_capacity: vec![100.0],
            mu: 0.0,
            delta: 0.01,
            prosumers: vec![ProsumerSpec {
                demand: vec![10.0],
                solar: vec![0.0],
                e_max: 5.0,
                p_max: 2.0,
                eta_c: 1.0,
                eta_dc: 1.0,
                e0: 0.0,
            }],
        }
    }

    #[test]
    fn zero_decisions_cost_nothing() {
        let s = crate::model::scenario::tests::tiny();
        let z0 = s.leader_midpoint();
        let xs = vec![FollowerDecision::zeros(3); 2];
        assert_eq!(eval_dso_cost(&z0, &xs, &s).unwrap(), 0.0);
        assert_eq!(eval_prosumer_cost(0, &z0, &xs, &s).unwrap(), 0.0);
    }

    #[test]
    fn single_interval_examples() {
        let s = one_by_one();
        let z0 = LeaderDecision::new(vec![2.0], vec![0.0]);
        let mut x = FollowerDecision::zeros(1);
        x.p[0] = 10.0;
        assert!((eval_dso_cost(&z0, &[x.clone()], &s).unwrap() + 30.0).abs() < 1e-12);
        x.p_charge[0] = 1.0;
        assert!((eval_prosumer_cost(0, &z0, &[x], &s).unwrap() - 30.01).abs() < 1e-12);
    }

    /// Term-by-term recomputation with explicit loops, independent of the helpers above.
    fn ledger_oracle(z0: &LeaderDecision, xs: &[FollowerDecision], s: &Scenario) -> (f64, Vec<f64>) {
        let (n, t) = (xs.len(), s.horizon());
        let mut dso = 0.0;
        let mut pros = vec![0.0; n];
        for k in 0..t {
            let mut ps = 0.0;
            let mut ys = 0.0;
            let mut ks = 0.0;
            for x in xs {
                ps += x.p[k];
                ys += x.y[k];
                ks += x.k[k];
            }
            let h = s.c1[k] * ps + z0.c0[k];
            dso -= h * ps;
            if s.request[k] < 0.0 {
                dso -= -s.p_tilde * ks;
            }
            for (i, x) in xs.iter().enumerate() {
                let mut phi = 0.0;
                if s.request[k] > 0.0 {
                    let rest = s.request[k] - (ys - x.y[k]);
                    phi = if x.y[k] <= rest { s.p_bar * x.y[k] } else { (s.p_bar - s.beta) * x.y[k] + s.beta * rest };
                }
                dso -= (1.0 - z0.alpha[k]) * phi;
                pros[i] += h * x.p[k] + s.delta * (x.p_charge[k] + x.p_discharge[k]) + s.mu * x.y[k]
                    - z0.alpha[k] * phi;
            }
        }
        (dso, pros)
    }

    #[test]
    fn random_instances_match_ledger_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let mut s = crate::model::scenario::tests::tiny();
            s.request = vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            s.c1 = vec![rng.random_range(0.0..0.2), rng.random_range(0.0..0.2)];
            s.c0_lo = vec![0.0; 2];
            s.c0_hi = vec![1.0; 2];
            s.grid_capacity = vec![50.0; 2];
            for p in &mut s.prosumers {
                p.demand.truncate(2);
                p.solar.truncate(2);
            }
            let z0 = LeaderDecision::new(
                vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)],
                vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)],
            );
            let xs: Vec<FollowerDecision> = (0..2)
                .map(|_| {
                    let mut x = FollowerDecision::zeros(2);
                    for k in 0..2 {
                        x.p[k] = rng.random_range(0.0..5.0);
                        x.y[k] = rng.random_range(0.0..3.0);
                        x.p_charge[k] = rng.random_range(0.0..2.0);
                        x.p_discharge[k] = rng.random_range(0.0..2.0);
                        x.k[k] = -rng.random_range(0.0..2.0);
                    }
                    x
                })
                .collect();
            let (dso, pros) = ledger_oracle(&z0, &xs, &s);
            assert!((eval_dso_cost(&z0, &xs, &s).unwrap() - dso).abs() < 1e-10);
            for i in 0..2 {
                assert!((eval_prosumer_cost(i, &z0, &xs, &s).unwrap() - pros[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn epigraph_form_agrees_when_t_is_minus_phi() {
        let s = crate::model::scenario::tests::tiny();
        let z0 = LeaderDecision::new(vec![0.2, 0.3, 0.1], vec![0.4, 0.7, 0.2]);
        let mut xs = vec![FollowerDecision::zeros(3); 2];
        xs[0].y[0] = 0.5;
        xs[1].y[0] = 2.0;
        xs[0].p = vec![1.0, 2.0, 3.0];
        xs[1].k[2] = -0.5;
        let phi = incentives(&xs, &s).unwrap();
        for (x, f) in xs.iter_mut().zip(&phi) {
            x.t = f.iter().map(|v| -v).collect();
        }
        let a = eval_dso_cost(&z0, &xs, &s).unwrap();
        let b = eval_dso_cost_epigraph(&z0, &xs, &s).unwrap();
        assert!((a - b).abs() < 1e-12);
        for i in 0..2 {
            let a = eval_prosumer_cost(i, &z0, &xs, &s).unwrap();
            let b = eval_prosumer_cost_epigraph(i, &z0, &xs, &s).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }
}
