//! Closed-form market rewards and the affine pricing map.
//!
//! Scalar functions take the per-interval quantities directly; the vector
//! versions evaluate every interval of a [`Scenario`].

use super::scenario::{FollowerDecision, LeaderDecision, Scenario};
use super::ModelError;
use serde::{Deserialize, Serialize};

/// Aggregate response reward paid by the TSO for one interval.
///
/// Zero when `r ≤ 0`; `p̄·ȳ` up to the request; `(p̄ − Nβ)·ȳ + Nβ·r` beyond it.
pub fn response_reward(p_bar: f64, beta: f64, n: usize, r: f64, ybar: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else if ybar <= r {
        p_bar * ybar
    } else {
        let nb = n as f64 * beta;
        (p_bar - nb) * ybar + nb * r
    }
}

/// Incentive share of one prosumer for one interval.
///
/// `y_others` is the response already supplied by everybody else. The value is
/// negative when the others alone exceed the request and `y_i` is small.
pub fn individual_incentive(p_bar: f64, beta: f64, r: f64, y_i: f64, y_others: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else if y_i <= r - y_others {
        p_bar * y_i
    } else {
        (p_bar - beta) * y_i + beta * (r - y_others)
    }
}

/// Rebound reward for one interval; `kbar ≤ 0` is the aggregate rebound.
pub fn rebound_reward(p_tilde: f64, r: f64, kbar: f64) -> f64 {
    if r >= 0.0 {
        0.0
    } else {
        -p_tilde * kbar
    }
}

fn check_len(what: &'static str, got: usize, expected: usize) -> Result<(), ModelError> {
    if got == expected {
        Ok(())
    } else {
        Err(ModelError::Dimension { what, expected, got })
    }
}

/// Per-interval aggregate response reward `π^R(ȳ)`.
pub fn eval_pi_r(ybar: &[f64], scen: &Scenario) -> Result<Vec<f64>, ModelError> {
    check_len("ybar", ybar.len(), scen.horizon())?;
    let n = scen.num_prosumers();
    Ok(ybar
        .iter()
        .zip(&scen.request)
        .map(|(y, r)| response_reward(scen.p_bar, scen.beta, n, *r, *y))
        .collect())
}

/// Per-interval incentive `φ_i^R` given the prosumer's own response and the others' sum.
pub fn eval_phi_r(y_i: &[f64], y_others: &[f64], scen: &Scenario) -> Result<Vec<f64>, ModelError> {
    check_len("y_i", y_i.len(), scen.horizon())?;
    check_len("y_others", y_others.len(), scen.horizon())?;
    Ok((0..scen.horizon())
        .map(|k| individual_incentive(scen.p_bar, scen.beta, scen.request[k], y_i[k], y_others[k]))
        .collect())
}

/// Per-interval rebound reward `π^B(k̄)`.
pub fn eval_pi_b(kbar: &[f64], scen: &Scenario) -> Result<Vec<f64>, ModelError> {
    check_len("kbar", kbar.len(), scen.horizon())?;
    Ok(kbar
        .iter()
        .zip(&scen.request)
        .map(|(k, r)| rebound_reward(scen.p_tilde, *r, *k))
        .collect())
}

/// Affine pricing map `h = C1·p̄ + c0`.
pub fn eval_price(pbar: &[f64], c0: &[f64], scen: &Scenario) -> Result<Vec<f64>, ModelError> {
    check_len("pbar", pbar.len(), scen.horizon())?;
    check_len("c0", c0.len(), scen.horizon())?;
    Ok((0..scen.horizon()).map(|k| scen.c1[k] * pbar[k] + c0[k]).collect())
}

/// Incentives of every prosumer, indexed `[i][τ]`.
pub fn incentives(xs: &[FollowerDecision], scen: &Scenario) -> Result<Vec<Vec<f64>>, ModelError> {
    check_len("followers", xs.len(), scen.num_prosumers())?;
    let t = scen.horizon();
    let ybar = super::scenario::aggregate(xs, |x| &x.y);
    xs.iter()
        .map(|x| {
            check_len("y", x.y.len(), t)?;
            let others: Vec<f64> = ybar.iter().zip(&x.y).map(|(a, b)| a - b).collect();
            eval_phi_r(&x.y, &others, scen)
        })
        .collect()
}

/// Who earns what, interval by interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardLedger {
    /// Aggregate response reward paid to the DSO.
    pub pi_r: Vec<f64>,
    /// Rebound reward paid to the DSO.
    pub pi_b: Vec<f64>,
    /// Incentive `φ_i^R` of each prosumer, `[i][τ]`.
    pub phi: Vec<Vec<f64>>,
    /// Incentive actually transferred, `α·φ_i^R`, `[i][τ]`.
    pub transferred: Vec<Vec<f64>>,
    /// Response reward kept by the DSO, `(1 − α)·Σφ`.
    pub dso_net: Vec<f64>,
    /// Energy sales `h·Σp`.
    pub energy_revenue: Vec<f64>,
    /// `(prosumer, interval)` pairs where the incentive is negative.
    pub negative_incentive: Vec<(usize, usize)>,
}

impl RewardLedger {
    pub fn build(
        z0: &LeaderDecision,
        xs: &[FollowerDecision],
        scen: &Scenario,
    ) -> Result<Self, ModelError> {
        let t = scen.horizon();
        check_len("alpha", z0.alpha.len(), t)?;
        let phi = incentives(xs, scen)?;
        let ybar = super::scenario::aggregate(xs, |x| &x.y);
        let kbar = super::scenario::aggregate(xs, |x| &x.k);
        let pbar = super::scenario::aggregate(xs, |x| &x.p);
        let pi_r = eval_pi_r(&ybar, scen)?;
        let pi_b = eval_pi_b(&kbar, scen)?;
        let price = eval_price(&pbar, &z0.c0, scen)?;
        let transferred: Vec<Vec<f64>> = phi
            .iter()
            .map(|row| row.iter().zip(&z0.alpha).map(|(f, a)| a * f).collect())
            .collect();
        let phi_sum: Vec<f64> = (0..t).map(|k| phi.iter().map(|row| row[k]).sum()).collect();
        let dso_net = phi_sum.iter().zip(&z0.alpha).map(|(s, a)| (1.0 - a) * s).collect();
        let energy_revenue = price.iter().zip(&pbar).map(|(h, p)| h * p).collect();
        let negative_incentive = phi
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                row.iter().enumerate().filter(|(_, v)| **v < 0.0).map(move |(k, _)| (i, k))
            })
            .collect();
        Ok(RewardLedger { pi_r, pi_b, phi, transferred, dso_net, energy_revenue, negative_incentive })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn response_reward_examples() {
        assert_eq!(response_reward(10.0, 4.0, 3, -1.0, 3.0), 0.0);
        assert_eq!(response_reward(10.0, 4.0, 3, 5.0, 3.0), 30.0);
        // min(10·8, (10 − 12)·8 + 12·5) = min(80, 44)
        assert_eq!(response_reward(10.0, 4.0, 3, 5.0, 8.0), 44.0);
    }

    #[test]
    fn incentive_examples() {
        assert_eq!(individual_incentive(10.0, 4.0, 0.0, 2.0, 0.0), 0.0);
        assert_eq!(individual_incentive(10.0, 4.0, 5.0, 2.0, 2.0), 20.0);
        // min(40, 6·4 + 4·3)
        assert_eq!(individual_incentive(10.0, 4.0, 5.0, 4.0, 2.0), 36.0);
    }

    #[test]
    fn rebound_examples() {
        assert_eq!(rebound_reward(3.0, 2.0, 0.0), 0.0);
        assert_eq!(rebound_reward(3.0, -4.0, -2.0), 6.0);
        assert_eq!(rebound_reward(3.0, -4.0, 0.0), 0.0);
    }

    #[test]
    fn price_examples() {
        let mut s = crate::model::scenario::tests::tiny();
        s.request = vec![0.0];
        s.c1 = vec![0.1];
        s.c0_lo = vec![0.0];
        s.c0_hi = vec![5.0];
        s.grid_capacity = vec![100.0];
        assert_eq!(eval_price(&[10.0], &[2.0], &s).unwrap(), vec![3.0]);
        s.c1 = vec![0.0];
        assert_eq!(eval_price(&[123.0], &[2.0], &s).unwrap(), vec![2.0]);
        s.c1 = vec![0.05];
        assert!((eval_price(&[40.0], &[1.5], &s).unwrap()[0] - 3.5).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let s = crate::model::scenario::tests::tiny();
        assert!(matches!(eval_pi_r(&[1.0], &s), Err(ModelError::Dimension { .. })));
        assert!(eval_pi_b(&[0.0; 4], &s).is_err());
    }

    fn min_form_total(p_bar: f64, beta: f64, n: usize, r: f64, ybar: f64) -> f64 {
        let nb = n as f64 * beta;
        if r <= 0.0 {
            0.0
        } else {
            (p_bar * ybar).min((p_bar - nb) * ybar + nb * r)
        }
    }

    proptest! {
        #[test]
        fn branches_equal_min_of_affine_pieces(
            p_bar in 0.1f64..10.0, n in 1usize..6, frac in 0.0f64..1.0,
            r in -5.0f64..5.0, y in 0.0f64..20.0, yo in 0.0f64..20.0,
        ) {
            let beta = p_bar / n as f64 + frac * (p_bar - p_bar / n as f64);
            let a = response_reward(p_bar, beta, n, r, y);
            let b = min_form_total(p_bar, beta, n, r, y);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            let phi = individual_incentive(p_bar, beta, r, y, yo);
            let phi_min = if r <= 0.0 { 0.0 } else { (p_bar * y).min((p_bar - beta) * y + beta * (r - yo)) };
            prop_assert!((phi - phi_min).abs() <= 1e-12 * (1.0 + phi.abs()));
        }

        #[test]
        fn kinks_are_continuous(p_bar in 0.1f64..10.0, n in 1usize..6, r in 0.01f64..10.0, yo in 0.0f64..5.0) {
            let beta = 1.3 * p_bar / n as f64;
            let left = p_bar * r;
            let right = (p_bar - n as f64 * beta) * r + n as f64 * beta * r;
            prop_assert!((left - right).abs() <= 1e-12 * left.abs().max(1.0));
            let yi = r - yo;
            let l = p_bar * yi;
            let rr = (p_bar - beta) * yi + beta * (r - yo);
            prop_assert!((l - rr).abs() <= 1e-12 * l.abs().max(1.0));
        }

        #[test]
        fn simple_saturation_is_flat(p_bar in 0.1f64..10.0, n in 1usize..6, r in 0.01f64..10.0, extra in 0.0f64..10.0) {
            let beta = p_bar / n as f64;
            let at = response_reward(p_bar, beta, n, r, r);
            let beyond = response_reward(p_bar, beta, n, r, r + extra);
            prop_assert!((at - beyond).abs() <= 1e-12 * at.max(1.0));
            let steeper = response_reward(p_bar, 1.5 * beta, n, r, r + extra + 0.1);
            prop_assert!(steeper < response_reward(p_bar, 1.5 * beta, n, r, r));
        }
    }
}
