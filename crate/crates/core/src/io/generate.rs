//! Seeded random instances for tests, benchmarks and sweeps.

use crate::model::{ProsumerSpec, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Block-structured request: zero gaps of 0–2 intervals alternating with
/// response or rebound blocks of 2–4 intervals whose magnitude is at most
/// `max_share` of `peak`.
pub fn random_request<R: Rng>(rng: &mut R, horizon: usize, peak: f64, max_share: f64) -> Vec<f64> {
    let mut r = vec![0.0; horizon];
    let mut tau = 0;
    while tau < horizon {
        tau += rng.random_range(0..=2);
        if tau >= horizon {
            break;
        }
        let len = rng.random_range(2..=4).min(horizon - tau);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        for slot in r.iter_mut().skip(tau).take(len) {
            *slot = sign * peak * max_share * rng.random_range(0.25..=1.0);
        }
        tau += len;
    }
    r
}

/// Random valid scenario with `n` prosumers and `horizon` hourly intervals.
///
/// Grid capacity leaves headroom above the aggregate net load so a strictly
/// feasible collective decision always exists.
pub fn random_scenario(n: usize, horizon: usize, seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p_bar = rng.random_range(0.5..1.5);
    let beta = rng.random_range(p_bar / n as f64..=p_bar);
    let prosumers: Vec<ProsumerSpec> = (0..n)
        .map(|_| {
            let demand: Vec<f64> = (0..horizon).map(|_| rng.random_range(1.0..5.0)).collect();
            let solar = demand.iter().map(|d| d * rng.random_range(0.0..0.8)).collect();
            let e_max = rng.random_range(2.0..10.0);
            ProsumerSpec {
                demand,
                solar,
                e_max,
                p_max: rng.random_range(1.0..4.0),
                eta_c: rng.random_range(0.85..=1.0),
                eta_dc: rng.random_range(1.0..1.2),
                e0: e_max * rng.random_range(0.1..0.9),
            }
        })
        .collect();
    let net: Vec<f64> = (0..horizon)
        .map(|tau| prosumers.iter().map(|p| p.demand[tau] - p.solar[tau]).sum())
        .collect();
    let peak = (0..horizon)
        .map(|tau| prosumers.iter().map(|p| p.demand[tau]).sum::<f64>())
        .fold(0.0, f64::max);
    let request = random_request(&mut rng, horizon, peak, 0.2);
    let grid_capacity = net.iter().map(|v| v + rng.random_range(2.0..10.0)).collect();
    let c0_lo: Vec<f64> = (0..horizon).map(|_| rng.random_range(0.05..0.2)).collect();
    let c0_hi = c0_lo.iter().map(|l| l + rng.random_range(0.05..0.3)).collect();
    Scenario {
        dt: 1.0,
        request,
        p_bar,
        p_tilde: rng.random_range(0.05..0.5),
        beta,
        c1: (0..horizon).map(|_| rng.random_range(0.01..0.2)).collect(),
        c0_lo,
        c0_hi,
        grid_capacity,
        mu: p_bar * rng.random_range(0.0..0.05),
        delta: rng.random_range(0.005..0.05),
        prosumers,
    }
}

/// Uniform random leader decision in the box of `scen`.
pub fn random_leader<R: Rng>(rng: &mut R, scen: &Scenario) -> Vec<f64> {
    let t = scen.horizon();
    let mut z = Vec::with_capacity(2 * t);
    for tau in 0..t {
        z.push(if scen.c0_hi[tau] > scen.c0_lo[tau] {
            rng.random_range(scen.c0_lo[tau]..=scen.c0_hi[tau])
        } else {
            scen.c0_lo[tau]
        });
    }
    for _ in 0..t {
        z.push(rng.random_range(0.0..=1.0));
    }
    z
}
