use serde::{Deserialize, Serialize};
use std::fmt;

/// Classification of a scheduling interval by the sign of the request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalClass {
    /// `r = 0`: no ancillary service requested.
    NoService,
    /// `r > 0`: consumption reduction requested.
    Response,
    /// `r < 0`: extra consumption requested.
    Rebound,
}

impl IntervalClass {
    pub fn of(r: f64) -> Self {
        if r > 0.0 {
            IntervalClass::Response
        } else if r < 0.0 {
            IntervalClass::Rebound
        } else {
            IntervalClass::NoService
        }
    }
}

/// Physical description of one prosumer.
///
/// Storage follows `e[τ] = e[τ-1] + dt·(eta_c·pC[τ] − eta_dc·pDC[τ])`, so a lossy
/// battery has `eta_c ≤ 1` and `eta_dc ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProsumerSpec {
    /// Fixed load per interval, kW.
    pub demand: Vec<f64>,
    /// Renewable generation per interval, kW.
    pub solar: Vec<f64>,
    /// Storage capacity, kWh.
    pub e_max: f64,
    /// Charge/discharge power limit, kW.
    pub p_max: f64,
    pub eta_c: f64,
    pub eta_dc: f64,
    /// Initial state of charge, kWh.
    pub e0: f64,
}

impl ProsumerSpec {
    /// Net load `d − s` per interval.
    pub fn net_load(&self) -> Vec<f64> {
        self.demand.iter().zip(&self.solar).map(|(d, s)| d - s).collect()
    }
}

/// A full market instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Interval length in hours.
    pub dt: f64,
    /// Flexibility request per interval, kW (positive = response, negative = rebound).
    pub request: Vec<f64>,
    /// Response price paid by the TSO, currency/kWh.
    pub p_bar: f64,
    /// Rebound price paid by the TSO, currency/kWh.
    pub p_tilde: f64,
    /// Saturation coefficient of the response reward.
    pub beta: f64,
    /// Slope of the affine pricing map per interval.
    pub c1: Vec<f64>,
    pub c0_lo: Vec<f64>,
    pub c0_hi: Vec<f64>,
    /// Grid capacity per interval, kW.
    pub grid_capacity: Vec<f64>,
    /// Discomfort weight.
    pub mu: f64,
    /// Storage degradation weight.
    pub delta: f64,
    pub prosumers: Vec<ProsumerSpec>,
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Hard validation failure listing every offending field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid scenario ({} issue(s)): {}", .issues.len(), join_issues(.issues))]
pub struct ValidationError {
    pub issues: Vec<Issue>,
}

fn join_issues(issues: &[Issue]) -> String {
    issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ")
}

/// Soft findings that do not prevent solving.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Validated {
    pub warnings: Vec<Issue>,
}

impl Scenario {
    pub fn horizon(&self) -> usize {
        self.request.len()
    }

    pub fn num_prosumers(&self) -> usize {
        self.prosumers.len()
    }

    pub fn class(&self, tau: usize) -> IntervalClass {
        IntervalClass::of(self.request[tau])
    }

    pub fn is_response(&self, tau: usize) -> bool {
        self.request[tau] > 0.0
    }

    pub fn is_rebound(&self, tau: usize) -> bool {
        self.request[tau] < 0.0
    }

    /// Right-hand side of the capacity coupling row, `max(g, g − r)` per interval.
    pub fn effective_capacity(&self) -> Vec<f64> {
        self.grid_capacity
            .iter()
            .zip(&self.request)
            .map(|(g, r)| g.max(g - r))
            .collect()
    }

    /// Checks every invariant; returns soft warnings or the full list of hard violations.
    pub fn validate(&self) -> Result<Validated, ValidationError> {
        let mut issues = Vec::new();
        let mut warnings = Vec::new();
        let t = self.horizon();
        let mut bad = |field: &str, message: String| {
            issues.push(Issue { field: field.to_string(), message })
        };

        if t == 0 {
            bad("request", "horizon must contain at least one interval".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            bad("dt", format!("interval length must be positive, got {}", self.dt));
        }
        if self.prosumers.is_empty() {
            bad("prosumers", "at least one prosumer is required".into());
        }
        for (name, v) in [
            ("c1", &self.c1),
            ("c0_lo", &self.c0_lo),
            ("c0_hi", &self.c0_hi),
            ("grid_capacity", &self.grid_capacity),
        ] {
            if v.len() != t {
                bad(name, format!("length {} does not match horizon {}", v.len(), t));
            }
        }
        for (name, v) in [
            ("request", &self.request),
            ("c1", &self.c1),
            ("c0_lo", &self.c0_lo),
            ("c0_hi", &self.c0_hi),
            ("grid_capacity", &self.grid_capacity),
        ] {
            if v.iter().any(|x| !x.is_finite()) {
                bad(name, "contains non-finite values".into());
            }
        }
        if !(self.p_bar > 0.0) {
            bad("p_bar", format!("must be positive, got {}", self.p_bar));
        }
        if !(self.p_tilde >= 0.0) {
            bad("p_tilde", format!("must be nonnegative, got {}", self.p_tilde));
        }
        let n = self.prosumers.len().max(1) as f64;
        if !(self.beta >= self.p_bar / n) {
            bad(
                "beta",
                format!("must satisfy beta >= p_bar/N = {}, got {}", self.p_bar / n, self.beta),
            );
        } else if self.beta > self.p_bar {
            warnings.push(Issue {
                field: "beta".into(),
                message: format!(
                    "beta = {} exceeds p_bar = {}; incentive slope after saturation is negative",
                    self.beta, self.p_bar
                ),
            });
        }
        for (tau, c) in self.c1.iter().enumerate() {
            if *c < 0.0 {
                bad("c1", format!("interval {tau}: slope must be nonnegative, got {c}"));
            }
        }
        for tau in 0..self.c0_lo.len().min(self.c0_hi.len()) {
            let (lo, hi) = (self.c0_lo[tau], self.c0_hi[tau]);
            if lo < 0.0 {
                bad("c0_lo", format!("interval {tau}: must be nonnegative, got {lo}"));
            }
            if hi < lo {
                bad("c0_hi", format!("interval {tau}: upper bound {hi} below lower bound {lo}"));
            }
        }
        for (tau, g) in self.grid_capacity.iter().enumerate() {
            if *g < 0.0 {
                bad("grid_capacity", format!("interval {tau}: must be nonnegative, got {g}"));
            }
        }
        if !(self.mu >= 0.0) {
            bad("mu", format!("must be nonnegative, got {}", self.mu));
        } else if self.mu >= 0.1 * self.p_bar {
            warnings.push(Issue {
                field: "mu".into(),
                message: format!(
                    "discomfort weight {} is not small relative to p_bar (threshold {})",
                    self.mu,
                    0.1 * self.p_bar
                ),
            });
        }
        if !(self.delta > 0.0) {
            bad("delta", format!("must be positive, got {}", self.delta));
        }

        for (i, p) in self.prosumers.iter().enumerate() {
            let field = |f: &str| format!("prosumers[{i}].{f}");
            if p.demand.len() != t {
                bad(&field("demand"), format!("length {} does not match horizon {}", p.demand.len(), t));
            }
            if p.solar.len() != t {
                bad(&field("solar"), format!("length {} does not match horizon {}", p.solar.len(), t));
            }
            for (tau, (d, s)) in p.demand.iter().zip(&p.solar).enumerate() {
                if !(d.is_finite() && s.is_finite()) {
                    bad(&field("demand"), format!("interval {tau}: non-finite profile value"));
                } else if s > d {
                    bad(
                        &field("solar"),
                        format!("prosumer {i}, interval {tau}: generation {s} exceeds demand {d}"),
                    );
                }
                if *s < 0.0 {
                    bad(&field("solar"), format!("interval {tau}: negative generation {s}"));
                }
            }
            if !(p.e_max >= 0.0) {
                bad(&field("e_max"), format!("must be nonnegative, got {}", p.e_max));
            }
            if !(p.p_max >= 0.0) {
                bad(&field("p_max"), format!("must be nonnegative, got {}", p.p_max));
            }
            if !(p.e0 >= 0.0 && p.e0 <= p.e_max) {
                bad(&field("e0"), format!("must lie in [0, e_max = {}], got {}", p.e_max, p.e0));
            }
            if !(p.eta_c > 0.0 && p.eta_c <= 1.0) {
                bad(&field("eta_c"), format!("must lie in (0, 1], got {}", p.eta_c));
            }
            if !(p.eta_dc > 0.0) {
                bad(&field("eta_dc"), format!("must be positive, got {}", p.eta_dc));
            }
        }

        if issues.is_empty() {
            Ok(Validated { warnings })
        } else {
            Err(ValidationError { issues })
        }
    }

    /// Leader decision at the centre of the leader box.
    pub fn leader_midpoint(&self) -> LeaderDecision {
        LeaderDecision {
            c0: self.c0_lo.iter().zip(&self.c0_hi).map(|(l, h)| 0.5 * (l + h)).collect(),
            alpha: vec![0.5; self.horizon()],
        }
    }
}

/// Leader strategy `z0 = (c0, α)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderDecision {
    /// Price offset per interval.
    pub c0: Vec<f64>,
    /// Share of the response incentive passed on to prosumers.
    pub alpha: Vec<f64>,
}

impl LeaderDecision {
    pub fn new(c0: Vec<f64>, alpha: Vec<f64>) -> Self {
        LeaderDecision { c0, alpha }
    }

    /// Stacked vector `col(c0, α)`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.c0.iter().chain(&self.alpha).copied().collect()
    }

    pub fn from_slice(z: &[f64]) -> Self {
        let t = z.len() / 2;
        LeaderDecision { c0: z[..t].to_vec(), alpha: z[t..].to_vec() }
    }

    /// True when `z0` lies in the leader box of `scen`, up to `tol`.
    pub fn is_admissible(&self, scen: &Scenario, tol: f64) -> bool {
        let t = scen.horizon();
        self.c0.len() == t
            && self.alpha.len() == t
            && (0..t).all(|k| {
                self.c0[k] >= scen.c0_lo[k] - tol
                    && self.c0[k] <= scen.c0_hi[k] + tol
                    && self.alpha[k] >= -tol
                    && self.alpha[k] <= 1.0 + tol
            })
    }
}

/// Decision vector of one prosumer, `x_i = (p, y, e, pC, pDC, k, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowerDecision {
    pub p: Vec<f64>,
    pub y: Vec<f64>,
    pub e: Vec<f64>,
    pub p_charge: Vec<f64>,
    pub p_discharge: Vec<f64>,
    pub k: Vec<f64>,
    pub t: Vec<f64>,
}

impl FollowerDecision {
    pub fn zeros(horizon: usize) -> Self {
        let z = vec![0.0; horizon];
        FollowerDecision {
            p: z.clone(),
            y: z.clone(),
            e: z.clone(),
            p_charge: z.clone(),
            p_discharge: z.clone(),
            k: z.clone(),
            t: z,
        }
    }

    pub fn horizon(&self) -> usize {
        self.p.len()
    }

    /// Blocks in stacking order.
    pub fn blocks(&self) -> [&Vec<f64>; 7] {
        [&self.p, &self.y, &self.e, &self.p_charge, &self.p_discharge, &self.k, &self.t]
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.blocks().iter().flat_map(|b| b.iter().copied()).collect()
    }

    pub fn from_slice(x: &[f64]) -> Self {
        let t = x.len() / 7;
        let b = |k: usize| x[k * t..(k + 1) * t].to_vec();
        FollowerDecision {
            p: b(0),
            y: b(1),
            e: b(2),
            p_charge: b(3),
            p_discharge: b(4),
            k: b(5),
            t: b(6),
        }
    }
}

/// Splits a collective vector of length `7·T·N` into per-follower decisions.
pub fn split_collective(x: &[f64], horizon: usize) -> Vec<FollowerDecision> {
    x.chunks(7 * horizon).map(FollowerDecision::from_slice).collect()
}

/// Stacks per-follower decisions into the collective vector.
pub fn stack_collective(xs: &[FollowerDecision]) -> Vec<f64> {
    xs.iter().flat_map(|x| x.to_vec()).collect()
}

/// Elementwise sum of one block across followers.
pub fn aggregate<F>(xs: &[FollowerDecision], pick: F) -> Vec<f64>
where
    F: Fn(&FollowerDecision) -> &Vec<f64>,
{
    let t = xs.first().map(|x| x.horizon()).unwrap_or(0);
    let mut out = vec![0.0; t];
    for x in xs {
        for (o, v) in out.iter_mut().zip(pick(x)) {
            *o += v;
        }
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn tiny() -> Scenario {
        Scenario {
            dt: 1.0,
            request: vec![2.0, 0.0, -1.0],
            p_bar: 1.0,
            p_tilde: 0.5,
            beta: 0.6,
            c1: vec![0.1; 3],
            c0_lo: vec![0.1; 3],
            c0_hi: vec![0.4; 3],
            grid_capacity: vec![20.0; 3],
            mu: 0.01,
            delta: 0.01,
            prosumers: vec![
                ProsumerSpec {
                    demand: vec![3.0, 2.0, 1.0],
                    solar: vec![1.0, 0.5, 0.0],
                    e_max: 5.0,
                    p_max: 2.0,
                    eta_c: 0.95,
                    eta_dc: 1.05,
                    e0: 2.0,
                };
                2
            ],
        }
    }

    #[test]
    fn valid_scenario_passes() {
        assert!(tiny().validate().unwrap().warnings.is_empty());
    }

    #[test]
    fn solar_above_demand_names_prosumer_and_interval() {
        let mut s = tiny();
        s.prosumers[1].solar[2] = 4.0;
        let err = s.validate().unwrap_err();
        assert_eq!(err.issues.len(), 1);
        assert_eq!(err.issues[0].field, "prosumers[1].solar");
        assert!(err.issues[0].message.contains("prosumer 1, interval 2"));
    }

    #[test]
    fn every_violation_is_listed() {
        let mut s = tiny();
        s.dt = 0.0;
        s.beta = 0.1;
        s.c0_hi[0] = 0.0;
        s.delta = 0.0;
        let fields: Vec<_> = s.validate().unwrap_err().issues.into_iter().map(|i| i.field).collect();
        assert_eq!(fields, vec!["dt", "beta", "c0_hi", "delta"]);
    }

    #[test]
    fn soft_limits_warn() {
        let mut s = tiny();
        s.beta = 1.5;
        s.mu = 0.2;
        let w = s.validate().unwrap().warnings;
        assert_eq!(w.len(), 2);
    }

    #[test]
    fn classes_and_capacity() {
        let s = tiny();
        assert_eq!(s.class(0), IntervalClass::Response);
        assert_eq!(s.class(1), IntervalClass::NoService);
        assert_eq!(s.class(2), IntervalClass::Rebound);
        assert_eq!(s.effective_capacity(), vec![20.0, 20.0, 21.0]);
    }

    #[test]
    fn follower_vector_layout() {
        let mut x = FollowerDecision::zeros(2);
        x.e[1] = 3.0;
        x.t[0] = -1.0;
        let v = x.to_vec();
        assert_eq!(v[2 * 2 + 1], 3.0);
        assert_eq!(v[6 * 2], -1.0);
        assert_eq!(FollowerDecision::from_slice(&v), x);
    }
}
