//! Result bundle of a day-ahead run and its JSON form.

use crate::mpec::Certificate;
use crate::model::{FollowerDecision, LeaderDecision, RewardLedger};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BundleKind {
    /// Market with the scenario's request.
    DemandResponse,
    /// Same market with the request forced to zero.
    Baseline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub prosumer: usize,
    #[serde(flatten)]
    pub decision: FollowerDecision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSummary {
    pub j_dso: f64,
    pub j_followers: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub stationarity: f64,
    pub feasibility: f64,
    pub complementarity: f64,
    /// Largest violation among the shared rows (grid capacity, rebound cap, epigraph coupling).
    pub coupling: f64,
    /// Largest violation over every physical constraint.
    pub constraints: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub seed: u64,
    pub starts: usize,
    pub follower_solves: usize,
    pub start_costs: Vec<Option<f64>>,
}

/// Aggregate grid draw `Σp` with and without the request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineComparison {
    pub leader: LeaderDecision,
    pub j_dso: f64,
    pub grid_draw: Vec<f64>,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub format_version: u32,
    pub kind: BundleKind,
    pub dt: f64,
    pub request: Vec<f64>,
    pub leader: LeaderDecision,
    /// Energy price `h = c1·Σp + c0` per interval.
    pub price: Vec<f64>,
    pub schedules: Vec<Schedule>,
    pub ledger: RewardLedger,
    pub costs: CostSummary,
    pub residuals: ResidualSummary,
    pub certificate: Certificate,
    pub search: SearchSummary,
    pub baseline: Option<BaselineComparison>,
}

impl ResultBundle {
    pub fn horizon(&self) -> usize {
        self.request.len()
    }

    pub fn decisions(&self) -> Vec<FollowerDecision> {
        self.schedules.iter().map(|s| s.decision.clone()).collect()
    }

    /// `Σ_i` of one block per interval.
    pub fn total<F: Fn(&FollowerDecision) -> &Vec<f64>>(&self, pick: F) -> Vec<f64> {
        (0..self.horizon()).map(|k| self.schedules.iter().map(|s| pick(&s.decision)[k]).sum()).collect()
    }

    /// Pretty JSON with every number rounded to 12 significant digits.
    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("bundle serializes");
        round_value(&mut v);
        let mut s = serde_json::to_string_pretty(&v).expect("bundle serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

/// `v` rounded to 12 significant digits, with `-0` mapped to `0`.
pub fn round12(v: f64) -> f64 {
    if !v.is_finite() {
        return v;
    }
    let r: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Shortest text form of [`round12`]; exponent notation outside `[1e-5, 1e16)`.
pub fn fmt12(v: f64) -> String {
    let r = round12(v);
    let a = r.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64().filter(|_| n.is_f64()) {
                if let Some(r) = serde_json::Number::from_f64(round12(f)) {
                    *n = r;
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}
