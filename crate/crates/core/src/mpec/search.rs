use super::certify::{certify_with, Certificate, CertifyOptions};
use super::objective::Evaluator;
use super::MpecError;
use crate::assembler::AssembledGame;
use crate::model::LeaderDecision;
use crate::vgne::{KktSystem, VgneOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    /// Total number of starts, user starts included.
    pub starts: usize,
    pub seed: u64,
    /// Starts tried before the midpoint, e.g. a grid-oracle minimizer.
    pub extra_starts: Vec<Vec<f64>>,
    /// Initial mesh as a fraction of each box width.
    pub initial_mesh: f64,
    pub contraction: f64,
    pub expansion: f64,
    pub mesh_tol: f64,
    /// Mesh reached when polishing the best start.
    pub refine_tol: f64,
    pub max_evals_per_start: usize,
    pub certify_radius: f64,
    pub certify_samples: usize,
    pub tol_improve: f64,
    /// Searches restarted from an improving certificate sample.
    pub improve_rounds: usize,
    pub vgne: VgneOptions,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            starts: 8,
            seed: 0,
            extra_starts: Vec::new(),
            initial_mesh: 0.25,
            contraction: 0.5,
            expansion: 2.0,
            mesh_tol: 1e-4,
            refine_tol: 1e-8,
            max_evals_per_start: 20_000,
            certify_radius: 1e-3,
            certify_samples: 200,
            tol_improve: 1e-6,
            improve_rounds: 3,
            vgne: VgneOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Start,
    Refine,
    Improve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub phase: Phase,
    /// Start index for `Start`, round for `Improve`, zero for `Refine`.
    pub index: usize,
    pub z0: Vec<f64>,
    pub cost: Option<f64>,
    /// Best cost seen so far over the whole run.
    pub incumbent: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartOrigin {
    User,
    Midpoint,
    Stencil,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartReport {
    pub origin: StartOrigin,
    pub z0_start: Vec<f64>,
    pub z0_end: Vec<f64>,
    pub cost: Option<f64>,
    pub final_mesh: f64,
    pub solves: usize,
    pub failures: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub z0_star: LeaderDecision,
    pub x_star: Vec<f64>,
    /// Shared multipliers of the coupling rows.
    pub lambda: Vec<f64>,
    pub lambda_local: Vec<f64>,
    pub j_dso: f64,
    pub j_followers: Vec<f64>,
    pub stat_residual: f64,
    pub feas_residual: f64,
    pub comp_residual: f64,
    pub certificate: Certificate,
    pub starts: Vec<StartReport>,
    pub trace: Vec<TraceEntry>,
    pub solves: usize,
}

/// Normalized coordinates over the leader coordinates that can move the cost:
/// every `c0_τ` with a nondegenerate range and `α_τ` on response intervals.
#[derive(Debug, Clone)]
pub(crate) struct Space {
    lo: Vec<f64>,
    hi: Vec<f64>,
    active: Vec<usize>,
}

impl Space {
    pub(crate) fn new(game: &AssembledGame) -> Self {
        let t = game.layout.t;
        let (lo, hi) = (game.gamma.lo.clone(), game.gamma.hi.clone());
        let active = (0..2 * t)
            .filter(|&j| hi[j] > lo[j] && (j < t || game.scenario.request[j - t] > 0.0))
            .collect();
        Space { lo, hi, active }
    }

    pub(crate) fn dim(&self) -> usize {
        self.active.len()
    }

    fn to_z(&self, base: &[f64], v: &[f64]) -> Vec<f64> {
        let mut z = base.to_vec();
        for (k, &j) in self.active.iter().enumerate() {
            let s = v[k].clamp(0.0, 1.0);
            z[j] = if s == 1.0 { self.hi[j] } else { self.lo[j] + s * (self.hi[j] - self.lo[j]) };
        }
        z
    }

    fn to_v(&self, z: &[f64]) -> Vec<f64> {
        self.active.iter().map(|&j| ((z[j] - self.lo[j]) / (self.hi[j] - self.lo[j])).clamp(0.0, 1.0)).collect()
    }
}

struct Local {
    z: Vec<f64>,
    cost: Option<f64>,
    mesh: f64,
}

/// Coordinate pattern search in normalized coordinates with opportunistic
/// polling, starting the poll at the last successful direction.
fn pattern_search(
    ev: &mut Evaluator<'_>,
    space: &Space,
    z_start: &[f64],
    mesh0: f64,
    mesh_tol: f64,
    opts: &SearchOptions,
    log: &mut Vec<(Vec<f64>, Option<f64>)>,
) -> Local {
    let base = z_start.to_vec();
    let mut v = space.to_v(&base);
    let mut z = space.to_z(&base, &v);
    let mut f = ev.cost(&z);
    log.push((z.clone(), f));
    let d = space.dim();
    let mut mesh = mesh0;
    if f.is_none() || d == 0 {
        return Local { z, cost: f, mesh };
    }
    let mut fbest = f.unwrap();
    let mut next_dir = 0;
    let budget = opts.max_evals_per_start;
    let mut evals = 1;
    while mesh >= mesh_tol && evals < budget {
        let mut moved = false;
        for step in 0..2 * d {
            let dir = (next_dir + step) % (2 * d);
            let (k, sign) = (dir / 2, if dir % 2 == 0 { 1.0 } else { -1.0 });
            let cand = (v[k] + sign * mesh).clamp(0.0, 1.0);
            if cand == v[k] {
                continue;
            }
            let mut w = v.clone();
            w[k] = cand;
            let zc = space.to_z(&base, &w);
            let fc = ev.cost(&zc);
            evals += 1;
            log.push((zc.clone(), fc));
            if let Some(c) = fc {
                if c < fbest - 1e-13 * (1.0 + fbest.abs()) {
                    v = w;
                    z = zc;
                    fbest = c;
                    next_dir = dir;
                    moved = true;
                    break;
                }
            }
            if evals >= budget {
                break;
            }
        }
        mesh = if moved { (mesh * opts.expansion).min(1.0) } else { mesh * opts.contraction };
    }
    f = Some(fbest);
    Local { z, cost: f, mesh }
}

fn start_points(game: &AssembledGame, space: &Space, opts: &SearchOptions) -> Vec<(StartOrigin, Vec<f64>)> {
    let mid = game.scenario.leader_midpoint().to_vec();
    let total = opts.starts.max(1);
    let mut out: Vec<(StartOrigin, Vec<f64>)> = opts
        .extra_starts
        .iter()
        .map(|z| {
            let mut z = z.clone();
            game.gamma.project(&mut z);
            (StartOrigin::User, z)
        })
        .collect();
    out.truncate(total);
    if out.len() < total {
        out.push((StartOrigin::Midpoint, mid.clone()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    while out.len() < total {
        let v: Vec<f64> = (0..space.dim()).map(|_| if rng.random_bool(0.5) { 0.75 } else { 0.25 }).collect();
        out.push((StartOrigin::Stencil, space.to_z(&mid, &v)));
    }
    out
}

fn push_trace(trace: &mut Vec<TraceEntry>, phase: Phase, index: usize, log: Vec<(Vec<f64>, Option<f64>)>) {
    for (z0, cost) in log {
        let prev = trace.last().and_then(|e| e.incumbent);
        let incumbent = match (prev, cost) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        trace.push(TraceEntry { phase, index, z0, cost, incumbent });
    }
}

/// Multi-start pattern search for a local Stackelberg equilibrium.
///
/// Starts run independently (in parallel when threads are available) and are
/// reduced in index order. The best start is refined to `refine_tol`, then
/// checked by [`certify_lse`](super::certify_lse); an improving sample seeds
/// another search, up to `improve_rounds` times. The returned follower
/// decision comes from a cold solve at the final leader point.
pub fn solve_lse(game: &AssembledGame, opts: &SearchOptions) -> Result<EquilibriumResult, MpecError> {
    let t = game.layout.t;
    for z in &opts.extra_starts {
        if z.len() != 2 * t {
            return Err(MpecError::Dimension { expected: 2 * t, got: z.len() });
        }
    }
    let sys = KktSystem::new(game, opts.vgne.tikhonov);
    let space = Space::new(game);
    let starts = start_points(game, &space, opts);

    let runs: Vec<(StartReport, Vec<(Vec<f64>, Option<f64>)>)> = starts
        .par_iter()
        .map(|(origin, z0)| {
            let mut ev = Evaluator::new(&sys, opts.vgne);
            let mut log = Vec::new();
            let local = pattern_search(&mut ev, &space, z0, opts.initial_mesh, opts.mesh_tol, opts, &mut log);
            let report = StartReport {
                origin: *origin,
                z0_start: z0.clone(),
                z0_end: local.z,
                cost: local.cost,
                final_mesh: local.mesh,
                solves: ev.solves(),
                failures: ev.failures(),
                error: local.cost.is_none().then(|| ev.last_error().map(|e| e.to_string()).unwrap_or_default()),
            };
            (report, log)
        })
        .collect();

    let mut trace = Vec::new();
    let mut reports = Vec::with_capacity(runs.len());
    let mut solves = 0;
    for (k, (rep, log)) in runs.into_iter().enumerate() {
        push_trace(&mut trace, Phase::Start, k, log);
        solves += rep.solves;
        reports.push(rep);
    }
    let best = reports
        .iter()
        .enumerate()
        .filter_map(|(k, r)| r.cost.map(|c| (k, c)))
        .fold(None, |acc: Option<(usize, f64)>, (k, c)| match acc {
            Some((_, b)) if b <= c => acc,
            _ => Some((k, c)),
        });
    let Some((kbest, _)) = best else {
        return Err(MpecError::AllStartsFailed {
            diagnostics: reports
                .iter()
                .enumerate()
                .map(|(k, r)| format!("start {k} ({:?}): {}", r.origin, r.error.clone().unwrap_or_default()))
                .collect(),
        });
    };

    let mut ev = Evaluator::new(&sys, opts.vgne);
    let mut log = Vec::new();
    let rep = &reports[kbest];
    let refined = pattern_search(&mut ev, &space, &rep.z0_end, rep.final_mesh.min(opts.mesh_tol), opts.refine_tol, opts, &mut log);
    push_trace(&mut trace, Phase::Refine, 0, log);
    let mut z = refined.z;
    let mut cost = refined.cost.expect("refinement starts from a solved point");

    let cert_opts = |seed| CertifyOptions { seed, tol_improve: opts.tol_improve, vgne: opts.vgne };
    let improve_mesh = space
        .active
        .iter()
        .map(|&j| opts.certify_radius / (space.hi[j] - space.lo[j]))
        .fold(0.0, f64::max)
        .min(opts.initial_mesh);
    for round in 0..opts.improve_rounds {
        let cert = certify_with(
            &mut ev,
            &z,
            cost,
            opts.certify_radius,
            opts.certify_samples,
            &cert_opts(opts.seed.wrapping_add(1 + round as u64)),
        );
        let Some(from) = cert.best_point.filter(|_| !cert.passed) else { break };
        let mut log = Vec::new();
        let local = pattern_search(&mut ev, &space, &from, improve_mesh, opts.refine_tol, opts, &mut log);
        push_trace(&mut trace, Phase::Improve, round, log);
        if let Some(c) = local.cost.filter(|c| *c < cost) {
            z = local.z;
            cost = c;
        }
    }

    let sol = ev.solve_cold(&z).map_err(MpecError::Solve)?;
    let j_dso = game.leader_cost(&z, &sol.x);
    let certificate = certify_with(
        &mut ev,
        &z,
        j_dso,
        opts.certify_radius,
        opts.certify_samples,
        &cert_opts(opts.seed.wrapping_add(0x5eed_0000)),
    );
    solves += ev.solves();
    let j_followers = (0..game.layout.n).map(|i| game.follower_cost(i, &z, &sol.x)).collect();
    Ok(EquilibriumResult {
        z0_star: LeaderDecision::from_slice(&z),
        x_star: sol.x,
        lambda: sol.lambda,
        lambda_local: sol.lambda_local,
        j_dso,
        j_followers,
        stat_residual: sol.stat_residual,
        feas_residual: sol.feas_residual,
        comp_residual: sol.comp_residual,
        certificate,
        starts: reports,
        trace,
        solves,
    })
}
