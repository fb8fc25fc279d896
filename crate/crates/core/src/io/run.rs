//! End-to-end pipeline: load, assemble, solve, certify, write.

use super::bundle::{
    round12, BaselineComparison, BundleKind, CostSummary, ResidualSummary, ResultBundle, Schedule, SearchSummary,
    BUNDLE_VERSION,
};
use super::report::emit_report;
use super::scenario::{load_scenario, LoadError, ScenarioPaths};
use crate::assembler::{assemble, export_bigm, AssembledGame, BigM, ExportError};
use crate::model::{
    constraint_residuals, eval_price, split_collective, ConstraintKind, Issue, ModelError, RewardLedger, Scenario,
};
use crate::mpec::{grid_oracle, solve_lse, EquilibriumResult, GridResult, MpecError, SearchOptions};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Validate,
    Solve,
    Baseline,
    Oracle,
    Export,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub paths: ScenarioPaths,
    pub out: PathBuf,
    pub mode: RunMode,
    pub search: SearchOptions,
    /// Points per coordinate in `Oracle` mode.
    pub grid_resolution: usize,
}

impl RunConfig {
    pub fn new(paths: ScenarioPaths, out: PathBuf, mode: RunMode) -> Self {
        RunConfig { paths, out, mode, search: SearchOptions::default(), grid_resolution: 5 }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Solve(#[from] MpecError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error("{}: {source}", .path.display())]
    Write { path: PathBuf, source: std::io::Error },
}

impl RunError {
    /// `validation`, `solver` or `io`.
    pub fn category(&self) -> &'static str {
        match self {
            RunError::Load(_) => "validation",
            RunError::Solve(_) | RunError::Model(_) => "solver",
            RunError::Export(ExportError::Io(_)) | RunError::Write { .. } => "io",
            RunError::Export(_) => "solver",
        }
    }

    pub fn issues(&self) -> Vec<Issue> {
        match self {
            RunError::Load(LoadError::Invalid(e)) => e.issues.clone(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunOutput {
    Validated { warnings: Vec<Issue> },
    Bundle { bundle: Box<ResultBundle>, files: Vec<PathBuf> },
    Oracle { result: GridResult, file: PathBuf },
    Exported { file: PathBuf, binaries: usize },
}

fn write(path: &Path, text: &str) -> Result<(), RunError> {
    std::fs::write(path, text).map_err(|source| RunError::Write { path: path.to_path_buf(), source })
}

fn create_out(out: &Path) -> Result<(), RunError> {
    std::fs::create_dir_all(out).map_err(|source| RunError::Write { path: out.to_path_buf(), source })
}

/// Copy of `scen` with the request forced to zero.
pub fn baseline_scenario(scen: &Scenario) -> Scenario {
    Scenario { request: vec![0.0; scen.horizon()], ..scen.clone() }
}

/// Assembles the bundle of one solved market.
pub fn build_bundle(
    game: &AssembledGame,
    res: &EquilibriumResult,
    kind: BundleKind,
    opts: &SearchOptions,
    baseline: Option<BaselineComparison>,
) -> Result<ResultBundle, ModelError> {
    let scen = &game.scenario;
    let t = scen.horizon();
    let xs = split_collective(&res.x_star, t);
    let ledger = RewardLedger::build(&res.z0_star, &xs, scen)?;
    let pbar: Vec<f64> = (0..t).map(|k| xs.iter().map(|x| x.p[k]).sum()).collect();
    let price = eval_price(&pbar, &res.z0_star.c0, scen)?;
    let report = constraint_residuals(&xs, scen);
    let coupling = report.max_violation_of(&[
        ConstraintKind::GridCapacity,
        ConstraintKind::ReboundCap,
        ConstraintKind::EpigraphCoupling,
    ]);
    Ok(ResultBundle {
        format_version: BUNDLE_VERSION,
        kind,
        dt: scen.dt,
        request: scen.request.clone(),
        leader: res.z0_star.clone(),
        price,
        schedules: xs.into_iter().enumerate().map(|(prosumer, decision)| Schedule { prosumer, decision }).collect(),
        ledger,
        costs: CostSummary { j_dso: res.j_dso, j_followers: res.j_followers.clone() },
        residuals: ResidualSummary {
            stationarity: res.stat_residual,
            feasibility: res.feas_residual,
            complementarity: res.comp_residual,
            coupling,
            constraints: report.max_violation(),
        },
        certificate: res.certificate.clone(),
        search: SearchSummary {
            seed: opts.seed,
            starts: res.starts.len(),
            follower_solves: res.solves,
            start_costs: res.starts.iter().map(|s| s.cost).collect(),
        },
        baseline,
    })
}

fn solve(scen: &Scenario, opts: &SearchOptions) -> Result<(AssembledGame, EquilibriumResult), RunError> {
    let game = assemble(scen).map_err(LoadError::Invalid)?;
    let res = solve_lse(&game, opts)?;
    Ok((game, res))
}

/// Solves the day-ahead market of `cfg` (mode `Solve` or `Baseline`) and writes
/// `bundle.json` plus the report files into `cfg.out`. A `Solve` run also solves
/// the baseline market for the comparison block.
pub fn run_dayahead(cfg: &RunConfig) -> Result<(ResultBundle, Vec<PathBuf>), RunError> {
    let scen = load_scenario(&cfg.paths)?;
    let (bundle, _) = dayahead_bundle(&scen, cfg.mode == RunMode::Baseline, &cfg.search)?;
    create_out(&cfg.out)?;
    let path = cfg.out.join("bundle.json");
    let text = bundle.to_json();
    write(&path, &text)?;
    // the report is built from the stored values so `report` on bundle.json reproduces it
    let bundle = ResultBundle::from_json(&text).expect("bundle JSON parses back");
    let mut files = vec![path];
    files.extend(emit_report(&bundle, &cfg.out).map_err(|source| RunError::Write { path: cfg.out.clone(), source })?);
    Ok((bundle, files))
}

/// In-memory part of [`run_dayahead`]; also returns the solver result.
pub fn dayahead_bundle(
    scen: &Scenario,
    baseline_only: bool,
    opts: &SearchOptions,
) -> Result<(ResultBundle, EquilibriumResult), RunError> {
    let base_scen = baseline_scenario(scen);
    let (base_game, base_res) = solve(&base_scen, opts)?;
    if baseline_only {
        let bundle = build_bundle(&base_game, &base_res, BundleKind::Baseline, opts, None)?;
        return Ok((bundle, base_res));
    }
    let t = scen.horizon();
    let xs = split_collective(&base_res.x_star, t);
    let comparison = BaselineComparison {
        leader: base_res.z0_star.clone(),
        j_dso: base_res.j_dso,
        grid_draw: (0..t).map(|k| xs.iter().map(|x| x.p[k]).sum()).collect(),
        certified: base_res.certificate.passed,
    };
    let (game, res) = solve(scen, opts)?;
    let bundle = build_bundle(&game, &res, BundleKind::DemandResponse, opts, Some(comparison))?;
    Ok((bundle, res))
}

#[derive(Serialize)]
struct OracleFile {
    resolution: usize,
    best_z0: Vec<f64>,
    best_cost: f64,
    points: Vec<(Vec<f64>, Option<f64>)>,
}

/// Runs any mode of `cfg`.
pub fn run(cfg: &RunConfig) -> Result<RunOutput, RunError> {
    match cfg.mode {
        RunMode::Validate => {
            let scen = load_scenario(&cfg.paths)?;
            let warnings = scen.validate().map(|v| v.warnings).unwrap_or_default();
            Ok(RunOutput::Validated { warnings })
        }
        RunMode::Solve | RunMode::Baseline => {
            let (bundle, files) = run_dayahead(cfg)?;
            Ok(RunOutput::Bundle { bundle: Box::new(bundle), files })
        }
        RunMode::Oracle => {
            let scen = load_scenario(&cfg.paths)?;
            let game = assemble(&scen).map_err(LoadError::Invalid)?;
            let result = grid_oracle(&game, cfg.grid_resolution, &cfg.search.vgne)?;
            let r = |v: &[f64]| v.iter().map(|x| round12(*x)).collect::<Vec<_>>();
            let file = OracleFile {
                resolution: result.resolution,
                best_z0: r(&result.best_z0),
                best_cost: round12(result.best_cost),
                points: result.trace.iter().map(|p| (r(&p.z0), p.cost.map(round12))).collect(),
            };
            create_out(&cfg.out)?;
            let path = cfg.out.join("oracle.json");
            let mut text = serde_json::to_string_pretty(&file).expect("oracle serializes");
            text.push('\n');
            write(&path, &text)?;
            Ok(RunOutput::Oracle { result, file: path })
        }
        RunMode::Export => {
            let scen = load_scenario(&cfg.paths)?;
            let game = assemble(&scen).map_err(LoadError::Invalid)?;
            create_out(&cfg.out)?;
            let path = cfg.out.join("bigm.mps");
            let model = export_bigm(&game, &BigM::defaults(&game), cfg.search.vgne.tikhonov, &path)?;
            Ok(RunOutput::Exported { file: path, binaries: model.num_integer() })
        }
    }
}

/// Reads `bundle.json` at `bundle` and writes the report files into `out`.
pub fn report_from(bundle: &Path, out: &Path) -> Result<Vec<PathBuf>, RunError> {
    let text = std::fs::read_to_string(bundle)
        .map_err(|source| LoadError::Io { path: bundle.to_path_buf(), source })?;
    let b = ResultBundle::from_json(&text).map_err(|e| LoadError::Parse {
        path: bundle.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    emit_report(&b, out).map_err(|source| RunError::Write { path: out.to_path_buf(), source })
}

#[derive(Serialize)]
struct ErrorFile<'a> {
    category: &'a str,
    message: String,
    issues: Vec<Issue>,
}

/// Writes `error.json` describing `err` into `out`.
pub fn write_error_file(out: &Path, err: &RunError) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(out)?;
    let path = out.join("error.json");
    let body = ErrorFile { category: err.category(), message: err.to_string(), issues: err.issues() };
    let mut text = serde_json::to_string_pretty(&body).map_err(std::io::Error::other)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}
