use clap::{Args, Parser, Subcommand};
use drgame::io::{fmt12, report_from, run, write_error_file, RunConfig, RunError, RunMode, RunOutput, ScenarioPaths};
use drgame::mpec::SearchOptions;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Day-ahead demand-response market: one operator setting prices and incentive
/// shares, prosumers scheduling batteries and flexibility in response.
#[derive(Parser, Debug)]
#[command(name = "drgame", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the scenario files and list every problem found.
    Validate(Common),
    /// Solve the market, certify the result and write the bundle and report.
    Solve(Common),
    /// Solve the same market with the request forced to zero.
    Baseline(Common),
    /// Enumerate a grid over the leader box and keep the best point.
    Oracle(Common),
    /// Write the single-level big-M model as a free-format MPS file.
    ExportBigm(Common),
    /// Re-emit the CSV report of an existing bundle.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario config (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Profile CSV; defaults to profiles.csv next to the scenario.
    #[arg(long)]
    profiles: Option<PathBuf>,
    /// Request CSV; defaults to request.csv next to the scenario.
    #[arg(long)]
    request: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Pattern-search starts.
    #[arg(long, default_value_t = 8)]
    starts: usize,
    /// Grid points per coordinate for `oracle`.
    #[arg(long, default_value_t = 5)]
    grid_res: usize,
    /// Weight of the selection term ε‖x‖²; 0 turns it off.
    #[arg(long, default_value_t = 1e-6)]
    tikhonov: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol_stat: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol_feas: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol_comp: f64,
    /// Largest certificate improvement still accepted.
    #[arg(long, default_value_t = 1e-6)]
    tol_improve: f64,
    /// Pattern-search stopping mesh.
    #[arg(long, default_value_t = 1e-4)]
    tol_mesh: f64,
    #[arg(long, default_value_t = 1e-3)]
    certify_radius: f64,
    #[arg(long, default_value_t = 200)]
    certify_samples: usize,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Bundle to read; defaults to <out>/bundle.json.
    #[arg(long)]
    bundle: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl Common {
    fn config(&self, mode: RunMode) -> RunConfig {
        let dir = self.scenario.parent().unwrap_or(Path::new("."));
        let paths = ScenarioPaths {
            scenario: self.scenario.clone(),
            profiles: self.profiles.clone().unwrap_or_else(|| dir.join("profiles.csv")),
            request: self.request.clone().unwrap_or_else(|| dir.join("request.csv")),
        };
        let mut search = SearchOptions {
            starts: self.starts,
            seed: self.seed,
            mesh_tol: self.tol_mesh,
            certify_radius: self.certify_radius,
            certify_samples: self.certify_samples,
            tol_improve: self.tol_improve,
            ..Default::default()
        };
        search.vgne.tikhonov = self.tikhonov;
        search.vgne.tol_stat = self.tol_stat;
        search.vgne.tol_feas = self.tol_feas;
        search.vgne.tol_comp = self.tol_comp;
        RunConfig { paths, out: self.out.clone(), mode, search, grid_resolution: self.grid_res }
    }
}

fn exit_code(err: &RunError) -> u8 {
    match err.category() {
        "validation" => 2,
        "solver" => 3,
        _ => 1,
    }
}

fn fail(out: &Path, err: RunError) -> ExitCode {
    eprintln!("error: {err}");
    match write_error_file(out, &err) {
        Ok(p) => eprintln!("details written to {}", p.display()),
        Err(e) => eprintln!("could not write error file: {e}"),
    }
    ExitCode::from(exit_code(&err))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (common, mode) = match &cli.command {
        Command::Validate(c) => (c, RunMode::Validate),
        Command::Solve(c) => (c, RunMode::Solve),
        Command::Baseline(c) => (c, RunMode::Baseline),
        Command::Oracle(c) => (c, RunMode::Oracle),
        Command::ExportBigm(c) => (c, RunMode::Export),
        Command::Report(r) => {
            let bundle = r.bundle.clone().unwrap_or_else(|| r.out.join("bundle.json"));
            return match report_from(&bundle, &r.out) {
                Ok(files) => {
                    for f in files {
                        println!("wrote {}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&r.out, e),
            };
        }
    };
    let cfg = common.config(mode);
    match run(&cfg) {
        Ok(RunOutput::Validated { warnings }) => {
            for w in &warnings {
                println!("warning: {w}");
            }
            println!("scenario is valid");
            ExitCode::SUCCESS
        }
        Ok(RunOutput::Bundle { bundle, files }) => {
            for f in &files {
                println!("wrote {}", f.display());
            }
            let c = &bundle.certificate;
            println!("J_DSO = {}", fmt12(bundle.costs.j_dso));
            println!(
                "certificate {}: worst improvement {} over {} samples at radius {}",
                if c.passed { "passed" } else { "failed" },
                fmt12(c.worst_improvement),
                c.samples,
                fmt12(c.radius)
            );
            if c.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            }
        }
        Ok(RunOutput::Oracle { result, file }) => {
            println!("wrote {}", file.display());
            println!("best grid cost {} over {} points", fmt12(result.best_cost), result.trace.len());
            ExitCode::SUCCESS
        }
        Ok(RunOutput::Exported { file, binaries }) => {
            println!("wrote {} ({binaries} binary variables)", file.display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(&cfg.out, e),
    }
}
