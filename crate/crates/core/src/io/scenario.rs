//! Scenario files: a TOML config for the market and storage parameters, a
//! long-format profile CSV and a request CSV.
//!
//! ```toml
//! format_version = 1
//! description = "optional free text"
//! dt = 1.0
//! p_bar = 0.5
//! p_tilde = 0.2
//! beta = 0.2
//! mu = 0.02
//! delta = 0.01
//! c1 = [0.02, ...]            # one entry per interval
//! c0_lo = [0.10, ...]
//! c0_hi = [0.35, ...]
//! grid_capacity = [40.0, ...]
//!
//! [[prosumers]]
//! id = 0                      # matches prosumer_id in the profile CSV
//! e_max = 10.0
//! p_max = 4.0
//! eta_c = 0.95
//! eta_dc = 1.05
//! e0 = 5.0
//! ```
//!
//! Profiles: `tau,prosumer_id,demand_kw,solar_kw`, one row per interval and
//! prosumer. Request: `tau,r_kw`, one row per interval; its rows fix the
//! horizon. Lines starting with `#` are comments in both CSV files.

use crate::model::{Issue, ProsumerSpec, Scenario, ValidationError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioPaths {
    pub scenario: PathBuf,
    pub profiles: PathBuf,
    pub request: PathBuf,
}

impl ScenarioPaths {
    /// `scenario.toml`, `profiles.csv` and `request.csv` inside `dir`.
    pub fn in_dir(dir: &Path) -> Self {
        ScenarioPaths {
            scenario: dir.join("scenario.toml"),
            profiles: dir.join("profiles.csv"),
            request: dir.join("request.csv"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}:{column}: {message}", .path.display())]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{}: unsupported format_version {found} (expected {FORMAT_VERSION})", .path.display())]
    Version { path: PathBuf, found: u32 },
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    dt: f64,
    p_bar: f64,
    p_tilde: f64,
    beta: f64,
    mu: f64,
    delta: f64,
    c1: Vec<f64>,
    c0_lo: Vec<f64>,
    c0_hi: Vec<f64>,
    grid_capacity: Vec<f64>,
    prosumers: Vec<ProsumerFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProsumerFile {
    id: usize,
    e_max: f64,
    p_max: f64,
    eta_c: f64,
    eta_dc: f64,
    e0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ProfileRow {
    tau: usize,
    prosumer_id: usize,
    demand_kw: f64,
    solar_kw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RequestRow {
    tau: usize,
    r_kw: f64,
}

fn read(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.to_path_buf(), source })
}

/// 1-based line and column of byte `offset` in `text`.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

fn parse_config(path: &Path) -> Result<ScenarioFile, LoadError> {
    let text = read(path)?;
    let file: ScenarioFile = toml::from_str(&text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(&text, s.start));
        LoadError::Parse { path: path.to_path_buf(), line, column, message: e.message().to_string() }
    })?;
    if file.format_version != FORMAT_VERSION {
        return Err(LoadError::Version { path: path.to_path_buf(), found: file.format_version });
    }
    Ok(file)
}

fn parse_csv<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, LoadError> {
    let text = read(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        rows.push(rec.map_err(|e| {
            let line = e.position().map_or(1, |p| p.line() as usize);
            let column = match e.kind() {
                csv::ErrorKind::Deserialize { err, .. } => err.field().map_or(1, |f| f as usize + 1),
                _ => 1,
            };
            LoadError::Parse { path: path.to_path_buf(), line, column, message: e.to_string() }
        })?);
    }
    Ok(rows)
}

/// Reads and validates a scenario. Structural problems in the CSV files and
/// violated model invariants are reported together.
pub fn load_scenario(paths: &ScenarioPaths) -> Result<Scenario, LoadError> {
    let file = parse_config(&paths.scenario)?;
    let profiles: Vec<ProfileRow> = parse_csv(&paths.profiles)?;
    let request_rows: Vec<RequestRow> = parse_csv(&paths.request)?;
    let mut issues = Vec::new();
    let mut bad = |field: &str, message: String| issues.push(Issue { field: field.into(), message });

    let horizon = request_rows.iter().map(|r| r.tau + 1).max().unwrap_or(0);
    let mut request = vec![f64::NAN; horizon];
    for row in &request_rows {
        if !request[row.tau].is_nan() {
            bad("request", format!("interval {} listed more than once", row.tau));
        }
        request[row.tau] = row.r_kw;
    }
    for (tau, r) in request.iter_mut().enumerate() {
        if r.is_nan() {
            bad("request", format!("interval {tau} missing"));
            *r = 0.0;
        }
    }

    let mut index = BTreeMap::new();
    for (i, p) in file.prosumers.iter().enumerate() {
        if index.insert(p.id, i).is_some() {
            bad("prosumers", format!("id {} used more than once", p.id));
        }
    }
    let n = file.prosumers.len();
    let mut demand = vec![vec![f64::NAN; horizon]; n];
    let mut solar = vec![vec![f64::NAN; horizon]; n];
    for row in &profiles {
        let Some(&i) = index.get(&row.prosumer_id) else {
            bad("profiles", format!("unknown prosumer_id {} at interval {}", row.prosumer_id, row.tau));
            continue;
        };
        if row.tau >= horizon {
            bad("profiles", format!("interval {} beyond the request horizon {horizon}", row.tau));
            continue;
        }
        if !demand[i][row.tau].is_nan() {
            bad("profiles", format!("prosumer {} interval {} listed more than once", row.prosumer_id, row.tau));
        }
        demand[i][row.tau] = row.demand_kw;
        solar[i][row.tau] = row.solar_kw;
    }
    for (p, (d, s)) in file.prosumers.iter().zip(demand.iter_mut().zip(solar.iter_mut())) {
        for tau in 0..horizon {
            if d[tau].is_nan() {
                bad("profiles", format!("prosumer {} interval {tau} missing", p.id));
                d[tau] = 0.0;
                s[tau] = 0.0;
            }
        }
    }

    let scen = Scenario {
        dt: file.dt,
        request,
        p_bar: file.p_bar,
        p_tilde: file.p_tilde,
        beta: file.beta,
        c1: file.c1,
        c0_lo: file.c0_lo,
        c0_hi: file.c0_hi,
        grid_capacity: file.grid_capacity,
        mu: file.mu,
        delta: file.delta,
        prosumers: file
            .prosumers
            .iter()
            .zip(demand.into_iter().zip(solar))
            .map(|(p, (demand, solar))| ProsumerSpec {
                demand,
                solar,
                e_max: p.e_max,
                p_max: p.p_max,
                eta_c: p.eta_c,
                eta_dc: p.eta_dc,
                e0: p.e0,
            })
            .collect(),
    };
    match scen.validate() {
        Ok(v) => {
            if !issues.is_empty() {
                return Err(ValidationError { issues }.into());
            }
            for w in &v.warnings {
                log::warn!("{w}");
            }
        }
        Err(e) => {
            issues.extend(e.issues);
            return Err(ValidationError { issues }.into());
        }
    }
    Ok(scen)
}

/// Writes `scen` in the format read by [`load_scenario`]. Values are written
/// with shortest round-trip precision, so loading gives back the same floats.
pub fn save_scenario(scen: &Scenario, paths: &ScenarioPaths, description: Option<&str>) -> std::io::Result<()> {
    let file = ScenarioFile {
        format_version: FORMAT_VERSION,
        description: description.map(str::to_string),
        dt: scen.dt,
        p_bar: scen.p_bar,
        p_tilde: scen.p_tilde,
        beta: scen.beta,
        mu: scen.mu,
        delta: scen.delta,
        c1: scen.c1.clone(),
        c0_lo: scen.c0_lo.clone(),
        c0_hi: scen.c0_hi.clone(),
        grid_capacity: scen.grid_capacity.clone(),
        prosumers: scen
            .prosumers
            .iter()
            .enumerate()
            .map(|(id, p)| ProsumerFile {
                id,
                e_max: p.e_max,
                p_max: p.p_max,
                eta_c: p.eta_c,
                eta_dc: p.eta_dc,
                e0: p.e0,
            })
            .collect(),
    };
    let text = toml::to_string(&file).map_err(std::io::Error::other)?;
    std::fs::write(&paths.scenario, text)?;

    let mut w = csv::Writer::from_path(&paths.profiles)?;
    for tau in 0..scen.horizon() {
        for (id, p) in scen.prosumers.iter().enumerate() {
            w.serialize(ProfileRow { tau, prosumer_id: id, demand_kw: p.demand[tau], solar_kw: p.solar[tau] })?;
        }
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(&paths.request)?;
    for (tau, r) in scen.request.iter().enumerate() {
        w.serialize(RequestRow { tau, r_kw: *r })?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::generate::random_scenario;

    #[test]
    fn line_col_counts_from_one() {
        assert_eq!(line_col("ab\ncd", 0), (1, 1));
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
    }

    #[test]
    fn round_trip_random_scenarios() {
        let dir = tempfile::tempdir().unwrap();
        let paths = ScenarioPaths::in_dir(dir.path());
        for seed in 0..5 {
            let scen = random_scenario(1 + seed as usize % 4, 3 + seed as usize, seed);
            save_scenario(&scen, &paths, Some("round trip")).unwrap();
            assert_eq!(load_scenario(&paths).unwrap(), scen);
        }
    }

    #[test]
    fn toml_errors_carry_line_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let paths = ScenarioPaths::in_dir(dir.path());
        save_scenario(&random_scenario(2, 3, 1), &paths, None).unwrap();
        let text = std::fs::read_to_string(&paths.scenario).unwrap();
        std::fs::write(&paths.scenario, text.replacen("beta = ", "beta = \"x\"\nold_beta = ", 1)).unwrap();
        match load_scenario(&paths) {
            Err(LoadError::Parse { line, column, .. }) => assert!(line > 1 && column >= 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_errors_carry_line() {
        let dir = tempfile::tempdir().unwrap();
        let paths = ScenarioPaths::in_dir(dir.path());
        save_scenario(&random_scenario(2, 3, 1), &paths, None).unwrap();
        std::fs::write(&paths.request, "tau,r_kw\n0,1.0\n1,abc\n2,0\n").unwrap();
        match load_scenario(&paths) {
            Err(LoadError::Parse { line, column, .. }) => assert_eq!((line, column), (3, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_version_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        let paths = ScenarioPaths::in_dir(dir.path());
        save_scenario(&random_scenario(2, 3, 1), &paths, None).unwrap();
        let text = std::fs::read_to_string(&paths.scenario).unwrap();
        std::fs::write(&paths.scenario, text.replace("format_version = 1", "format_version = 7")).unwrap();
        assert!(matches!(load_scenario(&paths), Err(LoadError::Version { found: 7, .. })));
    }

    #[test]
    fn structural_issues_are_collected() {
        let dir = tempfile::tempdir().unwrap();
        let paths = ScenarioPaths::in_dir(dir.path());
        save_scenario(&random_scenario(2, 3, 1), &paths, None).unwrap();
        std::fs::write(&paths.request, "tau,r_kw\n0,0\n2,0\n2,1\n").unwrap();
        std::fs::write(&paths.profiles, "tau,prosumer_id,demand_kw,solar_kw\n0,0,1,0\n0,9,1,0\n").unwrap();
        let Err(LoadError::Invalid(e)) = load_scenario(&paths) else { panic!() };
        let text = e.to_string();
        assert!(text.contains("interval 2 listed more than once"));
        assert!(text.contains("interval 1 missing"));
        assert!(text.contains("unknown prosumer_id 9"));
        assert!(text.contains("prosumer 1 interval 0 missing"));
    }
}
