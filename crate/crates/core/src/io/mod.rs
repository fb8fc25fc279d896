//! Scenario files, result bundles, reports and the day-ahead pipeline.

pub mod bundle;
pub mod generate;
pub mod report;
pub mod run;
pub mod scenario;

pub use bundle::{fmt12, round12, BaselineComparison, BundleKind, ResultBundle, Schedule};
pub use report::{anti_phase, emit_report, valley_filling};
pub use run::{
    baseline_scenario, build_bundle, dayahead_bundle, report_from, run, run_dayahead, write_error_file, RunConfig,
    RunError, RunMode, RunOutput,
};
pub use scenario::{load_scenario, save_scenario, LoadError, ScenarioPaths, FORMAT_VERSION};
