//! Scenario configuration, orchestration, refinement studies, and report
//! emission.

mod config;
mod emit;
mod runner;
mod scenario;

pub use config::{parse_config, parse_config_str};
pub use emit::{bundle_csv, bundle_json, bundle_plotdata, emit, EmitFormat};
pub use runner::{
    refinement_study, run_scenario, run_scenario_traj, ConvergenceRow, ConvergenceTable,
    ReportBundle, RunMetadata, Timing, SCHEMA_VERSION,
};
pub use scenario::{
    CheckBlock, InitialBlock, ManifoldBlock, NonlinearityBlock, RefineBlock, Scenario,
    SolverBlock, TolerancesBlock, KNOWN_CHECKS,
};

use thiserror::Error;

use crate::estimates::EstimateError;
use crate::solver::SolverError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration invalid:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("refinement budget exceeded: {0}")]
    Budget(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
}
