//! Declarative scenarios: configuration, built-in library, execution and
//! run manifests.

mod config;
mod library;
mod manifest;
mod run;

pub use config::{
    load_config, parse_config, AnalysisConfig, ChecksConfig, DomainConfig, ExtinctionAnalysis, GridConfig,
    MaxBoundAnalysis, ModelConfig, MonotoneAnalysis, NestedAnalysis, OracleAnalysis, OutputsConfig,
    PositivityAnalysis, ProblemConfig, Profile, ScenarioConfig, SteadyAnalysis,
};
pub use library::{builtin, list_scenarios, LIBRARY};
pub use manifest::{list_files, sha256_hex, FileEntry, RunManifest, RunStatus, TagVerdict, Verdict, MANIFEST_FILE};
pub use run::{run_scenario, RunOptions};
