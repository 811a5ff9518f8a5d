//! Scenario orchestration, measurement noise, error metrics and output files.

pub mod metrics;
pub mod noise;
pub mod records;
pub mod scenario;

pub use metrics::{rmspe, RmspeReport, RMSPE_T_START};
pub use noise::{add_noise, NoiseConfig, NoiseSource};
pub use records::{
    csv_header, emit_csv, emit_plotdata, parse_csv, CsvSink, TimeseriesRecord, CSV_COLUMNS,
};
pub use scenario::{
    initial_truth, run_comparison, run_scenario, run_scenario_with, Comparison, CurrentProfile,
    ScenarioConfig, ScenarioRun,
};
