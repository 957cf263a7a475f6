//! Declarative runs: configuration files, figure presets, execution with
//! numerical-quality telemetry, and CSV/JSON output.

mod columns;
mod config;
mod emit;
mod oracle;
mod presets;
mod run;

pub use columns::{parse_column, parse_columns, Column};
pub use config::{
    Assumption, CavityConfig, ChainConfig, GridConfig, IntegratorConfig, ModelConfig,
    ObservablesConfig, OracleConfig, OutputConfig, Real, ResolvedRun, RunConfig, SwitchingConfig,
    DEFAULT_COLUMNS, DEFAULT_SAMPLES,
};
pub use emit::{emit, format_value, sidecar, write_csv, EmittedFiles, TOOL_NAME, TOOL_VERSION};
pub use oracle::{
    compare_with_oracle, write_oracle_csv, OracleComparison, OracleDeviation, OracleRow,
    ORACLE_TOLERANCE,
};
pub use presets::{preset, preset_names, preset_source};
pub use run::{run, Gate, Telemetry, TrajectoryRecord};
