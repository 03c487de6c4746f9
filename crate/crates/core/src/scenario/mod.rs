//! Config-driven scenarios: INI configs, bundled presets, runs, sweeps and
//! analytic self-checks.

mod build;
mod config;
mod ini;
mod oracle;
mod presets;
mod run;

pub use build::Resolved;
pub use config::{
    load_config, parse_values, write_config, CameraConfig, ControlConfig, GridConfig, MaskConfig, ModelConfig, ProbeConfig,
    Scenario, SweepConfig, TimingConfig,
};
pub use oracle::{run_oracle, OracleReport, ORACLES};
pub use presets::{preset, PRESETS};
pub use run::{camera_plane, object_plane, relay_intensity, run_scenario, simulate, sweep, RunOutput};
