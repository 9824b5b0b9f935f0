//! Batch front end: configuration files, job runners and reports.

mod config;
mod run;

pub use config::{
    parse_config, DynamicsConfig, GeometryName, GravityConfig, InvariantsConfig, JobKind, QuantizeConfig, RunConfig,
    DEFAULT_HBAR, DEFAULT_SAMPLES, DEFAULT_STEP,
};
pub use run::{
    dynamics_setup, gravity_checks, output_dir, quantize_element, run, run_to_dir, ExitStatus, RunOutput, Written,
    OUTPUT_DIR_ENV,
};
