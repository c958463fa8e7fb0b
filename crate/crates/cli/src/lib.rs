//! Configuration, execution and reporting for `cwikel` experiments.

// NaN must fail these guards, so `!(x > 0.0)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod plot;
pub mod report;
pub mod runner;

pub use config::{ExperimentConfig, ExperimentKind, FieldSource};
pub use plot::emit_plots;
pub use report::{Report, Series, Table};
pub use runner::{run, run_in};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] cwikel_core::Error),
}

/// Caps the global rayon pool at `CWIKEL_THREADS` when set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("CWIKEL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("CWIKEL_THREADS={raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))
}
