//! Experiment front-end: configuration, the commands behind the `lblab`
//! binary, and CSV/SVG output.
//!
//! Commands return a [`CommandReport`] holding their artifacts in memory;
//! writing them out is left to the caller. Runs are fanned out over a
//! rayon pool and aggregated in a fixed order, so the bytes written do not
//! depend on the number of workers.

mod checks;
mod commands;
mod config;
mod output;

pub use checks::*;
pub use commands::*;
pub use config::*;
pub use output::{fmt_f64, line_plot, Series, Table};

use std::path::Path;

use thiserror::Error;

use crate::approx_bounds::BoundError;
use crate::approx_oracle::ApproxError;
use crate::instances::InstanceError;
use crate::optimizers::OptError;
use crate::symbolic_trace::TraceError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Optimizer(#[from] OptError),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    CheckFailed,
    EnvelopeViolation,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::CheckFailed => 1,
            Status::EnvelopeViolation => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandReport {
    pub artifacts: Vec<Artifact>,
    pub summary: String,
    pub status: Status,
}

impl CommandReport {
    pub fn write_to(&self, dir: &Path) -> Result<(), HarnessError> {
        std::fs::create_dir_all(dir)?;
        for a in &self.artifacts {
            std::fs::write(dir.join(&a.name), &a.contents)?;
        }
        Ok(())
    }

    pub fn artifact(&self, name: &str) -> Option<&str> {
        self.artifacts
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.contents.as_str())
    }
}

/// Sizes the global rayon pool from `LBLAB_THREADS`, if set. Must run
/// before the first parallel call.
pub fn configure_threads() -> Result<(), HarnessError> {
    let Ok(v) = std::env::var("LBLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        HarnessError::Config(format!(
            "LBLAB_THREADS must be a positive integer, got `{v}`"
        ))
    })?;
    // A pool that already exists keeps its size.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}
