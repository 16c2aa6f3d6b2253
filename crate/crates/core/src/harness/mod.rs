//! Experiment orchestration: configs, equal-measure comparisons with
//! two-resolution error budgets, and machine-readable reports.

mod budget;
mod cache;
mod config;
mod experiments;
mod output;
mod report;

pub use budget::{richardson, Sample, Series};
pub use cache::SpectrumCache;
pub use config::{Experiment, ExperimentConfig, Exponent, Overrides, SteinerSettings, Validated};
pub use experiments::{default_t_list, default_zeta_sweep, domain_label};
pub use output::{write_outputs, write_spectrum_csvs};
pub use report::{
    BllRecord, Check, DomainReport, ExperimentReport, FunctionalSeries, PerronEntry, Resolution,
    Runtime, Stage, Status, Tool, Verdict, ZetaRow,
};

use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::kernel::KernelError;
use crate::spectral::{SpectralError, Spectrum};
use crate::trace::TraceError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("not a triangle: {0}")]
    NotATriangle(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::NotATriangle(_) | HarnessError::Io(_) => {
                EXIT_CONFIG
            }
            HarnessError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<SpectralError> for HarnessError {
    fn from(e: SpectralError) -> Self {
        HarnessError::Numerical(e.to_string())
    }
}

impl From<TraceError> for HarnessError {
    fn from(e: TraceError) -> Self {
        match e {
            TraceError::Geometry(g) => g.into(),
            other => HarnessError::Numerical(other.to_string()),
        }
    }
}

impl From<GeometryError> for HarnessError {
    fn from(e: GeometryError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<KernelError> for HarnessError {
    fn from(e: KernelError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

/// A spectrum computed during a run, kept for CSV export.
#[derive(Debug, Clone)]
pub struct SpectrumArtifact {
    pub label: String,
    pub n: usize,
    pub spectrum: Arc<Spectrum>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: ExperimentReport,
    pub spectra: Vec<SpectrumArtifact>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code()
    }
}

/// Validates `config` and runs its experiment.
///
/// Config errors are returned as `Err`; numerical failures inside the
/// pipeline are recorded in the report, whose status then maps to exit code 3.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome, HarnessError> {
    let start = Instant::now();
    let validated = config.validate()?;
    let mut ctx = experiments::Context::new(config.clone(), validated);
    let result = ctx.dispatch();
    let mut outcome = ctx.finish();
    match result {
        Ok(()) => {}
        Err(e @ HarnessError::Numerical(_)) => {
            outcome.report.status = Status::NumericalFailure;
            outcome.report.error = Some(e.to_string());
        }
        Err(e) => return Err(e),
    }
    outcome.report.finish();
    outcome.report.runtime.total_seconds = start.elapsed().as_secs_f64();
    outcome.report.runtime.output = config.output.as_ref().map(|p| p.display().to_string());
    Ok(outcome)
}

/// [`run`] followed by writing the outputs when `config.output` is set.
pub fn run_and_write(config: &ExperimentConfig) -> Result<RunOutcome, HarnessError> {
    let outcome = run(config)?;
    if let Some(dir) = &config.output {
        write_outputs(&outcome, dir)?;
    }
    Ok(outcome)
}
