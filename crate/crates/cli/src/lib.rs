//! Reproducible experiment runner: configs in, CSV tables and plot data out.

pub mod config;
pub mod experiment;
pub mod verify;

use std::fs;
use std::path::Path;

use thiserror::Error;

pub use config::ExperimentConfig;
pub use experiment::{compute, Artifacts};

/// Fixtures shipped with the binary, by name.
pub const FIXTURES: &[(&str, &str)] = &[
    ("gabor16.json", include_str!("../fixtures/gabor16.json")),
    ("gabor16_theta.json", include_str!("../fixtures/gabor16_theta.json")),
    ("gabor32.json", include_str!("../fixtures/gabor32.json")),
    ("localized_frame.json", include_str!("../fixtures/localized_frame.json")),
];

pub const THREADS_ENV: &str = "PHASECOVER_THREADS";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("invalid config at `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("suites failed: {0}")]
    SuitesFailed(String),

    #[error("baseline missing: {0}")]
    MissingBaseline(String),

    #[error("verification mismatch: {0}")]
    Mismatch(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } | CliError::MissingBaseline(_) | CliError::Io(_) => 1,
            CliError::Numeric(_) | CliError::SuitesFailed(_) => 2,
            CliError::Mismatch(_) => 3,
        }
    }
}

fn io(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

pub fn fixture(name: &str) -> Option<&'static str> {
    FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Reads a config from disk, falling back to a bundled fixture of that name.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => match path.to_str().and_then(fixture) {
            Some(t) => t.to_string(),
            None => return Err(CliError::validation("--config", format!("{}: {e}", path.display()))),
        },
    };
    ExperimentConfig::from_json(&text)
}

/// `--threads` unless the environment variable overrides it; 0 means rayon's default.
pub fn thread_count(flag: Option<usize>) -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::validation(THREADS_ENV, format!("not a thread count: {v:?}"))),
        Err(_) => Ok(flag.unwrap_or(0)),
    }
}

pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    Ok(pool.install(f))
}

pub fn write_artifacts(art: &Artifacts, out: &Path) -> Result<(), CliError> {
    for (name, text) in &art.files {
        let path = out.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io)?;
        }
        fs::write(&path, text).map_err(io)?;
    }
    Ok(())
}

/// Computes and writes all outputs; fails with exit code 2 when a suite fails,
/// after the files are written.
pub fn run(cfg: &ExperimentConfig, out: &Path, threads: usize) -> Result<Artifacts, CliError> {
    let art = with_threads(threads, || compute(cfg))??;
    write_artifacts(&art, out)?;
    if !art.all_pass() {
        return Err(CliError::SuitesFailed(art.failing().join(", ")));
    }
    Ok(art)
}

pub fn verify(cfg: &ExperimentConfig, baseline: &Path, threads: usize) -> Result<(), CliError> {
    if !baseline.is_dir() {
        return Err(CliError::MissingBaseline(baseline.display().to_string()));
    }
    let art = with_threads(threads, || compute(cfg))??;
    verify::verify_artifacts(&art, baseline)
}
