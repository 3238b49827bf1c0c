//! Run configuration, parameter sweeps, convergence studies and their
//! CSV/JSON output.

pub mod config;
pub mod study;
pub mod sweep;

pub use config::{load_config, parse_config, read_config, Config, Method, RawConfig, StudyKind, SystemKind, DEFAULTS_HELP};
pub use study::{run_convergence_study, write_study_csv, StudyResult, StudyRun, STUDY_HEADER};
pub use sweep::{
    run_method, run_sweep, write_estimate_csv, write_sweep_csv, SweepRow, FINITE_HEADER, STATIONARY_HEADER, SWEEP_HEADER,
};

use serde::Serialize;

pub const THREADS_ENV: &str = "NOPROP_THREADS";

/// Worker count after applying the `NOPROP_THREADS` cap. `None` means the
/// default rayon pool.
pub fn effective_threads(requested: Option<usize>) -> Option<usize> {
    let cap = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0);
    cap_threads(requested, cap)
}

fn cap_threads(requested: Option<usize>, cap: Option<usize>) -> Option<usize> {
    match (requested, cap) {
        (Some(r), Some(c)) => Some(r.min(c)),
        (r, None) => r,
        (None, c) => c,
    }
}

/// JSON record of a run: what was asked for and what came out.
#[derive(Debug, Serialize)]
pub struct Summary<'a, T: Serialize> {
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a Config,
    pub threads: Option<usize>,
    pub result: T,
}

impl<'a, T: Serialize> Summary<'a, T> {
    pub fn new(command: &'a str, config: &'a Config, threads: Option<usize>, result: T) -> Self {
        Self {
            version: crate::VERSION,
            command,
            config,
            threads,
            result,
        }
    }

    pub fn to_json(&self) -> crate::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
