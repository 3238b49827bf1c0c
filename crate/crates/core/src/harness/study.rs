use std::io::Write;

use serde::Serialize;

use super::config::{Config, StudyKind};
use crate::error::Result;
use crate::estimator::estimate_stationary;
use crate::noise::NoiseModel;
use crate::parallel::{run_indexed, with_threads};
use crate::rng::derive_seed;
use crate::stats::{loglog_slope, LogLogFit, MomentAccumulator};

pub const STUDY_HEADER: &str = "row,param,repeat,value";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRun {
    pub param: usize,
    pub repeat: usize,
    pub dphi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyResult {
    pub kind: StudyKind,
    pub runs: Vec<StudyRun>,
    /// `(param, std of dphi across repeats)`.
    pub stds: Vec<(usize, f64)>,
    pub fit: LogLogFit,
}

/// Repeats the stationary estimator over `study.values` (orbit lengths or
/// windows) and fits the log-log slope of the spread across repeats.
pub fn run_convergence_study(cfg: &Config, threads: Option<usize>) -> Result<StudyResult> {
    let study = &cfg.study;
    if study.repeats < 5 {
        return Err(crate::error::Error::Config(format!("study.repeats: need at least 5, got {}", study.repeats)));
    }
    let sys = cfg.build_system()?;
    let noise: NoiseModel = cfg.noise()?.into();
    let n = study.values.len() * study.repeats;
    let dphis = with_threads(threads, || {
        run_indexed(n, None, |k| {
            let (vi, r) = (k / study.repeats, k % study.repeats);
            let seed = derive_seed(derive_seed(cfg.seed, vi as u64), r as u64);
            let mut c = cfg.stationary_config(cfg.gamma, seed)?;
            match study.kind {
                StudyKind::L => c.length = study.values[vi],
                StudyKind::W => c.window = study.values[vi],
            }
            Ok(estimate_stationary(&sys, &noise, &c)?.value)
        })
    })?;
    let runs: Vec<StudyRun> = dphis
        .iter()
        .enumerate()
        .map(|(k, &dphi)| StudyRun {
            param: study.values[k / study.repeats],
            repeat: k % study.repeats,
            dphi,
        })
        .collect();
    let stds: Vec<(usize, f64)> = study
        .values
        .iter()
        .enumerate()
        .map(|(vi, &p)| {
            let acc: MomentAccumulator = dphis[vi * study.repeats..(vi + 1) * study.repeats].iter().copied().collect();
            (p, acc.std_dev())
        })
        .collect();
    let points: Vec<(f64, f64)> = stds.iter().map(|&(p, s)| (p as f64, s)).collect();
    let fit = loglog_slope(&points)?;
    Ok(StudyResult {
        kind: study.kind,
        runs,
        stds,
        fit,
    })
}

/// `run` rows hold each repeat's estimate, `std` rows the spread per
/// parameter, and the final `slope`/`intercept` rows the log-log fit.
pub fn write_study_csv<W: Write>(result: &StudyResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STUDY_HEADER.split(','))?;
    for r in &result.runs {
        w.write_record([
            "run".to_string(),
            r.param.to_string(),
            r.repeat.to_string(),
            r.dphi.to_string(),
        ])?;
    }
    for (p, s) in &result.stds {
        w.write_record(["std".to_string(), p.to_string(), String::new(), s.to_string()])?;
    }
    w.write_record(["slope", "", "", &result.fit.slope.to_string()])?;
    w.write_record(["intercept", "", "", &result.fit.intercept.to_string()])?;
    w.flush()?;
    Ok(())
}
