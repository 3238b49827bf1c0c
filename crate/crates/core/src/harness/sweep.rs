use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use super::config::{Config, FdKind, Method};
use crate::baselines::{
    ensemble_response, finite_difference_response, grid_transfer_response_1d, kernel_smoothed_response, FdMode,
};
use crate::error::Result;
use crate::estimator::{estimate_finite_time, estimate_stationary};
use crate::noise::NoiseModel;
use crate::parallel::{run_indexed, with_threads};
use crate::rng::derive_seed;

pub const SWEEP_HEADER: &str = "gamma,phi_avg,phi_se,dphi,dphi_se,method,L,W_or_T,seed,wall_time_s";
pub const FINITE_HEADER: &str = "gamma,phi_avg,phi_se,dphi,dphi_se,T,L,seed";
pub const STATIONARY_HEADER: &str = "gamma,phi_avg,phi_se,dphi,dphi_se,L,seed,W,M_pre";

/// One row of sweep output. For the grid oracle `L` holds the bin count and
/// the standard errors are zero; the kernel method reports `W_or_T = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub phi_avg: f64,
    pub phi_se: f64,
    pub dphi: f64,
    pub dphi_se: f64,
    pub method: Method,
    #[serde(rename = "L")]
    pub l: u64,
    #[serde(rename = "W_or_T")]
    pub w_or_t: u64,
    pub seed: u64,
    pub wall_time_s: f64,
}

impl SweepRow {
    /// Same row with the timing column zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_time_s: 0.0,
            ..self.clone()
        }
    }
}

/// Runs `method` once at `gamma` with the given seed.
pub fn run_method(cfg: &Config, method: Method, gamma: f64, seed: u64) -> Result<SweepRow> {
    cfg.check_method(method)?;
    let sys = cfg.build_system()?;
    let noise: NoiseModel = cfg.noise()?.into();
    let start = Instant::now();
    let row = |phi_avg, phi_se, dphi, dphi_se, l: usize, w_or_t: usize| SweepRow {
        gamma,
        phi_avg,
        phi_se,
        dphi,
        dphi_se,
        method,
        l: l as u64,
        w_or_t: w_or_t as u64,
        seed,
        wall_time_s: 0.0,
    };
    let mut out = match method {
        Method::NopropStationary => {
            let c = cfg.stationary_config(gamma, seed)?;
            let e = estimate_stationary(&sys, &noise, &c)?;
            row(e.phi_avg, e.phi_avg_std_error, e.value, e.std_error, c.length, c.window)
        }
        Method::NopropFinite => {
            let c = cfg.finite_config(gamma, seed)?;
            let e = estimate_finite_time(&sys, &c)?;
            row(e.phi_avg, e.phi_avg_std_error, e.value, e.std_error, c.paths, c.steps)
        }
        Method::Fd => {
            let (mode, l, w_or_t) = match cfg.oracle.fd_mode {
                FdKind::Finite => {
                    let c = cfg.finite_config(gamma, seed)?;
                    let (l, t) = (c.paths, c.steps);
                    (FdMode::Finite(c), l, t)
                }
                FdKind::Stationary => {
                    let c = cfg.stationary_config(gamma, seed)?;
                    let l = c.length;
                    (FdMode::Stationary { noise: noise.clone(), cfg: c }, l, 0)
                }
            };
            let e = finite_difference_response(&sys, &mode, cfg.oracle.delta_gamma, cfg.oracle.pairing)?;
            row(e.phi_avg, e.phi_avg_std_error, e.value, e.std_error, l, w_or_t)
        }
        Method::Grid => {
            let g = cfg.grid_config(gamma)?;
            let e = grid_transfer_response_1d(&g, &sys, &cfg.observable()?)?;
            row(e.phi_avg, 0.0, e.dphi, 0.0, g.bins, 0)
        }
        Method::Ensemble => {
            let c = cfg.ensemble_config(gamma, seed)?;
            let e = ensemble_response(&sys, &c)?;
            row(e.phi_avg, e.phi_avg_std_error, e.value, e.std_error, c.paths, c.horizon)
        }
        Method::Kernel => {
            let c = cfg.kernel_config(gamma, seed)?;
            let e = kernel_smoothed_response(&sys, &noise, &c)?;
            row(e.phi_avg, e.phi_avg_std_error, e.value, e.std_error, c.stationary.length, 0)
        }
    };
    out.wall_time_s = start.elapsed().as_secs_f64();
    Ok(out)
}

/// One row per entry of `sweep.gammas`, in order. Row `i` uses seed
/// `derive_seed(seed, i)`.
pub fn run_sweep(cfg: &Config, threads: Option<usize>) -> Result<Vec<SweepRow>> {
    let method = cfg.sweep.method;
    cfg.check_method(method)?;
    let gammas = &cfg.sweep.gammas;
    with_threads(threads, || {
        run_indexed(gammas.len(), None, |i| run_method(cfg, method, gammas[i], derive_seed(cfg.seed, i as u64)))
    })
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(SWEEP_HEADER.split(','))?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// One-row CSV for a single estimator run: the finite schema for
/// `noprop-finite`, the stationary schema (with `m_pre`) for
/// `noprop-stationary`, and the sweep schema for everything else.
pub fn write_estimate_csv<W: Write>(row: &SweepRow, m_pre: usize, out: W) -> Result<()> {
    let head = [row.gamma, row.phi_avg, row.phi_se, row.dphi, row.dphi_se].map(|v| v.to_string());
    let (header, tail) = match row.method {
        Method::NopropFinite => (FINITE_HEADER, vec![row.w_or_t, row.l, row.seed]),
        Method::NopropStationary => (STATIONARY_HEADER, vec![row.l, row.seed, row.w_or_t, m_pre as u64]),
        _ => return write_sweep_csv(std::slice::from_ref(row), out),
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header.split(','))?;
    w.write_record(head.into_iter().chain(tail.into_iter().map(|v| v.to_string())))?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{parse_config, SystemKind};

    #[test]
    fn header_is_stable() {
        let mut buf = Vec::new();
        write_sweep_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{SWEEP_HEADER}\n"));
        let cfg = Config::for_system(SystemKind::Ar1);
        let mut c = cfg.clone();
        c.stationary.l = 1000;
        c.stationary.w = 5;
        let row = run_method(&c, Method::NopropStationary, 0.0, 1).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(&format!("{SWEEP_HEADER}\n")));
        assert!(text.ends_with('\n'));
        assert!(text.contains(",noprop-stationary,1000,5,1,"));
    }

    #[test]
    fn single_run_schemas() {
        let mut cfg = Config::for_system(SystemKind::Ar1);
        cfg.stationary.l = 1000;
        cfg.finite.l = 100;
        cfg.finite.t = 3;
        let csv = |m| {
            let mut buf = Vec::new();
            write_estimate_csv(&run_method(&cfg, m, 0.0, 4).unwrap(), 1000, &mut buf).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let fin = csv(Method::NopropFinite);
        assert!(fin.starts_with(&format!("{FINITE_HEADER}\n")) && fin.trim_end().ends_with(",3,100,4"), "{fin}");
        let st = csv(Method::NopropStationary);
        assert!(st.starts_with(&format!("{STATIONARY_HEADER}\n")) && st.trim_end().ends_with(",1000,4,30,1000"), "{st}");
        assert!(csv(Method::Fd).starts_with(&format!("{SWEEP_HEADER}\n")));
    }

    #[test]
    fn ar1_sweep() {
        let raw = parse_config("system = \"ar1\"\n[stationary]\nl = 200000\n[sweep]\ngammas = [0.0, 0.5, 1.0]").unwrap();
        let cfg = raw.resolve().unwrap();
        let rows = run_sweep(&cfg, Some(2)).unwrap();
        assert_eq!(rows.len(), 3);
        for (r, g) in rows.iter().zip([0.0, 0.5, 1.0]) {
            assert_eq!(r.gamma, g);
            assert!((r.dphi - 2.0).abs() <= 4.0 * r.dphi_se, "{r:?}");
        }
        let again = run_sweep(&cfg, Some(1)).unwrap();
        let strip = |v: &[SweepRow]| v.iter().map(SweepRow::without_timing).collect::<Vec<_>>();
        assert_eq!(strip(&rows), strip(&again));
    }

    #[test]
    fn every_method_runs_on_tent() {
        let text = "system = \"tent\"\n[finite]\nl = 2000\nt = 5\n[stationary]\nl = 5000\n[oracle]\ngrid_bins = 200\nn_gammas = 4\nhorizon = 5";
        let cfg = parse_config(text).unwrap().resolve().unwrap();
        for m in [Method::NopropStationary, Method::NopropFinite, Method::Fd, Method::Grid, Method::Ensemble, Method::Kernel] {
            let r = run_method(&cfg, m, 3.0, 0).unwrap();
            assert!(r.phi_avg.is_finite(), "{m}: {r:?}");
        }
    }
}
