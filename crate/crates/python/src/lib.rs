use noprop::baselines::{
    ensemble_response, finite_difference_response, grid_transfer_response_1d, kernel_smoothed_response, EnsembleConfig, FdMode,
    GridOracleConfig, KernelConfig, NoisePairing,
};
use noprop::estimator::{lag_contributions, ResponseEstimate};
use noprop::harness::{parse_config, run_sweep as harness_sweep, SweepRow};
use noprop::systems::{self as sys, DynamicalSystem};
use noprop::{
    Ar1Benchmark, BuiltinSystem, ChaoticNet, FiniteTimeConfig, InitialDistribution, NoiseModel, Observable, StationaryConfig,
    TentMap,
};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: noprop::Error) -> PyErr {
    match e {
        noprop::Error::NonFinite { .. } | noprop::Error::NotConverged { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(name = "System", frozen, module = "pynoprop")]
struct PySystem(BuiltinSystem);

#[pymethods]
impl PySystem {
    #[staticmethod]
    fn tent() -> Self {
        Self(BuiltinSystem::Tent(TentMap))
    }

    #[staticmethod]
    #[pyo3(signature = (c = 4.0))]
    fn chaotic_net(c: f64) -> Self {
        Self(BuiltinSystem::ChaoticNet(ChaoticNet::new(c)))
    }

    #[staticmethod]
    #[pyo3(signature = (a = 0.5))]
    fn ar1(a: f64) -> PyResult<Self> {
        Ok(Self(BuiltinSystem::Ar1(Ar1Benchmark::new(a).map_err(err)?)))
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name().to_string()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim(0)
    }

    fn step(&self, x: Vec<f64>, gamma: f64) -> PyResult<Vec<f64>> {
        sys::step_map(&self.0, gamma, 0, &x).map_err(err)
    }

    fn param_derivative(&self, x: Vec<f64>, gamma: f64) -> PyResult<Vec<f64>> {
        sys::param_derivative(&self.0, gamma, 0, &x).map_err(err)
    }

    fn project(&self, x: Vec<f64>) -> Vec<f64> {
        sys::project(&self.0, &x)
    }

    fn jacobian_transpose(&self, x: Vec<f64>, w: Vec<f64>, gamma: f64) -> PyResult<Vec<f64>> {
        sys::jacobian_transpose_apply(&self.0, gamma, 0, &x, &w).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("System({})", self.0.name())
    }
}

#[pyclass(name = "GaussianNoise", frozen, module = "pynoprop")]
struct PyNoise(noprop::GaussianNoise);

#[pymethods]
impl PyNoise {
    #[staticmethod]
    fn isotropic(dim: usize, sigma: f64) -> PyResult<Self> {
        noprop::GaussianNoise::isotropic(dim, sigma).map(Self).map_err(err)
    }

    #[staticmethod]
    fn diagonal(sigmas: Vec<f64>) -> PyResult<Self> {
        noprop::GaussianNoise::diagonal(vec![0.0; sigmas.len()], sigmas).map(Self).map_err(err)
    }

    #[staticmethod]
    fn full(cov: Vec<Vec<f64>>) -> PyResult<Self> {
        noprop::GaussianNoise::full(vec![0.0; cov.len()], cov).map(Self).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn score(&self, y: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.score(&y).map_err(err)
    }

    fn log_density(&self, y: Vec<f64>) -> PyResult<f64> {
        self.0.log_density(&y).map_err(err)
    }
}

#[pyclass(name = "Estimate", frozen, get_all, module = "pynoprop")]
struct PyEstimate {
    gamma: f64,
    value: f64,
    std_error: f64,
    phi_avg: f64,
    phi_avg_std_error: f64,
    lags: Vec<f64>,
    mean_abs_integrand: f64,
}

#[pymethods]
impl PyEstimate {
    fn __repr__(&self) -> String {
        format!(
            "Estimate(gamma={}, value={:.6} ± {:.6}, phi_avg={:.6})",
            self.gamma, self.value, self.std_error, self.phi_avg
        )
    }
}

impl From<ResponseEstimate> for PyEstimate {
    fn from(e: ResponseEstimate) -> Self {
        Self {
            gamma: e.gamma,
            value: e.value,
            std_error: e.std_error,
            phi_avg: e.phi_avg,
            phi_avg_std_error: e.phi_avg_std_error,
            lags: e.lags,
            mean_abs_integrand: e.mean_abs_integrand,
        }
    }
}

fn observable(phi: &str) -> PyResult<Observable> {
    phi.parse().map_err(err)
}

fn default_initial(system: &BuiltinSystem) -> InitialDistribution {
    let d = system.dim(0);
    match system {
        BuiltinSystem::Tent(_) => InitialDistribution::Uniform { lo: vec![0.0; d], hi: vec![1.0; d] },
        BuiltinSystem::ChaoticNet(_) => InitialDistribution::Gaussian(noprop::GaussianNoise::isotropic(d, 1.0).expect("unit sigma")),
        BuiltinSystem::Ar1(_) => InitialDistribution::Point(vec![0.0; d]),
    }
}

fn stationary_cfg(gamma: f64, window: usize, length: usize, seed: u64, phi: &str, spin_up: usize) -> PyResult<StationaryConfig> {
    Ok(StationaryConfig::new(gamma, window, length, seed).with_observable(observable(phi)?).with_spin_up(spin_up))
}

/// Long-orbit no-propagate response estimate.
#[pyfunction]
#[pyo3(signature = (system, noise, gamma, window, length, seed = 0, phi = "x", spin_up = 1000))]
#[allow(clippy::too_many_arguments)]
fn estimate_stationary(
    py: Python<'_>,
    system: &PySystem,
    noise: &PyNoise,
    gamma: f64,
    window: usize,
    length: usize,
    seed: u64,
    phi: &str,
    spin_up: usize,
) -> PyResult<PyEstimate> {
    let cfg = stationary_cfg(gamma, window, length, seed, phi, spin_up)?;
    let noise: NoiseModel = noise.0.clone().into();
    py.detach(|| noprop::estimate_stationary(&system.0, &noise, &cfg)).map(Into::into).map_err(err)
}

/// Per-lag contributions of the stationary estimator.
#[pyfunction]
#[pyo3(signature = (system, noise, gamma, window, length, seed = 0, phi = "x"))]
#[allow(clippy::too_many_arguments)]
fn lags(py: Python<'_>, system: &PySystem, noise: &PyNoise, gamma: f64, window: usize, length: usize, seed: u64, phi: &str) -> PyResult<Vec<f64>> {
    let cfg = stationary_cfg(gamma, window, length, seed, phi, 1000)?;
    let noise: NoiseModel = noise.0.clone().into();
    py.detach(|| lag_contributions(&system.0, &noise, &cfg)).map_err(err)
}

/// Finite-horizon no-propagate response over independent paths.
#[pyfunction]
#[pyo3(signature = (system, noise, gamma, steps, paths, seed = 0, phi = "x", threads = None))]
#[allow(clippy::too_many_arguments)]
fn estimate_finite_time(
    py: Python<'_>,
    system: &PySystem,
    noise: &PyNoise,
    gamma: f64,
    steps: usize,
    paths: usize,
    seed: u64,
    phi: &str,
    threads: Option<usize>,
) -> PyResult<PyEstimate> {
    let cfg = FiniteTimeConfig::new(gamma, steps, paths, seed, default_initial(&system.0), noise.0.clone())
        .with_observable(observable(phi)?)
        .with_threads(threads);
    py.detach(|| noprop::estimate_finite_time(&system.0, &cfg)).map(Into::into).map_err(err)
}

/// Common-random-number central difference on a long orbit; returns `(value, std_error)`.
#[pyfunction]
#[pyo3(signature = (system, noise, gamma, length, delta_gamma = 0.05, seed = 0, phi = "x", common = true))]
#[allow(clippy::too_many_arguments)]
fn finite_difference(
    py: Python<'_>,
    system: &PySystem,
    noise: &PyNoise,
    gamma: f64,
    length: usize,
    delta_gamma: f64,
    seed: u64,
    phi: &str,
    common: bool,
) -> PyResult<(f64, f64)> {
    let mode = FdMode::Stationary {
        noise: noise.0.clone().into(),
        cfg: stationary_cfg(gamma, 0, length, seed, phi, 1000)?,
    };
    let pairing = if common { NoisePairing::Common } else { NoisePairing::Independent };
    let e = py.detach(|| finite_difference_response(&system.0, &mode, delta_gamma, pairing)).map_err(err)?;
    Ok((e.value, e.std_error))
}

/// Transfer-operator grid; returns `(phi_avg, dphi, bin_masses)`.
#[pyfunction]
#[pyo3(signature = (system, gamma, sigma, bins = 2000, phi = "x"))]
fn grid_response(py: Python<'_>, system: &PySystem, gamma: f64, sigma: f64, bins: usize, phi: &str) -> PyResult<(f64, f64, Vec<f64>)> {
    let cfg = GridOracleConfig::new(gamma, sigma).with_bins(bins);
    let phi = observable(phi)?;
    let r = py.detach(|| grid_transfer_response_1d(&cfg, &system.0, &phi)).map_err(err)?;
    Ok((r.phi_avg, r.dphi, r.density))
}

/// Backpropagation estimate; returns `(value, std_error, mean_abs_integrand)`.
#[pyfunction]
#[pyo3(signature = (system, noise, gamma, horizon, paths, seed = 0, phi = "x", warmup = 0))]
#[allow(clippy::too_many_arguments)]
fn ensemble(
    py: Python<'_>,
    system: &PySystem,
    noise: &PyNoise,
    gamma: f64,
    horizon: usize,
    paths: usize,
    seed: u64,
    phi: &str,
    warmup: usize,
) -> PyResult<(f64, f64, f64)> {
    let cfg = EnsembleConfig::new(gamma, horizon, paths, seed, default_initial(&system.0), noise.0.clone())
        .with_warmup(warmup)
        .with_observable(observable(phi)?);
    let e = py.detach(|| ensemble_response(&system.0, &cfg)).map_err(err)?;
    Ok((e.value, e.std_error, e.mean_abs_integrand))
}

/// Kernel-smoothed estimate; returns `(value, std_error)`.
#[pyfunction]
#[pyo3(signature = (system, noise, gamma, width, n_gammas, length, seed = 0, phi = "x"))]
#[allow(clippy::too_many_arguments)]
fn kernel(
    py: Python<'_>,
    system: &PySystem,
    noise: &PyNoise,
    gamma: f64,
    width: f64,
    n_gammas: usize,
    length: usize,
    seed: u64,
    phi: &str,
) -> PyResult<(f64, f64)> {
    let cfg = KernelConfig::new(width, stationary_cfg(gamma, 0, length, seed, phi, 1000)?).with_samples(n_gammas);
    let noise: NoiseModel = noise.0.clone().into();
    let e = py.detach(|| kernel_smoothed_response(&system.0, &noise, &cfg)).map_err(err)?;
    Ok((e.value, e.std_error))
}

/// Runs a sweep from TOML config text; one dict per row.
#[pyfunction]
#[pyo3(signature = (config, threads = None))]
fn run_sweep<'py>(py: Python<'py>, config: &str, threads: Option<usize>) -> PyResult<Vec<Bound<'py, pyo3::types::PyDict>>> {
    let cfg = parse_config(config).and_then(|r| r.resolve()).map_err(err)?;
    let rows: Vec<SweepRow> = py.detach(|| harness_sweep(&cfg, threads)).map_err(err)?;
    rows.iter()
        .map(|r| {
            let d = pyo3::types::PyDict::new(py);
            d.set_item("gamma", r.gamma)?;
            d.set_item("phi_avg", r.phi_avg)?;
            d.set_item("phi_se", r.phi_se)?;
            d.set_item("dphi", r.dphi)?;
            d.set_item("dphi_se", r.dphi_se)?;
            d.set_item("method", r.method.as_str())?;
            d.set_item("L", r.l)?;
            d.set_item("W_or_T", r.w_or_t)?;
            d.set_item("seed", r.seed)?;
            d.set_item("wall_time_s", r.wall_time_s)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn pynoprop(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", noprop::VERSION)?;
    m.add_class::<PySystem>()?;
    m.add_class::<PyNoise>()?;
    m.add_class::<PyEstimate>()?;
    m.add_function(wrap_pyfunction!(estimate_stationary, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_finite_time, m)?)?;
    m.add_function(wrap_pyfunction!(lags, m)?)?;
    m.add_function(wrap_pyfunction!(finite_difference, m)?)?;
    m.add_function(wrap_pyfunction!(grid_response, m)?)?;
    m.add_function(wrap_pyfunction!(ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(kernel, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    Ok(())
}
