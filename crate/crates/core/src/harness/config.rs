//! TOML run configuration. A file is parsed into [`RawConfig`] (every key
//! optional, unknown keys rejected), command-line overrides are applied to
//! that, and [`RawConfig::resolve`] fills per-system defaults and validates.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::{EnsembleConfig, GridOracleConfig, KernelConfig, NoisePairing, DEFAULT_KERNEL_SAMPLES, DEFAULT_MC_DELTA_GAMMA};
use crate::error::{Error, Result};
use crate::estimator::{FiniteTimeConfig, InitialDistribution, StationaryConfig, DEFAULT_BATCHES, DEFAULT_SPIN_UP};
use crate::noise::GaussianNoise;
use crate::observable::Observable;
use crate::systems::{Ar1Benchmark, BuiltinSystem, ChaoticNet, DynamicalSystem, TentMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Tent,
    ChaoticNet,
    Ar1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    NopropStationary,
    NopropFinite,
    Fd,
    Grid,
    Ensemble,
    Kernel,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::NopropStationary => "noprop-stationary",
            Method::NopropFinite => "noprop-finite",
            Method::Fd => "fd",
            Method::Grid => "grid",
            Method::Ensemble => "ensemble",
            Method::Kernel => "kernel",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_variant("method", s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FdKind {
    Finite,
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Point,
    Gaussian,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    /// Vary the orbit length `L`.
    L,
    /// Vary the window `W`.
    W,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub system: Option<SystemKind>,
    pub gamma: Option<f64>,
    pub seed: Option<u64>,
    pub phi: Option<String>,
    pub threads: Option<usize>,
    #[serde(default)]
    pub noise: RawNoise,
    #[serde(default)]
    pub chaotic_net: RawChaoticNet,
    #[serde(default)]
    pub ar1: RawAr1,
    #[serde(default)]
    pub finite: RawFinite,
    #[serde(default)]
    pub stationary: RawStationary,
    #[serde(default)]
    pub oracle: RawOracle,
    #[serde(default)]
    pub sweep: RawSweep,
    #[serde(default)]
    pub study: RawStudy,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNoise {
    pub sigma: Option<f64>,
    pub sigma_diag: Option<Vec<f64>>,
    pub cov: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawChaoticNet {
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAr1 {
    pub a: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFinite {
    pub t: Option<usize>,
    pub l: Option<usize>,
    pub initial: Option<InitialKind>,
    pub initial_mean: Option<Vec<f64>>,
    pub initial_sigma: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawStationary {
    pub w: Option<usize>,
    pub l: Option<usize>,
    pub m_pre: Option<usize>,
    pub batches: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOracle {
    pub delta_gamma: Option<f64>,
    pub fd_mode: Option<FdKind>,
    pub pairing: Option<NoisePairing>,
    pub grid_bins: Option<usize>,
    pub grid_delta_gamma: Option<f64>,
    pub grid_tol: Option<f64>,
    pub grid_max_iter: Option<usize>,
    pub horizon: Option<usize>,
    pub ensemble_warmup: Option<usize>,
    pub kernel_width: Option<f64>,
    pub n_gammas: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub gammas: Option<Vec<f64>>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub step: Option<f64>,
    pub method: Option<Method>,
    pub output: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawStudy {
    pub kind: Option<StudyKind>,
    pub values: Option<Vec<usize>>,
    pub repeats: Option<usize>,
}

/// Fully resolved configuration; emitting it as TOML and loading it back
/// gives the same value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub system: SystemKind,
    pub gamma: f64,
    pub seed: u64,
    pub phi: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub noise: NoiseSection,
    pub chaotic_net: ChaoticNetSection,
    pub ar1: Ar1Section,
    pub finite: FiniteSection,
    pub stationary: StationarySection,
    pub oracle: OracleSection,
    pub sweep: SweepSection,
    pub study: StudySection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_diag: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cov: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChaoticNetSection {
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ar1Section {
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteSection {
    pub t: usize,
    pub l: usize,
    pub initial: InitialKind,
    pub initial_mean: Vec<f64>,
    pub initial_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationarySection {
    pub w: usize,
    pub l: usize,
    pub m_pre: usize,
    pub batches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub delta_gamma: f64,
    pub fd_mode: FdKind,
    pub pairing: NoisePairing,
    pub grid_bins: usize,
    pub grid_delta_gamma: f64,
    pub grid_tol: f64,
    pub grid_max_iter: usize,
    pub horizon: usize,
    pub ensemble_warmup: usize,
    pub kernel_width: f64,
    pub n_gammas: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub gammas: Vec<f64>,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub kind: StudyKind,
    pub values: Vec<usize>,
    pub repeats: usize,
}

/// Parses a unit enum variant from its serialized name.
pub(crate) fn parse_variant<T: serde::de::DeserializeOwned>(what: &str, s: &str) -> Result<T> {
    use serde::de::value::{Error as ValueError, StrDeserializer};
    T::deserialize(StrDeserializer::<ValueError>::new(s)).map_err(|e| Error::Config(format!("{what}: {e}")))
}

macro_rules! from_str_via_serde {
    ($($t:ty => $what:literal),* $(,)?) => {$(
        impl std::str::FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                parse_variant($what, s)
            }
        }
    )*};
}

from_str_via_serde!(
    SystemKind => "system",
    FdKind => "fd_mode",
    InitialKind => "initial",
    StudyKind => "study kind",
    NoisePairing => "pairing",
);

pub const DEFAULTS_HELP: &str = "\
defaults by system:
  tent:        gamma=3, noise.sigma=0.1, phi=x, stationary.w=7, finite.t=20, initial=uniform on [0,1)
  chaotic_net: gamma=0, noise.sigma=0.5, chaotic_net.c=4, phi=mean, finite.t=50, initial=N(0, I)
  ar1:         gamma=0, noise.sigma=0.1, ar1.a=0.5, phi=x, stationary.w=30, initial=point 0
shared:
  seed=0, finite.l=100000, stationary.l=1000000, stationary.m_pre=1000, stationary.batches=50
  oracle.delta_gamma=0.05, oracle.pairing=common, oracle.fd_mode=finite for chaotic_net else stationary
  oracle.grid_bins=2000, oracle.grid_delta_gamma=1e-3, oracle.grid_tol=1e-12, oracle.grid_max_iter=100000
  oracle.horizon=finite.t, oracle.ensemble_warmup=0, oracle.kernel_width=0.05, oracle.n_gammas=100
  sweep.gammas=[gamma], sweep.method=noprop-finite for chaotic_net else noprop-stationary
  study.kind=l, study.values=[1000,10000,100000] (l) or [3,5,7,10,15,20,30] (w), study.repeats=10";

fn config_err(field: &str, reason: impl fmt::Display) -> Error {
    Error::Config(format!("{field}: {reason}"))
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(field, format!("must be positive and finite, got {v}")))
    }
}

fn at_least(field: &str, v: usize, min: usize) -> Result<usize> {
    if v >= min {
        Ok(v)
    } else {
        Err(config_err(field, format!("must be at least {min}, got {v}")))
    }
}

pub fn parse_config(text: &str) -> Result<RawConfig> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
}

pub fn read_config(path: impl AsRef<Path>) -> Result<RawConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_config(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn load_config(path: impl AsRef<Path>) -> Result<Config> {
    read_config(path)?.resolve()
}

impl RawConfig {
    pub fn resolve(&self) -> Result<Config> {
        let system = self.system.ok_or_else(|| config_err("system", "missing (tent, chaotic_net or ar1)"))?;
        let gamma = self.gamma.unwrap_or(match system {
            SystemKind::Tent => 3.0,
            _ => 0.0,
        });
        if !gamma.is_finite() {
            return Err(config_err("gamma", "must be finite"));
        }
        let phi = self.phi.clone().unwrap_or_else(|| match system {
            SystemKind::ChaoticNet => "mean".into(),
            _ => "x".into(),
        });
        if let Some(t) = self.threads {
            at_least("threads", t, 1)?;
        }

        let n = &self.noise;
        let given = [n.sigma.is_some(), n.sigma_diag.is_some(), n.cov.is_some()].iter().filter(|b| **b).count();
        if given > 1 {
            return Err(config_err("noise", "set only one of sigma, sigma_diag, cov"));
        }
        let noise = if given == 0 {
            NoiseSection {
                sigma: Some(match system {
                    SystemKind::ChaoticNet => 0.5,
                    _ => 0.1,
                }),
                sigma_diag: None,
                cov: None,
            }
        } else {
            NoiseSection {
                sigma: n.sigma,
                sigma_diag: n.sigma_diag.clone(),
                cov: n.cov.clone(),
            }
        };

        let chaotic_net = ChaoticNetSection { c: self.chaotic_net.c.unwrap_or(4.0) };
        let ar1 = Ar1Section { a: self.ar1.a.unwrap_or(0.5) };

        let f = &self.finite;
        let t = f.t.unwrap_or(match system {
            SystemKind::Tent => 20,
            _ => 50,
        });
        let finite = FiniteSection {
            t,
            l: f.l.unwrap_or(100_000),
            initial: f.initial.unwrap_or(match system {
                SystemKind::Tent => InitialKind::Uniform,
                SystemKind::ChaoticNet => InitialKind::Gaussian,
                SystemKind::Ar1 => InitialKind::Point,
            }),
            initial_mean: f.initial_mean.clone().unwrap_or_default(),
            initial_sigma: f.initial_sigma.unwrap_or(1.0),
        };

        let s = &self.stationary;
        let stationary = StationarySection {
            w: s.w.unwrap_or(match system {
                SystemKind::Ar1 => 30,
                _ => 7,
            }),
            l: s.l.unwrap_or(1_000_000),
            m_pre: s.m_pre.unwrap_or(DEFAULT_SPIN_UP),
            batches: s.batches.unwrap_or(DEFAULT_BATCHES),
        };

        let o = &self.oracle;
        let oracle = OracleSection {
            delta_gamma: o.delta_gamma.unwrap_or(DEFAULT_MC_DELTA_GAMMA),
            fd_mode: o.fd_mode.unwrap_or(match system {
                SystemKind::ChaoticNet => FdKind::Finite,
                _ => FdKind::Stationary,
            }),
            pairing: o.pairing.unwrap_or_default(),
            grid_bins: o.grid_bins.unwrap_or(2000),
            grid_delta_gamma: o.grid_delta_gamma.unwrap_or(1e-3),
            grid_tol: o.grid_tol.unwrap_or(1e-12),
            grid_max_iter: o.grid_max_iter.unwrap_or(100_000),
            horizon: o.horizon.unwrap_or(t),
            ensemble_warmup: o.ensemble_warmup.unwrap_or(0),
            kernel_width: o.kernel_width.unwrap_or(0.05),
            n_gammas: o.n_gammas.unwrap_or(DEFAULT_KERNEL_SAMPLES),
        };

        let sw = &self.sweep;
        let gammas = match (&sw.gammas, sw.min, sw.max, sw.step) {
            (Some(g), None, None, None) => g.clone(),
            (None, None, None, None) => vec![gamma],
            (None, Some(lo), Some(hi), Some(step)) => gamma_range(lo, hi, step)?,
            _ => return Err(config_err("sweep.gammas", "give either a gammas list or all of min, max, step")),
        };
        let sweep = SweepSection {
            gammas,
            method: sw.method.unwrap_or(match system {
                SystemKind::ChaoticNet => Method::NopropFinite,
                _ => Method::NopropStationary,
            }),
            output: sw.output.clone(),
        };

        let st = &self.study;
        let kind = st.kind.unwrap_or(StudyKind::L);
        let study = StudySection {
            kind,
            values: st.values.clone().unwrap_or_else(|| match kind {
                StudyKind::L => vec![1_000, 10_000, 100_000],
                StudyKind::W => vec![3, 5, 7, 10, 15, 20, 30],
            }),
            repeats: st.repeats.unwrap_or(10),
        };

        let cfg = Config {
            system,
            gamma,
            seed: self.seed.unwrap_or(0),
            phi,
            threads: self.threads,
            noise,
            chaotic_net,
            ar1,
            finite,
            stationary,
            oracle,
            sweep,
            study,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn gamma_range(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    positive("sweep.step", step)?;
    if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
        return Err(config_err("sweep.max", format!("need finite min ≤ max, got {lo}..{hi}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

impl Config {
    /// Minimal valid configuration for `system`.
    pub fn for_system(system: SystemKind) -> Self {
        RawConfig {
            system: Some(system),
            ..Default::default()
        }
        .resolve()
        .expect("defaults are valid")
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.noise.sigma {
            positive("noise.sigma", s)?;
        }
        if let Some(d) = &self.noise.sigma_diag {
            for &s in d {
                positive("noise.sigma_diag", s)?;
            }
        }
        self.build_system()?;
        self.noise()?;
        self.observable()?;
        at_least("finite.t", self.finite.t, 1)?;
        at_least("finite.l", self.finite.l, 2)?;
        positive("finite.initial_sigma", self.finite.initial_sigma)?;
        self.initial()?;
        at_least("stationary.batches", self.stationary.batches, 2)?;
        at_least("stationary.l", self.stationary.l, 2 * self.stationary.batches)?;
        if self.stationary.w >= self.stationary.l {
            return Err(config_err("stationary.w", "must be smaller than stationary.l"));
        }
        positive("oracle.delta_gamma", self.oracle.delta_gamma)?;
        at_least("oracle.grid_bins", self.oracle.grid_bins, 100)?;
        positive("oracle.grid_delta_gamma", self.oracle.grid_delta_gamma)?;
        positive("oracle.grid_tol", self.oracle.grid_tol)?;
        at_least("oracle.horizon", self.oracle.horizon, 1)?;
        positive("oracle.kernel_width", self.oracle.kernel_width)?;
        at_least("oracle.n_gammas", self.oracle.n_gammas, 2)?;
        if self.sweep.gammas.is_empty() {
            return Err(config_err("sweep.gammas", "must be nonempty"));
        }
        if self.sweep.gammas.iter().any(|g| !g.is_finite()) {
            return Err(config_err("sweep.gammas", "must be finite"));
        }
        at_least("study.repeats", self.study.repeats, 5)?;
        if self.study.values.len() < 3 || self.study.values.contains(&0) {
            return Err(config_err("study.values", "need at least 3 positive values for the slope fit"));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is representable as TOML")
    }

    pub fn build_system(&self) -> Result<BuiltinSystem> {
        Ok(match self.system {
            SystemKind::Tent => BuiltinSystem::Tent(TentMap),
            SystemKind::ChaoticNet => {
                let c = self.chaotic_net.c;
                if !c.is_finite() {
                    return Err(config_err("chaotic_net.c", "must be finite"));
                }
                BuiltinSystem::ChaoticNet(ChaoticNet::new(c))
            }
            SystemKind::Ar1 => BuiltinSystem::Ar1(Ar1Benchmark::new(self.ar1.a).map_err(|e| config_err("ar1.a", e))?),
        })
    }

    fn dim(&self) -> usize {
        match self.system {
            SystemKind::ChaoticNet => crate::systems::NET_DIM,
            _ => 1,
        }
    }

    pub fn noise(&self) -> Result<GaussianNoise> {
        let d = self.dim();
        let n = &self.noise;
        let mean = vec![0.0; d];
        let g = if let Some(s) = n.sigma {
            GaussianNoise::isotropic(d, s)
        } else if let Some(s) = &n.sigma_diag {
            GaussianNoise::diagonal(mean, s.clone())
        } else if let Some(c) = &n.cov {
            GaussianNoise::full(mean, c.clone())
        } else {
            return Err(config_err("noise", "no covariance given"));
        };
        g.map_err(|e| config_err("noise", e))
    }

    pub fn observable(&self) -> Result<Observable> {
        let phi: Observable = self.phi.parse().map_err(|e| config_err("phi", e))?;
        phi.check_dim(self.dim()).map_err(|e| config_err("phi", e))?;
        Ok(phi)
    }

    pub fn initial(&self) -> Result<InitialDistribution> {
        let d = self.dim();
        let f = &self.finite;
        let mean = if f.initial_mean.is_empty() { vec![0.0; d] } else { f.initial_mean.clone() };
        if mean.len() != d {
            return Err(config_err("finite.initial_mean", format!("expected {d} entries, got {}", mean.len())));
        }
        Ok(match f.initial {
            InitialKind::Point => InitialDistribution::Point(mean),
            InitialKind::Gaussian => InitialDistribution::Gaussian(
                GaussianNoise::isotropic_with_mean(mean, f.initial_sigma).map_err(|e| config_err("finite.initial_sigma", e))?,
            ),
            InitialKind::Uniform => {
                let (lo, hi) = if self.system == SystemKind::Tent {
                    (vec![0.0; d], vec![1.0; d])
                } else {
                    (
                        mean.iter().map(|m| m - f.initial_sigma).collect(),
                        mean.iter().map(|m| m + f.initial_sigma).collect(),
                    )
                };
                InitialDistribution::Uniform { lo, hi }
            }
        })
    }

    pub fn finite_config(&self, gamma: f64, seed: u64) -> Result<FiniteTimeConfig> {
        Ok(FiniteTimeConfig::new(gamma, self.finite.t, self.finite.l, seed, self.initial()?, self.noise()?)
            .with_observable(self.observable()?))
    }

    pub fn stationary_config(&self, gamma: f64, seed: u64) -> Result<StationaryConfig> {
        let mut c = StationaryConfig::new(gamma, self.stationary.w, self.stationary.l, seed)
            .with_observable(self.observable()?)
            .with_spin_up(self.stationary.m_pre);
        c.batches = self.stationary.batches;
        Ok(c)
    }

    pub fn grid_config(&self, gamma: f64) -> Result<GridOracleConfig> {
        let sigma = self
            .noise
            .sigma
            .ok_or_else(|| config_err("noise.sigma", "grid oracle needs isotropic noise"))?;
        let mut g = GridOracleConfig::new(gamma, sigma).with_bins(self.oracle.grid_bins);
        g.delta_gamma = self.oracle.grid_delta_gamma;
        g.tolerance = self.oracle.grid_tol;
        g.max_iterations = self.oracle.grid_max_iter;
        Ok(g)
    }

    pub fn ensemble_config(&self, gamma: f64, seed: u64) -> Result<EnsembleConfig> {
        Ok(
            EnsembleConfig::new(gamma, self.oracle.horizon, self.finite.l, seed, self.initial()?, self.noise()?)
                .with_warmup(self.oracle.ensemble_warmup)
                .with_observable(self.observable()?),
        )
    }

    pub fn kernel_config(&self, gamma: f64, seed: u64) -> Result<KernelConfig> {
        Ok(KernelConfig::new(self.oracle.kernel_width, self.stationary_config(gamma, seed)?).with_samples(self.oracle.n_gammas))
    }

    /// Checks that `method` can run on the configured system.
    pub fn check_method(&self, method: Method) -> Result<()> {
        let sys = self.build_system()?;
        match method {
            Method::Ensemble if !sys.has_jacobian() => Err(config_err("method", format!("ensemble needs a Jacobian; {} has none", sys.name()))),
            Method::Grid if self.system != SystemKind::Tent => {
                Err(config_err("method", "grid oracle only supports 1-D circle systems (tent)"))
            }
            Method::Grid if self.noise.sigma.is_none() => Err(config_err("noise.sigma", "grid oracle needs isotropic noise")),
            _ => Ok(()),
        }
    }
}
