use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use noprop::baselines::NoisePairing;
use noprop::harness::config::{FdKind, StudyKind};
use noprop::harness::{
    effective_threads, read_config, run_convergence_study, run_method, run_sweep, write_estimate_csv, write_study_csv, write_sweep_csv, Method,
    RawConfig, Summary, SystemKind, DEFAULTS_HELP,
};

#[derive(Parser)]
#[command(name = "noprop", version = noprop::VERSION, about = "Linear response of noisy dynamical systems", after_help = DEFAULTS_HELP)]
struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    system: Option<SystemKind>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Isotropic noise standard deviation.
    #[arg(long, global = true, allow_negative_numbers = true)]
    sigma: Option<f64>,
    /// Observable: x, mean or x<i>.
    #[arg(long, global = true)]
    phi: Option<String>,
    /// Worker threads (capped by NOPROP_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// CSV destination; stdout when absent.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Write a JSON summary (resolved config, version, results) here.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Finite-horizon no-propagate estimate over independent paths.
    Finite(FiniteArgs),
    /// Long-orbit no-propagate estimate.
    Stationary(StationaryArgs),
    /// One row per gamma value.
    Sweep(SweepArgs),
    /// Spread of repeated estimates versus L or W.
    Study(StudyArgs),
    /// Reference computations.
    #[command(subcommand)]
    Oracle(Oracle),
    /// Print the resolved configuration as TOML.
    Config,
}

#[derive(Args, Default)]
struct FiniteArgs {
    /// Horizon T.
    #[arg(long, alias = "T")]
    t: Option<usize>,
    /// Number of paths.
    #[arg(long, alias = "L")]
    l: Option<usize>,
}

#[derive(Args, Default)]
struct StationaryArgs {
    /// Decorrelation window.
    #[arg(long, alias = "W")]
    w: Option<usize>,
    /// Orbit length.
    #[arg(long, alias = "L")]
    l: Option<usize>,
    /// Spin-up steps.
    #[arg(long, alias = "M-pre")]
    m_pre: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated gamma values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    gammas: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    max: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    method: Option<Method>,
    #[command(flatten)]
    finite: FiniteArgs,
    #[arg(long)]
    w: Option<usize>,
    #[arg(long)]
    m_pre: Option<usize>,
    /// Stationary orbit length.
    #[arg(long)]
    stationary_l: Option<usize>,
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long)]
    kind: Option<StudyKind>,
    /// Comma-separated L or W values.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<usize>>,
    #[arg(long)]
    repeats: Option<usize>,
    #[command(flatten)]
    stationary: StationaryArgs,
}

#[derive(Subcommand)]
enum Oracle {
    /// Central finite difference with common or independent noise.
    Fd {
        #[arg(long)]
        delta_gamma: Option<f64>,
        #[arg(long)]
        mode: Option<FdKind>,
        #[arg(long)]
        pairing: Option<NoisePairing>,
        #[command(flatten)]
        finite: FiniteArgs,
        #[arg(long)]
        w: Option<usize>,
        #[arg(long)]
        stationary_l: Option<usize>,
    },
    /// Transfer-operator grid (1-D circle systems).
    Grid {
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        delta_gamma: Option<f64>,
    },
    /// Covector backpropagation.
    Ensemble {
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        warmup: Option<usize>,
        /// Number of paths.
        #[arg(long, alias = "L")]
        l: Option<usize>,
    },
    /// Gaussian smoothing in gamma.
    Kernel {
        #[arg(long)]
        width: Option<f64>,
        #[arg(long)]
        n_gammas: Option<usize>,
        /// Orbit length per gamma sample.
        #[arg(long, alias = "L")]
        l: Option<usize>,
    },
}

fn set<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

fn apply_finite(raw: &mut RawConfig, a: FiniteArgs) {
    set(&mut raw.finite.t, a.t);
    set(&mut raw.finite.l, a.l);
}

fn apply_stationary(raw: &mut RawConfig, a: StationaryArgs) {
    set(&mut raw.stationary.w, a.w);
    set(&mut raw.stationary.l, a.l);
    set(&mut raw.stationary.m_pre, a.m_pre);
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json(path: Option<&Path>, json: impl FnOnce() -> noprop::Result<String>) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, json()? + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut raw = match &cli.config {
        Some(p) => read_config(p)?,
        None => RawConfig::default(),
    };
    set(&mut raw.system, cli.system);
    set(&mut raw.gamma, cli.gamma);
    set(&mut raw.seed, cli.seed);
    set(&mut raw.phi, cli.phi.clone());
    set(&mut raw.threads, cli.threads);
    if cli.sigma.is_some() {
        raw.noise = Default::default();
        raw.noise.sigma = cli.sigma;
    }

    let (name, method) = match cli.command {
        Command::Finite(a) => {
            apply_finite(&mut raw, a);
            ("finite", Some(Method::NopropFinite))
        }
        Command::Stationary(a) => {
            apply_stationary(&mut raw, a);
            ("stationary", Some(Method::NopropStationary))
        }
        Command::Sweep(a) => {
            if a.gammas.is_some() || a.min.is_some() {
                raw.sweep.gammas = a.gammas;
                raw.sweep.min = a.min;
                raw.sweep.max = a.max;
                raw.sweep.step = a.step;
            }
            set(&mut raw.sweep.method, a.method);
            apply_finite(&mut raw, a.finite);
            set(&mut raw.stationary.w, a.w);
            set(&mut raw.stationary.m_pre, a.m_pre);
            set(&mut raw.stationary.l, a.stationary_l);
            ("sweep", None)
        }
        Command::Study(a) => {
            set(&mut raw.study.kind, a.kind);
            set(&mut raw.study.values, a.values);
            set(&mut raw.study.repeats, a.repeats);
            apply_stationary(&mut raw, a.stationary);
            ("study", None)
        }
        Command::Oracle(o) => match o {
            Oracle::Fd {
                delta_gamma,
                mode,
                pairing,
                finite,
                w,
                stationary_l,
            } => {
                set(&mut raw.oracle.delta_gamma, delta_gamma);
                set(&mut raw.oracle.fd_mode, mode);
                set(&mut raw.oracle.pairing, pairing);
                apply_finite(&mut raw, finite);
                set(&mut raw.stationary.w, w);
                set(&mut raw.stationary.l, stationary_l);
                ("oracle fd", Some(Method::Fd))
            }
            Oracle::Grid { bins, delta_gamma } => {
                set(&mut raw.oracle.grid_bins, bins);
                set(&mut raw.oracle.grid_delta_gamma, delta_gamma);
                ("oracle grid", Some(Method::Grid))
            }
            Oracle::Ensemble { horizon, warmup, l } => {
                set(&mut raw.oracle.horizon, horizon);
                set(&mut raw.oracle.ensemble_warmup, warmup);
                set(&mut raw.finite.l, l);
                ("oracle ensemble", Some(Method::Ensemble))
            }
            Oracle::Kernel { width, n_gammas, l } => {
                set(&mut raw.oracle.kernel_width, width);
                set(&mut raw.oracle.n_gammas, n_gammas);
                set(&mut raw.stationary.l, l);
                ("oracle kernel", Some(Method::Kernel))
            }
        },
        Command::Config => ("config", None),
    };

    if raw.system.is_none() {
        bail!("no system given: pass --system or set `system` in the config file");
    }
    let cfg = raw.resolve()?;
    let threads = effective_threads(cfg.threads);

    match name {
        "config" => {
            print!("{}", cfg.to_toml());
        }
        "sweep" => {
            let rows = run_sweep(&cfg, threads)?;
            let out = cli.output.clone().or_else(|| cfg.sweep.output.as_ref().map(PathBuf::from));
            write_sweep_csv(&rows, open_output(out.as_deref())?)?;
            let json = cli.json.clone().or_else(|| out.map(|p| p.with_extension("json")));
            write_json(json.as_deref(), || Summary::new(name, &cfg, threads, &rows).to_json())?;
        }
        "study" => {
            let res = run_convergence_study(&cfg, threads)?;
            write_study_csv(&res, open_output(cli.output.as_deref())?)?;
            write_json(cli.json.as_deref(), || Summary::new(name, &cfg, threads, &res).to_json())?;
        }
        _ => {
            let method = method.expect("single-run commands carry a method");
            let row = noprop::parallel::with_threads(threads, || run_method(&cfg, method, cfg.gamma, cfg.seed))?;
            write_estimate_csv(&row, cfg.stationary.m_pre, open_output(cli.output.as_deref())?)?;
            write_json(cli.json.as_deref(), || Summary::new(name, &cfg, threads, &row).to_json())?;
        }
    }
    Ok(())
}
