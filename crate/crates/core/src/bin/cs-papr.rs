use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cs_papr::clipper::ClipScheme;
use cs_papr::harness::{self, ExperimentSpec, Method};
use cs_papr::Result;

#[derive(Parser)]
#[command(name = "cs-papr", version, about = "Monte Carlo experiments for clipping-based OFDM PAPR reduction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// SER, NMSE and residual clipping noise over a threshold grid.
    Sweep(Common),
    /// NMSE of digital-magnitude clipper estimators versus ζ.
    NmseZeta(Common),
    /// Probability that the clip support lies in the β lowest weights.
    Inclusion(Common),
    /// CCDF of the PAPR reduction 10 log10(max|x|²/γ²).
    PaprCcdf(Common),
    /// Capacity per transmitted tone with and without reserved tones.
    Capacity(Common),
    /// CCDF of normalized estimator execution times.
    Timing(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment description.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per grid point.
    #[arg(long)]
    trials: Option<usize>,
    /// Output CSV path; a JSON sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated method tags.
    #[arg(long)]
    methods: Option<String>,
    /// Comma-separated thresholds in units of σ_|X|.
    #[arg(long)]
    gammas: Option<String>,
    /// Record estimator wall time in the sweep table.
    #[arg(long)]
    timing: bool,
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| cs_papr::Error::InvalidConfig(format!("not a number: {t}"))))
        .collect()
}

/// Experiment defaults used when no config file is given.
fn preset(kind: &Command, base: ExperimentSpec) -> ExperimentSpec {
    match kind {
        Command::Sweep(_) => base,
        Command::NmseZeta(_) => ExperimentSpec {
            scheme: ClipScheme::Dmc,
            gamma_grid: vec![harness::gamma_for_sparsity(&base.cfg, 0.3 * base.cfg.n_measurement_tones as f64)],
            methods: vec![Method::PalStr, Method::PalRts, Method::OraclePhase],
            ..base
        },
        Command::Inclusion(_) => ExperimentSpec { gamma_grid: vec![2.0], ..base },
        Command::PaprCcdf(_) => ExperimentSpec {
            gamma_grid: vec![2.02, 2.25, 2.26, 2.40],
            methods: vec![Method::None],
            n_trials: 2000,
            ..base
        },
        Command::Capacity(_) => {
            ExperimentSpec { snr_grid: vec![30.0], methods: vec![Method::Lasso, Method::Wpal], n_trials: 1000, ..base }
        }
        Command::Timing(_) => ExperimentSpec {
            gamma_grid: vec![2.26],
            methods: vec![Method::Lasso, Method::Wl, Method::PalRts, Method::Wpal, Method::BetaFbmp],
            n_trials: 2000,
            ..base
        },
    }
}

fn build_spec(command: &Command, args: &Common) -> Result<ExperimentSpec> {
    let mut spec = match &args.config {
        Some(path) => ExperimentSpec::from_toml_file(path)?,
        None => preset(command, ExperimentSpec::default()),
    };
    if let Some(seed) = args.seed {
        spec.cfg.seed = seed;
    }
    if let Some(n) = args.trials {
        spec.n_trials = n;
    }
    if let Some(out) = &args.out {
        spec.output_path = out.clone();
    }
    if let Some(m) = &args.methods {
        spec.methods = Method::parse_list(m)?;
    }
    if let Some(g) = &args.gammas {
        spec.gamma_grid = parse_floats(g)?;
    }
    spec.record_timing |= args.timing;
    spec.validate()?;
    Ok(spec)
}

fn run(cli: Cli) -> Result<String> {
    let args = match &cli.command {
        Command::Sweep(a)
        | Command::NmseZeta(a)
        | Command::Inclusion(a)
        | Command::PaprCcdf(a)
        | Command::Capacity(a)
        | Command::Timing(a) => a.clone(),
    };
    let spec = build_spec(&cli.command, &args)?;
    let rows = match cli.command {
        Command::Sweep(_) => harness::run_sweep(&spec)?.len(),
        Command::NmseZeta(_) => harness::run_nmse_zeta(&spec)?.len(),
        Command::Inclusion(_) => harness::run_inclusion(&spec)?.len(),
        Command::PaprCcdf(_) => harness::run_papr_ccdf(&spec)?.len(),
        Command::Capacity(_) => harness::run_capacity(&spec)?.len(),
        Command::Timing(_) => harness::run_timing(&spec)?.len(),
    };
    Ok(format!("wrote {rows} result groups to {}", spec.output_path.display()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(msg) => {
            eprintln!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
