//! Seeded Monte Carlo experiments and their result files.
//!
//! Every trial draws its tone map, data, channel and noise from RNGs keyed by
//! (master seed, trial index, stream), so results do not depend on execution
//! order or thread count. All methods at one γ share the same realizations.

pub mod output;
pub mod spec;
pub mod trial;

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::clipper::{self, ClipScheme};
use crate::config::OfdmConfig;
use crate::error::Result;
use crate::metrics::{self, Aggregate, CapacityModel, CcdfPoint, Summary, TrialRecord};
use crate::ofdm::{draw_tone_map, modulate, random_symbols, Dft};
use crate::qam::Constellation;
use crate::rng::{trial_rng, Stream};

pub use output::{sidecar_path, SWEEP_HEADER};
pub use spec::{ExperimentSpec, Method};
pub use trial::{companion_clip_var, Setup, Trial};

/// Threshold (units of σ_|X|) at which the expected sparsity equals `target`.
pub fn gamma_for_sparsity(cfg: &OfdmConfig, target: f64) -> f64 {
    let p = (target / cfg.n_subcarriers as f64).clamp(f64::MIN_POSITIVE, 1.0);
    (-2.0 * p.ln()).sqrt()
}

fn setup_for(spec: &ExperimentSpec, cfg: &OfdmConfig, gamma: f64, zeta: Option<f64>) -> Result<Setup> {
    let mut s = Setup::new(cfg, spec.scheme, gamma, zeta, cfg.seed)?;
    s.record_timing = spec.record_timing;
    Ok(s)
}

/// Runs every method on trials `0..n`, returning per-method aggregates in
/// the order of `methods`.
pub fn run_trials(setup: &Setup, methods: &[Method], n: usize) -> Result<Vec<Aggregate>> {
    let per_trial: Vec<Vec<TrialRecord>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let t = Trial::draw(setup, i)?;
            methods.iter().map(|&m| t.run(setup, m).map(|(_, r)| r)).collect()
        })
        .collect::<Result<_>>()?;
    let mut aggs = vec![Aggregate::new(); methods.len()];
    for recs in per_trial {
        for (agg, r) in aggs.iter_mut().zip(recs) {
            agg.push(r);
        }
    }
    Ok(aggs)
}

/// One (γ, method) cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub method: Method,
    pub summary: Summary,
}

impl SweepRow {
    fn csv(&self) -> Vec<String> {
        let s = &self.summary;
        vec![
            self.gamma.to_string(),
            self.method.to_string(),
            s.trials.to_string(),
            s.ser.to_string(),
            s.ser_ci95.to_string(),
            output::opt(s.nmse),
            s.papr_red_db_mean.to_string(),
            s.resid_var.to_string(),
            output::opt(s.wall_ms_median),
        ]
    }
}

/// SER, NMSE and residual statistics over the γ grid.
pub fn sweep(spec: &ExperimentSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut rows = Vec::new();
    for &gamma in &spec.gamma_grid {
        let setup = setup_for(spec, &spec.cfg, gamma, spec.zeta)?;
        let aggs = run_trials(&setup, &spec.methods, spec.n_trials)?;
        for (&method, agg) in spec.methods.iter().zip(aggs) {
            if let Some(summary) = agg.summary() {
                rows.push(SweepRow { gamma, method, summary });
            }
        }
    }
    Ok(rows)
}

#[derive(Serialize)]
struct Sidecar<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    experiment: &'static str,
    spec: &'a ExperimentSpec,
    results: T,
}

fn write_sidecar<T: Serialize>(spec: &ExperimentSpec, experiment: &'static str, out: &Path, results: T) -> Result<()> {
    output::write_json(
        &sidecar_path(out),
        &Sidecar { tool: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION"), experiment, spec, results },
    )
}

/// Runs [`sweep`] and writes the CSV table plus its JSON sidecar.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<SweepRow>> {
    let rows = sweep(spec)?;
    let table: Vec<Vec<String>> = rows.iter().map(SweepRow::csv).collect();
    output::write_csv(&spec.output_path, &SWEEP_HEADER, &table)?;
    write_sidecar(spec, "sweep", &spec.output_path, &rows)?;
    Ok(rows)
}

/// NMSE of DMC estimators as a function of ζ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZetaRow {
    pub gamma: f64,
    pub zeta: f64,
    pub method: Method,
    pub trials: usize,
    pub nmse: Option<f64>,
    pub nmse_ci95: Option<f64>,
    /// Per-trial NMSE values in trial order (empty clips excluded).
    #[serde(skip)]
    pub samples: Vec<f64>,
}

pub fn nmse_zeta(spec: &ExperimentSpec) -> Result<Vec<ZetaRow>> {
    spec.validate()?;
    let spec = ExperimentSpec { scheme: ClipScheme::Dmc, ..spec.clone() };
    let mut rows = Vec::new();
    for &gamma in &spec.gamma_grid {
        for &zeta in &spec.zeta_grid {
            let setup = setup_for(&spec, &spec.cfg, gamma, Some(zeta))?;
            let aggs = run_trials(&setup, &spec.methods, spec.n_trials)?;
            for (&method, agg) in spec.methods.iter().zip(aggs) {
                let samples: Vec<f64> = agg.records().iter().filter_map(|r| r.nmse).collect();
                let (mean, ci) = metrics::mean_ci95(&samples);
                let has = !samples.is_empty();
                rows.push(ZetaRow {
                    gamma,
                    zeta,
                    method,
                    trials: agg.len(),
                    nmse: has.then_some(mean),
                    nmse_ci95: has.then_some(ci),
                    samples,
                });
            }
        }
    }
    Ok(rows)
}

pub fn run_nmse_zeta(spec: &ExperimentSpec) -> Result<Vec<ZetaRow>> {
    let rows = nmse_zeta(spec)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.gamma.to_string(),
                r.zeta.to_string(),
                r.method.to_string(),
                r.trials.to_string(),
                output::opt(r.nmse),
                output::opt(r.nmse_ci95),
            ]
        })
        .collect();
    output::write_csv(&spec.output_path, &["gamma", "zeta", "method", "trials", "nmse", "nmse_ci95"], &table)?;
    write_sidecar(spec, "nmse-zeta", &spec.output_path, &rows)?;
    Ok(rows)
}

/// Probability that the clip support lies inside the β lowest-weight indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionRow {
    pub gamma: f64,
    pub beta_fraction: f64,
    pub trials: usize,
    pub probability: f64,
}

pub fn inclusion(spec: &ExperimentSpec) -> Result<Vec<InclusionRow>> {
    spec.validate()?;
    let n = spec.cfg.n_subcarriers;
    let mut rows = Vec::new();
    for &gamma in &spec.gamma_grid {
        let setup = Setup::new(&spec.cfg, ClipScheme::Ps, gamma, None, spec.cfg.seed)?;
        let hits: Vec<Vec<bool>> = (0..spec.n_trials as u64)
            .into_par_iter()
            .map(|i| {
                let t = Trial::draw(&setup, i)?;
                let order = t.weights(&setup)?.ascending_order();
                Ok(spec
                    .beta_fractions
                    .iter()
                    .map(|b| {
                        let beta = (b * n as f64).ceil() as usize;
                        metrics::support_included(&t.clip.support, &order, beta)
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        for (j, &beta_fraction) in spec.beta_fractions.iter().enumerate() {
            let count = hits.iter().filter(|h| h[j]).count();
            rows.push(InclusionRow {
                gamma,
                beta_fraction,
                trials: spec.n_trials,
                probability: count as f64 / spec.n_trials as f64,
            });
        }
    }
    Ok(rows)
}

pub fn run_inclusion(spec: &ExperimentSpec) -> Result<Vec<InclusionRow>> {
    let rows = inclusion(spec)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![r.gamma.to_string(), r.beta_fraction.to_string(), r.trials.to_string(), r.probability.to_string()]
        })
        .collect();
    output::write_csv(&spec.output_path, &["gamma", "beta_fraction", "trials", "probability"], &table)?;
    write_sidecar(spec, "inclusion", &spec.output_path, &rows)?;
    Ok(rows)
}

/// Per-trial 10 log10(max|x|²/γ²) of the unclipped block.
pub fn papr_reduction_samples(cfg: &OfdmConfig, gamma_sigma: f64, master_seed: u64, n: usize) -> Result<Vec<f64>> {
    cfg.validate()?;
    let constellation = Constellation::new(cfg.qam_order)?;
    let dft = Dft::cached(cfg.n_subcarriers);
    let gamma = cfg.gamma_abs(gamma_sigma);
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let tones = draw_tone_map(cfg, &mut trial_rng(master_seed, i, Stream::Tones))?;
            let (_, symbols) =
                random_symbols(&constellation, cfg.data_tones(), &mut trial_rng(master_seed, i, Stream::Data));
            let x = modulate(&symbols, &tones, &dft)?;
            Ok(metrics::papr_reduction_db(&x.values, gamma))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PaprCcdf {
    pub gamma: f64,
    pub trials: usize,
    pub mean_db: f64,
    pub ccdf: Vec<CcdfPoint>,
}

pub fn papr_ccdf(spec: &ExperimentSpec) -> Result<Vec<PaprCcdf>> {
    spec.validate()?;
    spec.gamma_grid
        .iter()
        .map(|&gamma| {
            let samples = papr_reduction_samples(&spec.cfg, gamma, spec.cfg.seed, spec.n_trials)?;
            let ccdf = metrics::papr_reduction_ccdf(&samples)?;
            let mean_db = samples.iter().sum::<f64>() / samples.len() as f64;
            Ok(PaprCcdf { gamma, trials: samples.len(), mean_db, ccdf })
        })
        .collect()
}

pub fn run_papr_ccdf(spec: &ExperimentSpec) -> Result<Vec<PaprCcdf>> {
    let tables = papr_ccdf(spec)?;
    let rows: Vec<Vec<String>> = tables
        .iter()
        .flat_map(|t| t.ccdf.iter().map(move |p| vec![t.gamma.to_string(), p.value.to_string(), p.prob.to_string()]))
        .collect();
    output::write_csv(&spec.output_path, &["gamma", "reduction_db", "ccdf"], &rows)?;
    let means: Vec<_> = tables
        .iter()
        .map(|t| serde_json::json!({"gamma": t.gamma, "trials": t.trials, "mean_db": t.mean_db}))
        .collect();
    write_sidecar(spec, "papr-ccdf", &spec.output_path, means)?;
    Ok(tables)
}

/// Capacity of the two systems at one operating point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityRow {
    pub snr_db: f64,
    pub gamma: f64,
    pub method: Method,
    pub trials: usize,
    pub gain: f64,
    pub clip_var_full: f64,
    pub resid_var: f64,
    pub c1: f64,
    pub c2: f64,
    pub condition: bool,
}

/// Capacity at one SNR and threshold for each method.
pub fn capacity_point(spec: &ExperimentSpec, snr_db: f64, gamma: f64) -> Result<Vec<CapacityRow>> {
    let cfg = OfdmConfig { snr_db, ..spec.cfg.clone() };
    let setup = Setup::new(&cfg, ClipScheme::Ps, gamma, None, cfg.seed)?;
    let per_trial: Vec<(f64, f64, Vec<f64>)> = (0..spec.n_trials as u64)
        .into_par_iter()
        .map(|i| {
            let t = Trial::draw(&setup, i)?;
            let full = companion_clip_var(&cfg, setup.gamma, cfg.seed, i)?;
            let resid: Vec<f64> = spec
                .methods
                .iter()
                .map(|&m| t.run(&setup, m).map(|(_, r)| r.residual_clip_var))
                .collect::<Result<_>>()?;
            Ok((t.channel.mean_gain(), full, resid))
        })
        .collect::<Result<_>>()?;
    let n = per_trial.len() as f64;
    let gain = per_trial.iter().map(|t| t.0).sum::<f64>() / n;
    let clip_var_full = per_trial.iter().map(|t| t.1).sum::<f64>() / n;
    let model = CapacityModel {
        n: cfg.n_subcarriers,
        m: cfg.n_measurement_tones,
        gain,
        noise_var: cfg.noise_var(),
        signal_var: 1.0,
    };
    spec.methods
        .iter()
        .enumerate()
        .map(|(j, &method)| {
            let resid_var = per_trial.iter().map(|t| t.2[j]).sum::<f64>() / n;
            let (c1, c2) = metrics::capacity_pair(&model, clip_var_full, resid_var);
            Ok(CapacityRow {
                snr_db,
                gamma,
                method,
                trials: per_trial.len(),
                gain,
                clip_var_full,
                resid_var,
                c1,
                c2,
                condition: metrics::capacity_condition(resid_var, clip_var_full, &model)?,
            })
        })
        .collect()
}

/// Capacity over the SNR grid × γ grid.
pub fn capacity(spec: &ExperimentSpec) -> Result<Vec<CapacityRow>> {
    spec.validate()?;
    let mut rows = Vec::new();
    for &snr in &spec.snr_grid {
        for &gamma in &spec.gamma_grid {
            rows.extend(capacity_point(spec, snr, gamma)?);
        }
    }
    Ok(rows)
}

pub fn run_capacity(spec: &ExperimentSpec) -> Result<Vec<CapacityRow>> {
    let rows = capacity(spec)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.snr_db.to_string(),
                r.gamma.to_string(),
                r.method.to_string(),
                r.trials.to_string(),
                r.gain.to_string(),
                r.clip_var_full.to_string(),
                r.resid_var.to_string(),
                r.c1.to_string(),
                r.c2.to_string(),
                r.condition.to_string(),
            ]
        })
        .collect();
    output::write_csv(
        &spec.output_path,
        &["snr_db", "gamma", "method", "trials", "gain", "clip_var_full", "resid_var", "c1", "c2", "condition"],
        &table,
    )?;
    write_sidecar(spec, "capacity", &spec.output_path, &rows)?;
    Ok(rows)
}

/// Normalized execution-time distribution of one method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingCcdf {
    pub method: Method,
    pub runs: usize,
    pub median_normalized: f64,
    pub ccdf: Vec<CcdfPoint>,
}

/// Times each method on the same trials at the first γ of the grid,
/// single-threaded, and normalizes by the largest time over all methods.
pub fn timing_ccdf(spec: &ExperimentSpec) -> Result<Vec<TimingCcdf>> {
    spec.validate()?;
    if spec.n_trials < 2000 {
        log::warn!("timing with {} runs per method; 2000 are recommended", spec.n_trials);
    }
    let mut setup = setup_for(spec, &spec.cfg, spec.gamma_grid[0], spec.zeta)?;
    setup.record_timing = true;
    let mut times = vec![Vec::with_capacity(spec.n_trials); spec.methods.len()];
    for i in 0..spec.n_trials as u64 {
        let t = Trial::draw(&setup, i)?;
        for (j, &m) in spec.methods.iter().enumerate() {
            let (_, r) = t.run(&setup, m)?;
            times[j].push(r.wall_time.unwrap_or_default());
        }
    }
    let max = times.iter().flatten().copied().fold(0.0, f64::max);
    let scale = if max > 0.0 { 1.0 / max } else { 0.0 };
    Ok(spec
        .methods
        .iter()
        .zip(times)
        .map(|(&method, ts)| {
            let norm: Vec<f64> = ts.iter().map(|t| t * scale).collect();
            TimingCcdf {
                method,
                runs: norm.len(),
                median_normalized: metrics::median(&norm).unwrap_or(f64::NAN),
                ccdf: metrics::empirical_ccdf(&norm),
            }
        })
        .collect())
}

pub fn run_timing(spec: &ExperimentSpec) -> Result<Vec<TimingCcdf>> {
    let tables = timing_ccdf(spec)?;
    let rows: Vec<Vec<String>> = tables
        .iter()
        .flat_map(|t| t.ccdf.iter().map(move |p| vec![t.method.to_string(), p.value.to_string(), p.prob.to_string()]))
        .collect();
    output::write_csv(&spec.output_path, &["method", "normalized_time", "ccdf"], &rows)?;
    let medians: Vec<_> = tables
        .iter()
        .map(|t| serde_json::json!({"method": t.method, "runs": t.runs, "median_normalized": t.median_normalized}))
        .collect();
    write_sidecar(spec, "timing", &spec.output_path, medians)?;
    Ok(tables)
}

/// Expected clip sparsity at a threshold given in units of σ_|X|.
pub fn expected_sparsity_sigma(cfg: &OfdmConfig, gamma_sigma: f64) -> f64 {
    clipper::expected_sparsity(cfg.gamma_abs(gamma_sigma), cfg)
}
