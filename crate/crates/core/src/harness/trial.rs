//! One Monte Carlo trial: transmit, clip, propagate, estimate, score.

use std::time::Instant;

use crate::channel::{draw_channel, project_measurements, ChannelRealization, MeasurementOperator};
use crate::clipper::{self, ClipOutcome, ClipScheme};
use crate::config::OfdmConfig;
use crate::error::{Error, Result};
use crate::harness::spec::Method;
use crate::metrics::{self, TrialRecord};
use crate::ofdm::{draw_tone_map, modulate, random_symbols, ComplexBlock, Dft, ToneMap};
use crate::qam::Constellation;
use crate::recovery::{
    self, beta_fbmp, force_digital_magnitudes, lasso, oracle_ls, recover_rts, refine_ls, refine_rotated_ls,
    weighted_lasso, FbmpParams, PhaseMatrix, PosteriorModel, RecoveryEstimate, WeightVector,
};
use crate::rng::{derive_seed, trial_rng, Stream};
use crate::Complex64;

/// Per-link constants shared by every trial at one operating point.
#[derive(Debug, Clone)]
pub struct Setup {
    pub cfg: OfdmConfig,
    pub constellation: Constellation,
    pub dft: Dft,
    pub scheme: ClipScheme,
    /// Absolute clipping threshold.
    pub gamma: f64,
    /// Absolute DMC magnitude.
    pub zeta: Option<f64>,
    pub master_seed: u64,
    pub record_timing: bool,
    /// E[(|x| − γ)² | |x| > γ].
    pub tail_moment: f64,
}

impl Setup {
    /// `gamma_sigma` and `zeta_sigma` are in units of σ_|X|; a missing ζ under
    /// DMC defaults to the CNR-matched value.
    pub fn new(
        cfg: &OfdmConfig,
        scheme: ClipScheme,
        gamma_sigma: f64,
        zeta_sigma: Option<f64>,
        master_seed: u64,
    ) -> Result<Self> {
        cfg.validate()?;
        let gamma = cfg.gamma_abs(gamma_sigma);
        Self::with_absolute(cfg, scheme, gamma, zeta_sigma.map(|z| z * cfg.envelope_sigma()), master_seed)
    }

    /// Same as [`Setup::new`] with γ and ζ already in absolute units.
    pub fn with_absolute(
        cfg: &OfdmConfig,
        scheme: ClipScheme,
        gamma: f64,
        zeta: Option<f64>,
        master_seed: u64,
    ) -> Result<Self> {
        cfg.validate()?;
        if !(gamma > 0.0) {
            return Err(Error::InvalidArgument("gamma must be positive".into()));
        }
        let tail_moment = clipper::ps_tail_second_moment(gamma, cfg.envelope_sigma())?;
        let zeta = match scheme {
            ClipScheme::Ps => None,
            ClipScheme::Dmc => Some(zeta.unwrap_or(tail_moment.sqrt())),
        };
        Ok(Self {
            cfg: cfg.clone(),
            constellation: Constellation::new(cfg.qam_order)?,
            dft: Dft::cached(cfg.n_subcarriers),
            scheme,
            gamma,
            zeta,
            master_seed,
            record_timing: false,
            tail_moment,
        })
    }

    pub fn activity_prob(&self) -> f64 {
        clipper::rayleigh_ccdf(self.gamma, self.cfg.envelope_sigma())
    }

    /// Pool size, path count and depth of the truncated Bayesian search.
    pub fn fbmp_params(&self) -> FbmpParams {
        let n = self.cfg.n_subcarriers;
        let s = &self.cfg.solver;
        let beta = ((s.fbmp_beta_fraction * n as f64).ceil() as usize).clamp(1, n);
        let p = self.activity_prob().clamp(1e-12, 1.0 - 1e-12);
        let s_max = ((s.fbmp_smax_factor * n as f64 * p).ceil() as usize).clamp(1, beta.max(2) - 1);
        let amp_var = match self.zeta {
            Some(z) => z * z,
            None => self.tail_moment,
        };
        FbmpParams { beta, rho: s.fbmp_rho, s_max, amp_var, activity_prob: p, noise_var: self.cfg.noise_var() }
    }
}

/// Everything the receiver and the scorer need from one realization.
#[derive(Debug, Clone)]
pub struct Trial {
    pub index: u64,
    pub tones: ToneMap,
    pub labels: Vec<usize>,
    /// Unclipped time-domain block.
    pub x: ComplexBlock,
    pub clip: ClipOutcome,
    pub channel: ChannelRealization,
    /// ZF-equalized received spectrum, all N tones.
    pub eq_freq: Vec<Complex64>,
    /// ZF-equalized time block x̂̄.
    pub xbar_hat: Vec<Complex64>,
    /// Reserved-tone observations ý.
    pub y: Vec<Complex64>,
    pub psi: MeasurementOperator,
}

impl Trial {
    pub fn draw(setup: &Setup, index: u64) -> Result<Self> {
        let cfg = &setup.cfg;
        let seed = setup.master_seed;
        let tones = draw_tone_map(cfg, &mut trial_rng(seed, index, Stream::Tones))?;
        let (labels, symbols) =
            random_symbols(&setup.constellation, cfg.data_tones(), &mut trial_rng(seed, index, Stream::Data));
        let x = modulate(&symbols, &tones, &setup.dft)?;
        let clip = match setup.scheme {
            ClipScheme::Ps => clipper::clip_ps(&x, setup.gamma)?,
            ClipScheme::Dmc => clipper::clip_dmc(&x, setup.gamma, setup.zeta.unwrap_or_default())?,
        };
        let xbar = clip.apply(&x);
        let channel = draw_channel(cfg, &mut trial_rng(seed, index, Stream::Channel))?;
        let received = channel.apply(&xbar, cfg.noise_var(), &mut trial_rng(seed, index, Stream::Noise))?;
        let (y, psi) = project_measurements(&received, &channel, &tones)?;
        let mut eq_freq = setup.dft.forward(&received.values);
        channel.equalize_freq_in_place(&mut eq_freq);
        let xbar_hat = setup.dft.inverse(&eq_freq);
        Ok(Self { index, tones, labels, x, clip, channel, eq_freq, xbar_hat, y, psi })
    }

    pub fn seed(&self, setup: &Setup) -> u64 {
        derive_seed(setup.master_seed, self.index, Stream::Tones)
    }

    /// Clip-location weights from the equalized block.
    pub fn weights(&self, setup: &Setup) -> Result<WeightVector> {
        let model = PosteriorModel {
            gamma: setup.gamma,
            data_var: setup.cfg.sample_power(),
            error_var: self.channel.zf_error_var(setup.cfg.noise_var()),
            floor: setup.cfg.solver.weight_floor,
        };
        recovery::ps_weights(&self.xbar_hat, &model)
    }

    pub fn anti_phase(&self) -> PhaseMatrix {
        PhaseMatrix::anti_phase_of(&self.xbar_hat)
    }

    /// Runs one receiver pipeline.
    pub fn estimate(&self, setup: &Setup, method: Method) -> Result<RecoveryEstimate> {
        let n = setup.cfg.n_subcarriers;
        let lambda = setup.cfg.lambda();
        let rts_lambda = setup.cfg.rts_lambda();
        let solver = &setup.cfg.solver;
        let (y, psi) = (&self.y, &self.psi);
        let weighted = setup.scheme == ClipScheme::Ps;
        let est = match method {
            Method::None => RecoveryEstimate::none(n),
            Method::Lasso => {
                let mut e = refine_ls(&lasso(y, psi, lambda, solver)?, y, psi)?;
                e.method = recovery::RecoveryMethod::Lasso;
                e
            }
            Method::Wl => {
                let w = if weighted { self.weights(setup)? } else { WeightVector::ones(n) };
                let mut e = refine_ls(&weighted_lasso(y, psi, lambda, &w, solver)?, y, psi)?;
                e.method = recovery::RecoveryMethod::WeightedLasso;
                e
            }
            Method::PalStr | Method::StrDm => {
                let theta = self.anti_phase();
                let base = refine_ls(&lasso(y, psi, lambda, solver)?, y, psi)?;
                let e = recovery::lasso::rotate_to_phases(&base, &theta)?;
                if method == Method::StrDm {
                    self.snap(setup, &e)?
                } else {
                    e
                }
            }
            Method::PalRts | Method::RtsDm => {
                let theta = self.anti_phase();
                let e = recover_rts(y, psi, &theta, rts_lambda, None, solver)?;
                let e = refine_rotated_ls(&e, y, psi, &theta)?;
                if method == Method::RtsDm {
                    self.snap(setup, &e)?
                } else {
                    e
                }
            }
            Method::Wpal => {
                let theta = self.anti_phase();
                let w = if weighted { Some(self.weights(setup)?) } else { None };
                let e = recover_rts(y, psi, &theta, rts_lambda, w.as_ref(), solver)?;
                let mut e = refine_rotated_ls(&e, y, psi, &theta)?;
                e.method = recovery::RecoveryMethod::Wpal;
                e
            }
            Method::BetaFbmp => {
                let w = if weighted { self.weights(setup)? } else { WeightVector::ones(n) };
                beta_fbmp(y, psi, &w, &setup.fbmp_params())?
            }
            Method::OracleLs => oracle_ls(y, psi, &self.clip.support)?,
            Method::OraclePhase => {
                let theta = PhaseMatrix::anti_phase_of(&self.x.values);
                let e = recover_rts(y, psi, &theta, rts_lambda, None, solver)?;
                let mut e = refine_rotated_ls(&e, y, psi, &theta)?;
                e.method = recovery::RecoveryMethod::OraclePhase;
                e
            }
        };
        Ok(est)
    }

    fn snap(&self, setup: &Setup, est: &RecoveryEstimate) -> Result<RecoveryEstimate> {
        match setup.zeta {
            Some(z) => force_digital_magnitudes(est, z),
            None => Ok(est.clone()),
        }
    }

    /// Minimum-distance labels after removing ĉ from the equalized data tones.
    pub fn decode(&self, setup: &Setup, c_hat: &[Complex64]) -> Vec<usize> {
        let c_freq = setup.dft.forward(c_hat);
        self.tones.data_tones().iter().map(|&t| setup.constellation.nearest(self.eq_freq[t] - c_freq[t])).collect()
    }

    /// Scores an estimate.
    pub fn score(
        &self,
        setup: &Setup,
        method: Method,
        est: &RecoveryEstimate,
        wall: Option<f64>,
    ) -> Result<TrialRecord> {
        let decoded = self.decode(setup, &est.c_hat);
        let ser = metrics::ser(&decoded, &self.labels)?;
        let c = &self.clip.c;
        let nmse = metrics::nmse(c, &est.c_hat)?;
        let resid: Vec<Complex64> = c.iter().zip(&est.c_hat).map(|(a, b)| a - b).collect();
        let resid_f = self.tones.gather_data(&setup.dft.forward(&resid));
        let clip_f = self.tones.gather_data(&setup.dft.forward(c));
        Ok(TrialRecord {
            seed: self.seed(setup),
            gamma: setup.gamma / setup.cfg.envelope_sigma(),
            method: method.tag().to_string(),
            ser,
            nmse,
            papr_reduction_db: metrics::papr_reduction_db(&self.x.values, setup.gamma),
            residual_clip_var: metrics::mean_power(&resid_f),
            clip_var: metrics::mean_power(&clip_f),
            sparsity: self.clip.sparsity(),
            wall_time: wall,
        })
    }

    /// Estimate and score, timing the estimator when requested.
    pub fn run(&self, setup: &Setup, method: Method) -> Result<(RecoveryEstimate, TrialRecord)> {
        let start = Instant::now();
        let est = self.estimate(setup, method)?;
        let wall = setup.record_timing.then(|| start.elapsed().as_secs_f64());
        let rec = self.score(setup, method, &est, wall)?;
        Ok((est, rec))
    }
}

/// Mean clipping-noise power per tone of the all-tones-for-data system,
/// clipped by peak suppression at the same absolute γ.
pub fn companion_clip_var(cfg: &OfdmConfig, gamma: f64, master_seed: u64, index: u64) -> Result<f64> {
    let full = cfg.without_reservation();
    let constellation = Constellation::new(full.qam_order)?;
    let dft = Dft::cached(full.n_subcarriers);
    let tones = ToneMap::from_measurement(full.n_subcarriers, Vec::new())?;
    let mut rng = trial_rng(master_seed, index, Stream::Companion);
    let (_, symbols) = random_symbols(&constellation, full.n_subcarriers, &mut rng);
    let x = modulate(&symbols, &tones, &dft)?;
    let clip = clipper::clip_ps(&x, gamma)?;
    Ok(metrics::mean_power(&dft.forward(&clip.c)))
}
