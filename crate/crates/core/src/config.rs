//! System constants and solver knobs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Knobs shared by the receiver-side estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// λ = kappa · σ_z · sqrt(2 ln N).
    pub lambda_kappa: f64,
    /// kappa for the phase-rotated nonnegative real programs.
    pub rts_lambda_kappa: f64,
    /// Relative objective change that stops the proximal-gradient loop.
    pub tol: f64,
    pub max_iters: usize,
    /// Entries with |ĉ(i)| ≤ support_threshold · max|ĉ| are dropped from the support.
    pub support_threshold: f64,
    /// Lower clamp on posterior weights.
    pub weight_floor: f64,
    /// Candidate pool size of β-FBMP as a fraction of N.
    pub fbmp_beta_fraction: f64,
    /// Configurations kept per Hamming weight in β-FBMP.
    pub fbmp_rho: usize,
    /// Extension stages: ceil(fbmp_smax_factor · N · F̄(γ)).
    pub fbmp_smax_factor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda_kappa: 1.0,
            rts_lambda_kappa: 0.5,
            tol: 1e-8,
            max_iters: 2000,
            support_threshold: 1e-3,
            weight_floor: 1e-6,
            fbmp_beta_fraction: 0.3,
            fbmp_rho: 5,
            fbmp_smax_factor: 1.5,
        }
    }
}

/// All constants of one simulated OFDM link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OfdmConfig {
    pub n_subcarriers: usize,
    pub n_measurement_tones: usize,
    pub qam_order: usize,
    pub channel_taps: usize,
    pub snr_db: f64,
    pub seed: u64,
    pub solver: SolverConfig,
}

impl Default for OfdmConfig {
    /// N = 256, m = round(0.2 N) = 51, 32-QAM, 32 Rayleigh taps, 30 dB.
    fn default() -> Self {
        Self {
            n_subcarriers: 256,
            n_measurement_tones: 51,
            qam_order: 32,
            channel_taps: 32,
            snr_db: 30.0,
            seed: 0,
            solver: SolverConfig::default(),
        }
    }
}

impl OfdmConfig {
    /// Default link with `m = round(fraction · N)` reserved tones.
    pub fn with_reserved_fraction(n: usize, fraction: f64) -> Self {
        Self { n_subcarriers: n, n_measurement_tones: (fraction * n as f64).round() as usize, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_subcarriers;
        let m = self.n_measurement_tones;
        if n == 0 {
            return Err(Error::InvalidConfig("n_subcarriers must be positive".into()));
        }
        if m >= n {
            return Err(Error::InvalidConfig(format!("n_measurement_tones ({m}) must be below n_subcarriers ({n})")));
        }
        if self.channel_taps == 0 || self.channel_taps > n {
            return Err(Error::InvalidConfig(format!("channel_taps must lie in 1..={n}, got {}", self.channel_taps)));
        }
        crate::qam::validate_order(self.qam_order)?;
        if !self.snr_db.is_finite() {
            return Err(Error::InvalidConfig("snr_db must be finite".into()));
        }
        let s = &self.solver;
        if !(s.lambda_kappa > 0.0 && s.rts_lambda_kappa > 0.0 && s.tol > 0.0 && s.max_iters > 0) {
            return Err(Error::InvalidConfig(
                "solver needs positive lambda_kappa and rts_lambda_kappa, tol > 0, max_iters > 0".into(),
            ));
        }
        if !(0.0..1.0).contains(&s.support_threshold) {
            return Err(Error::InvalidConfig("support_threshold must lie in [0, 1)".into()));
        }
        if !(s.weight_floor > 0.0 && s.weight_floor <= 1.0) {
            return Err(Error::InvalidConfig("weight_floor must lie in (0, 1]".into()));
        }
        if !(s.fbmp_beta_fraction > 0.0 && s.fbmp_beta_fraction <= 1.0) || s.fbmp_rho == 0 {
            return Err(Error::InvalidConfig(
                "fbmp_beta_fraction must lie in (0, 1] and fbmp_rho must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Number of data tones k = N − m.
    pub fn data_tones(&self) -> usize {
        self.n_subcarriers - self.n_measurement_tones
    }

    /// Average time-domain sample power E|x(i)|² = k / N for unit-power symbols.
    pub fn sample_power(&self) -> f64 {
        self.data_tones() as f64 / self.n_subcarriers as f64
    }

    /// Rayleigh parameter of the envelope |x(i)|, sqrt(k / 2N).
    ///
    /// Equals 1/√2 when every tone carries data.
    pub fn envelope_sigma(&self) -> f64 {
        (0.5 * self.sample_power()).sqrt()
    }

    /// Per-sample AWGN variance giving E‖Hx‖² / E‖z‖² = SNR with E‖h‖² = 1.
    pub fn noise_var(&self) -> f64 {
        self.sample_power() / 10f64.powf(self.snr_db / 10.0)
    }

    /// Converts a threshold in units of σ_|X| to absolute amplitude.
    pub fn gamma_abs(&self, gamma_in_sigma: f64) -> f64 {
        gamma_in_sigma * self.envelope_sigma()
    }

    /// λ = kappa · σ_z · sqrt(2 ln N).
    pub fn lambda(&self) -> f64 {
        self.solver.lambda_kappa * self.noise_var().sqrt() * (2.0 * (self.n_subcarriers as f64).ln()).sqrt()
    }

    /// λ for the phase-rotated programs, with `rts_lambda_kappa` in place of kappa.
    pub fn rts_lambda(&self) -> f64 {
        self.lambda() * self.solver.rts_lambda_kappa / self.solver.lambda_kappa
    }

    /// The all-tones-for-data system sharing this link's N, channel and noise level.
    pub fn without_reservation(&self) -> Self {
        Self { n_measurement_tones: 0, ..self.clone() }
    }
}
