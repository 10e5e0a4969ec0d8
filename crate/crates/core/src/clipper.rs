//! Homogeneous clippers and their closed-form statistics.
//!
//! Both clippers produce a time-sparse `c` exactly anti-phased with the data
//! samples it touches. Peak suppression (PS) pulls every sample above γ down
//! to γ; digital-magnitude clipping (DMC) subtracts a fixed ζ along the
//! sample's phase.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::MeasurementOperator;
use crate::config::OfdmConfig;
use crate::error::{Error, Result};
use crate::ofdm::{Basis, ComplexBlock};
use crate::quad;

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClipScheme {
    Ps,
    Dmc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClipOutcome {
    pub c: Vec<Complex64>,
    /// Sorted indices of the nonzero entries of `c`.
    pub support: Vec<usize>,
    pub scheme: ClipScheme,
    pub gamma: f64,
    pub zeta: Option<f64>,
}

impl ClipOutcome {
    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    /// x̄ = x + c.
    pub fn apply(&self, x: &ComplexBlock) -> ComplexBlock {
        ComplexBlock::time(x.values.iter().zip(&self.c).map(|(a, b)| a + b).collect())
    }

    /// Largest envelope of x̄ that still exceeds γ, if any.
    pub fn residual_peak(&self, x: &ComplexBlock) -> Option<f64> {
        let peak = x.values.iter().zip(&self.c).map(|(a, b)| (a + b).norm()).fold(0.0, f64::max);
        (peak > self.gamma).then_some(peak)
    }
}

fn check_time(x: &ComplexBlock) -> Result<()> {
    if x.basis != Basis::Time {
        return Err(Error::InvalidArgument("clipping operates on time-domain blocks".into()));
    }
    Ok(())
}

fn clip_with<F: Fn(Complex64, f64) -> Complex64>(
    x: &ComplexBlock,
    gamma: f64,
    correction: F,
) -> (Vec<Complex64>, Vec<usize>) {
    let mut c = vec![Complex64::new(0.0, 0.0); x.len()];
    let mut support = Vec::new();
    for (i, &v) in x.values.iter().enumerate() {
        let r = v.norm();
        if r > gamma {
            c[i] = correction(v, r);
            support.push(i);
        }
    }
    (c, support)
}

/// Peak suppression: x̄(i) = γ e^{jθ_x(i)} wherever |x(i)| > γ.
pub fn clip_ps(x: &ComplexBlock, gamma: f64) -> Result<ClipOutcome> {
    check_time(x)?;
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    let (c, support) = clip_with(x, gamma, |v, r| -v * ((r - gamma) / r));
    Ok(ClipOutcome { c, support, scheme: ClipScheme::Ps, gamma, zeta: None })
}

/// Digital-magnitude clipping: c(i) = −ζ e^{jθ_x(i)} wherever |x(i)| > γ.
pub fn clip_dmc(x: &ComplexBlock, gamma: f64, zeta: f64) -> Result<ClipOutcome> {
    check_time(x)?;
    if !(gamma > 0.0 && zeta > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma and zeta must be positive, got {gamma}, {zeta}")));
    }
    let (c, support) = clip_with(x, gamma, |v, r| -v * (zeta / r));
    Ok(ClipOutcome { c, support, scheme: ClipScheme::Dmc, gamma, zeta: Some(zeta) })
}

pub fn rayleigh_pdf(r: f64, sigma: f64) -> f64 {
    if r < 0.0 {
        return 0.0;
    }
    let s2 = sigma * sigma;
    r / s2 * (-r * r / (2.0 * s2)).exp()
}

/// F̄(γ) = P(|x| > γ) = exp(−γ² / 2σ²).
pub fn rayleigh_ccdf(gamma: f64, sigma: f64) -> f64 {
    if gamma <= 0.0 {
        return 1.0;
    }
    (-gamma * gamma / (2.0 * sigma * sigma)).exp()
}

/// E[‖c‖₀] = N · F̄(γ).
pub fn expected_sparsity(gamma: f64, cfg: &OfdmConfig) -> f64 {
    cfg.n_subcarriers as f64 * rayleigh_ccdf(gamma, cfg.envelope_sigma())
}

/// E[(|x| − γ)² | |x| > γ] for a Rayleigh(σ) envelope, by quadrature.
///
/// The conditional density (r/σ²) exp(−(r² − γ²)/2σ²) is integrated in the
/// excess variable t = r − γ, which stays well scaled for large γ.
pub fn ps_tail_second_moment(gamma: f64, sigma: f64) -> Result<f64> {
    if !(gamma >= 0.0 && sigma > 0.0) {
        return Err(Error::InvalidArgument("need gamma >= 0 and sigma > 0".into()));
    }
    let s2 = sigma * sigma;
    let upper = -gamma + (gamma * gamma + 2.0 * 60.0 * s2).sqrt();
    let integrand = |t: f64| {
        let r = gamma + t;
        t * t * r / s2 * (-(2.0 * gamma * t + t * t) / (2.0 * s2)).exp()
    };
    let scale = s2;
    quad::integrate(integrand, 0.0, upper, 1e-14 * scale)
}

/// ζ for which DMC's per-coefficient energy matches PS's, i.e. equal CNR.
pub fn zeta_for_cnr_match(gamma: f64, cfg: &OfdmConfig) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument("gamma must be positive".into()));
    }
    Ok(ps_tail_second_moment(gamma, cfg.envelope_sigma())?.sqrt())
}

/// Approximate E[max_i |x(i)|] for N i.i.d. Rayleigh samples.
pub fn expected_peak(cfg: &OfdmConfig) -> f64 {
    let n = cfg.n_subcarriers as f64;
    cfg.envelope_sigma() * (2.0 * (n.ln() + EULER_GAMMA)).sqrt()
}

/// Smallest ζ that brings the expected peak down to γ.
pub fn zeta_safe_floor(gamma: f64, cfg: &OfdmConfig) -> f64 {
    (expected_peak(cfg) - gamma).max(0.0)
}

/// DMC with a warning when ζ is below the safe floor.
pub fn clip_dmc_checked(x: &ComplexBlock, gamma: f64, zeta: f64, cfg: &OfdmConfig) -> Result<ClipOutcome> {
    let floor = zeta_safe_floor(gamma, cfg);
    if zeta < floor {
        log::warn!("zeta {zeta:.4} is below the peak floor {floor:.4}; clipped peaks may stay above gamma");
    }
    clip_dmc(x, gamma, zeta)
}

/// Clipper-to-noise ratio ‖Ψc‖² / E‖ź‖² of one outcome, linear scale.
///
/// Returns 0 for an empty clip.
pub fn cnr(outcome: &ClipOutcome, psi: &MeasurementOperator, noise_var: f64) -> Result<f64> {
    cnr_monte_carlo(std::iter::once((outcome, psi)), noise_var)
}

/// Average of ‖Ψc‖² over realizations divided by m σ_z².
pub fn cnr_monte_carlo<'a, I>(realizations: I, noise_var: f64) -> Result<f64>
where
    I: IntoIterator<Item = (&'a ClipOutcome, &'a MeasurementOperator)>,
{
    if !(noise_var > 0.0) {
        return Err(Error::InvalidArgument("CNR needs a positive noise variance".into()));
    }
    let mut num = 0.0;
    let mut count = 0usize;
    let mut m = 0usize;
    for (outcome, psi) in realizations {
        num += psi.apply(&outcome.c).iter().map(|v| v.norm_sqr()).sum::<f64>();
        m = psi.rows();
        count += 1;
    }
    if count == 0 || m == 0 {
        return Err(Error::InvalidArgument("no realizations".into()));
    }
    Ok(num / count as f64 / (m as f64 * noise_var))
}

/// 10 log10 of a linear ratio, with −∞ for zero.
pub fn to_db(linear: f64) -> f64 {
    if linear > 0.0 {
        10.0 * linear.log10()
    } else {
        f64::NEG_INFINITY
    }
}
