//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use cs_papr::channel::{draw_channel, MeasurementOperator};
use cs_papr::ofdm::draw_tone_map;
use cs_papr::rng::{trial_rng, Stream};
use cs_papr::{Complex64, OfdmConfig};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Small random instance: operator, sparse clipper, noisy observation.
pub struct Instance {
    pub psi: MeasurementOperator,
    pub c: Vec<Complex64>,
    pub y: Vec<Complex64>,
}

pub fn small_cfg(n: usize, m: usize) -> OfdmConfig {
    OfdmConfig {
        n_subcarriers: n,
        n_measurement_tones: m,
        qam_order: 4,
        channel_taps: 3.min(n),
        ..OfdmConfig::default()
    }
}

pub fn complex_normal<R: Rng>(rng: &mut R, var: f64) -> Complex64 {
    let s = (0.5 * var).sqrt();
    let u: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng);
    let v: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng);
    Complex64::new(s * u, s * v)
}

/// Draws a random instance with exactly `s` active coefficients ~ CN(0, amp_var).
pub fn instance(n: usize, m: usize, s: usize, amp_var: f64, noise_var: f64, seed: u64) -> Instance {
    let cfg = small_cfg(n, m);
    let tones = draw_tone_map(&cfg, &mut trial_rng(seed, 0, Stream::Tones)).unwrap();
    let ch = draw_channel(&cfg, &mut trial_rng(seed, 0, Stream::Channel)).unwrap();
    let psi = MeasurementOperator::new(&ch, &tones);
    let mut rng = trial_rng(seed, 0, Stream::Data);
    let support = rand::seq::index::sample(&mut rng, n, s).into_vec();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    for i in support {
        c[i] = complex_normal(&mut rng, amp_var);
    }
    let mut noise = trial_rng(seed, 0, Stream::Noise);
    let y = psi.apply(&c).into_iter().map(|v| v + complex_normal(&mut noise, noise_var)).collect();
    Instance { psi, c, y }
}

/// Bernoulli–Gaussian MMSE estimate by enumerating all 2^N supports with
/// dense Cholesky factorizations.
pub fn exhaustive_mmse(
    y: &[Complex64],
    psi: &MeasurementOperator,
    amp_var: f64,
    p: f64,
    noise_var: f64,
) -> Vec<Complex64> {
    let n = psi.cols();
    let m = psi.rows();
    let a = psi.to_dense();
    let yv = DVector::from_column_slice(y);
    let mut logs = Vec::with_capacity(1 << n);
    let mut means = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        let cols: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let phi = DMatrix::from_fn(m, cols.len(), |r, j| a[(r, cols[j])]);
        let mut cov = &phi * phi.adjoint() * Complex64::new(amp_var, 0.0);
        for i in 0..m {
            cov[(i, i)] += noise_var;
        }
        let chol = cov.cholesky().expect("covariance is positive definite");
        let logdet: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.re.ln()).sum::<f64>();
        let cinv_y = chol.solve(&yv);
        let quad = yv.dotc(&cinv_y).re;
        let k = cols.len() as f64;
        logs.push(-quad - logdet + k * p.ln() + (n as f64 - k) * (1.0 - p).ln());
        let mean = phi.adjoint() * cinv_y * Complex64::new(amp_var, 0.0);
        means.push((cols, mean));
    }
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - peak).exp()).collect();
    let total: f64 = w.iter().sum();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (wi, (cols, mean)) in w.iter().zip(&means) {
        for (j, &i) in cols.iter().enumerate() {
            out[i] += mean[j] * (wi / total);
        }
    }
    out
}

/// Two-sided Kolmogorov–Smirnov statistic of a sample against a CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Prints one acceptance line and returns the verdict.
pub fn report(id: &str, pass: bool, detail: &str) -> bool {
    println!("{} criterion {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}
