//! Rayleigh multipath channel as a circulant operator, AWGN, zero-forcing
//! equalization and the projection onto the reserved tones.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::OfdmConfig;
use crate::error::{Error, Result};
use crate::ofdm::{Basis, ComplexBlock, Dft, ToneMap};

/// Regularizer added to |ȟ(k)|² in zero-forcing division.
pub const ZF_FLOOR: f64 = 1e-12;

/// Circular complex Gaussian sample with E|z|² = var.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (0.5 * var).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub taps: Vec<Complex64>,
    /// ȟ = √N F h with h zero-padded to N.
    pub freq_response: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn from_taps(taps: Vec<Complex64>, n: usize) -> Result<Self> {
        if taps.is_empty() || taps.len() > n {
            return Err(Error::InvalidArgument(format!("need 1..={n} taps, got {}", taps.len())));
        }
        let mut padded = taps.clone();
        padded.resize(n, Complex64::new(0.0, 0.0));
        let dft = Dft::cached(n);
        dft.forward_in_place(&mut padded);
        let root_n = (n as f64).sqrt();
        padded.iter_mut().for_each(|v| *v *= root_n);
        Ok(Self { taps, freq_response: padded })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_taps(vec![Complex64::new(1.0, 0.0)], n).expect("n >= 1")
    }

    pub fn n(&self) -> usize {
        self.freq_response.len()
    }

    /// Mean of |ȟ(k)|² over all tones.
    pub fn mean_gain(&self) -> f64 {
        self.freq_response.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.n() as f64
    }

    /// Hx = Fᴴ D F x, applied in the frequency domain.
    pub fn convolve(&self, block: &ComplexBlock) -> Result<ComplexBlock> {
        if block.basis != Basis::Time || block.len() != self.n() {
            return Err(Error::InvalidArgument("channel input must be a length-N time block".into()));
        }
        let dft = Dft::cached(self.n());
        let mut v = dft.forward(&block.values);
        v.iter_mut().zip(&self.freq_response).for_each(|(a, h)| *a *= h);
        dft.inverse_in_place(&mut v);
        Ok(ComplexBlock::time(v))
    }

    /// y = Hx + z with z ~ CN(0, noise_var I).
    pub fn apply<R: Rng + ?Sized>(&self, block: &ComplexBlock, noise_var: f64, rng: &mut R) -> Result<ComplexBlock> {
        let mut y = self.convolve(block)?;
        if noise_var > 0.0 {
            y.values.iter_mut().for_each(|v| *v += complex_gaussian(rng, noise_var));
        }
        Ok(y)
    }

    /// Zero-forcing estimate of the transmitted block, Fᴴ D⁻¹ F y.
    pub fn equalize(&self, y: &ComplexBlock) -> Result<ComplexBlock> {
        let dft = Dft::cached(self.n());
        let mut v = dft.to_frequency(y)?.values;
        self.equalize_freq_in_place(&mut v);
        dft.inverse_in_place(&mut v);
        Ok(ComplexBlock::time(v))
    }

    /// Per-tone ZF division with the Tikhonov floor.
    pub fn equalize_freq_in_place(&self, freq: &mut [Complex64]) {
        for (v, h) in freq.iter_mut().zip(&self.freq_response) {
            *v *= h.conj() / (h.norm_sqr() + ZF_FLOOR);
        }
    }

    /// Per-sample variance of the ZF error Fᴴ D⁻¹ ž.
    pub fn zf_error_var(&self, noise_var: f64) -> f64 {
        let n = self.n() as f64;
        noise_var * self.freq_response.iter().map(|h| h.norm_sqr() / (h.norm_sqr() + ZF_FLOOR).powi(2)).sum::<f64>() / n
    }
}

/// Taps i.i.d. CN(0, 1/L).
pub fn draw_channel<R: Rng + ?Sized>(cfg: &OfdmConfig, rng: &mut R) -> Result<ChannelRealization> {
    cfg.validate()?;
    let l = cfg.channel_taps;
    let taps = (0..l).map(|_| complex_gaussian(rng, 1.0 / l as f64)).collect();
    ChannelRealization::from_taps(taps, cfg.n_subcarriers)
}

/// Ψ = S_mᵀ D F: maps a time-domain clipper to the reserved-tone observations.
///
/// Applied through the FFT; dense columns are generated on demand.
#[derive(Debug, Clone)]
pub struct MeasurementOperator {
    n: usize,
    tones: Vec<usize>,
    gains: Vec<Complex64>,
    dft: Dft,
}

impl MeasurementOperator {
    pub fn new(channel: &ChannelRealization, tones: &ToneMap) -> Self {
        let n = channel.n();
        let tones_m = tones.measurement_tones().to_vec();
        let gains = tones_m.iter().map(|&k| channel.freq_response[k]).collect();
        Self { n, tones: tones_m, gains, dft: Dft::cached(n) }
    }

    pub fn rows(&self) -> usize {
        self.tones.len()
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn tones(&self) -> &[usize] {
        &self.tones
    }

    /// ‖Ψ‖² = max over reserved tones of |ȟ(k)|², since ΨΨᴴ is diagonal.
    pub fn norm_sqr(&self) -> f64 {
        self.gains.iter().map(|g| g.norm_sqr()).fold(0.0, f64::max)
    }

    /// Ψ c, using `scratch` (length N) as workspace.
    pub fn apply_into(&self, c: &[Complex64], scratch: &mut Vec<Complex64>, out: &mut [Complex64]) {
        scratch.clear();
        scratch.extend_from_slice(c);
        self.dft.forward_in_place(scratch);
        for ((o, &k), g) in out.iter_mut().zip(&self.tones).zip(&self.gains) {
            *o = g * scratch[k];
        }
    }

    /// Ψᴴ r.
    pub fn adjoint_into(&self, r: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for ((&k, g), v) in self.tones.iter().zip(&self.gains).zip(r) {
            out[k] = g.conj() * v;
        }
        self.dft.inverse_in_place(out);
    }

    pub fn apply(&self, c: &[Complex64]) -> Vec<Complex64> {
        let mut scratch = Vec::with_capacity(self.n);
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows()];
        self.apply_into(c, &mut scratch, &mut out);
        out
    }

    pub fn adjoint(&self, r: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        self.adjoint_into(r, &mut out);
        out
    }

    /// Column ψ_t: ψ_t(k) = ȟ(Ω_m(k)) e^{−j2π Ω_m(k) t / N} / √N.
    pub fn column(&self, t: usize) -> Vec<Complex64> {
        let scale = (self.n as f64).sqrt().recip();
        self.tones
            .iter()
            .zip(&self.gains)
            .map(|(&k, g)| {
                let phase = -2.0 * PI * ((k * t) % self.n) as f64 / self.n as f64;
                g * Complex64::from_polar(scale, phase)
            })
            .collect()
    }

    /// Gram kernel: ψ_iᴴ ψ_j = kernel[(j − i) mod N], since ΨᴴΨ is circulant.
    pub fn gram_kernel(&self) -> Vec<Complex64> {
        let mut p = vec![Complex64::new(0.0, 0.0); self.n];
        for (&k, g) in self.tones.iter().zip(&self.gains) {
            p[k] = Complex64::new(g.norm_sqr(), 0.0);
        }
        self.dft.forward_in_place(&mut p);
        let scale = (self.n as f64).sqrt().recip();
        p.iter_mut().for_each(|v| *v *= scale);
        p
    }

    /// Dense m × |cols| matrix of the selected columns.
    pub fn columns(&self, cols: &[usize]) -> DMatrix<Complex64> {
        let m = self.rows();
        let mut out = DMatrix::zeros(m, cols.len());
        for (j, &t) in cols.iter().enumerate() {
            for (i, v) in self.column(t).into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let all: Vec<usize> = (0..self.n).collect();
        self.columns(&all)
    }
}

/// ý = S_mᵀ F y together with the operator Ψ.
pub fn project_measurements(
    y: &ComplexBlock,
    channel: &ChannelRealization,
    tones: &ToneMap,
) -> Result<(Vec<Complex64>, MeasurementOperator)> {
    let dft = Dft::cached(channel.n());
    let freq = dft.to_frequency(y)?;
    Ok((tones.gather_measurement(&freq.values), MeasurementOperator::new(channel, tones)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{trial_rng, Stream};

    fn random_block<R: Rng>(n: usize, rng: &mut R) -> ComplexBlock {
        ComplexBlock::time((0..n).map(|_| complex_gaussian(rng, 1.0)).collect())
    }

    /// Direct O(N·L) circular convolution.
    fn circular_convolution(h: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n).map(|k| h.iter().enumerate().map(|(l, hl)| hl * x[(k + n - l) % n]).sum()).collect()
    }

    #[test]
    fn gram_kernel_matches_column_products() {
        let cfg = OfdmConfig { n_subcarriers: 32, n_measurement_tones: 9, channel_taps: 4, ..OfdmConfig::default() };
        let tones = crate::ofdm::draw_tone_map(&cfg, &mut trial_rng(2, 0, Stream::Tones)).unwrap();
        let ch = draw_channel(&cfg, &mut trial_rng(2, 0, Stream::Channel)).unwrap();
        let psi = MeasurementOperator::new(&ch, &tones);
        let kernel = psi.gram_kernel();
        for (i, j) in [(0, 0), (3, 7), (7, 3), (31, 0), (5, 30)] {
            let (a, b) = (psi.column(i), psi.column(j));
            let direct: Complex64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
            assert!((direct - kernel[(j + 32 - i) % 32]).norm() < 1e-12);
        }
    }

    #[test]
    fn flat_channel_has_constant_response() {
        let cfg = OfdmConfig { channel_taps: 1, ..OfdmConfig::default() };
        let ch = draw_channel(&cfg, &mut trial_rng(3, 0, Stream::Channel)).unwrap();
        let g0 = ch.freq_response[0].norm();
        assert!(ch.freq_response.iter().all(|v| (v.norm() - g0).abs() < 1e-12));
    }

    #[test]
    fn identity_noiseless_is_passthrough() {
        let mut rng = trial_rng(1, 0, Stream::Data);
        let x = random_block(64, &mut rng);
        let y = ChannelRealization::identity(64).apply(&x, 0.0, &mut rng).unwrap();
        for (a, b) in x.values.iter().zip(&y.values) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn frequency_application_matches_direct_convolution() {
        let cfg = OfdmConfig::default();
        for seed in 0..20 {
            let mut rng = trial_rng(seed, 0, Stream::Channel);
            let ch = draw_channel(&cfg, &mut rng).unwrap();
            let x = random_block(256, &mut rng);
            let fast = ch.convolve(&x).unwrap();
            let slow = circular_convolution(&ch.taps, &x.values);
            let err = fast.values.iter().zip(&slow).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            assert!(err < 1e-10, "seed {seed}: {err}");
        }
    }

    #[test]
    fn psi_matches_convolution_oracle_and_dense_form() {
        let cfg = OfdmConfig::default();
        let mut rng = trial_rng(5, 0, Stream::Channel);
        let tm = crate::ofdm::draw_tone_map(&cfg, &mut rng).unwrap();
        let ch = draw_channel(&cfg, &mut rng).unwrap();
        let psi = MeasurementOperator::new(&ch, &tm);
        let c = random_block(256, &mut rng);
        let fast = psi.apply(&c.values);
        let conv = circular_convolution(&ch.taps, &c.values);
        let oracle = tm.gather_measurement(&Dft::new(256).forward(&conv));
        let dense = psi.to_dense() * nalgebra::DVector::from_vec(c.values.clone());
        for i in 0..psi.rows() {
            assert!((fast[i] - oracle[i]).norm() < 1e-10);
            assert!((fast[i] - dense[i]).norm() < 1e-10);
        }
        // Adjoint consistency: <Ψc, r> = <c, Ψᴴr>.
        let r: Vec<Complex64> = (0..psi.rows()).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let lhs: Complex64 = fast.iter().zip(&r).map(|(a, b)| b.conj() * a).sum();
        let adj = psi.adjoint(&r);
        let rhs: Complex64 = c.values.iter().zip(&adj).map(|(a, b)| b.conj() * a).sum();
        assert!((lhs - rhs).norm() < 1e-10);
        let max_gain = tm.measurement_tones().iter().map(|&k| ch.freq_response[k].norm_sqr()).fold(0.0, f64::max);
        assert!((psi.norm_sqr() - max_gain).abs() < 1e-15);
    }

    #[test]
    fn data_is_invisible_on_reserved_tones() {
        let cfg = OfdmConfig::default();
        let mut rng = trial_rng(8, 0, Stream::Data);
        let tm = crate::ofdm::draw_tone_map(&cfg, &mut rng).unwrap();
        let qam = crate::qam::Constellation::new(32).unwrap();
        let (_, d) = crate::ofdm::random_symbols(&qam, tm.data_tones().len(), &mut rng);
        let x = crate::ofdm::modulate(&d, &tm, &Dft::cached(256)).unwrap();
        let ch = draw_channel(&cfg, &mut rng).unwrap();
        let y = ch.apply(&x, 0.0, &mut rng).unwrap();
        let (ym, _) = project_measurements(&y, &ch, &tm).unwrap();
        assert!(ym.iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn zf_inverts_noiseless_channel() {
        let cfg = OfdmConfig::default();
        let mut rng = trial_rng(4, 0, Stream::Data);
        let ch = draw_channel(&cfg, &mut rng).unwrap();
        let x = random_block(256, &mut rng);
        let y = ch.apply(&x, 0.0, &mut rng).unwrap();
        let xh = ch.equalize(&y).unwrap();
        let err = xh.values.iter().zip(&x.values).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 1e-8);
    }
}
