//! OFDM block construction: unitary DFT, tone partitioning, modulation, PAPR.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};

use crate::config::OfdmConfig;
use crate::error::{Error, Result};
use crate::qam::Constellation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Time,
    Frequency,
}

/// A length-N complex vector tagged with the domain it lives in.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexBlock {
    pub values: Vec<Complex64>,
    pub basis: Basis,
}

impl ComplexBlock {
    pub fn time(values: Vec<Complex64>) -> Self {
        Self { values, basis: Basis::Time }
    }

    pub fn frequency(values: Vec<Complex64>) -> Self {
        Self { values, basis: Basis::Frequency }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    fn expect(&self, basis: Basis) -> Result<()> {
        if self.basis == basis {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("expected a {basis:?}-domain block")))
        }
    }
}

/// Unitary DFT of a fixed size (1/√N scaling both ways).
#[derive(Clone)]
pub struct Dft {
    n: usize,
    scale: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Dft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft").field("n", &self.n).finish()
    }
}

impl Dft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            scale: (n as f64).sqrt().recip(),
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Process-wide plan cache.
    pub fn cached(n: usize) -> Self {
        static CACHE: OnceLock<Mutex<HashMap<usize, Dft>>> = OnceLock::new();
        let mut map = CACHE.get_or_init(Default::default).lock().unwrap();
        map.entry(n).or_insert_with(|| Dft::new(n)).clone()
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place F v.
    pub fn forward_in_place(&self, v: &mut [Complex64]) {
        assert_eq!(v.len(), self.n);
        self.forward.process(v);
        v.iter_mut().for_each(|x| *x *= self.scale);
    }

    /// In-place Fᴴ v.
    pub fn inverse_in_place(&self, v: &mut [Complex64]) {
        assert_eq!(v.len(), self.n);
        self.inverse.process(v);
        v.iter_mut().for_each(|x| *x *= self.scale);
    }

    pub fn forward(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = v.to_vec();
        self.forward_in_place(&mut out);
        out
    }

    pub fn inverse(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = v.to_vec();
        self.inverse_in_place(&mut out);
        out
    }

    pub fn to_frequency(&self, block: &ComplexBlock) -> Result<ComplexBlock> {
        block.expect(Basis::Time)?;
        Ok(ComplexBlock::frequency(self.forward(&block.values)))
    }

    pub fn to_time(&self, block: &ComplexBlock) -> Result<ComplexBlock> {
        block.expect(Basis::Frequency)?;
        Ok(ComplexBlock::time(self.inverse(&block.values)))
    }
}

/// Partition of the N tones into data tones Ω_d and measurement tones Ω_m.
///
/// Both index lists are sorted ascending. The selection operators S_x and S_m
/// are the gather/scatter maps over these lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToneMap {
    n: usize,
    data: Vec<usize>,
    measurement: Vec<usize>,
}

impl ToneMap {
    /// Builds the map from an explicit measurement set.
    pub fn from_measurement(n: usize, mut measurement: Vec<usize>) -> Result<Self> {
        measurement.sort_unstable();
        measurement.dedup();
        if measurement.iter().any(|&i| i >= n) {
            return Err(Error::InvalidArgument("measurement tone out of range".into()));
        }
        let mut is_meas = vec![false; n];
        measurement.iter().for_each(|&i| is_meas[i] = true);
        let data = (0..n).filter(|&i| !is_meas[i]).collect();
        Ok(Self { n, data, measurement })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data_tones(&self) -> &[usize] {
        &self.data
    }

    pub fn measurement_tones(&self) -> &[usize] {
        &self.measurement
    }

    /// S_xᵀ v: the entries of a frequency vector on the data tones.
    pub fn gather_data(&self, freq: &[Complex64]) -> Vec<Complex64> {
        self.data.iter().map(|&i| freq[i]).collect()
    }

    /// S_mᵀ v.
    pub fn gather_measurement(&self, freq: &[Complex64]) -> Vec<Complex64> {
        self.measurement.iter().map(|&i| freq[i]).collect()
    }

    /// S_x d: places k data symbols on the data tones, zeros elsewhere.
    pub fn scatter_data(&self, symbols: &[Complex64]) -> Result<Vec<Complex64>> {
        if symbols.len() != self.data.len() {
            return Err(Error::LengthMismatch { expected: self.data.len(), actual: symbols.len() });
        }
        let mut freq = vec![Complex64::new(0.0, 0.0); self.n];
        for (&i, &s) in self.data.iter().zip(symbols) {
            freq[i] = s;
        }
        Ok(freq)
    }
}

/// Uniformly random m-subset of the N tones as Ω_m.
pub fn draw_tone_map<R: Rng + ?Sized>(cfg: &OfdmConfig, rng: &mut R) -> Result<ToneMap> {
    cfg.validate()?;
    let picked = rand::seq::index::sample(rng, cfg.n_subcarriers, cfg.n_measurement_tones);
    ToneMap::from_measurement(cfg.n_subcarriers, picked.into_vec())
}

/// i.i.d. uniform constellation labels and the matching symbols.
pub fn random_symbols<R: Rng + ?Sized>(
    constellation: &Constellation,
    k: usize,
    rng: &mut R,
) -> (Vec<usize>, Vec<Complex64>) {
    let labels: Vec<usize> = (0..k).map(|_| rng.random_range(0..constellation.order())).collect();
    let symbols = labels.iter().map(|&l| constellation.point(l)).collect();
    (labels, symbols)
}

/// x = Fᴴ S_x ď.
pub fn modulate(symbols: &[Complex64], tones: &ToneMap, dft: &Dft) -> Result<ComplexBlock> {
    let mut freq = tones.scatter_data(symbols)?;
    dft.inverse_in_place(&mut freq);
    Ok(ComplexBlock::time(freq))
}

/// max |x(i)|² / mean |x(i)|² in dB.
pub fn papr(block: &ComplexBlock) -> Result<f64> {
    block.expect(Basis::Time)?;
    let powers = block.values.iter().map(|v| v.norm_sqr());
    let (peak, total) = powers.fold((0.0f64, 0.0f64), |(p, t), v| (p.max(v), t + v));
    if total == 0.0 {
        return Err(Error::ZeroBlock);
    }
    let mean = total / block.len() as f64;
    Ok(10.0 * (peak / mean).log10())
}
