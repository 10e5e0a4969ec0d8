//! Performance measures and per-trial record aggregation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Complex64;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Fraction of mismatched symbol labels.
pub fn ser(decoded: &[usize], truth: &[usize]) -> Result<f64> {
    if decoded.len() != truth.len() {
        return Err(Error::LengthMismatch { expected: truth.len(), actual: decoded.len() });
    }
    if truth.is_empty() {
        return Err(Error::InvalidArgument("SER needs at least one symbol".into()));
    }
    let errors = decoded.iter().zip(truth).filter(|(a, b)| a != b).count();
    Ok(errors as f64 / truth.len() as f64)
}

/// ‖c − ĉ‖² / ‖c‖², or `None` when the clip is empty (excluded from averages).
pub fn nmse(c: &[Complex64], c_hat: &[Complex64]) -> Result<Option<f64>> {
    if c.len() != c_hat.len() {
        return Err(Error::LengthMismatch { expected: c.len(), actual: c_hat.len() });
    }
    let energy: f64 = c.iter().map(|v| v.norm_sqr()).sum();
    if energy == 0.0 {
        return Ok(None);
    }
    let err: f64 = c.iter().zip(c_hat).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok(Some(err / energy))
}

/// Mean of squared magnitudes.
pub fn mean_power(v: &[Complex64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().map(|z| z.norm_sqr()).sum::<f64>() / v.len() as f64
}

/// 10 log10(max|x|² / γ²).
pub fn papr_reduction_db(x: &[Complex64], gamma: f64) -> f64 {
    let peak = x.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    10.0 * (peak / (gamma * gamma)).log10()
}

/// Sample mean and the half-width of its normal 95% interval.
pub fn mean_ci95(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, Z95 * (var / n as f64).sqrt())
}

/// Median of a sample (mean of the two middle values for even sizes).
pub fn median(samples: &[f64]) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len() / 2;
    Some(if s.len() % 2 == 1 { s[k] } else { 0.5 * (s[k - 1] + s[k]) })
}

/// One point of an empirical survival function: P(X > value).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CcdfPoint {
    pub value: f64,
    pub prob: f64,
}

/// Empirical CCDF evaluated at each distinct sample value, ascending.
/// Starts at P(X > min) and ends at 0 for the largest sample.
pub fn empirical_ccdf(samples: &[f64]) -> Vec<CcdfPoint> {
    let mut s: Vec<f64> = samples.iter().copied().filter(|v| !v.is_nan()).collect();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut out = Vec::new();
    let mut i = 0;
    while i < s.len() {
        let v = s[i];
        let mut j = i;
        while j < s.len() && s[j] == v {
            j += 1;
        }
        out.push(CcdfPoint { value: v, prob: (s.len() - j) as f64 / n });
        i = j;
    }
    out
}

/// CCDF of per-trial PAPR reductions in dB. Needs at least 100 samples.
pub fn papr_reduction_ccdf(reductions_db: &[f64]) -> Result<Vec<CcdfPoint>> {
    if reductions_db.len() < 100 {
        return Err(Error::InvalidArgument(format!(
            "PAPR-reduction CCDF needs at least 100 trials, got {}",
            reductions_db.len()
        )));
    }
    Ok(empirical_ccdf(reductions_db))
}

/// Channel and noise constants shared by both capacity systems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityModel {
    pub n: usize,
    pub m: usize,
    /// Mean channel power gain |D|².
    pub gain: f64,
    pub noise_var: f64,
    /// Per-tone data symbol variance.
    pub signal_var: f64,
}

impl CapacityModel {
    fn full_sinr(&self, clip_var_full: f64) -> f64 {
        self.gain * self.signal_var / (self.gain * clip_var_full + self.noise_var)
    }

    /// Capacity per transmitted tone of the system using all N tones for data.
    pub fn c1(&self, clip_var_full: f64) -> f64 {
        (1.0 + self.full_sinr(clip_var_full)).log2()
    }

    /// Capacity per transmitted tone of the system reserving m tones.
    pub fn c2(&self, resid_var: f64) -> f64 {
        let sinr = self.gain * self.signal_var / (self.gain * resid_var + self.noise_var);
        (self.n - self.m) as f64 / self.n as f64 * (1.0 + sinr).log2()
    }

    /// Largest residual variance for which reserving tones pays off.
    pub fn resid_var_threshold(&self, clip_var_full: f64) -> f64 {
        let expo = self.n as f64 / (self.n - self.m) as f64;
        let base = (1.0 + self.full_sinr(clip_var_full)).powf(expo) - 1.0;
        self.signal_var / base - self.noise_var / self.gain
    }
}

/// (C1, C2) per transmitted tone.
pub fn capacity_pair(model: &CapacityModel, clip_var_full: f64, resid_var: f64) -> (f64, f64) {
    (model.c1(clip_var_full), model.c2(resid_var))
}

/// Whether reserving tones for clipper estimation raises capacity, from the
/// closed-form residual-variance threshold.
pub fn capacity_condition(resid_var: f64, clip_var_full: f64, model: &CapacityModel) -> Result<bool> {
    if resid_var < 0.0 || clip_var_full < 0.0 || model.noise_var < 0.0 {
        return Err(Error::InvalidArgument("variances must be nonnegative".into()));
    }
    if model.m >= model.n || model.gain <= 0.0 {
        return Err(Error::InvalidArgument("need m < N and positive gain".into()));
    }
    Ok(resid_var < model.resid_var_threshold(clip_var_full))
}

/// Whether every support index lies among the first `beta` entries of `order`.
pub fn support_included(support: &[usize], order: &[usize], beta: usize) -> bool {
    let head = &order[..beta.min(order.len())];
    support.iter().all(|i| head.contains(i))
}

/// Outcome of one Monte Carlo trial for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub gamma: f64,
    pub method: String,
    pub ser: f64,
    pub nmse: Option<f64>,
    pub papr_reduction_db: f64,
    /// Mean power of c − ĉ on data tones.
    pub residual_clip_var: f64,
    /// Mean power of c on data tones.
    pub clip_var: f64,
    pub sparsity: usize,
    pub wall_time: Option<f64>,
}

/// Summary of a set of trial records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub ser: f64,
    pub ser_ci95: f64,
    pub nmse: Option<f64>,
    pub nmse_trials: usize,
    pub papr_red_db_mean: f64,
    pub resid_var: f64,
    pub clip_var: f64,
    pub mean_sparsity: f64,
    pub wall_ms_median: Option<f64>,
}

/// Order-independent collection of trial records.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Aggregate {
    records: Vec<TrialRecord>,
}

impl Aggregate {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, rec: TrialRecord) {
        self.records.push(rec);
    }

    pub fn merge(mut self, other: Aggregate) -> Aggregate {
        self.records.extend(other.records);
        self
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records sorted by seed so that sums do not depend on arrival order.
    pub fn records(&self) -> Vec<&TrialRecord> {
        let mut r: Vec<&TrialRecord> = self.records.iter().collect();
        r.sort_by(|a, b| a.seed.cmp(&b.seed).then(a.method.cmp(&b.method)).then(a.gamma.total_cmp(&b.gamma)));
        r
    }

    pub fn summary(&self) -> Option<Summary> {
        let recs = self.records();
        if recs.is_empty() {
            return None;
        }
        let n = recs.len() as f64;
        let sers: Vec<f64> = recs.iter().map(|r| r.ser).collect();
        let (ser, ser_ci95) = mean_ci95(&sers);
        let nmses: Vec<f64> = recs.iter().filter_map(|r| r.nmse).collect();
        let nmse = (!nmses.is_empty()).then(|| nmses.iter().sum::<f64>() / nmses.len() as f64);
        let walls: Vec<f64> = recs.iter().filter_map(|r| r.wall_time.map(|s| s * 1e3)).collect();
        Some(Summary {
            trials: recs.len(),
            ser,
            ser_ci95,
            nmse,
            nmse_trials: nmses.len(),
            papr_red_db_mean: recs.iter().map(|r| r.papr_reduction_db).sum::<f64>() / n,
            resid_var: recs.iter().map(|r| r.residual_clip_var).sum::<f64>() / n,
            clip_var: recs.iter().map(|r| r.clip_var).sum::<f64>() / n,
            mean_sparsity: recs.iter().map(|r| r.sparsity as f64).sum::<f64>() / n,
            wall_ms_median: median(&walls),
        })
    }
}
