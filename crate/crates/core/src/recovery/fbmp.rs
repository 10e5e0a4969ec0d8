//! β-FBMP: truncated greedy Bayesian MMSE search over support vectors.
//!
//! Candidate indices are restricted to the β entries with the smallest
//! weights (most probable clip locations). The search first scores every
//! single-atom support, keeps the ρ best, then runs `s_max` extension stages;
//! at each stage every kept support is extended by every remaining pool index
//! and the ρ best distinct supports survive. The estimate is the
//! posterior-weighted mixture of the conditional means of all kept supports
//! (plus the empty support), normalized by the total retained weight.
//!
//! Evidence updates are rank one. For a support J with
//! C_J = σ_z² I + σ_v² Φ_J Φ_Jᴴ, adding index n costs
//! δ = 1 + σ_v² ψ_nᴴ C_J⁻¹ ψ_n and changes the log evidence by
//! −ln δ + σ_v² |ψ_nᴴ C_J⁻¹ ý|² / δ.

use std::collections::HashSet;
use std::rc::Rc;

use num_complex::Complex64;

use super::weights::WeightVector;
use super::{Diagnostics, RecoveryEstimate, RecoveryMethod};
use crate::channel::MeasurementOperator;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbmpParams {
    /// Candidate pool size.
    pub beta: usize,
    /// Supports kept per Hamming weight.
    pub rho: usize,
    /// Extension stages after the single-atom sweep.
    pub s_max: usize,
    /// Variance σ_v² of the zero-mean complex Gaussian amplitude prior.
    pub amp_var: f64,
    /// Bernoulli activity probability p of each index.
    pub activity_prob: f64,
    pub noise_var: f64,
}

/// Number of evidence evaluations the search performs when every stage has
/// ρ parents: β(1 + ρ s_max) − ρ s_max (s_max + 1) / 2.
pub fn evidence_evaluations(beta: usize, rho: usize, s_max: usize) -> usize {
    let (b, r, s) = (beta as i128, rho as i128, s_max as i128);
    let count = b * (1 + r * s) - r * s * (s + 1) / 2;
    count.max(0) as usize
}

/// Percentage of evidence evaluations saved by restricting the pool from N to β.
pub fn evidence_reduction_percent(n: usize, beta: usize, rho: usize, s_max: usize) -> f64 {
    let full = evidence_evaluations(n, rho, s_max) as f64;
    100.0 * (1.0 - evidence_evaluations(beta, rho, s_max) as f64 / full)
}

/// Rank-one factor g·u uᴴ of C_J⁻¹ together with q_i = uᴴψ_i over the pool.
/// Factors are shared between a path and its children.
struct Factor {
    g: f64,
    q_re: Vec<f64>,
    q_im: Vec<f64>,
    parent: Option<Rc<Factor>>,
}

/// One kept support with the quantities needed to extend it.
#[derive(Clone)]
struct Path {
    /// Pool positions, ascending.
    active: Vec<usize>,
    /// C_J⁻¹ = I/σ_z² − Σ g_k u_k u_kᴴ.
    factors: Option<Rc<Factor>>,
    /// ψ_iᴴ C_J⁻¹ ψ_i over the pool.
    a: Vec<f64>,
    /// ψ_iᴴ C_J⁻¹ ý over the pool.
    r: Vec<Complex64>,
    log_evidence: f64,
}

struct Search<'a> {
    pool: Vec<usize>,
    /// ψ_iᴴψ_j = kernel[(j − i) mod N].
    kernel: Vec<Complex64>,
    params: &'a FbmpParams,
    log_odds: f64,
    log_prior_empty: f64,
}

impl Search<'_> {
    fn log_posterior(&self, path_weight: usize, log_evidence: f64) -> f64 {
        log_evidence + self.log_prior_empty + path_weight as f64 * self.log_odds
    }

    fn delta(&self, parent: &Path, i: usize) -> f64 {
        let sv = self.params.amp_var;
        let d = 1.0 + sv * parent.a[i];
        -d.ln() + sv * parent.r[i].norm_sqr() / d
    }

    fn extend(&self, parent: &Path, n: usize) -> Path {
        let sz = self.params.noise_var;
        let sv = self.params.amp_var;
        let big_n = self.kernel.len();
        let tn = self.pool[n];
        // q_i = ψ_nᴴ C_J⁻¹ ψ_i = ψ_nᴴψ_i/σ_z² − Σ g_k conj(q_k[n]) q_k[i],
        // kept as split real/imaginary parts so the inner loop vectorizes.
        let (mut q_re, mut q_im): (Vec<f64>, Vec<f64>) = self
            .pool
            .iter()
            .map(|&ti| {
                let k = self.kernel[(ti + big_n - tn) % big_n] / sz;
                (k.re, k.im)
            })
            .unzip();
        let mut f = parent.factors.as_deref();
        while let Some(fk) = f {
            let (c_re, c_im) = (fk.g * fk.q_re[n], -fk.g * fk.q_im[n]);
            for (((qr, qi), kr), ki) in q_re.iter_mut().zip(q_im.iter_mut()).zip(&fk.q_re).zip(&fk.q_im) {
                *qr -= c_re * kr - c_im * ki;
                *qi -= c_re * ki + c_im * kr;
            }
            f = fk.parent.as_deref();
        }
        let g = sv / (1.0 + sv * parent.a[n]);
        let rn = parent.r[n];
        let a =
            parent.a.iter().zip(q_re.iter().zip(&q_im)).map(|(ai, (qr, qi))| ai - g * (qr * qr + qi * qi)).collect();
        let r = parent
            .r
            .iter()
            .zip(q_re.iter().zip(&q_im))
            .map(|(ri, (qr, qi))| ri - Complex64::new(*qr, -*qi) * rn * g)
            .collect();
        let mut active = parent.active.clone();
        let pos = active.binary_search(&n).unwrap_err();
        active.insert(pos, n);
        Path {
            active,
            factors: Some(Rc::new(Factor { g, q_re, q_im, parent: parent.factors.clone() })),
            a,
            r,
            log_evidence: parent.log_evidence + self.delta(parent, n),
        }
    }
}

/// Truncated MMSE estimate of c from ý = Ψc + ź.
pub fn beta_fbmp(
    y: &[Complex64],
    psi: &MeasurementOperator,
    w: &WeightVector,
    params: &FbmpParams,
) -> Result<RecoveryEstimate> {
    let n = psi.cols();
    if y.len() != psi.rows() {
        return Err(Error::LengthMismatch { expected: psi.rows(), actual: y.len() });
    }
    if w.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: w.len() });
    }
    if params.beta == 0 || params.beta > n || params.rho == 0 || params.s_max == 0 {
        return Err(Error::InvalidArgument("need 1 <= beta <= N, rho >= 1, s_max >= 1".into()));
    }
    if !(params.amp_var > 0.0 && params.noise_var > 0.0) {
        return Err(Error::InvalidArgument("amp_var and noise_var must be positive".into()));
    }
    if !(params.activity_prob > 0.0 && params.activity_prob < 1.0) {
        return Err(Error::InvalidArgument("activity_prob must lie in (0, 1)".into()));
    }
    let expected_s = params.activity_prob * n as f64;
    if (params.beta as f64) < expected_s {
        log::warn!(
            "beta = {} is below the expected sparsity {expected_s:.1}; the pool truncates the support",
            params.beta
        );
    }

    let pool: Vec<usize> = w.ascending_order().into_iter().take(params.beta).collect();
    let kernel = psi.gram_kernel();
    let corr = psi.adjoint(y);
    let sz = params.noise_var;
    let p = params.activity_prob;
    let root_a: Vec<f64> = pool.iter().map(|_| kernel[0].re / sz).collect();
    let root_r: Vec<Complex64> = pool.iter().map(|&t| corr[t] / sz).collect();
    let search =
        Search { pool, kernel, params, log_odds: p.ln() - (-p).ln_1p(), log_prior_empty: n as f64 * (-p).ln_1p() };

    let m = y.len() as f64;
    let root = Path {
        active: Vec::new(),
        factors: None,
        a: root_a,
        r: root_r,
        log_evidence: -y.iter().map(|v| v.norm_sqr()).sum::<f64>() / sz - m * sz.ln(),
    };

    let mut evaluations = 0usize;
    let mut kept: Vec<Path> = vec![root.clone()];

    // Single-atom sweep.
    let mut scored: Vec<(f64, usize, usize)> = (0..params.beta)
        .map(|i| {
            evaluations += 1;
            (search.log_posterior(1, root.log_evidence + search.delta(&root, i)), 0, i)
        })
        .collect();
    let parents = vec![root];
    let mut level = select(&search, &parents, &mut scored, params.rho);

    for stage in 1..=params.s_max {
        if stage >= params.beta {
            break;
        }
        let mut scored = Vec::with_capacity(level.len() * params.beta);
        for (pi, parent) in level.iter().enumerate() {
            let weight = parent.active.len() + 1;
            for i in 0..params.beta {
                if parent.active.binary_search(&i).is_ok() {
                    continue;
                }
                evaluations += 1;
                let le = parent.log_evidence + search.delta(parent, i);
                scored.push((search.log_posterior(weight, le), pi, i));
            }
        }
        let next = select(&search, &level, &mut scored, params.rho);
        kept.append(&mut level);
        level = next;
    }
    kept.append(&mut level);

    // Normalized mixture of conditional means.
    let logs: Vec<f64> = kept.iter().map(|p| search.log_posterior(p.active.len(), p.log_evidence)).collect();
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = logs.iter().map(|l| (l - peak).exp()).collect();
    let total: f64 = raw.iter().sum();
    let mut c_hat = vec![Complex64::new(0.0, 0.0); n];
    for (path, wgt) in kept.iter().zip(&raw) {
        let share = wgt / total;
        for &i in &path.active {
            c_hat[search.pool[i]] += path.r[i] * (params.amp_var * share);
        }
    }
    let best = logs.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(k, _)| k).unwrap_or(0);
    let mut map_support: Vec<usize> = kept[best].active.iter().map(|&i| search.pool[i]).collect();
    map_support.sort_unstable();

    Ok(RecoveryEstimate::new(
        c_hat,
        RecoveryMethod::BetaFbmp,
        Diagnostics {
            converged: true,
            weights: Some(w.w.clone()),
            evidence_evaluations: Some(evaluations),
            posterior_weight_sum: Some(raw.iter().map(|v| v / total).sum()),
            map_support: Some(map_support),
            objective: peak,
            ..Default::default()
        },
    ))
}

/// Keeps the `rho` best distinct supports among scored extensions.
fn select(search: &Search<'_>, parents: &[Path], scored: &mut [(f64, usize, usize)], rho: usize) -> Vec<Path> {
    let order =
        |a: &(f64, usize, usize), b: &(f64, usize, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2));
    // Duplicates are rare beyond the head, so rank a short prefix first.
    let head = (4 * rho).min(scored.len());
    if head < scored.len() {
        scored.select_nth_unstable_by(head, order);
    }
    scored[..head].sort_by(order);
    let out = take_distinct(search, parents, &scored[..head], rho);
    if out.len() == rho || head == scored.len() {
        return out;
    }
    scored.sort_by(order);
    take_distinct(search, parents, scored, rho)
}

fn take_distinct(search: &Search<'_>, parents: &[Path], scored: &[(f64, usize, usize)], rho: usize) -> Vec<Path> {
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut out = Vec::with_capacity(rho);
    for &(_, pi, i) in scored.iter() {
        if out.len() == rho {
            break;
        }
        let mut key = parents[pi].active.clone();
        let pos = key.binary_search(&i).unwrap_err();
        key.insert(pos, i);
        if seen.insert(key) {
            out.push(search.extend(&parents[pi], i));
        }
    }
    out
}
