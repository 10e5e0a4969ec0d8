//! Amplitude refinement on a fixed support: least squares and LMMSE.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::phase::{stacked_columns, PhaseMatrix};
use super::{RecoveryEstimate, RecoveryMethod};
use crate::channel::MeasurementOperator;
use crate::error::{Error, Result};

/// Relative singular-value cutoff for the pseudo-inverse.
const RANK_TOL: f64 = 1e-10;

fn check_y(y: &[Complex64], psi: &MeasurementOperator) -> Result<()> {
    if y.len() != psi.rows() {
        return Err(Error::LengthMismatch { expected: psi.rows(), actual: y.len() });
    }
    Ok(())
}

/// Minimum-norm least squares through the SVD; reports rank deficiency.
fn solve_ls<T>(a: DMatrix<T>, b: DVector<T>) -> (DVector<T>, bool)
where
    T: nalgebra::ComplexField<RealField = f64> + Copy,
{
    let cols = a.ncols();
    let svd = a.svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = RANK_TOL * smax.max(f64::MIN_POSITIVE);
    let rank = svd.rank(eps);
    let x = svd.solve(&b, eps).expect("u and v were computed");
    (x, rank < cols)
}

fn rebuild(n: usize, support: &[usize], values: impl Iterator<Item = Complex64>) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    for (&i, v) in support.iter().zip(values) {
        c[i] = v;
    }
    c
}

fn ls_on_support(support: &[usize], y: &[Complex64], psi: &MeasurementOperator) -> (Vec<Complex64>, bool) {
    let n = psi.cols();
    if support.is_empty() {
        return (vec![Complex64::new(0.0, 0.0); n], false);
    }
    let phi = psi.columns(support);
    let (v, deficient) = solve_ls(phi, DVector::from_column_slice(y));
    if deficient {
        log::debug!("LS refine: rank-deficient support of size {}", support.len());
    }
    (rebuild(n, support, v.iter().copied()), deficient)
}

/// v̂ = (Φ̂ᴴΦ̂)⁻¹Φ̂ᴴý on the estimate's support.
pub fn refine_ls(estimate: &RecoveryEstimate, y: &[Complex64], psi: &MeasurementOperator) -> Result<RecoveryEstimate> {
    check_y(y, psi)?;
    let (c, deficient) = ls_on_support(&estimate.support, y, psi);
    let mut diagnostics = estimate.diagnostics.clone();
    diagnostics.refined = true;
    diagnostics.rank_deficient = deficient;
    Ok(RecoveryEstimate::new(c, estimate.method, diagnostics))
}

/// LS on a known support: the support-oracle receiver.
pub fn oracle_ls(y: &[Complex64], psi: &MeasurementOperator, true_support: &[usize]) -> Result<RecoveryEstimate> {
    check_y(y, psi)?;
    if true_support.iter().any(|&i| i >= psi.cols()) {
        return Err(Error::InvalidArgument("support index out of range".into()));
    }
    let (c, deficient) = ls_on_support(true_support, y, psi);
    let mut est = RecoveryEstimate::zero(psi.cols(), RecoveryMethod::OracleLs);
    est.diagnostics.refined = true;
    est.diagnostics.rank_deficient = deficient;
    Ok(RecoveryEstimate::new(c, RecoveryMethod::OracleLs, est.diagnostics))
}

/// LMMSE amplitudes on the estimate's support:
/// v̂ = μ + σ_v²Φ̂ᴴ(σ_v²Φ̂Φ̂ᴴ + σ_z²I)⁻¹(ý − Φ̂μ),
/// evaluated in the equivalent s × s form (Φ̂ᴴΦ̂ + σ_z²/σ_v² I)⁻¹Φ̂ᴴ(ý − Φ̂μ).
///
/// `prior_mean` is per support entry; `None` means zero mean.
pub fn refine_lmmse(
    estimate: &RecoveryEstimate,
    y: &[Complex64],
    psi: &MeasurementOperator,
    prior_var: f64,
    prior_mean: Option<&[Complex64]>,
    noise_var: f64,
) -> Result<RecoveryEstimate> {
    check_y(y, psi)?;
    if !(prior_var > 0.0) || noise_var < 0.0 {
        return Err(Error::InvalidArgument("need prior_var > 0 and noise_var >= 0".into()));
    }
    let support = &estimate.support;
    let s = support.len();
    if let Some(mu) = prior_mean {
        if mu.len() != s {
            return Err(Error::LengthMismatch { expected: s, actual: mu.len() });
        }
    }
    if noise_var == 0.0 {
        return refine_ls(estimate, y, psi);
    }
    let mut diagnostics = estimate.diagnostics.clone();
    diagnostics.refined = true;
    if s == 0 {
        return Ok(RecoveryEstimate::new(vec![Complex64::new(0.0, 0.0); psi.cols()], estimate.method, diagnostics));
    }
    let phi = psi.columns(support);
    let mu = DVector::from_iterator(s, (0..s).map(|i| prior_mean.map_or(Complex64::new(0.0, 0.0), |m| m[i])));
    let resid = DVector::from_column_slice(y) - &phi * &mu;
    let mut gram = phi.adjoint() * &phi;
    let ratio = noise_var / prior_var;
    for i in 0..s {
        gram[(i, i)] += Complex64::new(ratio, 0.0);
    }
    let rhs = phi.adjoint() * resid;
    let v = gram
        .cholesky()
        .ok_or_else(|| Error::InvalidArgument("LMMSE system is not positive definite".into()))?
        .solve(&rhs)
        + mu;
    Ok(RecoveryEstimate::new(rebuild(psi.cols(), support, v.iter().copied()), estimate.method, diagnostics))
}

/// Real LS for |c| on the support with phases fixed by `theta`.
pub fn refine_rotated_ls(
    estimate: &RecoveryEstimate,
    y: &[Complex64],
    psi: &MeasurementOperator,
    theta: &PhaseMatrix,
) -> Result<RecoveryEstimate> {
    check_y(y, psi)?;
    let support = &estimate.support;
    let mut diagnostics = estimate.diagnostics.clone();
    diagnostics.refined = true;
    if support.is_empty() {
        return Ok(RecoveryEstimate::new(estimate.c_hat.clone(), estimate.method, diagnostics));
    }
    let m = psi.rows();
    let a = stacked_columns(psi, theta, support);
    let b = DVector::from_iterator(2 * m, y.iter().map(|v| v.re).chain(y.iter().map(|v| v.im)));
    let (mag, deficient) = solve_ls(a, b);
    diagnostics.rank_deficient = deficient;
    let values = support.iter().zip(mag.iter()).map(|(&i, &r)| theta.unit(i) * r);
    Ok(RecoveryEstimate::new(rebuild(psi.cols(), support, values), estimate.method, diagnostics))
}
