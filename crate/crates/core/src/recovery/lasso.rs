//! LASSO-family estimators: plain, externally weighted, and phase-augmented.

use num_complex::Complex64;

use super::phase::{PhaseMatrix, RotatedOperator};
use super::solver::{Domain, Problem};
use super::weights::WeightVector;
use super::{check_lambda, prune_small, Diagnostics, RecoveryEstimate, RecoveryMethod};
use crate::channel::MeasurementOperator;
use crate::config::SolverConfig;
use crate::error::{Error, Result};

fn check_dims(y: &[Complex64], psi: &MeasurementOperator) -> Result<()> {
    if y.len() != psi.rows() {
        return Err(Error::LengthMismatch { expected: psi.rows(), actual: y.len() });
    }
    Ok(())
}

fn check_weights(w: &WeightVector, n: usize) -> Result<()> {
    if w.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: w.len() });
    }
    if w.w.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
    }
    Ok(())
}

fn finish(
    mut x: Vec<Complex64>,
    report: super::solver::SolveReport,
    method: RecoveryMethod,
    weights: Option<&WeightVector>,
    solver: &SolverConfig,
) -> RecoveryEstimate {
    if !report.converged {
        log::debug!("{method:?}: stopped at max_iters = {}", report.iterations);
    }
    prune_small(&mut x, solver.support_threshold);
    RecoveryEstimate::new(
        x,
        method,
        Diagnostics {
            iterations: report.iterations,
            objective: report.objective,
            converged: report.converged,
            weights: weights.map(|w| w.w.clone()),
            objective_history: report.history,
            ..Default::default()
        },
    )
}

/// argmin ‖ý − Ψc‖² + λ‖c‖₁ over complex c.
pub fn lasso(
    y: &[Complex64],
    psi: &MeasurementOperator,
    lambda: f64,
    solver: &SolverConfig,
) -> Result<RecoveryEstimate> {
    let ones = WeightVector::ones(psi.cols());
    let mut est = weighted_lasso(y, psi, lambda, &ones, solver)?;
    est.method = RecoveryMethod::Lasso;
    est.diagnostics.weights = None;
    Ok(est)
}

/// argmin ‖ý − Ψc‖² + λ Σ w(i)|c(i)|, one-shot weights.
pub fn weighted_lasso(
    y: &[Complex64],
    psi: &MeasurementOperator,
    lambda: f64,
    w: &WeightVector,
    solver: &SolverConfig,
) -> Result<RecoveryEstimate> {
    check_lambda(lambda)?;
    check_dims(y, psi)?;
    check_weights(w, psi.cols())?;
    let report = Problem {
        op: psi,
        y,
        lambda,
        weights: &w.w,
        domain: Domain::Complex,
        tol: solver.tol,
        max_iters: solver.max_iters,
    }
    .solve();
    let x = report.x.clone();
    Ok(finish(x, report, RecoveryMethod::WeightedLasso, Some(w), solver))
}

/// Rotate then sense: nonnegative LASSO over |c| on ΨΘ, then ĉ = Θ|ĉ|.
///
/// `theta` carries the anti-phase of the equalized data. With `weights`
/// this is the weighted phase-augmented LASSO.
pub fn recover_rts(
    y: &[Complex64],
    psi: &MeasurementOperator,
    theta: &PhaseMatrix,
    lambda: f64,
    weights: Option<&WeightVector>,
    solver: &SolverConfig,
) -> Result<RecoveryEstimate> {
    check_lambda(lambda)?;
    check_dims(y, psi)?;
    if theta.len() != psi.cols() {
        return Err(Error::LengthMismatch { expected: psi.cols(), actual: theta.len() });
    }
    let ones;
    let w = match weights {
        Some(w) => {
            check_weights(w, psi.cols())?;
            w
        }
        None => {
            ones = WeightVector::ones(psi.cols());
            &ones
        }
    };
    let op = RotatedOperator::new(psi, theta);
    let report = Problem {
        op: &op,
        y,
        lambda,
        weights: &w.w,
        domain: Domain::NonnegativeReal,
        tol: solver.tol,
        max_iters: solver.max_iters,
    }
    .solve();
    let c = theta.apply(&report.x);
    let method = if weights.is_some() { RecoveryMethod::Wpal } else { RecoveryMethod::PalRts };
    Ok(finish(c, report, method, weights, solver))
}

/// Replaces the phases on the detected support with `theta`, keeping magnitudes.
pub fn rotate_to_phases(estimate: &RecoveryEstimate, theta: &PhaseMatrix) -> Result<RecoveryEstimate> {
    if theta.len() != estimate.len() {
        return Err(Error::LengthMismatch { expected: estimate.len(), actual: theta.len() });
    }
    let mut out = estimate.clone();
    for &i in &estimate.support {
        out.c_hat[i] = Complex64::from_polar(estimate.c_hat[i].norm(), theta.phases[i]);
    }
    out.method = RecoveryMethod::PalStr;
    Ok(out)
}

/// Sense then rotate: (weighted) LASSO, then data-derived phases on its support.
pub fn recover_str(
    y: &[Complex64],
    psi: &MeasurementOperator,
    theta: &PhaseMatrix,
    lambda: f64,
    weights: Option<&WeightVector>,
    solver: &SolverConfig,
) -> Result<RecoveryEstimate> {
    let base = match weights {
        Some(w) => weighted_lasso(y, psi, lambda, w, solver)?,
        None => lasso(y, psi, lambda, solver)?,
    };
    rotate_to_phases(&base, theta)
}

/// Snaps every magnitude to the nearest of {0, ζ}.
pub fn force_digital_magnitudes(estimate: &RecoveryEstimate, zeta: f64) -> Result<RecoveryEstimate> {
    if !(zeta > 0.0) {
        return Err(Error::InvalidArgument("zeta must be positive".into()));
    }
    let c_hat = estimate
        .c_hat
        .iter()
        .map(|v| {
            let r = v.norm();
            if r < 0.5 * zeta {
                Complex64::new(0.0, 0.0)
            } else {
                v * (zeta / r)
            }
        })
        .collect();
    let mut diagnostics = estimate.diagnostics.clone();
    diagnostics.digital_forced = true;
    Ok(RecoveryEstimate::new(c_hat, estimate.method, diagnostics))
}
