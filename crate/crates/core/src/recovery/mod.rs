//! Receiver-side estimators of the clipping signal.
//!
//! Every estimator consumes the reserved-tone observations ý and the operator
//! Ψ and returns a [`RecoveryEstimate`]. The LASSO family runs a monotone
//! accelerated proximal-gradient loop ([`solver`]); the Bayesian search lives
//! in [`fbmp`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod fbmp;
pub mod lasso;
pub mod phase;
pub mod refine;
pub mod solver;
pub mod weights;

pub use fbmp::{beta_fbmp, evidence_evaluations, evidence_reduction_percent, FbmpParams};
pub use lasso::{force_digital_magnitudes, lasso, recover_rts, recover_str, weighted_lasso};
pub use phase::{phase_rotate_model, PhaseMatrix};
pub use refine::{oracle_ls, refine_lmmse, refine_ls, refine_rotated_ls};
pub use weights::{ps_weights, PosteriorModel, WeightVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RecoveryMethod {
    None,
    Lasso,
    WeightedLasso,
    PalStr,
    PalRts,
    Wpal,
    BetaFbmp,
    OracleLs,
    OraclePhase,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub iterations: usize,
    pub objective: f64,
    /// False when the solver stopped at max_iters.
    pub converged: bool,
    pub weights: Option<Vec<f64>>,
    pub refined: bool,
    /// LS fell back to a pseudo-inverse.
    pub rank_deficient: bool,
    pub digital_forced: bool,
    pub evidence_evaluations: Option<usize>,
    /// Sum of the normalized mixture weights of β-FBMP.
    pub posterior_weight_sum: Option<f64>,
    /// Highest-posterior support found by β-FBMP.
    pub map_support: Option<Vec<usize>>,
    pub objective_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryEstimate {
    pub c_hat: Vec<Complex64>,
    /// Indices of the nonzero entries of `c_hat`, ascending.
    pub support: Vec<usize>,
    pub method: RecoveryMethod,
    pub diagnostics: Diagnostics,
}

impl RecoveryEstimate {
    pub fn new(c_hat: Vec<Complex64>, method: RecoveryMethod, diagnostics: Diagnostics) -> Self {
        let support = nonzero_support(&c_hat);
        Self { c_hat, support, method, diagnostics }
    }

    pub fn zero(n: usize, method: RecoveryMethod) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); n], method, Diagnostics { converged: true, ..Default::default() })
    }

    /// The no-estimation receiver.
    pub fn none(n: usize) -> Self {
        Self::zero(n, RecoveryMethod::None)
    }

    pub fn len(&self) -> usize {
        self.c_hat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c_hat.is_empty()
    }
}

pub fn nonzero_support(v: &[Complex64]) -> Vec<usize> {
    v.iter().enumerate().filter(|(_, x)| x.re != 0.0 || x.im != 0.0).map(|(i, _)| i).collect()
}

/// Zeroes entries with |v(i)| ≤ threshold · max|v|.
pub fn prune_small(v: &mut [Complex64], threshold: f64) {
    let peak = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return;
    }
    let cut = threshold * peak;
    for x in v.iter_mut() {
        if x.norm() <= cut {
            *x = Complex64::new(0.0, 0.0);
        }
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")))
    }
}
