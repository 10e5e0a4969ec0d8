//! Data-induced ℓ1 weights for peak suppression.
//!
//! A sample of the equalized block whose envelope sits close to γ is a likely
//! clip location. The weight of index i is the posterior probability that no
//! clip happened there, given the distance d(i) = ||x̂̄(i)| − γ|, under Rayleigh
//! models for the data envelope and for the equalization error.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub w: Vec<f64>,
}

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
        }
        Ok(Self { w })
    }

    pub fn ones(n: usize) -> Self {
        Self { w: vec![1.0; n] }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// Indices sorted by ascending weight, ties broken by index.
    pub fn ascending_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.w.len()).collect();
        idx.sort_by(|&a, &b| self.w[a].total_cmp(&self.w[b]).then(a.cmp(&b)));
        idx
    }
}

/// Parameters of the clip/no-clip posterior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorModel {
    pub gamma: f64,
    /// σ_X² = E|x(i)|², the complex data variance.
    pub data_var: f64,
    /// σ_E² = E|e(i)|², the complex variance of the equalization error.
    pub error_var: f64,
    pub floor: f64,
}

impl PosteriorModel {
    /// η(γ) = 1 − e^{−γ²/σ_X²}, the no-clip prior.
    pub fn no_clip_prior(&self) -> f64 {
        -(-self.gamma * self.gamma / self.data_var).exp_m1()
    }

    /// Pr(no clip | d), in the overflow-safe two-branch form.
    pub fn weight(&self, d: f64) -> f64 {
        let eta = self.no_clip_prior();
        let sx = self.data_var + self.error_var;
        let se = self.error_var;
        // Data branch is evaluated at |γ − d|, which is the envelope itself
        // whenever |x̂̄| < 2γ.
        let r = (self.gamma - d).abs();
        let diamond = 2.0 * eta * r / sx;
        let club = r * r / sx;
        let triangle = 2.0 * (1.0 - eta) * d / se;
        let spade = d * d / se;
        let w = if club > spade {
            let e = (spade - club).exp();
            let num = diamond * e;
            if num + triangle == 0.0 {
                1.0
            } else {
                num / (num + triangle)
            }
        } else {
            let den = diamond + triangle * (club - spade).exp();
            if den == 0.0 {
                1.0
            } else {
                diamond / den
            }
        };
        w.clamp(self.floor, 1.0)
    }
}

/// w(i) = Pr(q = 0 | d(i)) for every sample of the equalized block.
pub fn ps_weights(xbar_hat: &[Complex64], model: &PosteriorModel) -> Result<WeightVector> {
    if !(model.gamma > 0.0 && model.data_var > 0.0 && model.error_var > 0.0) {
        return Err(Error::InvalidArgument("gamma, data_var and error_var must be positive".into()));
    }
    if !(model.floor > 0.0 && model.floor <= 1.0) {
        return Err(Error::InvalidArgument("weight floor must lie in (0, 1]".into()));
    }
    let w = xbar_hat.iter().map(|v| model.weight((v.norm() - model.gamma).abs())).collect();
    WeightVector::new(w)
}
