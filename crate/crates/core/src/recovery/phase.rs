//! Phase augmentation for homogeneous clippers: c = Θ_c |c|.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::solver::LinearMap;
use crate::channel::MeasurementOperator;
use crate::error::{Error, Result};

/// Diagonal unitary rotation diag(e^{jθ}).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMatrix {
    pub phases: Vec<f64>,
}

impl PhaseMatrix {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument("phases must be finite".into()));
        }
        Ok(Self { phases })
    }

    pub fn zeros(n: usize) -> Self {
        Self { phases: vec![0.0; n] }
    }

    /// θ(i) = arg(x(i)) + π: the direction a homogeneous clipper points to.
    pub fn anti_phase_of(x: &[Complex64]) -> Self {
        Self { phases: x.iter().map(|v| v.arg() + std::f64::consts::PI).collect() }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn unit(&self, i: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.phases[i])
    }

    /// Θ v.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        v.iter().enumerate().map(|(i, x)| x * self.unit(i)).collect()
    }

    /// Θᴴ v.
    pub fn apply_conj(&self, v: &[Complex64]) -> Vec<Complex64> {
        v.iter().enumerate().map(|(i, x)| x * self.unit(i).conj()).collect()
    }
}

/// Ψ Θ as a solver operator.
pub struct RotatedOperator<'a> {
    pub psi: &'a MeasurementOperator,
    units: Vec<Complex64>,
    buf: std::cell::RefCell<Vec<Complex64>>,
}

impl<'a> RotatedOperator<'a> {
    pub fn new(psi: &'a MeasurementOperator, theta: &PhaseMatrix) -> Self {
        let units = (0..theta.len()).map(|i| theta.unit(i)).collect();
        Self { psi, units, buf: std::cell::RefCell::new(Vec::new()) }
    }
}

impl LinearMap for MeasurementOperator {
    fn rows(&self) -> usize {
        MeasurementOperator::rows(self)
    }
    fn cols(&self) -> usize {
        MeasurementOperator::cols(self)
    }
    fn apply(&self, v: &[Complex64], scratch: &mut Vec<Complex64>, out: &mut [Complex64]) {
        self.apply_into(v, scratch, out)
    }
    fn adjoint(&self, r: &[Complex64], out: &mut [Complex64]) {
        self.adjoint_into(r, out)
    }
    fn norm_sqr(&self) -> f64 {
        MeasurementOperator::norm_sqr(self)
    }
}

impl LinearMap for RotatedOperator<'_> {
    fn rows(&self) -> usize {
        self.psi.rows()
    }
    fn cols(&self) -> usize {
        self.psi.cols()
    }
    fn apply(&self, v: &[Complex64], scratch: &mut Vec<Complex64>, out: &mut [Complex64]) {
        let mut buf = self.buf.borrow_mut();
        buf.clear();
        buf.extend(v.iter().zip(&self.units).map(|(a, u)| a * u));
        self.psi.apply_into(&buf, scratch, out);
    }
    fn adjoint(&self, r: &[Complex64], out: &mut [Complex64]) {
        self.psi.adjoint_into(r, out);
        out.iter_mut().zip(&self.units).for_each(|(o, u)| *o *= u.conj());
    }
    fn norm_sqr(&self) -> f64 {
        self.psi.norm_sqr()
    }
}

/// The 2m × N real operator [Re(ΨΘ); Im(ΨΘ)] acting on |c|.
pub fn phase_rotate_model(psi: &MeasurementOperator, theta: &PhaseMatrix) -> Result<DMatrix<f64>> {
    if theta.len() != psi.cols() {
        return Err(Error::LengthMismatch { expected: psi.cols(), actual: theta.len() });
    }
    let cols: Vec<usize> = (0..psi.cols()).collect();
    Ok(stacked_columns(psi, theta, &cols))
}

/// Stacked real columns of ΨΘ restricted to `cols`.
pub(crate) fn stacked_columns(psi: &MeasurementOperator, theta: &PhaseMatrix, cols: &[usize]) -> DMatrix<f64> {
    let m = psi.rows();
    let mut out = DMatrix::zeros(2 * m, cols.len());
    for (j, &t) in cols.iter().enumerate() {
        let u = theta.unit(t);
        for (i, v) in psi.column(t).into_iter().enumerate() {
            let rv = v * u;
            out[(i, j)] = rv.re;
            out[(m + i, j)] = rv.im;
        }
    }
    out
}
