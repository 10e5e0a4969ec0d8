//! Python bindings for the cs-papr simulator.

use cs_papr::clipper::{self, ClipScheme};
use cs_papr::harness::{self, ExperimentSpec, Method, Setup, Trial};
use cs_papr::metrics::{Summary, TrialRecord};
use cs_papr::recovery::{self, RecoveryEstimate};
use cs_papr::{Complex64, ComplexBlock};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: cs_papr::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_scheme(s: &str) -> PyResult<ClipScheme> {
    match s.to_ascii_lowercase().as_str() {
        "ps" => Ok(ClipScheme::Ps),
        "dmc" => Ok(ClipScheme::Dmc),
        other => Err(PyValueError::new_err(format!("unknown clipping scheme '{other}' (expected 'ps' or 'dmc')"))),
    }
}

fn parse_method(s: &str) -> PyResult<Method> {
    s.parse::<Method>().map_err(py_err)
}

/// Link constants: N, m, QAM order, channel taps, SNR and seed.
#[pyclass(name = "OfdmConfig", from_py_object)]
#[derive(Clone)]
struct PyOfdmConfig {
    inner: cs_papr::OfdmConfig,
}

#[pymethods]
impl PyOfdmConfig {
    #[new]
    #[pyo3(signature = (n_subcarriers=256, n_measurement_tones=51, qam_order=32, channel_taps=32, snr_db=30.0, seed=0))]
    fn new(
        n_subcarriers: usize,
        n_measurement_tones: usize,
        qam_order: usize,
        channel_taps: usize,
        snr_db: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let inner = cs_papr::OfdmConfig {
            n_subcarriers,
            n_measurement_tones,
            qam_order,
            channel_taps,
            snr_db,
            seed,
            ..Default::default()
        };
        inner.validate().map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n_subcarriers(&self) -> usize {
        self.inner.n_subcarriers
    }

    #[getter]
    fn n_measurement_tones(&self) -> usize {
        self.inner.n_measurement_tones
    }

    #[getter]
    fn qam_order(&self) -> usize {
        self.inner.qam_order
    }

    #[getter]
    fn channel_taps(&self) -> usize {
        self.inner.channel_taps
    }

    #[getter]
    fn snr_db(&self) -> f64 {
        self.inner.snr_db
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    /// Rayleigh parameter σ_|X| of the time-domain envelope.
    fn envelope_sigma(&self) -> f64 {
        self.inner.envelope_sigma()
    }

    fn noise_var(&self) -> f64 {
        self.inner.noise_var()
    }

    /// Converts a threshold in units of σ_|X| to absolute amplitude.
    fn gamma_abs(&self, gamma_sigma: f64) -> f64 {
        self.inner.gamma_abs(gamma_sigma)
    }

    fn expected_sparsity(&self, gamma_sigma: f64) -> f64 {
        harness::expected_sparsity_sigma(&self.inner, gamma_sigma)
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "OfdmConfig(n_subcarriers={}, n_measurement_tones={}, qam_order={}, channel_taps={}, snr_db={}, seed={})",
            c.n_subcarriers, c.n_measurement_tones, c.qam_order, c.channel_taps, c.snr_db, c.seed
        )
    }
}

/// Result of clipping one block.
#[pyclass(name = "ClipOutcome", skip_from_py_object)]
struct PyClipOutcome {
    inner: cs_papr::ClipOutcome,
}

#[pymethods]
impl PyClipOutcome {
    #[getter]
    fn c(&self) -> Vec<Complex64> {
        self.inner.c.clone()
    }

    #[getter]
    fn support(&self) -> Vec<usize> {
        self.inner.support.clone()
    }

    #[getter]
    fn sparsity(&self) -> usize {
        self.inner.sparsity()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn zeta(&self) -> Option<f64> {
        self.inner.zeta
    }
}

/// Peak-suppression clipping of a time-domain block at absolute threshold γ.
#[pyfunction]
fn clip_ps(x: Vec<Complex64>, gamma: f64) -> PyResult<PyClipOutcome> {
    let inner = clipper::clip_ps(&ComplexBlock::time(x), gamma).map_err(py_err)?;
    Ok(PyClipOutcome { inner })
}

/// Digital-magnitude clipping with absolute threshold γ and magnitude ζ.
#[pyfunction]
fn clip_dmc(x: Vec<Complex64>, gamma: f64, zeta: f64) -> PyResult<PyClipOutcome> {
    let inner = clipper::clip_dmc(&ComplexBlock::time(x), gamma, zeta).map_err(py_err)?;
    Ok(PyClipOutcome { inner })
}

/// E[(|x| − γ)² | |x| > γ] for a Rayleigh(σ) envelope.
#[pyfunction]
fn ps_tail_second_moment(gamma: f64, sigma: f64) -> PyResult<f64> {
    clipper::ps_tail_second_moment(gamma, sigma).map_err(py_err)
}

/// ζ giving digital-magnitude clipping the same CNR as peak suppression.
#[pyfunction]
fn zeta_for_cnr_match(gamma: f64, cfg: &PyOfdmConfig) -> PyResult<f64> {
    clipper::zeta_for_cnr_match(gamma, &cfg.inner).map_err(py_err)
}

#[pyfunction]
fn evidence_evaluations(beta: usize, rho: usize, s_max: usize) -> usize {
    recovery::evidence_evaluations(beta, rho, s_max)
}

#[pyfunction]
fn evidence_reduction_percent(n: usize, beta: usize, rho: usize, s_max: usize) -> f64 {
    recovery::evidence_reduction_percent(n, beta, rho, s_max)
}

/// Tags accepted by `Trial.estimate`, `Trial.run` and `sweep`.
#[pyfunction]
fn methods() -> Vec<String> {
    Method::ALL.iter().map(|m| m.to_string()).collect()
}

fn record_dict<'py>(py: Python<'py>, r: &TrialRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("seed", r.seed)?;
    d.set_item("gamma", r.gamma)?;
    d.set_item("method", &r.method)?;
    d.set_item("ser", r.ser)?;
    d.set_item("nmse", r.nmse)?;
    d.set_item("papr_reduction_db", r.papr_reduction_db)?;
    d.set_item("residual_clip_var", r.residual_clip_var)?;
    d.set_item("clip_var", r.clip_var)?;
    d.set_item("sparsity", r.sparsity)?;
    d.set_item("wall_time", r.wall_time)?;
    Ok(d)
}

fn summary_dict<'py>(py: Python<'py>, gamma: f64, method: Method, s: &Summary) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("gamma", gamma)?;
    d.set_item("method", method.to_string())?;
    d.set_item("trials", s.trials)?;
    d.set_item("ser", s.ser)?;
    d.set_item("ser_ci95", s.ser_ci95)?;
    d.set_item("nmse", s.nmse)?;
    d.set_item("papr_red_db_mean", s.papr_red_db_mean)?;
    d.set_item("resid_var", s.resid_var)?;
    d.set_item("clip_var", s.clip_var)?;
    d.set_item("mean_sparsity", s.mean_sparsity)?;
    d.set_item("wall_ms_median", s.wall_ms_median)?;
    Ok(d)
}

/// Estimate returned by a receiver pipeline.
#[pyclass(name = "Estimate", skip_from_py_object)]
struct PyEstimate {
    inner: RecoveryEstimate,
}

#[pymethods]
impl PyEstimate {
    #[getter]
    fn c_hat(&self) -> Vec<Complex64> {
        self.inner.c_hat.clone()
    }

    #[getter]
    fn support(&self) -> Vec<usize> {
        self.inner.support.clone()
    }

    #[getter]
    fn evidence_evaluations(&self) -> Option<usize> {
        self.inner.diagnostics.evidence_evaluations
    }
}

/// One seeded Monte Carlo realization: data, clip, channel and observation.
#[pyclass(name = "Trial", skip_from_py_object)]
struct PyTrial {
    setup: Setup,
    trial: Trial,
}

#[pymethods]
impl PyTrial {
    /// Draws trial `index` of the experiment with master seed `seed`.
    /// `gamma` and `zeta` are in units of σ_|X|.
    #[new]
    #[pyo3(signature = (cfg, gamma, index=0, seed=0, scheme="ps", zeta=None))]
    fn new(cfg: &PyOfdmConfig, gamma: f64, index: u64, seed: u64, scheme: &str, zeta: Option<f64>) -> PyResult<Self> {
        let setup = Setup::new(&cfg.inner, parse_scheme(scheme)?, gamma, zeta, seed).map_err(py_err)?;
        let trial = Trial::draw(&setup, index).map_err(py_err)?;
        Ok(Self { setup, trial })
    }

    /// Transmitted time-domain block x.
    #[getter]
    fn x(&self) -> Vec<Complex64> {
        self.trial.x.values.clone()
    }

    #[getter]
    fn clip(&self) -> PyClipOutcome {
        PyClipOutcome { inner: self.trial.clip.clone() }
    }

    /// Equalized reserved-tone observation ý.
    #[getter]
    fn y(&self) -> Vec<Complex64> {
        self.trial.y.clone()
    }

    #[getter]
    fn measurement_tones(&self) -> Vec<usize> {
        self.trial.tones.measurement_tones().to_vec()
    }

    #[getter]
    fn gamma_abs(&self) -> f64 {
        self.setup.gamma
    }

    fn estimate(&self, py: Python<'_>, method: &str) -> PyResult<PyEstimate> {
        let m = parse_method(method)?;
        let inner = py.detach(|| self.trial.estimate(&self.setup, m)).map_err(py_err)?;
        Ok(PyEstimate { inner })
    }

    /// Runs a pipeline and scores it; returns the trial record as a dict.
    fn run<'py>(&self, py: Python<'py>, method: &str) -> PyResult<Bound<'py, PyDict>> {
        let m = parse_method(method)?;
        let (_, rec) = py.detach(|| self.trial.run(&self.setup, m)).map_err(py_err)?;
        record_dict(py, &rec)
    }
}

/// SER / NMSE / PAPR sweep over a threshold grid; one dict per (γ, method).
#[pyfunction]
#[pyo3(signature = (cfg, gammas, methods, trials=100, scheme="ps", zeta=None))]
fn sweep<'py>(
    py: Python<'py>,
    cfg: &PyOfdmConfig,
    gammas: Vec<f64>,
    methods: Vec<String>,
    trials: usize,
    scheme: &str,
    zeta: Option<f64>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let methods = methods.iter().map(|m| parse_method(m)).collect::<PyResult<Vec<_>>>()?;
    let spec = ExperimentSpec {
        cfg: cfg.inner.clone(),
        gamma_grid: gammas,
        methods,
        n_trials: trials,
        scheme: parse_scheme(scheme)?,
        zeta,
        ..Default::default()
    };
    let rows = py.detach(|| harness::sweep(&spec)).map_err(py_err)?;
    rows.iter().map(|r| summary_dict(py, r.gamma, r.method, &r.summary)).collect()
}

#[pymodule]
fn cs_papr_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOfdmConfig>()?;
    m.add_class::<PyClipOutcome>()?;
    m.add_class::<PyEstimate>()?;
    m.add_class::<PyTrial>()?;
    m.add_function(wrap_pyfunction!(clip_ps, m)?)?;
    m.add_function(wrap_pyfunction!(clip_dmc, m)?)?;
    m.add_function(wrap_pyfunction!(ps_tail_second_moment, m)?)?;
    m.add_function(wrap_pyfunction!(zeta_for_cnr_match, m)?)?;
    m.add_function(wrap_pyfunction!(evidence_evaluations, m)?)?;
    m.add_function(wrap_pyfunction!(evidence_reduction_percent, m)?)?;
    m.add_function(wrap_pyfunction!(methods, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
