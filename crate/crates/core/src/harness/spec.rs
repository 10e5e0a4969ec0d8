//! Experiment description and method tags.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clipper::ClipScheme;
use crate::config::OfdmConfig;
use crate::error::{Error, Result};

/// Receiver pipelines selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// No clipper estimation.
    None,
    /// LASSO followed by LS on the detected support.
    Lasso,
    /// Data-weighted LASSO followed by LS.
    Wl,
    /// LASSO + LS, then anti-phase rotation (sense then rotate).
    PalStr,
    /// Phase-rotated nonnegative LASSO + real LS (rotate then sense).
    PalRts,
    /// Weighted rotate-then-sense.
    Wpal,
    /// Truncated Bayesian matching pursuit.
    BetaFbmp,
    /// LS on the true support.
    OracleLs,
    /// Rotate then sense with the true clipper phases.
    OraclePhase,
    /// Sense then rotate with magnitudes snapped to {0, ζ}.
    StrDm,
    /// Rotate then sense with magnitudes snapped to {0, ζ}.
    RtsDm,
}

impl Method {
    pub const ALL: [Method; 11] = [
        Method::None,
        Method::Lasso,
        Method::Wl,
        Method::PalStr,
        Method::PalRts,
        Method::Wpal,
        Method::BetaFbmp,
        Method::OracleLs,
        Method::OraclePhase,
        Method::StrDm,
        Method::RtsDm,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::None => "none",
            Method::Lasso => "lasso",
            Method::Wl => "wl",
            Method::PalStr => "pal-str",
            Method::PalRts => "pal-rts",
            Method::Wpal => "wpal",
            Method::BetaFbmp => "beta-fbmp",
            Method::OracleLs => "oracle-ls",
            Method::OraclePhase => "oracle-phase",
            Method::StrDm => "str-dm",
            Method::RtsDm => "rts-dm",
        }
    }

    /// Parses a comma-separated list of tags.
    pub fn parse_list(s: &str) -> Result<Vec<Method>> {
        s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::parse).collect()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        Method::ALL.into_iter().find(|m| m.tag() == t).ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

fn default_gamma_grid() -> Vec<f64> {
    vec![1.9, 2.0, 2.1, 2.2, 2.3, 2.4, 2.5]
}

fn default_methods() -> Vec<Method> {
    vec![Method::None, Method::Lasso, Method::Wl, Method::Wpal, Method::OracleLs]
}

fn default_trials() -> usize {
    500
}

fn default_scheme() -> ClipScheme {
    ClipScheme::Ps
}

fn default_output() -> PathBuf {
    PathBuf::from("results.csv")
}

fn default_zeta_grid() -> Vec<f64> {
    vec![0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4]
}

fn default_beta_fractions() -> Vec<f64> {
    vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
}

fn default_snr_grid() -> Vec<f64> {
    vec![20.0, 25.0, 30.0, 35.0, 40.0, 45.0]
}

/// Full description of one Monte Carlo experiment.
///
/// Thresholds and ζ are in units of σ_|X| of the configured link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub cfg: OfdmConfig,
    #[serde(default = "default_gamma_grid")]
    pub gamma_grid: Vec<f64>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_trials")]
    pub n_trials: usize,
    #[serde(default = "default_scheme")]
    pub scheme: ClipScheme,
    /// DMC magnitude; defaults to the CNR-matched value at each γ.
    #[serde(default)]
    pub zeta: Option<f64>,
    #[serde(default = "default_output")]
    pub output_path: PathBuf,
    /// ζ values for the NMSE-versus-ζ experiment.
    #[serde(default = "default_zeta_grid")]
    pub zeta_grid: Vec<f64>,
    /// Pool fractions for the support-inclusion experiment.
    #[serde(default = "default_beta_fractions")]
    pub beta_fractions: Vec<f64>,
    /// SNR values (dB) for the capacity-versus-SNR experiment.
    #[serde(default = "default_snr_grid")]
    pub snr_grid: Vec<f64>,
    /// Capture per-trial estimator wall time (makes outputs nondeterministic).
    #[serde(default)]
    pub record_timing: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            cfg: OfdmConfig::default(),
            gamma_grid: default_gamma_grid(),
            methods: default_methods(),
            n_trials: default_trials(),
            scheme: default_scheme(),
            zeta: None,
            output_path: default_output(),
            zeta_grid: default_zeta_grid(),
            beta_fractions: default_beta_fractions(),
            snr_grid: default_snr_grid(),
            record_timing: false,
        }
    }
}

fn check_positive(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidConfig(format!("{name} must not be empty")));
    }
    if let Some(bad) = v.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
        return Err(Error::InvalidConfig(format!("{name} entries must be positive, got {bad}")));
    }
    Ok(())
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        check_positive("gamma_grid", &self.gamma_grid)?;
        if self.n_trials == 0 {
            return Err(Error::InvalidConfig("n_trials must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("methods must not be empty".into()));
        }
        if let Some(z) = self.zeta {
            if !(z.is_finite() && z > 0.0) {
                return Err(Error::InvalidConfig(format!("zeta must be positive, got {z}")));
            }
        }
        check_positive("zeta_grid", &self.zeta_grid)?;
        check_positive("beta_fractions", &self.beta_fractions)?;
        if self.beta_fractions.iter().any(|b| *b > 1.0) {
            return Err(Error::InvalidConfig("beta_fractions must lie in (0, 1]".into()));
        }
        if self.snr_grid.is_empty() || self.snr_grid.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidConfig("snr_grid must be nonempty and finite".into()));
        }
        if self.cfg.n_measurement_tones == 0 && self.methods.iter().any(|m| *m != Method::None) {
            return Err(Error::InvalidConfig("estimation methods need reserved tones".into()));
        }
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    pub fn from_toml_file(path: &std::path::Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::ConfigParse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.tag().parse::<Method>().unwrap(), m);
        }
        assert!(matches!("bogus".parse::<Method>(), Err(Error::UnknownMethod(_))));
        assert_eq!(Method::parse_list("lasso, wpal").unwrap(), vec![Method::Lasso, Method::Wpal]);
    }

    #[test]
    fn toml_round_trip_and_defaults() {
        let spec = ExperimentSpec::from_toml_str("n_trials = 3\nmethods = [\"none\", \"pal-rts\"]\n").unwrap();
        assert_eq!(spec.n_trials, 3);
        assert_eq!(spec.methods, vec![Method::None, Method::PalRts]);
        assert_eq!(spec.cfg, OfdmConfig::default());
        let back = ExperimentSpec::from_toml_str(&spec.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn validation_rejects_bad_specs() {
        assert!(ExperimentSpec::default().validate().is_ok());
        let bad = [
            ExperimentSpec { n_trials: 0, ..Default::default() },
            ExperimentSpec { gamma_grid: vec![], ..Default::default() },
            ExperimentSpec { gamma_grid: vec![2.0, -1.0], ..Default::default() },
            ExperimentSpec { beta_fractions: vec![1.5], ..Default::default() },
        ];
        for s in bad {
            assert!(s.validate().is_err());
        }
        assert!(ExperimentSpec::from_toml_str("unknown_key = 1").is_err());
    }
}
