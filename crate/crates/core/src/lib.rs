//! Clipping-based PAPR reduction for OFDM with compressive-sensing recovery
//! of the clipping signal at the receiver.
//!
//! The transmitter clips the time-domain OFDM block with a sparse signal `c`
//! (peak suppression or digital-magnitude clipping) and leaves a random subset
//! of tones empty. The receiver observes `c` through those reserved tones and
//! recovers it with LASSO-type solvers, data-weighted and phase-augmented
//! variants, or a truncated Bayesian matching pursuit.
//!
//! Module map:
//! - [`config`], [`ofdm`], [`qam`]: system constants, tone partitioning,
//!   unitary DFT, constellations and PAPR.
//! - [`clipper`]: the two homogeneous clippers and their closed-form statistics.
//! - [`channel`]: circulant Rayleigh channel, AWGN, measurement projection.
//! - [`recovery`]: every receiver-side estimator of `c`.
//! - [`metrics`]: SER, NMSE, CCDFs, capacity.
//! - [`harness`]: seeded Monte Carlo orchestration and result files.

// Negated float comparisons are used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod clipper;
pub mod config;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod ofdm;
pub mod qam;
pub mod quad;
pub mod recovery;
pub mod rng;

pub use num_complex::Complex64;

pub use channel::{ChannelRealization, MeasurementOperator};
pub use clipper::{ClipOutcome, ClipScheme};
pub use config::{OfdmConfig, SolverConfig};
pub use error::{Error, Result};
pub use ofdm::{Basis, ComplexBlock, Dft, ToneMap};
pub use qam::Constellation;
pub use recovery::{PhaseMatrix, RecoveryEstimate, RecoveryMethod, WeightVector};
