//! Kendall's tau for bivariate zero-inflated count data.
//!
//! The crate is organised around five pieces:
//!
//! * [`distributions`]: zero-inflated Poisson margins, the Fréchet copula
//!   family and its Fréchet–Hoeffding endpoints, truncated joint pmf grids,
//!   and an exact sampler.
//! * [`estimators`]: the plain and tie-corrected Kendall estimators, the
//!   zero-pattern decomposition of a sample, and the two plug-in estimators
//!   `tau_H` (no within-margin tie adjustment) and `tau_A` (with it).
//! * [`bounds`]: attainable ranges of `tau_H` and `tau_A`, both for known
//!   margins and estimated nonparametrically from data.
//! * [`oracle`]: exact Kendall's tau of a known discrete joint pmf, plus the
//!   term-by-term decomposition behind `tau_A`.
//! * [`montecarlo`]: a deterministic, parallel replication engine for the
//!   simulation study (means, MSE×10², averaged bound estimates).
//!
//! [`cli`] wires these into the `zitau` command-line tool.
//!
//! ```
//! use zitau::estimators::estimate;
//! use zitau::PairedSample;
//!
//! let sample = PairedSample::new(vec![(0, 0), (1, 1), (2, 2), (0, 3)]).unwrap();
//! let report = estimate(&sample).unwrap();
//! assert_eq!(report.stats.p00, 0.25);
//! assert_eq!(report.tau_11_hat, 1.0);
//! ```

// Negated float comparisons also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bounds;
pub mod cli;
pub mod distributions;
pub mod estimators;
pub mod montecarlo;
pub mod oracle;

mod error;

pub use distributions::{FrechetCopula, JointPmfGrid, PairedSample, ZipMargin};
pub use error::{Error, Result};

/// Default truncation tolerance for joint pmf grids.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;
