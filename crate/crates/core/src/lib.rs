//! Singular spectrum analysis in three flavours — Basic, Toeplitz and
//! Circulant (CiSSA) — with frequency-indexed grouping of the reconstructed
//! components, separability and residual diagnostics, a structural-model
//! simulator, and CSV plumbing.
//!
//! ```
//! use cissa_core::{cissa, default_monthly_grouping, TimeSeries};
//!
//! let x: Vec<f64> = (0..240)
//!     .map(|t| 0.01 * t as f64 + (2.0 * std::f64::consts::PI * t as f64 / 12.0).cos())
//!     .collect();
//! let grouping = default_monthly_grouping(48, (18.0, 96.0)).unwrap();
//! let d = cissa(&TimeSeries::new(x).unwrap(), 48, &grouping).unwrap();
//! let total: f64 = d.shares().iter().map(|(_, s)| s).sum();
//! assert!((total - 100.0).abs() < 1e-9);
//! ```

pub mod diagnostics;
pub mod embed;
pub mod error;
pub mod io;
pub mod moments;
pub mod simulate;
pub mod spectral;
pub mod ssa;

pub use diagnostics::{
    ar1_fit, decomposition_w_correlation, regression_check, residual_seasonality, residual_seasonality_check,
    w_correlation, w_correlation_matrix, Ar1Fit, RegressionCheck, SeasonalityReport, WCorrelationMatrix,
};
pub use embed::{diagonal_average, embed, TimeSeries, TrajectoryMatrix};
pub use error::{Error, ErrorClass, Result};
pub use io::{read_series, write_decomposition, ColumnSelector, RunConfig};
pub use moments::{
    autocovariances, basic_matrix, circulant_matrix, toeplitz_matrix, SecondMomentMatrix, Variant,
};
pub use simulate::{
    monte_carlo, simulate_linear, simulate_nonlinear, Extractor, LinearModelParams, MonteCarloConfig, ModelSpec,
    NonlinearModelParams, QuantileTable, Realization, SsaExtractor,
};
pub use spectral::{circulant_eigentriples, periodogram, symmetric_eigentriples, Eigentriple, Eigenvector};
pub use ssa::{
    basic_ssa, cissa, cissa_elementary, decompose, default_monthly_grouping, frequency_groups, toeplitz_ssa, Band,
    Component, Decomposition, FrequencyAssigner, FrequencyGroup, GroupingSpec,
};
