//! Long-run variance estimation for nonstationary time series.
//!
//! The double-kernel HAC estimator smooths over lags and over time, with
//! plug-in bandwidths. Classical and fixed-b baselines, HAR tests, a
//! simulator for segmented locally stationary processes and a Monte Carlo
//! harness sit alongside it.

// `!(x > 0.0)` style guards reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandwidths;
pub mod baselines;
pub mod cli;
pub mod dkhac;
pub mod error;
pub mod hartests;
pub mod kernels;
pub mod montecarlo;
pub mod series;
pub mod sls;

pub use error::{Error, Result};
