//! Zonal travel cost method (ZTCM) toolkit.
//!
//! The crate covers the whole valuation chain for a recreation site:
//!
//! - [`survey`]: visitor survey records, CSV ingestion, tourist filtering and zone shares
//! - [`zoning`]: zone table construction (visits, potential visitors, visitation rates)
//!   and regression observations by zone and travel mode
//! - [`regression`]: least squares with heteroskedasticity-robust inference
//! - [`valuation`]: choke prices, consumer surplus, totals and per-area values
//! - [`spots`]: half-circle coverage areas of tourist spots
//! - [`profiling`]: chi-square independence tests and one-way ANOVA for survey profiles
//! - [`distributions`]: t, F and chi-square tail probabilities
//! - [`synthgen`]: synthetic scenarios and Monte Carlo recovery checks

// `!(x > 0.0)` style checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod error;
pub mod linalg;
pub mod profiling;
pub mod regression;
pub mod spots;
pub mod survey;
pub mod synthgen;
pub mod valuation;
pub mod zoning;

pub use error::{Error, ErrorKind, Result};
