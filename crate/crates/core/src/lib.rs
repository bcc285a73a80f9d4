//! Zoll metrics of revolution on the 2-sphere and their width spectra.
//!
//! - [`metric`]: profiles, metrics, curvature and C⁰ comparisons.
//! - [`flow`]: geodesic flow, closure certificates, shooting.
//! - [`width`]: width spectra, geodesic-sum decompositions, continuity checks,
//!   isospectrality verdicts and the certification store.
//! - [`sweepout`]: discrete 1-sweepouts and Birkhoff curve shortening.
//! - [`report`]: CSV and text emitters.

pub mod error;
pub mod flow;
pub mod metric;
pub mod poly;
pub mod quadrature;
pub mod report;
pub mod sweepout;
pub mod width;

pub use error::{Result, ZollError};
pub use metric::{c0_distance, conformal_bounds, make_metric, MetricOfRevolution, OddProfile};
