//! Numerical laboratory for Randers-type Finsler metrics.

pub mod autodiff;
pub mod error;
pub mod chart;
pub mod conventions;
pub mod curvature;
pub mod expr;
pub mod fundamental;
pub mod geodesic;
pub mod linalg;
pub mod report;
pub mod runs;
pub mod sample;
pub mod spray;

pub use error::{Error, Result};
