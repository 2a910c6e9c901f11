//! Symbolic tensor calculus for Jacobi geometry on coordinate charts.
//!
//! The crate builds everything from a small exact-expression IR: typed tensor
//! fields on a chart, exterior/Lie/Schouten calculus, the deformed cotangent
//! algebroid of a bivector-vector pair, contravariant metric derivatives, and
//! checkers that measure geometric identities as sampled residuals.
//!
//! Entry points:
//! - [`catalog`]: built-in named structures with expected check verdicts.
//! - [`suites`]: named residual suites (`jacobi`, `algebroid`, `lck`, ...).
//! - [`definition`]: the plain-text structure definition format used by the
//!   CLI and the browser demo.

pub mod algebroid;
pub mod calculus;
pub mod catalog;
pub mod chart;
pub mod definition;
pub mod derive;
pub mod expr;
pub mod geometry;
pub mod manifold;
pub mod metric;
pub mod report;
pub mod sample;
pub mod suites;

pub use chart::Chart;
pub use expr::Expr;
pub use report::{CheckReport, Verdict};
