//! Left-invariant semi-Riemannian geometry on Lie groups, driven by
//! structure constants.
//!
//! The crate integrates Euler-Arnold geodesic flows with adjoint transport,
//! constructs Clairaut first integrals and Clairaut metrics, measures the
//! growth of the adjoint representation along one-parameter subgroups,
//! searches for idempotents of the Euler-Arnold field, and combines all of
//! it into completeness verdicts with certificates or incompleteness
//! witnesses.
//!
//! Everything is computed from a [`algebra::LieAlgebra`] (dimension plus a
//! dense structure-constant tensor) and a [`metric::MetricForm`] (a
//! non-degenerate symmetric bilinear form of any signature). The
//! [`catalog`] module ships the built-in algebras and the affine-group
//! closed forms used as regression oracles.

pub mod algebra;
pub mod catalog;
pub mod clairaut;
pub mod error;
pub mod flow;
pub mod growth;
pub mod metric;
pub mod ode;
pub mod sample;
pub mod spec;

pub use error::{Error, Result};
