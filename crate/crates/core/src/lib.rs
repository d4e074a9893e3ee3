//! A finite-dimensional laboratory for relational ("timeless") quantum
//! dynamics: history states on system ⊗ clock, conditioning on clock
//! readings, the Schrödinger/Heisenberg/interaction pictures at the level of
//! the whole universe, energy-conserving system-clock interactions, and the
//! non-unitary evolution of mixtures over several constraint eigensectors.
//!
//! Composite spaces are always ordered system first, clock second.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clock;
pub mod error;
pub mod interactions;
pub mod linalg;
pub mod models;
pub mod pictures;
pub mod universe;

pub use error::{Error, Result};
