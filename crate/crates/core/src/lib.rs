//! Catalytic resource erasure: density-matrix algebra, one-shot entropies,
//! free-state families, convex-split protocols and a reproducible harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entropies;
pub mod error;
pub mod free_sets;
pub mod harness;
pub mod linalg;
pub mod protocols;
pub mod qstate;

pub use error::{Error, Result};
