//! Finite-dimensional density-matrix algebra.

mod density;
mod distance;
mod dominance;
mod layout;
mod ops;
mod purify;
pub mod random;
mod textfmt;
mod unitary;

pub use density::{DensityMatrix, DEFAULT_TOLERANCE, SUPPORT_REL};
pub use distance::{
    classical_fidelity, distance_from_fidelity, fidelity, fidelity_with_spectrum, purified_distance, trace_distance,
    Spectrum,
};
pub use dominance::{dominance_check, dominance_margin, marginal_support_bound};
pub use layout::{base_label, copy_label, Register, RegisterLayout, COPY_SEP};
pub use purify::{cq_extension, purification_vector, purify, purify_with, state_vector, uhlmann_partner, AncillaSize};
pub use textfmt::{format_matrix, parse_matrix};
pub use unitary::{controlled_swap, controlled_swap_single, UnitaryOp, UNITARY_TOL};

pub(crate) use ops::{partial_trace_matrix, partial_transpose_matrix, reorder_matrix};
