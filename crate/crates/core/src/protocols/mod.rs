//! Convex split, catalytic erasure (single party, multiparty, blockwise), converse
//! certificates and rate brackets.

mod block;
mod catalytic;
mod convex_split;
mod rate;
mod sim;
mod transcript;

pub use block::{plan_block_protocol, run_block_protocol, run_block_protocol_with, BlockProtocolPlan};
pub use catalytic::{
    converse_certificate, pool_size, run_catalytic_transformation, run_catalytic_transformation_with,
    run_multiparty_transformation, run_multiparty_transformation_with, ConverseCertificate, ProtocolOptions,
};
pub use convex_split::{
    classical_split_fidelity, convex_split_bound_check, convex_split_bound_check_capped, convex_split_state,
    convex_split_state_capped, ConvexSplitCheck,
};
pub use rate::{asymptotic_rate_report, asymptotic_rate_report_with, RateReport, RateRow};
pub use transcript::{BlockDetails, CatalystDescription, Check, OutputSummary, ProtocolTranscript};

/// Default budget on a simulated dense dimension.
pub const DEFAULT_CAP_DIM: usize = 4096;
/// Budget on simulated probability vectors.
pub const CLASSICAL_CAP: usize = 1 << 20;
pub const DEFAULT_DELTA: f64 = 0.1;
pub const DEFAULT_EPS: f64 = 0.05;
