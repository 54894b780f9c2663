use serde::{Deserialize, Serialize};

use super::block::BlockProtocolPlan;
use crate::error::{Error, Result};

/// One asserted inequality `lhs ≤ rhs + tol`, kept with both sides.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

impl Check {
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self { name: name.into(), lhs, rhs, ok: lhs <= rhs + tol }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), lhs: if ok { 0.0 } else { 1.0 }, rhs: 0.0, ok }
    }

    /// How far `lhs` exceeds `rhs` (0 when satisfied).
    pub fn violation(&self) -> f64 {
        if self.ok {
            0.0
        } else {
            (self.lhs - self.rhs).max(0.0)
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CatalystDescription {
    /// The free state in text form.
    pub state: String,
    /// Copies prescribed by the protocol.
    pub copies: u64,
    /// `log₂|M| · 2^k / δ²`.
    pub catalyst_qubits: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OutputSummary {
    /// Largest entry of `|Θ_M − σ*|`.
    pub m_register_deviation: f64,
    /// Largest entry of `|Θ − Θ_M ⊗ Θ_catalyst|`.
    pub product_form_error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BlockDetails {
    pub plan: BlockProtocolPlan,
    pub block_lengths: Vec<u64>,
    /// Pool size actually simulated per block.
    pub pool_simulated: u64,
    /// Distance of each block run started from a fresh pool.
    pub per_block_distance: Vec<f64>,
    pub final_distance: f64,
    /// `blocks · max per-block distance`.
    pub accumulation_bound: f64,
    /// Change of the pool marginal when a block map is applied to an erased block.
    pub catalyst_drift: f64,
}

/// Record of one protocol run.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ProtocolTranscript {
    pub protocol: String,
    pub family: String,
    pub input_layout: String,
    /// Text form of the input, omitted above 64 dimensions.
    pub input_state: Option<String>,
    pub eps_target: f64,
    pub delta: f64,
    /// Smooth max-relative entropy to the chosen free state.
    pub k: f64,
    /// Certified lower end for the minimum over the family.
    pub k_lower: f64,
    /// `⌈2^k/δ²⌉`.
    pub n_copies: u64,
    pub n_simulated: u64,
    pub simulated: bool,
    pub capped: bool,
    /// `log₂ n_copies`.
    pub log_j: f64,
    pub catalyst: CatalystDescription,
    pub output: Option<OutputSummary>,
    pub achieved_distance: Option<f64>,
    /// `ε + √(2^k/n_simulated)`.
    pub distance_bound: f64,
    pub catalyst_return_distance: Option<f64>,
    pub converse_lower_bound: f64,
    pub converse_factor: f64,
    pub block_form_verified: bool,
    /// `full`, `blockwise` or `withheld`.
    pub structure_check: String,
    pub parties: usize,
    pub block: Option<BlockDetails>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl ProtocolTranscript {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn max_violation(&self) -> f64 {
        self.checks.iter().map(Check::violation).fold(0.0, f64::max)
    }

    pub fn to_json_line(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Numerical(format!("transcript serialization: {e}")))
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        serde_json::from_str(line).map_err(|e| Error::Parse { line: 1, message: e.to_string() })
    }
}
