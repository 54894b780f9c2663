//! Experiment configuration: a TOML document with a fixed schema.
//!
//! ```toml
//! command = "protocol"
//! seed = 7
//!
//! [free_set]
//! family = "coherence"
//!
//! [state]
//! preset = "plus"
//!
//! [params]
//! eps = 0.0
//! delta = 0.5
//! ```
//!
//! Unknown keys are rejected. Every problem found is reported at once.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free_sets::FamilyKind;
use crate::protocols::{CLASSICAL_CAP, DEFAULT_CAP_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Entropy,
    ConvexSplit,
    Protocol,
    Multiparty,
    Block,
    Rate,
    Converse,
    Suite,
}

impl CommandKind {
    pub const ALL: [CommandKind; 8] = [
        CommandKind::Entropy,
        CommandKind::ConvexSplit,
        CommandKind::Protocol,
        CommandKind::Multiparty,
        CommandKind::Block,
        CommandKind::Rate,
        CommandKind::Converse,
        CommandKind::Suite,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CommandKind::Entropy => "entropy",
            CommandKind::ConvexSplit => "convex-split",
            CommandKind::Protocol => "protocol",
            CommandKind::Multiparty => "multiparty",
            CommandKind::Block => "block",
            CommandKind::Rate => "rate",
            CommandKind::Converse => "converse",
            CommandKind::Suite => "suite",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == name)
    }
}

/// Where a matrix comes from: inline text or a file relative to the config.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSource {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inline: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RandomKind {
    Pure,
    Mixed,
    Diagonal,
}

/// Exactly one of `inline`, `file`, `preset`, `probs`, `random` must be set.
/// `layout` relabels (or, for `probs` and `random`, defines) the registers.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSource {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inline: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layout: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupPreset {
    /// `{I, Z}` on qubits.
    Phase,
    /// `{I, X}` on qubits.
    BitFlip,
    /// Cyclic shifts `|k⟩ ↦ |k+1 mod d⟩`.
    Cyclic,
    /// Clock phases `diag(ω^{jk})`.
    Clock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeSetConfig {
    pub family: FamilyKind,
    /// Only `computational` is available.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub party_a: Vec<String>,
    #[serde(default)]
    pub ppt_relaxation: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parties: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default)]
    pub base2: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub hamiltonians: BTreeMap<String, MatrixSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_preset: Option<GroupPreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub group: Vec<MatrixSource>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_list: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eps_list: Vec<f64>,
    #[serde(default)]
    pub withhold_structure: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Caps {
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_classical")]
    pub classical: usize,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_dim() -> usize {
    DEFAULT_CAP_DIM
}
fn default_classical() -> usize {
    CLASSICAL_CAP
}
fn default_workers() -> usize {
    1
}

impl Default for Caps {
    fn default() -> Self {
        Self { dim: DEFAULT_CAP_DIM, classical: CLASSICAL_CAP, workers: 1 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    /// Reduced sample counts and sizes.
    #[default]
    Quick,
    /// The sizes of the acceptance battery.
    Full,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default)]
    pub scale: Scale,
    /// Criteria to run (1–10); empty means all.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub criteria: Vec<u8>,
}

pub const DEFAULT_SEED: u64 = 0x5eed;

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Output directory; not echoed into reports.
    #[serde(default, skip_serializing)]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_set: Option<FreeSetConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<StateSource>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub caps: Caps,
    #[serde(default)]
    pub suite: SuiteConfig,
    /// Directory that relative file paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    /// A config for `command` with every optional part left at its default.
    pub fn new(command: CommandKind) -> Self {
        Self {
            command,
            seed: DEFAULT_SEED,
            output: None,
            free_set: None,
            state: None,
            sigma: None,
            params: Params::default(),
            caps: Caps::default(),
            suite: SuiteConfig::default(),
            base_dir: PathBuf::from("."),
        }
    }

    /// The resolved configuration as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

const TOP_KEYS: &[&str] = &["command", "seed", "output", "free_set", "state", "sigma", "params", "caps", "suite"];
const FREE_SET_KEYS: &[&str] = &[
    "family",
    "basis",
    "party_a",
    "ppt_relaxation",
    "parties",
    "beta",
    "base2",
    "hamiltonians",
    "group_preset",
    "group_dim",
    "group",
    "labels",
];
const STATE_KEYS: &[&str] = &["inline", "file", "preset", "probs", "random", "rank", "layout"];
const MATRIX_KEYS: &[&str] = &["inline", "file"];
const PARAM_KEYS: &[&str] =
    &["eps", "delta", "gamma", "n", "n_list", "m", "t", "n_max", "eps_list", "withhold_structure"];
const CAP_KEYS: &[&str] = &["dim", "classical", "workers"];
const SUITE_KEYS: &[&str] = &["scale", "criteria"];

fn unknown_keys(table: &toml::Table, allowed: &[&str], at: &str, out: &mut Vec<String>) {
    for k in table.keys() {
        if !allowed.contains(&k.as_str()) {
            if at.is_empty() {
                out.push(format!("unknown key `{k}`"));
            } else {
                out.push(format!("unknown key `{k}` in [{at}]"));
            }
        }
    }
}

fn check_schema(doc: &toml::Table, out: &mut Vec<String>) {
    unknown_keys(doc, TOP_KEYS, "", out);
    let sub = |key: &str| doc.get(key).and_then(toml::Value::as_table);
    if let Some(t) = sub("free_set") {
        unknown_keys(t, FREE_SET_KEYS, "free_set", out);
        if let Some(h) = t.get("hamiltonians").and_then(toml::Value::as_table) {
            for (label, v) in h {
                if let Some(m) = v.as_table() {
                    unknown_keys(m, MATRIX_KEYS, &format!("free_set.hamiltonians.{label}"), out);
                }
            }
        }
        if let Some(g) = t.get("group").and_then(toml::Value::as_array) {
            for (i, v) in g.iter().enumerate() {
                if let Some(m) = v.as_table() {
                    unknown_keys(m, MATRIX_KEYS, &format!("free_set.group[{i}]"), out);
                }
            }
        }
    }
    for key in ["state", "sigma"] {
        if let Some(t) = sub(key) {
            unknown_keys(t, STATE_KEYS, key, out);
        }
    }
    if let Some(t) = sub("params") {
        unknown_keys(t, PARAM_KEYS, "params", out);
    }
    if let Some(t) = sub("caps") {
        unknown_keys(t, CAP_KEYS, "caps", out);
    }
    if let Some(t) = sub("suite") {
        unknown_keys(t, SUITE_KEYS, "suite", out);
    }
    if !doc.contains_key("command") {
        out.push("missing required field `command`".into());
    }
}

/// Parses and validates a configuration whose relative paths resolve against
/// the current directory.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    parse_config_at(text, Path::new("."))
}

/// Parses and validates a configuration; relative paths resolve against `base_dir`.
pub fn parse_config_at(text: &str, base_dir: &Path) -> Result<ExperimentConfig> {
    let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::InvalidConfig(vec![e.to_string()]))?;
    let mut errors = Vec::new();
    check_schema(&doc, &mut errors);
    if !errors.is_empty() {
        return Err(Error::InvalidConfig(errors));
    }
    let mut cfg: ExperimentConfig =
        toml::from_str(text).map_err(|e: toml::de::Error| Error::InvalidConfig(vec![e.message().to_string()]))?;
    cfg.base_dir = base_dir.to_path_buf();
    validate(&cfg)?;
    Ok(cfg)
}

/// Checks ranges, per-command requirements and that every state source resolves.
pub fn validate(cfg: &ExperimentConfig) -> Result<()> {
    let mut errors = Vec::new();
    let p = &cfg.params;
    let eps_ok = |e: f64| (0.0..1.0).contains(&e);
    if let Some(e) = p.eps {
        if !eps_ok(e) {
            errors.push(format!("params.eps = {e} is outside [0, 1)"));
        }
    }
    for &e in &p.eps_list {
        if !eps_ok(e) {
            errors.push(format!("params.eps_list entry {e} is outside [0, 1)"));
        }
    }
    if let Some(d) = p.delta {
        if !(d > 0.0 && d <= 1.0) {
            errors.push(format!("params.delta = {d} is outside (0, 1]"));
        }
    }
    if let Some(g) = p.gamma {
        if !(g > 0.0 && g.is_finite()) {
            errors.push(format!("params.gamma = {g} must be positive"));
        }
    }
    for (name, v) in [("n", p.n), ("n_max", p.n_max)] {
        if v == Some(0) {
            errors.push(format!("params.{name} must be at least 1"));
        }
    }
    if p.n_list.contains(&0) {
        errors.push("params.n_list entries must be at least 1".into());
    }
    if p.m == Some(0) {
        errors.push("params.m must be at least 1".into());
    }
    if let Some(t) = p.t {
        if t < 2 {
            errors.push(format!("params.t = {t} must be at least 2"));
        }
    }
    if cfg.caps.dim < 2 {
        errors.push("caps.dim must be at least 2".into());
    }
    if cfg.caps.classical < 2 {
        errors.push("caps.classical must be at least 2".into());
    }
    if cfg.caps.workers == 0 {
        errors.push("caps.workers must be at least 1".into());
    }
    for &c in &cfg.suite.criteria {
        if !(1..=10).contains(&c) {
            errors.push(format!("suite.criteria entry {c} is not in 1..=10"));
        }
    }

    let need = |errors: &mut Vec<String>, present: bool, what: &str| {
        if !present {
            errors.push(format!("command `{}` needs {what}", cfg.command.as_str()));
        }
    };
    let has_state = cfg.state.is_some();
    let has_sigma = cfg.sigma.is_some();
    let has_family = cfg.free_set.is_some();
    match cfg.command {
        CommandKind::Entropy => {
            need(&mut errors, has_state, "a [state]");
            need(&mut errors, has_sigma || has_family, "a [sigma] or a [free_set]");
        }
        CommandKind::ConvexSplit => {
            need(&mut errors, has_state, "a [state]");
            need(&mut errors, has_sigma, "a [sigma]");
        }
        CommandKind::Protocol | CommandKind::Multiparty | CommandKind::Converse | CommandKind::Rate => {
            need(&mut errors, has_state, "a [state]");
            need(&mut errors, has_family, "a [free_set]");
        }
        CommandKind::Block => {
            need(&mut errors, has_state, "a [state]");
            need(&mut errors, has_family, "a [free_set]");
            need(&mut errors, p.m.is_some(), "params.m");
            need(&mut errors, p.gamma.is_some(), "params.gamma");
            match p.eps {
                None => need(&mut errors, false, "params.eps"),
                Some(e) if e <= 0.0 => errors.push("command `block` needs params.eps > 0".into()),
                _ => {}
            }
        }
        CommandKind::Suite => {}
    }

    if let Some(fs) = &cfg.free_set {
        super::sources::check_free_set(fs, &cfg.base_dir, &mut errors);
    }
    for (name, src) in [("state", &cfg.state), ("sigma", &cfg.sigma)] {
        if let Some(src) = src {
            super::sources::check_state(name, src, &cfg.base_dir, &mut errors);
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(errors))
    }
}
