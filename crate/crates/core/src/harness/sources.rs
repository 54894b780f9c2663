//! Turning configuration blocks into states and free-state families.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{FreeSetConfig, GroupPreset, MatrixSource, RandomKind, StateSource};
use crate::error::{Error, Result};
use crate::free_sets::{matrix_from_fn, FamilyKind, FreeSet};
use crate::linalg::{self, CMat, C64};
use crate::qstate::random::{random_diagonal, random_full_rank, random_pure, random_state};
use crate::qstate::{parse_matrix, DensityMatrix, RegisterLayout};

/// Named states and their default layouts.
pub const PRESETS: &[&str] =
    &["zero", "one", "plus", "minus", "plus-i", "mixed", "bell", "phi-", "psi+", "singlet", "plus-plus", "ghz"];

fn amp(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn preset_state(name: &str) -> Result<DensityMatrix> {
    let h = FRAC_1_SQRT_2;
    let z = amp(0.0, 0.0);
    let one_q = || RegisterLayout::single("M", 2);
    let two_q = || RegisterLayout::qubits(&["A", "B"]);
    match name {
        "zero" => DensityMatrix::basis(one_q()?, 0),
        "one" => DensityMatrix::basis(one_q()?, 1),
        "plus" => DensityMatrix::pure(one_q()?, &[amp(h, 0.0), amp(h, 0.0)]),
        "minus" => DensityMatrix::pure(one_q()?, &[amp(h, 0.0), amp(-h, 0.0)]),
        "plus-i" => DensityMatrix::pure(one_q()?, &[amp(h, 0.0), amp(0.0, h)]),
        "mixed" => Ok(DensityMatrix::maximally_mixed(one_q()?)),
        "bell" => DensityMatrix::pure(two_q()?, &[amp(h, 0.0), z, z, amp(h, 0.0)]),
        "phi-" => DensityMatrix::pure(two_q()?, &[amp(h, 0.0), z, z, amp(-h, 0.0)]),
        "psi+" => DensityMatrix::pure(two_q()?, &[z, amp(h, 0.0), amp(h, 0.0), z]),
        "singlet" => DensityMatrix::pure(two_q()?, &[z, amp(h, 0.0), amp(-h, 0.0), z]),
        "plus-plus" => DensityMatrix::pure(two_q()?, &[amp(0.5, 0.0); 4]),
        "ghz" => {
            let mut v = vec![z; 8];
            v[0] = amp(h, 0.0);
            v[7] = amp(h, 0.0);
            DensityMatrix::pure(RegisterLayout::qubits(&["A", "B", "C"])?, &v)
        }
        other => Err(Error::Config(format!("unknown preset `{other}`; known: {}", PRESETS.join(", ")))),
    }
}

fn read_relative(base: &Path, file: &str) -> Result<String> {
    let path = base.join(file);
    std::fs::read_to_string(&path).map_err(|e| Error::Config(format!("cannot read `{}`: {e}", path.display())))
}

fn matrix_text(src: &MatrixSource, base: &Path) -> Result<(String, String)> {
    match (&src.inline, &src.file) {
        (Some(t), None) => Ok((t.clone(), "inline matrix".into())),
        (None, Some(f)) => Ok((read_relative(base, f)?, format!("`{f}`"))),
        _ => Err(Error::Config("a matrix needs exactly one of `inline` or `file`".into())),
    }
}

/// Parses a matrix; `declared` (if any) must have the same dimension and relabels it.
fn parse_with_layout(text: &str, origin: &str, declared: Option<&str>) -> Result<(RegisterLayout, CMat)> {
    let (layout, m) = parse_matrix(text)?;
    let Some(decl) = declared else {
        return Ok((layout, m));
    };
    let want = RegisterLayout::parse_header(decl)?;
    if want.dim() != m.nrows() {
        return Err(Error::Config(format!(
            "layout `{decl}` has dimension {} but the matrix in {origin} is {}x{}",
            want.dim(),
            m.nrows(),
            m.ncols()
        )));
    }
    if want.dims() != layout.dims() && want.len() == layout.len() {
        return Err(Error::Config(format!(
            "layout `{decl}` does not match the matrix header `{}` in {origin}",
            layout.header()
        )));
    }
    Ok((want, m))
}

fn set_count(src: &StateSource) -> usize {
    [src.inline.is_some(), src.file.is_some(), src.preset.is_some(), src.probs.is_some(), src.random.is_some()]
        .iter()
        .filter(|b| **b)
        .count()
}

pub(crate) fn check_state(name: &str, src: &StateSource, base: &Path, errors: &mut Vec<String>) {
    if set_count(src) != 1 {
        errors.push(format!("[{name}] needs exactly one of inline, file, preset, probs, random"));
        return;
    }
    if src.rank.is_some() && src.random != Some(RandomKind::Mixed) {
        errors.push(format!("[{name}] rank only applies to random = \"mixed\""));
    }
    if src.random.is_some() {
        let Some(layout) = src.layout.as_deref() else {
            errors.push(format!("[{name}] random states need a layout"));
            return;
        };
        match RegisterLayout::parse_header(layout) {
            Ok(l) => {
                if let Some(r) = src.rank {
                    if r == 0 || r > l.dim() {
                        errors.push(format!("[{name}] rank {r} is outside 1..={}", l.dim()));
                    }
                }
            }
            Err(e) => errors.push(format!("[{name}] {e}")),
        }
        return;
    }
    if let Err(e) = resolve_state(src, base, 0) {
        errors.push(format!("[{name}] {e}"));
    }
}

/// Builds the state. `stream` separates the random draws of different blocks.
pub fn resolve_state(src: &StateSource, base: &Path, seed_stream: u64) -> Result<DensityMatrix> {
    if set_count(src) != 1 {
        return Err(Error::Config("a state needs exactly one of inline, file, preset, probs, random".into()));
    }
    let declared = src.layout.as_deref();
    if let Some(text) = &src.inline {
        let (l, m) = parse_with_layout(text, "inline matrix", declared)?;
        return DensityMatrix::new(l, m);
    }
    if let Some(file) = &src.file {
        let text = read_relative(base, file)?;
        let (l, m) = parse_with_layout(&text, &format!("`{file}`"), declared)?;
        return DensityMatrix::new(l, m);
    }
    if let Some(name) = &src.preset {
        let s = preset_state(name)?;
        return match declared {
            None => Ok(s),
            Some(decl) => {
                let want = RegisterLayout::parse_header(decl)?;
                if want.dims() != s.layout().dims() {
                    return Err(Error::Config(format!(
                        "layout `{decl}` has dimension {} but preset `{name}` lives on `{}` (dimension {})",
                        want.dim(),
                        s.layout().header(),
                        s.dim()
                    )));
                }
                s.relabel(want)
            }
        };
    }
    if let Some(p) = &src.probs {
        let layout = match declared {
            Some(d) => RegisterLayout::parse_header(d)?,
            None => RegisterLayout::single("M", p.len())?,
        };
        if layout.dim() != p.len() {
            return Err(Error::Config(format!(
                "layout `{}` has dimension {} but probs has {} entries",
                layout.header(),
                layout.dim(),
                p.len()
            )));
        }
        return DensityMatrix::diagonal(layout, p);
    }
    let kind = src.random.expect("one source is set");
    let layout =
        RegisterLayout::parse_header(declared.ok_or_else(|| Error::Config("random states need a layout".into()))?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed_stream);
    match kind {
        RandomKind::Pure => Ok(random_pure(&layout, &mut rng)),
        RandomKind::Mixed => match src.rank {
            Some(r) => random_state(&layout, r, &mut rng),
            None => Ok(random_full_rank(&layout, &mut rng)),
        },
        RandomKind::Diagonal => Ok(random_diagonal(&layout, &mut rng)),
    }
}

fn preset_group(preset: GroupPreset, dim: usize) -> Result<Vec<CMat>> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    match preset {
        GroupPreset::Phase | GroupPreset::BitFlip if dim != 2 => {
            Err(Error::Config(format!("group preset needs qubits, got group_dim = {dim}")))
        }
        GroupPreset::Phase => Ok(vec![linalg::identity(2), linalg::diag_real(&[1.0, -1.0])]),
        GroupPreset::BitFlip => {
            Ok(vec![linalg::identity(2), matrix_from_fn(2, |i, j| if i != j { one } else { zero })])
        }
        GroupPreset::Cyclic => {
            Ok((0..dim).map(|s| matrix_from_fn(dim, |i, j| if i == (j + s) % dim { one } else { zero })).collect())
        }
        GroupPreset::Clock => Ok((0..dim)
            .map(|s| {
                matrix_from_fn(dim, |i, j| {
                    if i == j {
                        C64::from_polar(1.0, 2.0 * PI * (s * i) as f64 / dim as f64)
                    } else {
                        zero
                    }
                })
            })
            .collect()),
    }
}

pub(crate) fn check_free_set(fs: &FreeSetConfig, base: &Path, errors: &mut Vec<String>) {
    if let Err(e) = build_free_set(fs, base) {
        errors.push(format!("[free_set] {e}"));
    }
}

pub fn build_free_set(fs: &FreeSetConfig, base: &Path) -> Result<FreeSet> {
    if let Some(b) = &fs.basis {
        if b != "computational" {
            return Err(Error::Config(format!("basis `{b}` is not available; only `computational`")));
        }
    }
    let fam = fs.family;
    let stray = |present: bool, key: &str| -> Result<()> {
        if present {
            Err(Error::Config(format!("`{key}` does not apply to family `{}`", fam.as_str())))
        } else {
            Ok(())
        }
    };
    if fam != FamilyKind::Separable {
        stray(!fs.party_a.is_empty(), "party_a")?;
        stray(fs.ppt_relaxation, "ppt_relaxation")?;
    }
    if fam != FamilyKind::Gibbs {
        stray(fs.beta.is_some(), "beta")?;
        stray(!fs.hamiltonians.is_empty(), "hamiltonians")?;
        stray(fs.base2, "base2")?;
    }
    if fam != FamilyKind::Asymmetry {
        stray(fs.group_preset.is_some() || !fs.group.is_empty(), "group")?;
        stray(fs.group_dim.is_some(), "group_dim")?;
        stray(!fs.labels.is_empty(), "labels")?;
    }
    if fam != FamilyKind::SharedRandomness {
        stray(fs.parties.is_some(), "parties")?;
    }
    let set = match fam {
        FamilyKind::Coherence => FreeSet::Coherence,
        FamilyKind::Uniformity => FreeSet::Uniformity,
        FamilyKind::Gibbs => {
            let beta = fs.beta.ok_or_else(|| Error::Config("family `gibbs` needs `beta`".into()))?;
            let mut hs = Vec::new();
            for (label, src) in &fs.hamiltonians {
                let (text, origin) = matrix_text(src, base)?;
                let (_, m) =
                    parse_matrix(&text).map_err(|e| Error::Config(format!("Hamiltonian `{label}` ({origin}): {e}")))?;
                hs.push((label.clone(), m));
            }
            FreeSet::Gibbs { beta, hamiltonians: hs, base2: fs.base2 }
        }
        FamilyKind::Asymmetry => {
            let mut group = Vec::new();
            if let Some(p) = fs.group_preset {
                group = preset_group(p, fs.group_dim.unwrap_or(2))?;
            }
            for src in &fs.group {
                let (text, origin) = matrix_text(src, base)?;
                let (_, m) =
                    parse_matrix(&text).map_err(|e| Error::Config(format!("group element ({origin}): {e}")))?;
                group.push(m);
            }
            if group.is_empty() {
                return Err(Error::Config("family `asymmetry` needs `group_preset` or `group`".into()));
            }
            FreeSet::Asymmetry { group, labels: fs.labels.clone() }
        }
        FamilyKind::Separable => {
            if fs.party_a.is_empty() {
                return Err(Error::Config("family `separable-2qubit` needs `party_a`".into()));
            }
            FreeSet::Separable { party_a: fs.party_a.clone(), ppt_relaxation: fs.ppt_relaxation }
        }
        FamilyKind::SharedRandomness => FreeSet::SharedRandomness { parties: fs.parties.unwrap_or(2) },
        FamilyKind::Contextuality => FreeSet::Contextuality,
        FamilyKind::Stabilizer => FreeSet::Stabilizer,
    };
    set.check_supported()?;
    Ok(set)
}
