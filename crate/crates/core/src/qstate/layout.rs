use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Separator between a register's base label and its copy index, as in `M#3`.
pub const COPY_SEP: char = '#';

/// The part of a label before any copy suffix.
pub fn base_label(label: &str) -> &str {
    label.split(COPY_SEP).next().unwrap_or(label)
}

pub fn copy_label(label: &str, copy: usize) -> String {
    format!("{label}{COPY_SEP}{copy}")
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Register {
    pub label: String,
    pub dim: usize,
}

/// Ordered tensor factors, each with a distinct label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Register>", into = "Vec<Register>")]
pub struct RegisterLayout {
    factors: Vec<Register>,
}

impl TryFrom<Vec<Register>> for RegisterLayout {
    type Error = Error;
    fn try_from(v: Vec<Register>) -> Result<Self> {
        RegisterLayout::from_registers(v)
    }
}

impl From<RegisterLayout> for Vec<Register> {
    fn from(l: RegisterLayout) -> Self {
        l.factors
    }
}

fn valid_label(label: &str) -> bool {
    !label.is_empty() && !label.chars().any(|c| c.is_whitespace() || c == ':' || c == ',')
}

impl RegisterLayout {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        Self::from_registers(factors.into_iter().map(|(label, dim)| Register { label: label.into(), dim }).collect())
    }

    pub fn from_registers(factors: Vec<Register>) -> Result<Self> {
        let mut total: usize = 1;
        for (i, r) in factors.iter().enumerate() {
            if !valid_label(&r.label) {
                return Err(Error::layout(format!("bad register label `{}`", r.label)));
            }
            if r.dim == 0 {
                return Err(Error::layout(format!("register `{}` has dimension 0", r.label)));
            }
            if factors[..i].iter().any(|o| o.label == r.label) {
                return Err(Error::layout(format!("duplicate label `{}`", r.label)));
            }
            total = total.checked_mul(r.dim).ok_or_else(|| Error::layout("total dimension overflows"))?;
        }
        Ok(Self { factors })
    }

    pub fn single(label: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new([(label.into(), dim)])
    }

    pub fn qubits(labels: &[&str]) -> Result<Self> {
        Self::new(labels.iter().map(|l| (*l, 2usize)))
    }

    /// The empty layout (dimension 1).
    pub fn trivial() -> Self {
        Self { factors: vec![] }
    }

    pub fn factors(&self) -> &[Register] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|r| r.dim).product()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|r| r.dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.factors.iter().map(|r| r.label.as_str()).collect()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|r| r.label == label)
    }

    pub fn require(&self, label: &str) -> Result<usize> {
        self.position(label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.factors[self.require(label)?].dim)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    pub fn concat(&self, other: &RegisterLayout) -> Result<Self> {
        for r in &other.factors {
            if self.contains(&r.label) {
                return Err(Error::LabelCollision(r.label.clone()));
            }
        }
        let mut f = self.factors.clone();
        f.extend(other.factors.iter().cloned());
        Ok(Self { factors: f })
    }

    /// Sub-layout with the given labels, in this layout's order.
    pub fn select(&self, labels: &[&str]) -> Result<Self> {
        for l in labels {
            self.require(l)?;
        }
        Ok(Self { factors: self.factors.iter().filter(|r| labels.contains(&r.label.as_str())).cloned().collect() })
    }

    pub fn without(&self, labels: &[&str]) -> Result<Self> {
        for l in labels {
            self.require(l)?;
        }
        Ok(Self { factors: self.factors.iter().filter(|r| !labels.contains(&r.label.as_str())).cloned().collect() })
    }

    /// Layout with factors reordered as `order` (a permutation of the labels).
    pub fn reordered(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.len() {
            return Err(Error::layout(format!("reorder needs {} labels, got {}", self.len(), order.len())));
        }
        let mut f = Vec::with_capacity(order.len());
        for (i, l) in order.iter().enumerate() {
            if order[..i].contains(l) {
                return Err(Error::layout(format!("label `{l}` repeated in reorder")));
            }
            f.push(self.factors[self.require(l)?].clone());
        }
        Ok(Self { factors: f })
    }

    pub fn relabeled(&self, map: impl Fn(&str) -> String) -> Result<Self> {
        Self::from_registers(self.factors.iter().map(|r| Register { label: map(&r.label), dim: r.dim }).collect())
    }

    /// Copy `i` of this layout: every label gets the suffix `#i`.
    pub fn copy(&self, i: usize) -> Self {
        Self { factors: self.factors.iter().map(|r| Register { label: copy_label(&r.label, i), dim: r.dim }).collect() }
    }

    /// `n` labeled copies `#1..#n` concatenated.
    pub fn power(&self, n: usize) -> Result<Self> {
        let mut f = Vec::new();
        for i in 1..=n {
            f.extend(self.copy(i).factors);
        }
        Self::from_registers(f)
    }

    /// Row-major strides of the factors.
    pub fn strides(&self) -> Vec<usize> {
        let n = self.len();
        let mut s = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.factors[k + 1].dim;
        }
        s
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let n = self.len();
        let mut digits = vec![0usize; n];
        for k in (0..n).rev() {
            let d = self.factors[k].dim;
            digits[k] = index % d;
            index /= d;
        }
        digits
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        let mut idx = 0;
        for (k, r) in self.factors.iter().enumerate() {
            idx = idx * r.dim + digits[k];
        }
        idx
    }

    /// For a reordering `target` of this layout, `map[i]` is the index in this layout
    /// of basis element `i` of `target`.
    pub fn index_map_to(&self, target: &RegisterLayout) -> Result<Vec<usize>> {
        if target.len() != self.len() {
            return Err(Error::LayoutMismatch { left: self.to_string(), right: target.to_string() });
        }
        let strides = self.strides();
        let mut pos = Vec::with_capacity(target.len());
        for r in &target.factors {
            let p = self.require(&r.label)?;
            if self.factors[p].dim != r.dim {
                return Err(Error::LayoutMismatch { left: self.to_string(), right: target.to_string() });
            }
            pos.push(p);
        }
        let total = self.dim();
        let tdims = target.dims();
        let mut map = Vec::with_capacity(total);
        let mut digits = vec![0usize; target.len()];
        for _ in 0..total {
            let mut src = 0;
            for k in 0..digits.len() {
                src += digits[k] * strides[pos[k]];
            }
            map.push(src);
            for k in (0..digits.len()).rev() {
                digits[k] += 1;
                if digits[k] < tdims[k] {
                    break;
                }
                digits[k] = 0;
            }
        }
        Ok(map)
    }

    /// Header form `A:2 B:3`.
    pub fn header(&self) -> String {
        self.factors.iter().map(|r| format!("{}:{}", r.label, r.dim)).collect::<Vec<_>>().join(" ")
    }

    pub fn parse_header(text: &str) -> Result<Self> {
        let mut f = Vec::new();
        for tok in text.split_whitespace() {
            let (label, dim) =
                tok.rsplit_once(':').ok_or_else(|| Error::layout(format!("expected label:dim, got `{tok}`")))?;
            let dim: usize = dim.parse().map_err(|_| Error::layout(format!("bad dimension in `{tok}`")))?;
            f.push(Register { label: label.to_string(), dim });
        }
        Self::from_registers(f)
    }
}

impl fmt::Display for RegisterLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "(trivial, dim 1)");
        }
        write!(f, "{} (dim {})", self.header(), self.dim())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_zero_dims() {
        assert!(RegisterLayout::new([("A", 2), ("A", 2)]).is_err());
        assert!(RegisterLayout::new([("A", 0)]).is_err());
        assert!(RegisterLayout::new([("A:B", 2)]).is_err());
    }

    #[test]
    fn encode_decode_roundtrip() {
        let l = RegisterLayout::new([("A", 2), ("B", 3), ("C", 2)]).unwrap();
        for i in 0..l.dim() {
            assert_eq!(l.encode(&l.decode(i)), i);
        }
        assert_eq!(l.strides(), vec![6, 2, 1]);
    }

    #[test]
    fn index_map_for_swap() {
        let l = RegisterLayout::new([("A", 2), ("B", 3)]).unwrap();
        let t = l.reordered(&["B", "A"]).unwrap();
        let map = l.index_map_to(&t).unwrap();
        // target basis (b, a) sits at a*3 + b in the source
        assert_eq!(map[0], 0);
        assert_eq!(map[1], 3);
        assert_eq!(map[2], 1);
    }

    #[test]
    fn header_roundtrip() {
        let l = RegisterLayout::new([("M", 2), ("M#1", 2), ("J", 5)]).unwrap();
        assert_eq!(RegisterLayout::parse_header(&l.header()).unwrap(), l);
        assert_eq!(base_label("M#1"), "M");
    }
}
