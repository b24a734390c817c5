//! Configuration-count inputs: the rank `r`, the number of markings `n`, and
//! the ordered constraint tuple `(I_1, ..., I_k)`.
//!
//! Markings are 1-based everywhere in the public surface. Two text formats
//! are supported: a compact digit-string form such as `12345,23456` (which
//! needs `r` on the side and only covers `n <= 9`), and JSON of the shape
//! `{"r":3,"n":6,"constraints":[[1,2,3,4,5],[2,3,4,5,6]]}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Instance {
    r: usize,
    n: usize,
    constraints: Vec<Vec<usize>>,
}

/// A broken instance rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Violation {
    RankTooSmall { r: usize },
    TooFewMarkings { n: usize, r: usize },
    Arity { k: usize, expected: usize },
    SubsetSize { index: usize, size: usize, expected: usize },
    OutOfRange { index: usize, label: usize, n: usize },
    DuplicateElement { index: usize, label: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::RankTooSmall { r } => write!(f, "r={r} < 2"),
            Violation::TooFewMarkings { n, r } => write!(f, "n={n} < r+1={}", r + 1),
            Violation::Arity { k, expected } => write!(f, "k={k} ≠ n−r−1={expected}"),
            Violation::SubsetSize { index, size, expected } => {
                write!(f, "constraint {} has size {size} ≠ r+2={expected}", index + 1)
            }
            Violation::OutOfRange { index, label, n } => {
                write!(f, "constraint {} contains {label} outside 1..{n}", index + 1)
            }
            Violation::DuplicateElement { index, label } => {
                write!(f, "constraint {} repeats {label}", index + 1)
            }
        }
    }
}

/// Text encodings accepted by [`parse_instance`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Compact,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "compact" => Ok(Format::Compact),
            "json" => Ok(Format::Json),
            other => Err(Error::Parse(format!("unknown instance format {other:?}"))),
        }
    }
}

impl Instance {
    /// Builds an instance without validating it. Each constraint is sorted;
    /// the order of constraints is kept.
    pub fn from_parts(r: usize, n: usize, constraints: Vec<Vec<usize>>) -> Self {
        let constraints = constraints
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .collect();
        Instance { r, n, constraints }
    }

    /// Builds and validates.
    pub fn new(r: usize, n: usize, constraints: Vec<Vec<usize>>) -> Result<Self> {
        let inst = Self::from_parts(r, n, constraints);
        inst.validate().map_err(Error::Invalid)?;
        Ok(inst)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of constraints.
    pub fn k(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[Vec<usize>] {
        &self.constraints
    }

    /// Checks every instance rule, reporting all that fail.
    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut v = Vec::new();
        let (r, n) = (self.r, self.n);
        if r < 2 {
            v.push(Violation::RankTooSmall { r });
        }
        if n < r + 1 {
            v.push(Violation::TooFewMarkings { n, r });
        }
        let expected = n.saturating_sub(r + 1);
        if self.k() != expected || self.k() == 0 {
            v.push(Violation::Arity { k: self.k(), expected });
        }
        for (index, c) in self.constraints.iter().enumerate() {
            if c.len() != r + 2 {
                v.push(Violation::SubsetSize { index, size: c.len(), expected: r + 2 });
            }
            for &label in c {
                if label == 0 || label > n {
                    v.push(Violation::OutOfRange { index, label, n });
                }
            }
            for w in c.windows(2) {
                if w[0] == w[1] {
                    v.push(Violation::DuplicateElement { index, label: w[0] });
                }
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    /// `(r-1)(n-r-1)`, the dimension of the configuration space.
    pub fn moduli_dimension(&self) -> i64 {
        (self.r as i64 - 1) * (self.n as i64 - self.r as i64 - 1)
    }

    /// Markings in no constraint, ascending.
    pub fn uncovered_markings(&self) -> Vec<usize> {
        (1..=self.n).filter(|i| !self.constraints.iter().any(|c| c.contains(i))).collect()
    }

    /// Applies `relabel[i-1]` to marking `i` and reorders constraints by
    /// `order` (constraint `order[t]` becomes position `t`).
    pub fn relabeled(&self, relabel: &[usize], order: &[usize]) -> Instance {
        assert_eq!(relabel.len(), self.n);
        assert_eq!(order.len(), self.k());
        let constraints =
            order.iter().map(|&j| self.constraints[j].iter().map(|&i| relabel[i - 1]).collect()).collect();
        Instance::from_parts(self.r, self.n, constraints)
    }

    /// Compact digit-string form, e.g. `1234,3456,1256`.
    pub fn to_compact(&self) -> Result<String> {
        if self.n > 9 {
            return Err(Error::Parse(format!("compact format needs n ≤ 9, got n={}", self.n)));
        }
        Ok(self
            .constraints
            .iter()
            .map(|c| c.iter().map(|d| d.to_string()).collect::<String>())
            .collect::<Vec<_>>()
            .join(","))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_compact() {
            Ok(s) => write!(f, "{s} (r={}, n={})", self.r, self.n),
            Err(_) => write!(f, "{:?} (r={}, n={})", self.constraints, self.r, self.n),
        }
    }
}

/// Parses and validates an instance.
///
/// `r` is required for the compact format (where `n` is inferred as
/// `k + r + 1`); for JSON it is optional and, when given, must agree with
/// the file.
pub fn parse_instance(text: &str, format: Format, r: Option<usize>) -> Result<Instance> {
    let inst = match format {
        Format::Compact => parse_compact(text, r.ok_or_else(|| Error::Parse("compact format needs r".into()))?)?,
        Format::Json => {
            let inst: Instance = serde_json::from_str(text)?;
            let inst = Instance::from_parts(inst.r, inst.n, inst.constraints);
            if let Some(r) = r.filter(|&r| r != inst.r) {
                return Err(Error::Parse(format!("r={r} conflicts with r={} in JSON", inst.r)));
            }
            inst
        }
    };
    inst.validate().map_err(Error::Invalid)?;
    Ok(inst)
}

fn parse_compact(text: &str, r: usize) -> Result<Instance> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::Parse("empty constraint list".into()));
    }
    let mut constraints = Vec::new();
    for (idx, piece) in text.split(',').enumerate() {
        let piece = piece.trim();
        if piece.is_empty() {
            return Err(Error::Parse(format!("constraint {} is empty", idx + 1)));
        }
        let mut set = Vec::with_capacity(piece.len());
        for ch in piece.chars() {
            match ch.to_digit(10) {
                Some(0) => return Err(Error::Parse("marking 0 is not allowed (markings are 1-based)".into())),
                Some(d) => set.push(d as usize),
                None => return Err(Error::Parse(format!("unexpected character {ch:?} in {piece:?}"))),
            }
        }
        constraints.push(set);
    }
    let n = constraints.len() + r + 1;
    if n > 9 {
        return Err(Error::Parse(format!("compact format needs n ≤ 9, inferred n={n}")));
    }
    if let Some(max) = constraints.iter().flatten().max().filter(|&&m| m > n) {
        return Err(Error::Parse(format!("marking {max} exceeds inferred n={n}")));
    }
    Ok(Instance::from_parts(r, n, constraints))
}
