//! Joint probability tables over named discrete variables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SUM_TOLERANCE: f64 = 1e-12;

/// `−Σ p log2 p` with `0·log 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

/// Probability tensor over named variables, row-major with the first
/// variable most significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointTable {
    names: Vec<String>,
    dims: Vec<usize>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn new(names: Vec<String>, dims: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if names.len() != dims.len() {
            return Err(Error::LengthMismatch {
                expected: names.len(),
                actual: dims.len(),
            });
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::InvalidArgument(format!("variable {n} appears twice")));
            }
        }
        if dims.contains(&0) {
            return Err(Error::InvalidArgument("variables need at least one outcome".into()));
        }
        let size: usize = dims.iter().product();
        if probs.len() != size {
            return Err(Error::LengthMismatch {
                expected: size,
                actual: probs.len(),
            });
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidArgument(format!("table entry {p} is negative or not finite")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidArgument(format!("table sums to {sum}, not 1")));
        }
        Ok(JointTable { names, dims, probs })
    }

    /// Accumulates weighted outcomes; repeated outcomes add up.
    pub fn from_events<I>(names: &[&str], dims: &[usize], events: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        let size: usize = dims.iter().product();
        let mut probs = vec![0.0; size];
        for (outcome, w) in events {
            let flat = flatten(dims, &outcome)?;
            probs[flat] += w;
        }
        Self::new(names.iter().map(|s| s.to_string()).collect(), dims.to_vec(), probs)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }

    fn position(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Iterates `(outcome indices, probability)` over non-zero cells.
    pub fn cells(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.probs.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(flat, &p)| {
            let mut idx = vec![0; self.dims.len()];
            let mut rest = flat;
            for (slot, &d) in idx.iter_mut().zip(&self.dims).rev() {
                *slot = rest % d;
                rest /= d;
            }
            (idx, p)
        })
    }

    /// Law of the listed variables, in the listed order.
    pub fn marginal(&self, vars: &[&str]) -> Result<JointTable> {
        let positions = self.positions(vars)?;
        let dims: Vec<usize> = positions.iter().map(|&i| self.dims[i]).collect();
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for (idx, p) in self.cells() {
            let sub: Vec<usize> = positions.iter().map(|&i| idx[i]).collect();
            *acc.entry(flatten(&dims, &sub)?).or_default() += p;
        }
        let size: usize = dims.iter().product();
        let mut probs = vec![0.0; size];
        for (k, v) in acc {
            probs[k] = v;
        }
        Ok(JointTable {
            names: vars.iter().map(|s| s.to_string()).collect(),
            dims,
            probs,
        })
    }

    fn positions(&self, vars: &[&str]) -> Result<Vec<usize>> {
        let mut out: Vec<usize> = Vec::with_capacity(vars.len());
        for v in vars {
            let p = self.position(v)?;
            if !out.contains(&p) {
                out.push(p);
            }
        }
        Ok(out)
    }

    /// `H(vars)` in bits. The empty set has entropy 0.
    pub fn entropy(&self, vars: &[&str]) -> Result<f64> {
        let positions = self.positions(vars)?;
        if positions.is_empty() {
            return Ok(0.0);
        }
        let mut acc: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (idx, p) in self.cells() {
            *acc.entry(positions.iter().map(|&i| idx[i]).collect()).or_default() += p;
        }
        Ok(shannon_entropy(&acc.into_values().collect::<Vec<_>>()))
    }

    /// `H(targets | givens) = H(targets, givens) − H(givens)`.
    pub fn conditional_entropy(&self, targets: &[&str], givens: &[&str]) -> Result<f64> {
        let joint: Vec<&str> = targets.iter().chain(givens).copied().collect();
        Ok(self.entropy(&joint)? - self.entropy(givens)?)
    }

    /// `I(A; B | C) = H(A,C) + H(B,C) − H(A,B,C) − H(C)`.
    pub fn mutual_information(&self, a: &[&str], b: &[&str], givens: &[&str]) -> Result<f64> {
        let ac: Vec<&str> = a.iter().chain(givens).copied().collect();
        let bc: Vec<&str> = b.iter().chain(givens).copied().collect();
        let abc: Vec<&str> = a.iter().chain(b).chain(givens).copied().collect();
        Ok(self.entropy(&ac)? + self.entropy(&bc)? - self.entropy(&abc)? - self.entropy(givens)?)
    }
}

fn flatten(dims: &[usize], idx: &[usize]) -> Result<usize> {
    if idx.len() != dims.len() {
        return Err(Error::LengthMismatch {
            expected: dims.len(),
            actual: idx.len(),
        });
    }
    let mut flat = 0;
    for (&i, &d) in idx.iter().zip(dims) {
        if i >= d {
            return Err(Error::Range(format!("outcome {i} out of range for a variable of size {d}")));
        }
        flat = flat * d + i;
    }
    Ok(flat)
}
