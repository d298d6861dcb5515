use std::str::FromStr;

use super::{Partition, PartitionHistory};
use crate::error::{Error, Result};

/// Which overlap score feeds label matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SimilarityKind {
    /// Count of nodes in the fresh cluster that sat in label `j` at every
    /// one of the last `M` steps.
    #[default]
    Intersection,
    /// Intersection-over-union of the same two node sets.
    Jaccard,
}

impl FromStr for SimilarityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intersection" => Ok(Self::Intersection),
            "jaccard" => Ok(Self::Jaccard),
            other => Err(Error::Config(format!("unknown similarity `{other}`"))),
        }
    }
}

impl std::fmt::Display for SimilarityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Intersection => "intersection",
            Self::Jaccard => "jaccard",
        })
    }
}

/// Square `K × K` weight matrix, `w[k][j]` scoring fresh cluster `k`
/// against historical label `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    k: usize,
    weights: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        let mut weights = Vec::with_capacity(k * k);
        for row in rows {
            if row.len() != k {
                return Err(Error::invalid(format!(
                    "similarity matrix must be square: {k} rows but a row of length {}",
                    row.len()
                )));
            }
            if let Some(w) = row.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
                return Err(Error::invalid(format!("similarity weight {w} is not a finite non-negative number")));
            }
            weights.extend_from_slice(row);
        }
        Ok(Self { k, weights })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.k + col]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.weights.chunks(self.k.max(1)).map(<[f64]>::to_vec).collect()
    }
}

/// For each node, the label it held at all of the last `lookback` steps of
/// `history`, if it held the same one throughout.
fn stable_labels(history: &PartitionHistory, lookback: usize, n: usize) -> Result<Vec<Option<usize>>> {
    let recent: Vec<&Partition> = history.recent(lookback).collect();
    let mut stable: Vec<Option<usize>> = vec![None; n];
    for (i, slot) in stable.iter_mut().enumerate() {
        let first = recent[0].assignment[i];
        if recent.iter().all(|p| p.assignment[i] == first) {
            *slot = Some(first);
        }
    }
    Ok(stable)
}

fn check_compat(raw: &Partition, history: &PartitionHistory, m: usize) -> Result<usize> {
    let last = history
        .latest()
        .ok_or_else(|| Error::invalid("similarity needs a non-empty partition history"))?;
    if m == 0 {
        return Err(Error::invalid("similarity lookback M must be at least 1"));
    }
    if last.k() != raw.k() {
        return Err(Error::invalid(format!(
            "cluster count mismatch: raw K={} vs history K={}",
            raw.k(),
            last.k()
        )));
    }
    if last.n_nodes() != raw.n_nodes() {
        return Err(Error::DimensionMismatch {
            expected: last.n_nodes(),
            actual: raw.n_nodes(),
        });
    }
    // min{M, t-1}: the history holds exactly the steps before t
    Ok(m.min(history.len()))
}

/// `w[k][j] = |C'_k ∩ (∩_{m=1..min(M, t−1)} C_{j,t−m})|`.
pub fn similarity(raw: &Partition, history: &PartitionHistory, m: usize) -> Result<SimilarityMatrix> {
    let lookback = check_compat(raw, history, m)?;
    let k = raw.k();
    let stable = stable_labels(history, lookback, raw.n_nodes())?;
    let mut weights = vec![0.0; k * k];
    for (i, &fresh) in raw.assignment.iter().enumerate() {
        if let Some(j) = stable[i] {
            weights[fresh * k + j] += 1.0;
        }
    }
    Ok(SimilarityMatrix { k, weights })
}

/// Jaccard variant: `|C'_k ∩ S_j| / |C'_k ∪ S_j|` with `S_j` the nested
/// historical intersection. Empty unions score 0.
pub fn jaccard_similarity(raw: &Partition, history: &PartitionHistory, m: usize) -> Result<SimilarityMatrix> {
    let lookback = check_compat(raw, history, m)?;
    let k = raw.k();
    let stable = stable_labels(history, lookback, raw.n_nodes())?;
    let mut inter = vec![0usize; k * k];
    let fresh_sizes = raw.cluster_sizes();
    let mut stable_sizes = vec![0usize; k];
    for (i, &fresh) in raw.assignment.iter().enumerate() {
        if let Some(j) = stable[i] {
            inter[fresh * k + j] += 1;
            stable_sizes[j] += 1;
        }
    }
    let weights = (0..k * k)
        .map(|idx| {
            let (row, col) = (idx / k, idx % k);
            let union = fresh_sizes[row] + stable_sizes[col] - inter[idx];
            if union == 0 {
                0.0
            } else {
                inter[idx] as f64 / union as f64
            }
        })
        .collect();
    Ok(SimilarityMatrix { k, weights })
}
