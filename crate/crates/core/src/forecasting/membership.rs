//! Membership prediction and the clamped per-node offset.

use std::collections::VecDeque;

use crate::clustering::{nearest_centroid, FeatureMatrix, PartitionHistory};
use crate::error::{Error, Result};

/// Modal label of each node over the newest `m_prime + 1` partitions.
/// Ties go to whichever tied label the node held most recently.
pub fn predict_membership(history: &PartitionHistory, m_prime: usize) -> Result<Vec<usize>> {
    let latest = history
        .latest()
        .ok_or_else(|| Error::invalid("membership prediction needs a non-empty history"))?;
    let k = latest.k();
    let window: Vec<_> = history.recent(m_prime + 1).collect();
    let mut counts = vec![0usize; k];
    let mut out = Vec::with_capacity(latest.n_nodes());
    for i in 0..latest.n_nodes() {
        counts.iter_mut().for_each(|c| *c = 0);
        for p in &window {
            counts[p.assignment[i]] += 1;
        }
        let top = *counts.iter().max().expect("k >= 1");
        // window is newest first
        let label = window
            .iter()
            .map(|p| p.assignment[i])
            .find(|&l| counts[l] == top)
            .expect("the modal label occurs in the window");
        out.push(label);
    }
    Ok(out)
}

/// Result of [`alpha_clamp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaClamp {
    pub alpha: f64,
    /// `c_j` itself is not assigned to `j` (a duplicate centroid with a
    /// lower index owns it), so no positive α can keep the point in `j`.
    pub degenerate: bool,
}

/// Point `c_j + α (z − c_j)`.
pub fn adjusted_point(z: &[f64], centroid: &[f64], alpha: f64) -> Vec<f64> {
    centroid
        .iter()
        .zip(z)
        .map(|(c, x)| c + alpha * (x - c))
        .collect()
}

fn assigned_to(centroids: &FeatureMatrix, j: usize, point: &[f64]) -> bool {
    nearest_centroid(centroids, point).0 == j
}

/// Largest `α ∈ (0, 1]` such that `c_j + α (z − c_j)` is still assigned to
/// cluster `j` (nearest centroid, lowest index on ties).
///
/// With `v = z − c_j` and `d_k = c_k − c_j`, the boundary with cluster `k`
/// is crossed at `α = ‖d_k‖² / (2 v·d_k)` for every `k` with `v·d_k > 0`.
/// When rounding or the tie rule places that boundary point outside `j`,
/// α is stepped down one ulp at a time, then bisected if needed.
pub fn alpha_clamp(z: &[f64], j: usize, centroids: &FeatureMatrix) -> Result<AlphaClamp> {
    if j >= centroids.rows() {
        return Err(Error::invalid(format!(
            "cluster {j} out of range for {} centroids",
            centroids.rows()
        )));
    }
    if z.len() != centroids.dim() {
        return Err(Error::DimensionMismatch {
            expected: centroids.dim(),
            actual: z.len(),
        });
    }
    let cj = centroids.row(j);
    if !assigned_to(centroids, j, cj) {
        return Ok(AlphaClamp {
            alpha: 1.0,
            degenerate: true,
        });
    }
    if assigned_to(centroids, j, z) {
        return Ok(AlphaClamp {
            alpha: 1.0,
            degenerate: false,
        });
    }

    let v: Vec<f64> = z.iter().zip(cj).map(|(a, b)| a - b).collect();
    let mut alpha: f64 = 1.0;
    for (k, ck) in centroids.iter_rows().enumerate() {
        if k == j {
            continue;
        }
        let (mut dot, mut norm2) = (0.0, 0.0);
        for ((ck, cj), vi) in ck.iter().zip(cj).zip(&v) {
            let d = ck - cj;
            dot += vi * d;
            norm2 += d * d;
        }
        if dot > 0.0 {
            alpha = alpha.min(norm2 / (2.0 * dot));
        }
    }

    let holds = |a: f64| assigned_to(centroids, j, &adjusted_point(z, cj, a));
    let mut tries = 0;
    while !holds(alpha) && tries < 64 {
        alpha = alpha.next_down();
        tries += 1;
    }
    if !holds(alpha) {
        // bisect: lo always valid (tends to c_j), hi invalid
        let (mut lo, mut hi) = (0.0, alpha);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if holds(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        alpha = lo;
    }
    Ok(AlphaClamp {
        alpha,
        degenerate: false,
    })
}

/// Stored feature views by step, newest at the back.
#[derive(Debug, Clone, Default)]
pub struct ViewHistory {
    entries: VecDeque<(usize, FeatureMatrix)>,
    capacity: usize,
}

impl ViewHistory {
    pub fn new(capacity: usize) -> Self {
        Self {
            entries: VecDeque::with_capacity(capacity.max(1)),
            capacity: capacity.max(1),
        }
    }

    pub fn push(&mut self, t: usize, view: FeatureMatrix) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back((t, view));
    }

    pub fn get(&self, t: usize) -> Option<&FeatureMatrix> {
        self.entries
            .iter()
            .rev()
            .find(|(s, _)| *s == t)
            .map(|(_, v)| v)
    }
}

/// Offset of one node plus the clamps applied at each summed step.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeOffset {
    /// One entry per requested value coordinate.
    pub offset: Vec<f64>,
    pub clamps: Vec<AlphaClamp>,
    pub terms: usize,
}

/// `ŝ = (1/(M′+1)) Σ_{m=0..M′} α_{t−m} (z_{i,t−m} − c_{j,t−m})`, restricted
/// to `coords` of the feature vector. With fewer than `M′+1` steps of
/// history the average runs over the steps available.
pub fn offset(
    node: usize,
    j: usize,
    history: &PartitionHistory,
    views: &ViewHistory,
    m_prime: usize,
    coords: &[usize],
) -> Result<NodeOffset> {
    let mut sum = vec![0.0; coords.len()];
    let mut clamps = Vec::with_capacity(m_prime + 1);
    for p in history.recent(m_prime + 1) {
        let view = views
            .get(p.t)
            .ok_or_else(|| Error::InsufficientData(format!("no stored view for step {}", p.t)))?;
        let z = view.row(node);
        let c = p.centroids.row(j);
        let clamp = alpha_clamp(z, j, &p.centroids)?;
        for (s, &coord) in sum.iter_mut().zip(coords) {
            *s += clamp.alpha * (z[coord] - c[coord]);
        }
        clamps.push(clamp);
    }
    let terms = clamps.len();
    if terms == 0 {
        return Err(Error::invalid("offset needs a non-empty history"));
    }
    sum.iter_mut().for_each(|s| *s /= terms as f64);
    Ok(NodeOffset {
        offset: sum,
        clamps,
        terms,
    })
}
