use std::collections::VecDeque;

use super::{
    jaccard_similarity, kmeans, match_labels, similarity, FeatureMatrix, Partition, SimilarityKind,
};
use crate::error::{Error, Result};

/// The most recent partitions, oldest first, bounded by `capacity`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionHistory {
    entries: VecDeque<Partition>,
    capacity: usize,
}

impl PartitionHistory {
    pub fn new(capacity: usize) -> Self {
        Self {
            entries: VecDeque::with_capacity(capacity.max(1)),
            capacity: capacity.max(1),
        }
    }

    /// Sized for similarity lookback `m` and forecasting lookback `m_prime`.
    pub fn for_lookbacks(m: usize, m_prime: usize) -> Self {
        Self::new(m.max(m_prime) + 1)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Appends a partition; time steps must strictly increase.
    pub fn push(&mut self, partition: Partition) {
        if let Some(last) = self.entries.back() {
            assert!(
                partition.t > last.t,
                "partition history requires increasing steps ({} after {})",
                partition.t,
                last.t
            );
        }
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(partition);
    }

    pub fn latest(&self) -> Option<&Partition> {
        self.entries.back()
    }

    /// Up to `n` most recent partitions, newest first.
    pub fn recent(&self, n: usize) -> impl Iterator<Item = &Partition> {
        self.entries.iter().rev().take(n)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Partition> {
        self.entries.iter()
    }
}

/// Relabels a raw partition against `history`: adopts raw labels when the
/// history is empty, otherwise applies the maximum-similarity permutation.
pub fn relabel(raw: Partition, history: &PartitionHistory, m: usize, kind: SimilarityKind) -> Result<Partition> {
    if history.is_empty() {
        return Ok(raw);
    }
    let w = match kind {
        SimilarityKind::Intersection => similarity(&raw, history, m)?,
        SimilarityKind::Jaccard => jaccard_similarity(&raw, history, m)?,
    };
    let perm = match_labels(&w)?;
    Ok(raw.permuted(&perm))
}

/// K-means on the step's features, relabeled for continuity and appended
/// to `history`.
pub fn dynamic_step(
    features: &FeatureMatrix,
    history: &mut PartitionHistory,
    t: usize,
    k: usize,
    m: usize,
    seed: u64,
    kind: SimilarityKind,
) -> Result<Partition> {
    if let Some(last) = history.latest() {
        if t <= last.t {
            return Err(Error::invalid(format!("step {t} does not follow {}", last.t)));
        }
    }
    let mut raw = kmeans(features, k, seed)?;
    raw.t = t;
    let partition = relabel(raw, history, m, kind)?;
    history.push(partition.clone());
    Ok(partition)
}

/// Stateful wrapper owning the history for one clustering channel.
#[derive(Debug, Clone)]
pub struct DynamicClusterer {
    pub k: usize,
    pub m: usize,
    pub seed: u64,
    pub kind: SimilarityKind,
    history: PartitionHistory,
}

impl DynamicClusterer {
    pub fn new(k: usize, m: usize, m_prime: usize, seed: u64, kind: SimilarityKind) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if m == 0 {
            return Err(Error::invalid("m must be at least 1"));
        }
        Ok(Self {
            k,
            m,
            seed,
            kind,
            history: PartitionHistory::for_lookbacks(m, m_prime),
        })
    }

    pub fn step(&mut self, features: &FeatureMatrix, t: usize) -> Result<Partition> {
        dynamic_step(features, &mut self.history, t, self.k, self.m, self.seed, self.kind)
    }

    pub fn history(&self) -> &PartitionHistory {
        &self.history
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_keeps_raw_labels() {
        let f = FeatureMatrix::from_scalars(&[0.1, 0.12, 0.5, 0.52, 0.9, 0.88]);
        let mut h = PartitionHistory::new(3);
        let p = dynamic_step(&f, &mut h, 1, 3, 1, 11, SimilarityKind::Intersection).unwrap();
        let mut raw = kmeans(&f, 3, 11).unwrap();
        raw.t = 1;
        assert_eq!(p, raw);
        assert_eq!(h.len(), 1);
    }

    #[test]
    fn repeated_data_keeps_assignment() {
        let f = FeatureMatrix::from_scalars(&[0.1, 0.12, 0.5, 0.52, 0.9, 0.88]);
        let mut c = DynamicClusterer::new(3, 1, 5, 4, SimilarityKind::Intersection).unwrap();
        let a = c.step(&f, 1).unwrap();
        let b = c.step(&f, 2).unwrap();
        assert_eq!(a.assignment, b.assignment);
        assert_eq!(a.centroids, b.centroids);
    }

    #[test]
    fn relabel_follows_history_across_seeds() {
        let f = FeatureMatrix::from_scalars(&[0.1, 0.12, 0.5, 0.52, 0.9, 0.88]);
        let mut h = PartitionHistory::new(2);
        let first = dynamic_step(&f, &mut h, 1, 3, 1, 0, SimilarityKind::Intersection).unwrap();
        for (t, seed) in (2..20).zip(100..) {
            let p = dynamic_step(&f, &mut h, t, 3, 1, seed, SimilarityKind::Intersection).unwrap();
            assert_eq!(p.assignment, first.assignment, "seed {seed}");
        }
    }

    #[test]
    fn history_is_bounded_and_ordered() {
        let mut h = PartitionHistory::new(2);
        for t in 1..=5 {
            h.push(Partition {
                t,
                assignment: vec![0],
                centroids: FeatureMatrix::zeros(1, 1),
            });
        }
        assert_eq!(h.len(), 2);
        let ts: Vec<usize> = h.recent(5).map(|p| p.t).collect();
        assert_eq!(ts, vec![5, 4]);
    }

    #[test]
    #[should_panic(expected = "increasing steps")]
    fn history_rejects_non_increasing_steps() {
        let mut h = PartitionHistory::new(3);
        let p = Partition {
            t: 2,
            assignment: vec![0],
            centroids: FeatureMatrix::zeros(1, 1),
        };
        h.push(p.clone());
        h.push(p);
    }
}
