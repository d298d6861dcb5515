//! Per-step clustering of the controller's view with stable labels.

mod baselines;
mod dynamic;
mod kmeans;
mod matching;
mod similarity;

pub use baselines::{min_distance_baseline, partition_from_assignment, static_baseline};
pub use dynamic::{dynamic_step, relabel, DynamicClusterer, PartitionHistory};
pub use kmeans::{kmeans, kmeans_best_of, kmeans_with, KMeansOutcome, KMeansParams};
pub use matching::{match_labels, max_weight_assignment};
pub use similarity::{jaccard_similarity, similarity, SimilarityKind, SimilarityMatrix};

use crate::error::{Error, Result};

/// Dense row-major `rows × dim` matrix of feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("feature dimension must be positive"));
        }
        if data.len() != rows * dim {
            return Err(Error::DimensionMismatch {
                expected: rows * dim,
                actual: data.len(),
            });
        }
        Ok(Self { rows, dim, data })
    }

    pub fn zeros(rows: usize, dim: usize) -> Self {
        Self {
            rows,
            dim,
            data: vec![0.0; rows * dim],
        }
    }

    /// One-column matrix from scalars.
    pub fn from_scalars(values: &[f64]) -> Self {
        Self {
            rows: values.len(),
            dim: 1,
            data: values.to_vec(),
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(1);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), dim, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }
}

/// One step's clustering: a label per node and the `K` centroids.
///
/// For K-means derived partitions every label is used and each centroid is
/// the mean of its members.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub t: usize,
    pub assignment: Vec<usize>,
    pub centroids: FeatureMatrix,
}

impl Partition {
    pub fn k(&self) -> usize {
        self.centroids.rows()
    }

    pub fn n_nodes(&self) -> usize {
        self.assignment.len()
    }

    pub fn members(&self, label: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter(move |(_, &l)| l == label)
            .map(|(i, _)| i)
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k()];
        for &l in &self.assignment {
            sizes[l] += 1;
        }
        sizes
    }

    /// Renames raw label `k` to `perm[k]`, permuting centroid rows to match.
    pub fn permuted(&self, perm: &[usize]) -> Partition {
        let k = self.k();
        let dim = self.centroids.dim();
        let mut centroids = FeatureMatrix::zeros(k, dim);
        for (raw, &label) in perm.iter().enumerate() {
            centroids.row_mut(label).copy_from_slice(self.centroids.row(raw));
        }
        Partition {
            t: self.t,
            assignment: self.assignment.iter().map(|&l| perm[l]).collect(),
            centroids,
        }
    }

    /// Partition content as a canonical set-of-sets (sorted member lists).
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups: Vec<Vec<usize>> = (0..self.k()).map(|j| self.members(j).collect()).collect();
        groups.retain(|g| !g.is_empty());
        groups.sort();
        groups
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid by Euclidean distance; ties go to the lowest index.
pub fn nearest_centroid(centroids: &FeatureMatrix, x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter_rows().enumerate() {
        let d = squared_distance(c, x);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Means of each label's members. Labels with no members get a zero row and
/// are reported in the second return value.
pub fn compute_centroids(
    points: &FeatureMatrix,
    assignment: &[usize],
    k: usize,
) -> (FeatureMatrix, Vec<usize>) {
    let dim = points.dim();
    let mut sums = FeatureMatrix::zeros(k, dim);
    let mut counts = vec![0usize; k];
    for (i, &label) in assignment.iter().enumerate() {
        counts[label] += 1;
        for (s, v) in sums.row_mut(label).iter_mut().zip(points.row(i)) {
            *s += v;
        }
    }
    let mut empty = Vec::new();
    for (j, &n) in counts.iter().enumerate() {
        if n == 0 {
            empty.push(j);
            continue;
        }
        for s in sums.row_mut(j) {
            *s /= n as f64;
        }
    }
    (sums, empty)
}

/// Sum of squared distances from each point to its assigned centroid.
pub fn distortion(points: &FeatureMatrix, assignment: &[usize], centroids: &FeatureMatrix) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(i, &l)| squared_distance(points.row(i), centroids.row(l)))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_breaks_ties_low() {
        let c = FeatureMatrix::from_scalars(&[0.0, 1.0]);
        assert_eq!(nearest_centroid(&c, &[0.5]).0, 0);
        assert_eq!(nearest_centroid(&c, &[0.6]).0, 1);
        let same = FeatureMatrix::from_scalars(&[0.3, 0.3]);
        assert_eq!(nearest_centroid(&same, &[0.9]).0, 0);
    }

    #[test]
    fn permuted_moves_centroids_with_labels() {
        let p = Partition {
            t: 1,
            assignment: vec![0, 1, 1],
            centroids: FeatureMatrix::from_scalars(&[0.1, 0.8]),
        };
        let q = p.permuted(&[1, 0]);
        assert_eq!(q.assignment, vec![1, 0, 0]);
        assert_eq!(q.centroids.as_slice(), &[0.8, 0.1]);
        assert_eq!(p.groups(), q.groups());
    }

    #[test]
    fn feature_matrix_shape_checks() {
        assert!(FeatureMatrix::new(2, 2, vec![0.0; 3]).is_err());
        assert!(FeatureMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
