use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{compute_centroids, kmeans, nearest_centroid, FeatureMatrix, Partition};
use crate::error::{Error, Result};
use crate::trace::TraceDataset;

/// Offline baseline: one K-means over each node's entire series (the listed
/// resources concatenated), giving an assignment that never changes.
pub fn static_baseline(dataset: &TraceDataset, resources: &[usize], k: usize, seed: u64) -> Result<Vec<usize>> {
    if resources.is_empty() {
        return Err(Error::invalid("static baseline needs at least one resource"));
    }
    let n = dataset.n_nodes();
    let steps = dataset.n_steps();
    let dim = steps * resources.len();
    let mut data = Vec::with_capacity(n * dim);
    for node in 0..n {
        for &r in resources {
            data.extend((0..steps).map(|t| dataset.value(t, node, r)));
        }
    }
    let features = FeatureMatrix::new(n, dim, data)?;
    Ok(kmeans(&features, k, seed)?.assignment)
}

/// Partition with a fixed assignment and centroids recomputed as member
/// means of `features`.
pub fn partition_from_assignment(features: &FeatureMatrix, assignment: &[usize], k: usize, t: usize) -> Result<Partition> {
    if assignment.len() != features.rows() {
        return Err(Error::DimensionMismatch {
            expected: features.rows(),
            actual: assignment.len(),
        });
    }
    if let Some(&bad) = assignment.iter().find(|&&l| l >= k) {
        return Err(Error::invalid(format!("label {bad} out of range for k={k}")));
    }
    let (centroids, empty) = compute_centroids(features, assignment, k);
    if !empty.is_empty() {
        return Err(Error::invalid(format!("labels {empty:?} have no members")));
    }
    Ok(Partition {
        t,
        assignment: assignment.to_vec(),
        centroids,
    })
}

/// Picks `k` distinct nodes uniformly at random and uses their values as
/// centroids; every node joins its nearest selected node (lowest index on
/// ties). Clusters may be empty when selected nodes coincide.
pub fn min_distance_baseline(features: &FeatureMatrix, k: usize, seed: u64) -> Result<Partition> {
    let n = features.rows();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k must lie in 1..={n}, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = rand::seq::index::sample(&mut rng, n, k).into_vec();
    let mut centroids = FeatureMatrix::zeros(k, features.dim());
    for (j, &i) in chosen.iter().enumerate() {
        centroids.row_mut(j).copy_from_slice(features.row(i));
    }
    let assignment = features
        .iter_rows()
        .map(|x| nearest_centroid(&centroids, x).0)
        .collect();
    Ok(Partition {
        t: 0,
        assignment,
        centroids,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::distortion;

    fn two_group_dataset() -> TraceDataset {
        // nodes 0,1 low; nodes 2,3 high; 4 steps
        let mut values = Vec::new();
        for t in 0..4 {
            let wiggle = t as f64 * 0.01;
            values.extend([0.1 + wiggle, 0.12 + wiggle, 0.8 - wiggle, 0.82 - wiggle]);
        }
        TraceDataset::new(4, 4, vec!["cpu".into()], 1.0, values).unwrap()
    }

    #[test]
    fn static_groups_by_whole_series() {
        let ds = two_group_dataset();
        let a = static_baseline(&ds, &[0], 2, 1).unwrap();
        assert_eq!(a[0], a[1]);
        assert_eq!(a[2], a[3]);
        assert_ne!(a[0], a[2]);
        let one = static_baseline(&ds, &[0], 1, 1).unwrap();
        assert_eq!(one, vec![0; 4]);
    }

    #[test]
    fn partition_from_assignment_recomputes_means() {
        let f = FeatureMatrix::from_scalars(&[0.2, 0.4, 0.9]);
        let p = partition_from_assignment(&f, &[0, 0, 1], 2, 7).unwrap();
        assert!((p.centroids.row(0)[0] - 0.3).abs() < 1e-15);
        assert_eq!(p.centroids.row(1)[0], 0.9);
        assert_eq!(p.t, 7);
        assert!(partition_from_assignment(&f, &[0, 0, 0], 2, 7).is_err());
    }

    #[test]
    fn min_distance_with_all_nodes_selected_is_exact() {
        let f = FeatureMatrix::from_scalars(&[0.2, 0.4, 0.9, 0.1]);
        let p = min_distance_baseline(&f, 4, 3).unwrap();
        assert_eq!(distortion(&f, &p.assignment, &p.centroids), 0.0);
    }

    #[test]
    fn min_distance_identical_values_join_first_selected() {
        let f = FeatureMatrix::from_scalars(&[0.5; 5]);
        let p = min_distance_baseline(&f, 3, 8).unwrap();
        assert!(p.assignment.iter().all(|&l| l == 0));
    }

    #[test]
    fn min_distance_is_reproducible() {
        let f = FeatureMatrix::from_scalars(&[0.2, 0.4, 0.9, 0.1, 0.7, 0.3]);
        assert_eq!(
            min_distance_baseline(&f, 2, 99).unwrap(),
            min_distance_baseline(&f, 2, 99).unwrap()
        );
        assert!(min_distance_baseline(&f, 7, 0).is_err());
    }
}
