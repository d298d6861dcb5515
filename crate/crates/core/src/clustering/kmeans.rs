use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{compute_centroids, distortion, nearest_centroid, squared_distance, FeatureMatrix, Partition};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansParams {
    pub max_iterations: usize,
    /// Converged once no centroid moves farther than this.
    pub tolerance: f64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansOutcome {
    pub partition: Partition,
    pub iterations: usize,
    /// Distortion after every assignment/update round.
    pub distortion_trace: Vec<f64>,
}

/// Lloyd's algorithm from k-means++ seeds with default settings. Labels of
/// the result are arbitrary; `t` is left at 0.
pub fn kmeans(points: &FeatureMatrix, k: usize, seed: u64) -> Result<Partition> {
    kmeans_with(points, k, seed, KMeansParams::default()).map(|o| o.partition)
}

/// Runs [`kmeans`] once per seed and keeps the lowest-distortion result
/// (first seed wins ties).
pub fn kmeans_best_of(points: &FeatureMatrix, k: usize, seeds: impl IntoIterator<Item = u64>) -> Result<Partition> {
    let mut best: Option<(f64, Partition)> = None;
    for seed in seeds {
        let p = kmeans(points, k, seed)?;
        let d = distortion(points, &p.assignment, &p.centroids);
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, p));
        }
    }
    best.map(|(_, p)| p)
        .ok_or_else(|| Error::invalid("kmeans_best_of needs at least one seed"))
}

pub fn kmeans_with(points: &FeatureMatrix, k: usize, seed: u64, params: KMeansParams) -> Result<KMeansOutcome> {
    let n = points.rows();
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > n {
        return Err(Error::invalid(format!("k ({k}) exceeds number of points ({n})")));
    }
    if points.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("k-means input contains non-finite values"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_seeds(points, k, &mut rng);
    let mut assignment = vec![0usize; n];
    let mut trace = Vec::new();
    let mut iterations = 0;

    while iterations < params.max_iterations {
        iterations += 1;
        for (i, label) in assignment.iter_mut().enumerate() {
            *label = nearest_centroid(&centroids, points.row(i)).0;
        }
        repair_empty(points, &mut assignment, &centroids, k);
        let (next, _) = compute_centroids(points, &assignment, k);
        let movement = centroids
            .iter_rows()
            .zip(next.iter_rows())
            .map(|(a, b)| squared_distance(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = next;
        trace.push(distortion(points, &assignment, &centroids));
        if movement < params.tolerance {
            break;
        }
    }

    Ok(KMeansOutcome {
        partition: Partition {
            t: 0,
            assignment,
            centroids,
        },
        iterations,
        distortion_trace: trace,
    })
}

/// Draws an index with probability proportional to `d2`.
fn sample_d2(d2: &[f64], total: f64, rng: &mut ChaCha8Rng) -> usize {
    let mut target = rng.random::<f64>() * total;
    for (i, &w) in d2.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        if target < w {
            return i;
        }
        target -= w;
    }
    // rounding can exhaust the scan; fall back to the last weighted point
    d2.iter().rposition(|&w| w > 0.0).expect("total > 0")
}

/// Greedy k-means++: each new seed is the best of `2 + ⌊ln k⌋` D²-sampled
/// candidates, judged by the resulting potential.
fn plus_plus_seeds(points: &FeatureMatrix, k: usize, rng: &mut ChaCha8Rng) -> FeatureMatrix {
    let n = points.rows();
    let trials = 2 + (k as f64).ln().floor() as usize;
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut d2: Vec<f64> = (0..n)
        .map(|i| squared_distance(points.row(i), points.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            // all remaining points coincide with a seed
            chosen.push((0..n).find(|i| !chosen.contains(i)).expect("k <= n"));
            continue;
        }
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for _ in 0..trials {
            let c = sample_d2(&d2, total, rng);
            let next: Vec<f64> = d2
                .iter()
                .enumerate()
                .map(|(i, &d)| d.min(squared_distance(points.row(i), points.row(c))))
                .collect();
            let potential: f64 = next.iter().sum();
            if best.as_ref().is_none_or(|(p, _, _)| potential < *p) {
                best = Some((potential, c, next));
            }
        }
        let (_, c, next) = best.expect("trials >= 2");
        chosen.push(c);
        d2 = next;
    }
    let mut centroids = FeatureMatrix::zeros(k, points.dim());
    for (j, &i) in chosen.iter().enumerate() {
        centroids.row_mut(j).copy_from_slice(points.row(i));
    }
    centroids
}

/// Gives every empty cluster the point farthest from its current centroid,
/// taken only from clusters that keep at least one member.
fn repair_empty(points: &FeatureMatrix, assignment: &mut [usize], centroids: &FeatureMatrix, k: usize) {
    let mut sizes = vec![0usize; k];
    for &l in assignment.iter() {
        sizes[l] += 1;
    }
    let mut moved = vec![false; assignment.len()];
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for (i, &l) in assignment.iter().enumerate() {
            if moved[i] || sizes[l] <= 1 {
                continue;
            }
            let d = squared_distance(points.row(i), centroids.row(l));
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((i, d));
            }
        }
        let (i, _) = best.expect("k <= n guarantees a donor cluster");
        sizes[assignment[i]] -= 1;
        assignment[i] = empty;
        sizes[empty] = 1;
        moved[i] = true;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::compute_centroids;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn singleton_clusters_have_zero_distortion() {
        let pts = FeatureMatrix::from_scalars(&[0.1, 0.5, 0.9, 0.3]);
        let p = kmeans(&pts, 4, 7).unwrap();
        assert_eq!(distortion(&pts, &p.assignment, &p.centroids), 0.0);
        assert_eq!(p.cluster_sizes(), vec![1; 4]);
    }

    #[test]
    fn separated_groups_match_brute_force() {
        // oracle: of the 2-partitions of {0.1,0.11,0.9,0.91}, the split
        // {0.1,0.11}|{0.9,0.91} has distortion 1e-4; every other split is > 0.3
        let pts = FeatureMatrix::from_scalars(&[0.1, 0.11, 0.9, 0.91]);
        let p = kmeans(&pts, 2, 3).unwrap();
        let mut c: Vec<f64> = p.centroids.as_slice().to_vec();
        c.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(c[0], 0.105, epsilon = 1e-12);
        assert_abs_diff_eq!(c[1], 0.905, epsilon = 1e-12);
    }

    #[test]
    fn identical_points_repair_to_n_minus_one_and_one() {
        let pts = FeatureMatrix::from_scalars(&[0.4; 6]);
        let p = kmeans(&pts, 2, 0).unwrap();
        let mut sizes = p.cluster_sizes();
        sizes.sort();
        assert_eq!(sizes, vec![1, 5]);
        assert_eq!(distortion(&pts, &p.assignment, &p.centroids), 0.0);
    }

    #[test]
    fn rejects_bad_k() {
        let pts = FeatureMatrix::from_scalars(&[0.1, 0.2]);
        assert!(kmeans(&pts, 0, 0).is_err());
        assert!(kmeans(&pts, 3, 0).is_err());
        let bad = FeatureMatrix::from_scalars(&[0.1, f64::NAN]);
        assert!(kmeans(&bad, 1, 0).is_err());
    }

    #[test]
    fn best_of_is_no_worse_than_any_single_seed() {
        let vals: Vec<f64> = (0..40).map(|i| ((i * 37) % 101) as f64 / 101.0).collect();
        let pts = FeatureMatrix::from_scalars(&vals);
        let best = kmeans_best_of(&pts, 4, 0..10).unwrap();
        let bd = distortion(&pts, &best.assignment, &best.centroids);
        for s in 0..10 {
            let p = kmeans(&pts, 4, s).unwrap();
            assert!(bd <= distortion(&pts, &p.assignment, &p.centroids));
        }
    }

    proptest! {
        #[test]
        fn lloyd_invariants(
            vals in prop::collection::vec(0.0f64..1.0, 4..40),
            dim in 1usize..3,
            k in 1usize..5,
            seed in any::<u64>(),
        ) {
            let rows = vals.len() / dim;
            prop_assume!(rows >= k);
            let pts = FeatureMatrix::new(rows, dim, vals[..rows * dim].to_vec()).unwrap();
            let out = kmeans_with(&pts, k, seed, KMeansParams::default()).unwrap();
            let p = &out.partition;
            // no empty clusters
            prop_assert!(p.cluster_sizes().iter().all(|&s| s > 0));
            // centroids are member means
            let (means, empty) = compute_centroids(&pts, &p.assignment, k);
            prop_assert!(empty.is_empty());
            for (a, b) in means.as_slice().iter().zip(p.centroids.as_slice()) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
            // monotone objective
            for w in out.distortion_trace.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12, "{:?}", out.distortion_trace);
            }
        }
    }
}
