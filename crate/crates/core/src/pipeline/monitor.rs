use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ClusterMode, ExperimentConfig};
use super::{mix_seed, ALL_RESOURCES};
use crate::clustering::{kmeans, nearest_centroid, squared_distance, FeatureMatrix};
use crate::error::{Error, Result};
use crate::evaluation::time_avg_rmse;
use crate::trace::TraceDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MonitorSelection {
    /// K-means on training series; each cluster's node nearest its centroid.
    #[default]
    Proposed,
    /// `K` nodes drawn uniformly at random; others join the nearest one.
    Random,
}

impl FromStr for MonitorSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Self::Proposed),
            "random" | "min-distance" => Ok(Self::Random),
            other => Err(Error::Config(format!("unknown monitor selection `{other}`"))),
        }
    }
}

/// Monitors and node-to-monitor map of one clustering channel.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorChannel {
    pub resources: Vec<usize>,
    pub monitors: Vec<usize>,
    /// Index into `monitors` for every node.
    pub assignment: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorReport {
    pub channels: Vec<MonitorChannel>,
    /// Time-averaged test RMSE per resource name, then `all`.
    pub rmse: Vec<(String, f64)>,
}

impl MonitorReport {
    pub fn rmse(&self, resource: &str) -> Option<f64> {
        self.rmse.iter().find(|(k, _)| k == resource).map(|(_, v)| *v)
    }
}

fn training_features(dataset: &TraceDataset, resources: &[usize], train_len: usize) -> Result<FeatureMatrix> {
    let n = dataset.n_nodes();
    let mut data = Vec::with_capacity(n * train_len * resources.len());
    for i in 0..n {
        for &r in resources {
            data.extend((0..train_len).map(|t| dataset.value(t, i, r)));
        }
    }
    FeatureMatrix::new(n, train_len * resources.len(), data)
}

fn select(features: &FeatureMatrix, k: usize, seed: u64, selection: MonitorSelection) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = features.rows();
    match selection {
        MonitorSelection::Proposed => {
            let p = kmeans(features, k, seed)?;
            let monitors = (0..k)
                .map(|j| {
                    let c = p.centroids.row(j);
                    p.members(j)
                        .map(|i| (i, squared_distance(features.row(i), c)))
                        .fold(None, |best: Option<(usize, f64)>, (i, dist)| match best {
                            Some((_, b)) if b <= dist => best,
                            _ => Some((i, dist)),
                        })
                        .map(|(i, _)| i)
                        .expect("k-means clusters are non-empty")
                })
                .collect();
            Ok((monitors, p.assignment))
        }
        MonitorSelection::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let monitors = rand::seq::index::sample(&mut rng, n, k).into_vec();
            let mut points = FeatureMatrix::zeros(k, features.dim());
            for (j, &m) in monitors.iter().enumerate() {
                points.row_mut(j).copy_from_slice(features.row(m));
            }
            let assignment = (0..n).map(|i| nearest_centroid(&points, features.row(i)).0).collect();
            Ok((monitors, assignment))
        }
    }
}

/// Train/test monitor-selection experiment. Training sees every node's
/// first `train_len` steps; during the following `test_len` steps only the
/// monitors report and every other node is estimated by its monitor's value.
pub fn monitor_mode(
    config: &ExperimentConfig,
    dataset: &TraceDataset,
    train_len: usize,
    test_len: usize,
    selection: MonitorSelection,
) -> Result<MonitorReport> {
    let (n, d) = (dataset.n_nodes(), dataset.n_resources());
    if config.k == 0 || config.k > n {
        return Err(Error::Config(format!("k must lie in 1..={n}, got {}", config.k)));
    }
    if train_len == 0 || test_len == 0 {
        return Err(Error::invalid("train and test phases must be non-empty"));
    }
    if train_len + test_len > dataset.n_steps() {
        return Err(Error::InsufficientData(format!(
            "train + test = {} exceeds the {} steps",
            train_len + test_len,
            dataset.n_steps()
        )));
    }
    let layout: Vec<Vec<usize>> = match config.cluster_mode {
        ClusterMode::PerResource => (0..d).map(|r| vec![r]).collect(),
        ClusterMode::Joint => vec![(0..d).collect()],
    };
    let channels = layout
        .into_iter()
        .enumerate()
        .map(|(c, resources)| {
            let features = training_features(dataset, &resources, train_len)?;
            let (monitors, assignment) = select(&features, config.k, mix_seed(config.seed, c as u64), selection)?;
            Ok(MonitorChannel {
                resources,
                monitors,
                assignment,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut per_res: Vec<Vec<f64>> = vec![Vec::with_capacity(test_len); d + 1];
    for t in train_len..train_len + test_len {
        let mut sq = vec![0.0; d];
        for ch in &channels {
            for i in 0..n {
                let m = ch.monitors[ch.assignment[i]];
                for &r in &ch.resources {
                    sq[r] += (dataset.value(t, m, r) - dataset.value(t, i, r)).powi(2);
                }
            }
        }
        for (r, s) in sq.iter().enumerate() {
            per_res[r].push((s / n as f64).sqrt());
        }
        per_res[d].push((sq.iter().sum::<f64>() / n as f64).sqrt());
    }
    let names = dataset
        .resource_names()
        .iter()
        .cloned()
        .chain([ALL_RESOURCES.to_string()]);
    let rmse = names
        .zip(&per_res)
        .map(|(name, s)| Ok((name, time_avg_rmse(s)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(MonitorReport { channels, rmse })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{generate_synthetic, SyntheticSpec};

    fn config(k: usize, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            k,
            seed,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn k_equal_n_is_exact() {
        let ds = generate_synthetic(&SyntheticSpec {
            noise_std: 0.05,
            ..SyntheticSpec::new(7, 40, 2, 4)
        })
        .unwrap()
        .dataset;
        for sel in [MonitorSelection::Proposed, MonitorSelection::Random] {
            let r = monitor_mode(&config(7, 1), &ds, 20, 20, sel).unwrap();
            assert_eq!(r.rmse(ALL_RESOURCES), Some(0.0));
        }
    }

    #[test]
    fn identical_nodes_are_exact_for_any_k() {
        let vals: Vec<f64> = (0..30).flat_map(|t| vec![t as f64 / 30.0; 4]).collect();
        let ds = TraceDataset::new(30, 4, vec!["cpu".into()], 1.0, vals).unwrap();
        for k in 1..=4 {
            let r = monitor_mode(&config(k, 2), &ds, 10, 20, MonitorSelection::Proposed).unwrap();
            assert_eq!(r.rmse("cpu"), Some(0.0));
        }
    }

    #[test]
    fn rejects_bad_lengths_and_k() {
        let ds = generate_synthetic(&SyntheticSpec::new(4, 20, 2, 4)).unwrap().dataset;
        assert!(monitor_mode(&config(5, 0), &ds, 10, 10, MonitorSelection::Proposed).is_err());
        assert!(monitor_mode(&config(2, 0), &ds, 15, 10, MonitorSelection::Proposed).is_err());
    }
}
