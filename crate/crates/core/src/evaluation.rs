//! Error metrics, the pooled standard-deviation bound and pairwise
//! correlation CDFs. Population (divide-by-n) conventions throughout.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::clustering::{FeatureMatrix, Partition};
use crate::error::{Error, Result};
use crate::trace::TraceDataset;

/// One RMSE sample at issue step `t` for horizon `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub t: usize,
    pub h: usize,
    pub resource: String,
    pub rmse: f64,
    /// Issued before forecasting models were first trained.
    pub warmup: bool,
}

/// `sqrt((1/N) Σ_i ‖x̂_i − x_i‖²)` over `N` rows of width `dim`.
pub fn rmse(forecast: &[f64], truth: &[f64], dim: usize) -> Result<f64> {
    if forecast.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: forecast.len(),
        });
    }
    if dim == 0 || truth.is_empty() || truth.len() % dim != 0 {
        return Err(Error::invalid(format!(
            "cannot split {} values into rows of width {dim}",
            truth.len()
        )));
    }
    let n = truth.len() / dim;
    let sq: f64 = forecast
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((sq / n as f64).sqrt())
}

/// `sqrt(mean of squared per-step RMSEs)`.
pub fn time_avg_rmse(per_step: &[f64]) -> Result<f64> {
    if per_step.is_empty() {
        return Err(Error::InsufficientData("no per-step RMSE values".to_string()));
    }
    let ms: f64 = per_step.iter().map(|r| r * r).sum::<f64>() / per_step.len() as f64;
    Ok(ms.sqrt())
}

/// `sqrt((1/(H+1)) Σ_{h=0..H} RMSE̅(h)²)`; every horizon in `0..=H` must
/// be present.
pub fn objective(per_horizon: &BTreeMap<usize, f64>, max_horizon: usize) -> Result<f64> {
    let mut sum = 0.0;
    for h in 0..=max_horizon {
        let v = per_horizon
            .get(&h)
            .ok_or_else(|| Error::InsufficientData(format!("missing horizon {h} for objective")))?;
        sum += v * v;
    }
    Ok((sum / (max_horizon + 1) as f64).sqrt())
}

/// `(1/T) Σ_t β_{i,t} − B` per node; non-positive means within budget.
pub fn budget_slack(frequencies: &[f64], budget: f64) -> Vec<f64> {
    frequencies.iter().map(|f| f - budget).collect()
}

/// One step's RMSE between each node's stored value and its assigned
/// centroid, restricted to `coords` of the feature vectors.
pub fn intermediate_rmse_step(view: &FeatureMatrix, partition: &Partition, coords: &[usize]) -> Result<f64> {
    if view.rows() != partition.n_nodes() {
        return Err(Error::DimensionMismatch {
            expected: partition.n_nodes(),
            actual: view.rows(),
        });
    }
    if coords.is_empty() {
        return Err(Error::invalid("no coordinates selected"));
    }
    let mut sq = 0.0;
    for (i, &label) in partition.assignment.iter().enumerate() {
        let z = view.row(i);
        let c = partition.centroids.row(label);
        for &k in coords {
            sq += (z[k] - c[k]) * (z[k] - c[k]);
        }
    }
    Ok((sq / view.rows() as f64).sqrt())
}

/// Time-averaged intermediate RMSE over aligned views and partitions, all
/// feature coordinates.
pub fn intermediate_rmse(views: &[FeatureMatrix], partitions: &[Partition]) -> Result<f64> {
    if views.len() != partitions.len() {
        return Err(Error::DimensionMismatch {
            expected: partitions.len(),
            actual: views.len(),
        });
    }
    let per_step = views
        .iter()
        .zip(partitions)
        .map(|(v, p)| {
            let coords: Vec<usize> = (0..v.dim()).collect();
            intermediate_rmse_step(v, p, &coords)
        })
        .collect::<Result<Vec<_>>>()?;
    time_avg_rmse(&per_step)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StdMode {
    /// Standard deviation over all `(node, time)` values of the resource.
    #[default]
    Pooled,
    /// Root-mean of each node's own variance over time.
    PerNode,
}

impl FromStr for StdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pooled" => Ok(Self::Pooled),
            "per-node" => Ok(Self::PerNode),
            other => Err(Error::Config(format!("unknown std mode `{other}`"))),
        }
    }
}

fn mean_and_variance(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var)
}

/// The long-term-statistics error bound for one resource.
pub fn std_baseline(dataset: &TraceDataset, resource: usize, mode: StdMode) -> Result<f64> {
    if resource >= dataset.n_resources() {
        return Err(Error::invalid(format!("resource index {resource} out of range")));
    }
    let (n, steps) = (dataset.n_nodes(), dataset.n_steps());
    match mode {
        StdMode::Pooled => {
            let (_, var) = mean_and_variance(
                (0..steps).flat_map(|t| (0..n).map(move |i| dataset.value(t, i, resource))),
            );
            Ok(var.sqrt())
        }
        StdMode::PerNode => {
            let total: f64 = (0..n)
                .map(|i| mean_and_variance((0..steps).map(|t| dataset.value(t, i, resource))).1)
                .sum();
            Ok((total / n as f64).sqrt())
        }
    }
}

/// Pearson correlation (population moments). `None` if either series is
/// constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::InsufficientData("empty series".to_string()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    Ok(Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)))
}

/// Sorted pairwise correlations with their empirical CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCdf {
    /// `(correlation, fraction of pairs ≤ it)`, ascending.
    pub points: Vec<(f64, f64)>,
    /// Nodes left out because their series is constant.
    pub excluded_constant: usize,
}

pub fn correlation_cdf(dataset: &TraceDataset, resource: usize) -> Result<CorrelationCdf> {
    if resource >= dataset.n_resources() {
        return Err(Error::invalid(format!("resource index {resource} out of range")));
    }
    if dataset.n_nodes() < 2 {
        return Err(Error::InsufficientData("correlation needs at least two nodes".to_string()));
    }
    let series: Vec<Vec<f64>> = (0..dataset.n_nodes())
        .map(|i| dataset.node_series(i, resource))
        .collect();
    let varying: Vec<&Vec<f64>> = series
        .iter()
        .filter(|s| s.iter().any(|v| *v != s[0]))
        .collect();
    let excluded_constant = series.len() - varying.len();
    if varying.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{excluded_constant} of {} series are constant; need two varying series",
            series.len()
        )));
    }
    let mut values = Vec::with_capacity(varying.len() * (varying.len() - 1) / 2);
    for a in 0..varying.len() {
        for b in a + 1..varying.len() {
            if let Some(r) = pearson(varying[a], varying[b])? {
                values.push(r);
            }
        }
    }
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let points = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, (i + 1) as f64 / n))
        .collect();
    Ok(CorrelationCdf {
        points,
        excluded_constant,
    })
}
