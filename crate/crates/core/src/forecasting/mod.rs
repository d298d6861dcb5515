//! Centroid forecasting and per-node reconstruction
//! `x̂_{i,t+h} = ĉ_{j*,t+h} + ŝ_{i,t+h}`.

mod membership;
mod model;

pub use membership::{
    adjusted_point, alpha_clamp, offset, predict_membership, AlphaClamp, NodeOffset, ViewHistory,
};
pub use model::{
    ArModel, Autoregressive, Forecaster, ForecasterModel, ForecasterRegistry, HoldModel, SampleAndHold,
};

use crate::clustering::{nearest_centroid, PartitionHistory};
use crate::error::{Error, Result};

/// History of one cluster label's centroid for one resource.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidSeries {
    pub cluster: usize,
    pub resource: usize,
    start: usize,
    values: Vec<f64>,
}

impl CentroidSeries {
    pub fn new(cluster: usize, resource: usize) -> Self {
        Self {
            cluster,
            resource,
            start: 0,
            values: Vec::new(),
        }
    }

    /// Appends the centroid of step `t`; steps must be contiguous.
    pub fn push(&mut self, t: usize, value: f64) -> Result<()> {
        if self.values.is_empty() {
            self.start = t;
        } else if t != self.start + self.values.len() {
            return Err(Error::invalid(format!(
                "centroid series expected step {}, got {t}",
                self.start + self.values.len()
            )));
        }
        self.values.push(value);
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn latest(&self) -> Option<f64> {
        self.values.last().copied()
    }
}

/// Per-node forecast for one resource issued at `t` for `t + h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRecord {
    pub t: usize,
    pub h: usize,
    pub resource: usize,
    /// `ĉ_{j,t+h}` for every label `j`.
    pub centroid_forecasts: Vec<f64>,
    /// Predicted label per node.
    pub membership: Vec<usize>,
    pub offsets: Vec<f64>,
    /// `centroid_forecasts[membership[i]] + offsets[i]`, unclamped.
    pub node_forecasts: Vec<f64>,
}

impl ForecastRecord {
    /// Node forecasts clamped to `[0, 1]`; these are what gets scored.
    pub fn final_forecasts(&self) -> Vec<f64> {
        self.node_forecasts.iter().map(|v| v.clamp(0.0, 1.0)).collect()
    }
}

/// Counters for how often the clamped offset point landed in its cluster.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClampAudit {
    pub checked: u64,
    pub violations: u64,
    pub degenerate: u64,
}

impl ClampAudit {
    pub fn merge(&mut self, other: ClampAudit) {
        self.checked += other.checked;
        self.violations += other.violations;
        self.degenerate += other.degenerate;
    }
}

/// The horizon-independent half of a forecast: predicted labels and offsets
/// for each value coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct NodePlan {
    pub t: usize,
    pub membership: Vec<usize>,
    /// `offsets[coord_index][node]`.
    pub offsets: Vec<Vec<f64>>,
    pub audit: ClampAudit,
}

impl NodePlan {
    /// Predicts memberships over the last `m_prime + 1` steps and offsets for
    /// each entry of `coords`. The audit re-checks every clamped point.
    pub fn prepare(history: &PartitionHistory, views: &ViewHistory, m_prime: usize, coords: &[usize]) -> Result<Self> {
        let t = history
            .latest()
            .ok_or_else(|| Error::invalid("forecasting needs a non-empty history"))?
            .t;
        let membership = predict_membership(history, m_prime)?;
        let mut offsets = vec![Vec::with_capacity(membership.len()); coords.len()];
        let mut audit = ClampAudit::default();
        let window: Vec<_> = history.recent(m_prime + 1).collect();
        for (node, &j) in membership.iter().enumerate() {
            let o = offset(node, j, history, views, m_prime, coords)?;
            for (p, clamp) in window.iter().zip(&o.clamps) {
                audit.checked += 1;
                if clamp.degenerate {
                    audit.degenerate += 1;
                    continue;
                }
                let z = views.get(p.t).expect("offset found this view").row(node);
                let point = adjusted_point(z, p.centroids.row(j), clamp.alpha);
                if nearest_centroid(&p.centroids, &point).0 != j {
                    audit.violations += 1;
                }
            }
            for (slot, v) in offsets.iter_mut().zip(o.offset) {
                slot.push(v);
            }
        }
        Ok(Self {
            t,
            membership,
            offsets,
            audit,
        })
    }

    /// Assembles the record for one coordinate given `ĉ_{j,t+h}` per label.
    pub fn record(&self, h: usize, coord_index: usize, resource: usize, centroid_forecasts: Vec<f64>) -> ForecastRecord {
        let offsets = self.offsets[coord_index].clone();
        let node_forecasts = self
            .membership
            .iter()
            .zip(&offsets)
            .map(|(&j, s)| centroid_forecasts[j] + s)
            .collect();
        ForecastRecord {
            t: self.t,
            h,
            resource,
            centroid_forecasts,
            membership: self.membership.clone(),
            offsets,
            node_forecasts,
        }
    }
}

/// Forecasts every node's value of one resource `h` steps ahead.
///
/// `models[j]` and `series[j]` belong to label `j`; `coord` selects the
/// resource's current-value entry inside the clustering feature vectors.
pub fn forecast_nodes(
    h: usize,
    models: &[Box<dyn ForecasterModel>],
    series: &[CentroidSeries],
    history: &PartitionHistory,
    views: &ViewHistory,
    m_prime: usize,
    coord: usize,
) -> Result<ForecastRecord> {
    if h == 0 {
        return Err(Error::invalid("forecast horizon must be at least 1"));
    }
    if models.len() != series.len() {
        return Err(Error::DimensionMismatch {
            expected: series.len(),
            actual: models.len(),
        });
    }
    let plan = NodePlan::prepare(history, views, m_prime, &[coord])?;
    let centroid_forecasts = models
        .iter()
        .zip(series)
        .map(|(m, s)| m.forecast(s.values(), h))
        .collect::<Result<Vec<_>>>()?;
    let resource = series.first().map(|s| s.resource).unwrap_or(0);
    Ok(plan.record(h, 0, resource, centroid_forecasts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{FeatureMatrix, Partition};

    #[test]
    fn series_must_be_contiguous() {
        let mut s = CentroidSeries::new(0, 0);
        s.push(3, 0.1).unwrap();
        s.push(4, 0.2).unwrap();
        assert!(s.push(6, 0.3).is_err());
        assert_eq!(s.start(), 3);
        assert_eq!(s.latest(), Some(0.2));
    }

    #[test]
    fn single_cluster_hold_gives_centroid() {
        let mut history = PartitionHistory::new(2);
        let mut views = ViewHistory::new(2);
        let z = [0.4, 0.4, 0.4];
        history.push(Partition {
            t: 1,
            assignment: vec![0; 3],
            centroids: FeatureMatrix::from_scalars(&[0.4]),
        });
        views.push(1, FeatureMatrix::from_scalars(&z));
        let mut series = CentroidSeries::new(0, 0);
        series.push(1, 0.4).unwrap();
        let models: Vec<Box<dyn ForecasterModel>> = vec![Box::new(HoldModel::new(1))];
        let rec = forecast_nodes(3, &models, &[series], &history, &views, 1, 0).unwrap();
        assert_eq!(rec.node_forecasts, vec![0.4; 3]);
        for i in 0..3 {
            assert_eq!(
                rec.node_forecasts[i] - rec.offsets[i],
                rec.centroid_forecasts[rec.membership[i]]
            );
        }
    }

    #[test]
    fn final_forecasts_are_clamped() {
        let rec = ForecastRecord {
            t: 1,
            h: 1,
            resource: 0,
            centroid_forecasts: vec![0.95],
            membership: vec![0, 0],
            offsets: vec![0.2, -1.1],
            node_forecasts: vec![1.15, -0.15],
        };
        assert_eq!(rec.final_forecasts(), vec![1.0, 0.0]);
    }
}
