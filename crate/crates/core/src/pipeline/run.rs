use std::collections::{BTreeMap, VecDeque};

use log::{debug, info};
use rayon::prelude::*;

use super::config::{ClusterMode, ClusteringKind, ExperimentConfig, TransmitterKind};
use super::view::StoredView;
use super::mix_seed;
use crate::clustering::{
    dynamic_step, min_distance_baseline, partition_from_assignment, relabel, static_baseline, FeatureMatrix,
    PartitionHistory,
};
use crate::error::{Error, Result};
use crate::evaluation::{objective, time_avg_rmse, MetricsRecord};
use crate::forecasting::{
    CentroidSeries, ClampAudit, ForecasterModel, ForecasterRegistry, HoldModel, NodePlan, ViewHistory,
};
use crate::trace::TraceDataset;
use crate::transmission::{uniform_schedule, TransmitterState};

/// Label name for metrics pooled over every resource.
pub const ALL_RESOURCES: &str = "all";

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub h: usize,
    pub resource: String,
    pub time_avg_rmse: f64,
    /// `time_avg_rmse² / (H + 1)`; these sum to the squared objective.
    pub objective_contrib: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateMetrics {
    pub max_horizon: usize,
    /// Every `h` in `0..=H` for each resource, then `all`.
    pub rows: Vec<AggregateRow>,
    pub objective: Vec<(String, f64)>,
    pub intermediate_rmse: Vec<(String, f64)>,
    pub sent: Vec<usize>,
    pub frequencies: Vec<f64>,
    pub budget: f64,
}

impl AggregateMetrics {
    pub fn time_avg(&self, h: usize, resource: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.h == h && r.resource == resource)
            .map(|r| r.time_avg_rmse)
    }

    pub fn objective(&self, resource: &str) -> Option<f64> {
        lookup(&self.objective, resource)
    }

    pub fn intermediate(&self, resource: &str) -> Option<f64> {
        lookup(&self.intermediate_rmse, resource)
    }
}

fn lookup(pairs: &[(String, f64)], key: &str) -> Option<f64> {
    pairs.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssignmentRow {
    pub t: usize,
    pub node: usize,
    pub channel: usize,
    pub label: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForecastRow {
    pub t: usize,
    pub h: usize,
    pub node: usize,
    pub resource: usize,
    pub forecast: f64,
    pub truth: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub n_nodes: usize,
    pub n_steps: usize,
    pub resource_names: Vec<String>,
    /// One name per clustering channel.
    pub channels: Vec<String>,
    pub metrics: Vec<MetricsRecord>,
    pub aggregate: AggregateMetrics,
    /// `transmissions[(t - 1) * N + i]`.
    pub transmissions: Vec<bool>,
    pub assignments: Vec<AssignmentRow>,
    pub forecasts: Vec<ForecastRow>,
    pub clamp_audit: ClampAudit,
    /// Count of refits that fell back to sample-and-hold.
    pub degraded_fits: usize,
}

impl RunOutput {
    pub fn transmitted(&self, t: usize, node: usize) -> bool {
        self.transmissions[(t - 1) * self.n_nodes + node]
    }
}

/// One independent clustering and forecasting pipeline over a subset of
/// resources.
struct Channel {
    resources: Vec<usize>,
    seed: u64,
    history: PartitionHistory,
    views: ViewHistory,
    /// `series[label][resource_slot]`.
    series: Vec<Vec<CentroidSeries>>,
    models: Option<Vec<Vec<Box<dyn ForecasterModel>>>>,
    static_assignment: Option<Vec<usize>>,
}

struct ChannelStep {
    /// Per resource slot, `Σ_i (z − c)²` at this step.
    intermediate_sq: Vec<f64>,
    /// `(h, resource_slot, node forecasts clamped to [0,1])`.
    forecasts: Vec<(usize, usize, Vec<f64>)>,
    audit: ClampAudit,
    assignment: Vec<usize>,
    degraded: usize,
}

fn value_coords(n_resources: usize, window: usize) -> Vec<usize> {
    (0..n_resources).map(|r| r * window).collect()
}

/// Feature vectors from the `window` latest stored views, resource-major:
/// slot `r * window + lag`. Missing lags repeat the oldest view.
fn build_features(buffer: &VecDeque<Vec<f64>>, n: usize, d: usize, resources: &[usize], window: usize) -> FeatureMatrix {
    let dim = resources.len() * window;
    let mut data = Vec::with_capacity(n * dim);
    for i in 0..n {
        for &r in resources {
            for lag in 0..window {
                let snap = &buffer[lag.min(buffer.len() - 1)];
                data.push(snap[i * d + r]);
            }
        }
    }
    FeatureMatrix::new(n, dim, data).expect("sizes agree by construction")
}

fn is_refit_step(t: usize, config: &ExperimentConfig) -> bool {
    t >= config.w_init && (t - config.w_init) % config.w_retrain == 0
}

impl Channel {
    #[allow(clippy::too_many_arguments)]
    fn step(
        &mut self,
        t: usize,
        features: FeatureMatrix,
        config: &ExperimentConfig,
        registry: &ForecasterRegistry,
        horizon_cap: usize,
    ) -> Result<ChannelStep> {
        let coords = value_coords(self.resources.len(), config.window);
        let partition = match config.clustering {
            ClusteringKind::Dynamic => dynamic_step(
                &features,
                &mut self.history,
                t,
                config.k,
                config.m,
                self.seed,
                config.similarity,
            )?,
            ClusteringKind::Static => {
                let assignment = self.static_assignment.as_ref().expect("computed before the loop");
                let p = partition_from_assignment(&features, assignment, config.k, t)?;
                self.history.push(p.clone());
                p
            }
            ClusteringKind::MinDistance => {
                let mut raw = min_distance_baseline(&features, config.k, mix_seed(self.seed, t as u64))?;
                raw.t = t;
                let p = relabel(raw, &self.history, config.m, config.similarity)?;
                self.history.push(p.clone());
                p
            }
        };

        let mut intermediate_sq = vec![0.0; self.resources.len()];
        for (i, &label) in partition.assignment.iter().enumerate() {
            let z = features.row(i);
            let c = partition.centroids.row(label);
            for (slot, &coord) in coords.iter().enumerate() {
                intermediate_sq[slot] += (z[coord] - c[coord]).powi(2);
            }
        }
        for (label, per_res) in self.series.iter_mut().enumerate() {
            for (slot, s) in per_res.iter_mut().enumerate() {
                s.push(t, partition.centroids.row(label)[coords[slot]])?;
            }
        }
        self.views.push(t, features);

        let mut degraded = 0;
        if is_refit_step(t, config) {
            let series = &self.series;
            let fitted = series
                .par_iter()
                .map(|per_res| {
                    per_res
                        .iter()
                        .map(|s| match registry.fit(&config.forecaster, config.order, s.values(), t) {
                            Err(Error::InsufficientData(_)) => {
                                Ok(Box::new(HoldModel::new(t)) as Box<dyn ForecasterModel>)
                            }
                            other => other,
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            degraded = fitted.iter().flatten().filter(|m| m.degraded()).count();
            debug!("refit {} models at step {t}", fitted.iter().map(Vec::len).sum::<usize>());
            self.models = Some(fitted);
        }

        let mut forecasts = Vec::new();
        let mut audit = ClampAudit::default();
        if horizon_cap > 0 {
            let plan = NodePlan::prepare(&self.history, &self.views, config.m_prime, &coords)?;
            audit = plan.audit;
            let hold = HoldModel::new(t);
            for slot in 0..self.resources.len() {
                let paths = (0..config.k)
                    .map(|label| {
                        let history = self.series[label][slot].values();
                        match &self.models {
                            Some(models) => models[label][slot].forecast_path(history, horizon_cap),
                            None => hold.forecast_path(history, horizon_cap),
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                for h in 1..=horizon_cap {
                    let centroids = paths.iter().map(|p| p[h - 1]).collect();
                    let record = plan.record(h, slot, self.resources[slot], centroids);
                    forecasts.push((h, slot, record.final_forecasts()));
                }
            }
        }
        Ok(ChannelStep {
            intermediate_sq,
            forecasts,
            audit,
            assignment: partition.assignment,
            degraded,
        })
    }
}

fn channel_layout(mode: ClusterMode, d: usize) -> Vec<Vec<usize>> {
    match mode {
        ClusterMode::PerResource => (0..d).map(|r| vec![r]).collect(),
        ClusterMode::Joint => vec![(0..d).collect()],
    }
}

/// Replays `dataset` through transmission, clustering and forecasting and
/// scores every stage against the dataset's ground truth.
///
/// Controller-side decisions only ever see the stored view. Truth enters
/// the loop in two places: each node's own current measurement at its
/// decision point, and the scoring of finished forecasts.
pub fn run(config: &ExperimentConfig, dataset: &TraceDataset) -> Result<RunOutput> {
    run_with_registry(config, dataset, &ForecasterRegistry::default())
}

pub fn run_with_registry(
    config: &ExperimentConfig,
    dataset: &TraceDataset,
    registry: &ForecasterRegistry,
) -> Result<RunOutput> {
    config.validate()?;
    registry.build(&config.forecaster, config.order)?;
    let (n, d, steps) = (dataset.n_nodes(), dataset.n_resources(), dataset.n_steps());
    let max_h = config.max_horizon();
    if config.k > n {
        return Err(Error::Config(format!("k={} exceeds the {n} nodes", config.k)));
    }
    if steps < config.w_init + max_h {
        return Err(Error::InsufficientData(format!(
            "trace has {steps} steps; w_init + H needs {}",
            config.w_init + max_h
        )));
    }

    let layout = channel_layout(config.cluster_mode, d);
    let names = dataset.resource_names().to_vec();
    let channel_names: Vec<String> = match config.cluster_mode {
        ClusterMode::PerResource => names.clone(),
        ClusterMode::Joint => vec![ALL_RESOURCES.to_string()],
    };
    let mut channels = layout
        .into_iter()
        .enumerate()
        .map(|(c, resources)| {
            let seed = mix_seed(config.seed, c as u64);
            let static_assignment = match config.clustering {
                ClusteringKind::Static => Some(static_baseline(dataset, &resources, config.k, seed)?),
                _ => None,
            };
            let series = (0..config.k)
                .map(|label| resources.iter().map(|&r| CentroidSeries::new(label, r)).collect())
                .collect();
            Ok(Channel {
                resources,
                seed,
                history: PartitionHistory::for_lookbacks(config.m, config.m_prime),
                views: ViewHistory::new(config.m_prime + 1),
                series,
                models: None,
                static_assignment,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let params = config.transmitter_params();
    let mut transmitters = (0..n)
        .map(|_| TransmitterState::new(params, d))
        .collect::<Result<Vec<_>>>()?;
    let mut view = StoredView::new(n, d);
    let mut buffer: VecDeque<Vec<f64>> = VecDeque::with_capacity(config.window);

    let mut metrics = Vec::new();
    let mut transmissions = Vec::with_capacity(n * steps);
    let mut assignments = Vec::new();
    let mut forecast_rows = Vec::new();
    let mut clamp_audit = ClampAudit::default();
    let mut degraded_fits = 0;
    // per resource, then the pooled entry
    let mut intermediate_steps: Vec<Vec<f64>> = vec![Vec::with_capacity(steps); d + 1];

    info!("run: N={n} d={d} T={steps} H={max_h}");
    for t in 1..=steps {
        let truth_now = dataset.step(t - 1);
        for (i, tx) in transmitters.iter_mut().enumerate() {
            let x = dataset.measurement(t - 1, i);
            let send = match config.transmitter {
                TransmitterKind::Adaptive => tx.step(x, t)?.transmit,
                TransmitterKind::Uniform => {
                    let send = t == 1 || uniform_schedule(config.budget, t);
                    tx.force(send, x, t)?;
                    send
                }
            };
            view.observe(i, send, x)?;
            transmissions.push(send);
        }

        // h = 0: the stored view itself is the estimate
        let mut sq0 = vec![0.0; d];
        for (k, (z, x)) in view.values().iter().zip(truth_now).enumerate() {
            sq0[k % d] += (z - x) * (z - x);
        }
        push_metrics(&mut metrics, t, 0, &names, &sq0, n, false);

        if buffer.len() == config.window {
            buffer.pop_back();
        }
        buffer.push_front(view.values().to_vec());

        let horizon_cap = max_h.min(steps - t);
        let outcomes = channels
            .par_iter_mut()
            .map(|ch| {
                let features = build_features(&buffer, n, d, &ch.resources, config.window);
                ch.step(t, features, config, registry, horizon_cap)
            })
            .collect::<Result<Vec<_>>>()?;

        let mut inter = vec![0.0; d];
        let mut forecast_sq = vec![vec![0.0; d]; horizon_cap];
        for (c, (ch, out)) in channels.iter().zip(outcomes).enumerate() {
            clamp_audit.merge(out.audit);
            degraded_fits += out.degraded;
            for (slot, &r) in ch.resources.iter().enumerate() {
                inter[r] = out.intermediate_sq[slot];
            }
            for (h, slot, values) in &out.forecasts {
                let r = ch.resources[*slot];
                for (i, &f) in values.iter().enumerate() {
                    let truth = dataset.value(t + h - 1, i, r);
                    forecast_sq[h - 1][r] += (f - truth) * (f - truth);
                    if config.write_forecasts {
                        forecast_rows.push(ForecastRow {
                            t,
                            h: *h,
                            node: i,
                            resource: r,
                            forecast: f,
                            truth,
                        });
                    }
                }
            }
            if config.write_assignments {
                assignments.extend(out.assignment.iter().enumerate().map(|(node, &label)| AssignmentRow {
                    t,
                    node,
                    channel: c,
                    label,
                }));
            }
        }
        for (r, sq) in inter.iter().enumerate() {
            intermediate_steps[r].push((sq / n as f64).sqrt());
        }
        intermediate_steps[d].push((inter.iter().sum::<f64>() / n as f64).sqrt());

        let warmup = channels.iter().any(|c| c.models.is_none());
        for (h, sq) in forecast_sq.iter().enumerate() {
            push_metrics(&mut metrics, t, h + 1, &names, sq, n, warmup);
        }
    }

    let sent: Vec<usize> = transmitters.iter().map(TransmitterState::sent_count).collect();
    let frequencies = sent.iter().map(|&s| s as f64 / steps as f64).collect();
    let mut all_names = names.clone();
    all_names.push(ALL_RESOURCES.to_string());
    let aggregate = aggregate(
        &metrics,
        &all_names,
        max_h,
        config.include_warmup,
        &intermediate_steps,
        sent,
        frequencies,
        config.budget,
    )?;

    Ok(RunOutput {
        config: config.clone(),
        n_nodes: n,
        n_steps: steps,
        resource_names: names,
        channels: channel_names,
        metrics,
        aggregate,
        transmissions,
        assignments,
        forecasts: forecast_rows,
        clamp_audit,
        degraded_fits,
    })
}

fn push_metrics(out: &mut Vec<MetricsRecord>, t: usize, h: usize, names: &[String], sq: &[f64], n: usize, warmup: bool) {
    let warmup = warmup && h > 0;
    for (name, s) in names.iter().zip(sq) {
        out.push(MetricsRecord {
            t,
            h,
            resource: name.clone(),
            rmse: (s / n as f64).sqrt(),
            warmup,
        });
    }
    out.push(MetricsRecord {
        t,
        h,
        resource: ALL_RESOURCES.to_string(),
        rmse: (sq.iter().sum::<f64>() / n as f64).sqrt(),
        warmup,
    });
}

#[allow(clippy::too_many_arguments)]
fn aggregate(
    metrics: &[MetricsRecord],
    names: &[String],
    max_h: usize,
    include_warmup: bool,
    intermediate_steps: &[Vec<f64>],
    sent: Vec<usize>,
    frequencies: Vec<f64>,
    budget: f64,
) -> Result<AggregateMetrics> {
    let mut per: BTreeMap<(&str, usize), Vec<f64>> = BTreeMap::new();
    for m in metrics.iter().filter(|m| include_warmup || !m.warmup) {
        per.entry((m.resource.as_str(), m.h)).or_default().push(m.rmse);
    }
    let mut rows = Vec::new();
    let mut objectives = Vec::new();
    for name in names {
        let mut by_h = BTreeMap::new();
        for h in 0..=max_h {
            let samples = per.get(&(name.as_str(), h)).map(Vec::as_slice).unwrap_or(&[]);
            let avg = time_avg_rmse(samples)
                .map_err(|_| Error::InsufficientData(format!("no scored forecasts for h={h}, resource {name}")))?;
            by_h.insert(h, avg);
            rows.push(AggregateRow {
                h,
                resource: name.clone(),
                time_avg_rmse: avg,
                objective_contrib: avg * avg / (max_h + 1) as f64,
                samples: samples.len(),
            });
        }
        objectives.push((name.clone(), objective(&by_h, max_h)?));
    }
    let intermediate_rmse = names
        .iter()
        .zip(intermediate_steps)
        .map(|(name, s)| Ok((name.clone(), time_avg_rmse(s)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(AggregateMetrics {
        max_horizon: max_h,
        rows,
        objective: objectives,
        intermediate_rmse,
        sent,
        frequencies,
        budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{generate_synthetic, SyntheticSpec};

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            w_init: 20,
            w_retrain: 10,
            horizons: vec![0, 1, 3],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn features_are_resource_major_with_lags() {
        let mut buffer = VecDeque::new();
        buffer.push_front(vec![0.1, 0.2, 0.3, 0.4]);
        buffer.push_front(vec![0.5, 0.6, 0.7, 0.8]);
        let f = build_features(&buffer, 2, 2, &[0, 1], 3);
        assert_eq!(f.row(0), &[0.5, 0.1, 0.1, 0.6, 0.2, 0.2]);
        assert_eq!(f.row(1), &[0.7, 0.3, 0.3, 0.8, 0.4, 0.4]);
    }

    #[test]
    fn refit_schedule() {
        let c = small_config();
        let steps: Vec<usize> = (1..=45).filter(|&t| is_refit_step(t, &c)).collect();
        assert_eq!(steps, vec![20, 30, 40]);
    }

    #[test]
    fn too_short_trace_is_error() {
        let ds = generate_synthetic(&SyntheticSpec::new(6, 22, 2, 1)).unwrap().dataset;
        assert!(matches!(run(&small_config(), &ds), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn k_above_n_is_error() {
        let ds = generate_synthetic(&SyntheticSpec::new(2, 40, 2, 1)).unwrap().dataset;
        assert!(run(&small_config(), &ds).is_err());
    }

    #[test]
    fn frequencies_match_sent_counts() {
        let ds = generate_synthetic(&SyntheticSpec::new(8, 60, 2, 3)).unwrap().dataset;
        let out = run(&small_config(), &ds).unwrap();
        for i in 0..8 {
            let sent = (1..=60).filter(|&t| out.transmitted(t, i)).count();
            assert_eq!(out.aggregate.sent[i], sent);
            assert_eq!(out.aggregate.frequencies[i], sent as f64 / 60.0);
        }
    }

    #[test]
    fn full_budget_zeroes_staleness() {
        let ds = generate_synthetic(&SyntheticSpec::new(8, 60, 2, 3)).unwrap().dataset;
        let config = ExperimentConfig {
            budget: 1.0,
            ..small_config()
        };
        let out = run(&config, &ds).unwrap();
        assert!(out.metrics.iter().filter(|m| m.h == 0).all(|m| m.rmse == 0.0));
    }
}
