use monisum::pipeline::*;
use monisum::trace::*;
use proptest::prelude::*;

fn trace(n: usize, steps: usize, seed: u64) -> TraceDataset {
    generate_synthetic(&SyntheticSpec {
        noise_std: 0.02,
        switch_probability: 0.01,
        ..SyntheticSpec::new(n, steps, 3, seed)
    })
    .unwrap()
    .dataset
}

fn config() -> ExperimentConfig {
    ExperimentConfig {
        w_init: 40,
        w_retrain: 15,
        horizons: vec![0, 1, 4],
        write_assignments: true,
        write_forecasts: true,
        seed: 3,
        ..ExperimentConfig::default()
    }
}

/// Replaces every value from 0-based step `from` on, leaving the past intact.
fn perturb_future(ds: &TraceDataset, from: usize) -> TraceDataset {
    let stride = ds.n_nodes() * ds.n_resources();
    let values = ds
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| if i / stride >= from { 1.0 - v } else { v })
        .collect();
    TraceDataset::new(
        ds.n_steps(),
        ds.n_nodes(),
        ds.resource_names().to_vec(),
        ds.step_seconds(),
        values,
    )
    .unwrap()
}

fn check_no_lookahead(config: &ExperimentConfig, cut: usize) {
    let ds = trace(12, 150, 8);
    let a = run(config, &ds).unwrap();
    let b = run(config, &perturb_future(&ds, cut)).unwrap();
    // step t (1-based) observes 0-based index t-1, so steps 1..=cut see identical data
    for t in 1..=cut {
        for i in 0..12 {
            assert_eq!(a.transmitted(t, i), b.transmitted(t, i), "t={t} node={i}");
        }
    }
    let early = |rows: &[AssignmentRow]| rows.iter().filter(|r| r.t <= cut).copied().collect::<Vec<_>>();
    assert_eq!(early(&a.assignments), early(&b.assignments));
    let fc = |rows: &[ForecastRow]| {
        rows.iter()
            .filter(|r| r.t <= cut)
            .map(|r| (r.t, r.h, r.node, r.resource, r.forecast.to_bits()))
            .collect::<Vec<_>>()
    };
    let (fa, fb) = (fc(&a.forecasts), fc(&b.forecasts));
    assert!(!fa.is_empty());
    assert_eq!(fa, fb);
    let late = |rows: &[ForecastRow]| rows.iter().filter(|r| r.t > cut).map(|r| r.forecast.to_bits()).collect::<Vec<_>>();
    assert_ne!(late(&a.forecasts), late(&b.forecasts), "perturbation had no effect");
}

#[test]
fn decisions_never_use_future_values() {
    for cut in [41, 70, 100] {
        check_no_lookahead(&config(), cut);
    }
}

#[test]
fn baselines_never_use_future_values() {
    for clustering in [ClusteringKind::Static, ClusteringKind::MinDistance] {
        for cluster_mode in [ClusterMode::PerResource, ClusterMode::Joint] {
            let c = ExperimentConfig {
                clustering,
                cluster_mode,
                window: 2,
                transmitter: TransmitterKind::Uniform,
                ..config()
            };
            check_no_lookahead(&c, 75);
        }
    }
}

#[test]
fn same_config_same_output() {
    let ds = trace(10, 120, 2);
    let a = run(&config(), &ds).unwrap();
    let b = run(&config(), &ds).unwrap();
    assert_eq!(a.transmissions, b.transmissions);
    assert_eq!(a.assignments, b.assignments);
    assert_eq!(a.aggregate, b.aggregate);
}

#[test]
fn synthetic_trace_survives_csv_round_trip() {
    let ds = trace(6, 40, 1);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    write_csv(&ds, &path).unwrap();
    let back = load_csv(&path, &CsvSchema::default()).unwrap();
    assert_eq!(back.values(), ds.values());
    assert_eq!(back.resource_names(), ds.resource_names());
}

#[test]
fn sweep_has_one_point_per_value() {
    let ds = trace(8, 100, 5);
    let values = [1.0, 2.0, 4.0];
    let points = sweep(&config(), &ds, SweepAxis::K, &values).unwrap();
    assert_eq!(points.len(), 3);
    for (p, v) in points.iter().zip(values) {
        assert_eq!(p.config.k, v as usize);
        assert_eq!(p.aggregate.budget, config().budget);
    }
    let hp = sweep(&config(), &ds, SweepAxis::Horizon, &[2.0, 6.0]).unwrap();
    assert_eq!(hp[1].config.horizons, vec![0, 6]);
    assert_eq!(hp[1].aggregate.max_horizon, 6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sent_fraction_tracks_budget(b in 0.05f64..1.0, seed in 0u64..1000) {
        let ds = trace(5, 200, seed);
        let c = ExperimentConfig { budget: b, horizons: vec![0], w_init: 1, seed, ..config() };
        let out = run(&c, &ds).unwrap();
        for f in &out.aggregate.frequencies {
            // queue keeps the running send count within one message of tB, plus the forced first send
            prop_assert!((f - b).abs() <= 2.0 / 200.0 + 1e-12, "f={f} b={b}");
        }
    }
}
