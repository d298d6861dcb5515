//! Per-node utilization traces: the canonical CSV format, ingestion with gap
//! repair and normalization, and a seeded synthetic generator with known
//! ground-truth groups.
//!
//! The canonical file is long-form CSV with header `t,node,<resource...>` and
//! one row per `(t, node)`. Rows must be ordered by non-decreasing `t`.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Dense `(time step, node, resource)` grid of normalized utilizations.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceDataset {
    n_steps: usize,
    n_nodes: usize,
    resource_names: Vec<String>,
    step_seconds: f64,
    values: Vec<f64>,
}

impl TraceDataset {
    /// Builds a dataset from a row-major `(t, node, resource)` buffer.
    pub fn new(
        n_steps: usize,
        n_nodes: usize,
        resource_names: Vec<String>,
        step_seconds: f64,
        values: Vec<f64>,
    ) -> Result<Self> {
        if n_steps == 0 || n_nodes == 0 || resource_names.is_empty() {
            return Err(Error::invalid(format!(
                "dataset dimensions must be positive (steps={n_steps}, nodes={n_nodes}, resources={})",
                resource_names.len()
            )));
        }
        if !(step_seconds.is_finite() && step_seconds > 0.0) {
            return Err(Error::invalid(format!(
                "step_seconds must be positive, got {step_seconds}"
            )));
        }
        let expected = n_steps * n_nodes * resource_names.len();
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: values.len(),
            });
        }
        if let Some(pos) = values
            .iter()
            .position(|v| !(v.is_finite() && (0.0..=1.0).contains(v)))
        {
            let d = resource_names.len();
            return Err(Error::invalid(format!(
                "value {} at (t={}, node={}, resource={}) is outside [0,1]",
                values[pos],
                pos / (n_nodes * d),
                (pos / d) % n_nodes,
                resource_names[pos % d]
            )));
        }
        Ok(Self {
            n_steps,
            n_nodes,
            resource_names,
            step_seconds,
            values,
        })
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_resources(&self) -> usize {
        self.resource_names.len()
    }

    pub fn step_seconds(&self) -> f64 {
        self.step_seconds
    }

    pub fn resource_names(&self) -> &[String] {
        &self.resource_names
    }

    pub fn resource_index(&self, name: &str) -> Option<usize> {
        self.resource_names.iter().position(|r| r == name)
    }

    /// Value at 0-based step `t`.
    pub fn value(&self, t: usize, node: usize, resource: usize) -> f64 {
        self.values[self.offset(t, node) + resource]
    }

    /// The `d`-dimensional measurement of `node` at 0-based step `t`.
    pub fn measurement(&self, t: usize, node: usize) -> &[f64] {
        let start = self.offset(t, node);
        &self.values[start..start + self.n_resources()]
    }

    /// All nodes' measurements at step `t`, `N × d` row-major.
    pub fn step(&self, t: usize) -> &[f64] {
        let width = self.n_nodes * self.n_resources();
        &self.values[t * width..(t + 1) * width]
    }

    pub fn node_series(&self, node: usize, resource: usize) -> Vec<f64> {
        (0..self.n_steps)
            .map(|t| self.value(t, node, resource))
            .collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Keeps only the first `n_steps` steps.
    pub fn truncated(&self, n_steps: usize) -> Result<Self> {
        if n_steps == 0 || n_steps > self.n_steps {
            return Err(Error::invalid(format!(
                "cannot truncate {} steps to {n_steps}",
                self.n_steps
            )));
        }
        let width = self.n_nodes * self.n_resources();
        Self::new(
            n_steps,
            self.n_nodes,
            self.resource_names.clone(),
            self.step_seconds,
            self.values[..n_steps * width].to_vec(),
        )
    }

    fn offset(&self, t: usize, node: usize) -> usize {
        (t * self.n_nodes + node) * self.n_resources()
    }
}

/// How raw resource columns are mapped into `[0, 1]` on ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Values must already lie in `[0, 1]`; anything else is a range error.
    #[default]
    Strict,
    /// Values are clamped into `[0, 1]`.
    Clamp,
    /// Each resource column is divided by its maximum over the file.
    /// With `pre_clamp`, negative readings are raised to zero first.
    MaxDivide { pre_clamp: bool },
}

/// Column mapping for [`load_csv`].
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSchema {
    pub time_column: String,
    pub node_column: String,
    /// Resource columns in output order; `None` takes every other column.
    pub resource_columns: Option<Vec<String>>,
    pub normalization: Normalization,
    /// Overrides the step length inferred from the time column.
    pub step_seconds: Option<f64>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            time_column: "t".to_string(),
            node_column: "node".to_string(),
            resource_columns: None,
            normalization: Normalization::Strict,
            step_seconds: None,
        }
    }
}

struct Observation {
    line: u64,
    values: Vec<f64>,
}

/// Loads a long-form trace and returns a dense, normalized grid.
///
/// Distinct time values become consecutive steps; node ids are remapped to
/// `0..N` in order of first appearance. A node missing at some step carries
/// its previous value forward (leading gaps take its first observation).
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<TraceDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(parse_err(1, "empty file".to_string()));
    }
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(1, format!("missing column `{name}`")))
    };
    let time_col = column(&schema.time_column)?;
    let node_col = column(&schema.node_column)?;
    let resource_names: Vec<String> = match &schema.resource_columns {
        Some(cols) => cols.clone(),
        None => headers
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != time_col && *i != node_col)
            .map(|(_, h)| h.to_string())
            .collect(),
    };
    if resource_names.is_empty() {
        return Err(parse_err(1, "no resource columns".to_string()));
    }
    let resource_cols = resource_names
        .iter()
        .map(|r| column(r))
        .collect::<Result<Vec<_>>>()?;

    let mut times: Vec<f64> = Vec::new();
    let mut node_ids: HashMap<String, usize> = HashMap::new();
    // steps[s] maps node index -> observation
    let mut steps: Vec<HashMap<usize, Observation>> = Vec::new();

    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |idx: usize| record.get(idx).unwrap_or("");
        let time: f64 = field(time_col)
            .parse()
            .map_err(|_| parse_err(line, format!("bad time value `{}`", field(time_col))))?;
        if !time.is_finite() {
            return Err(parse_err(line, format!("non-finite time value `{time}`")));
        }
        let node_key = field(node_col);
        if node_key.is_empty() {
            return Err(parse_err(line, "empty node id".to_string()));
        }
        let mut values = Vec::with_capacity(resource_cols.len());
        for (&col, name) in resource_cols.iter().zip(&resource_names) {
            let raw = field(col);
            let v: f64 = raw
                .parse()
                .map_err(|_| parse_err(line, format!("bad value `{raw}` in column `{name}`")))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("non-finite value in column `{name}`")));
            }
            values.push(v);
        }

        match times.last() {
            Some(&last) if time < last => {
                return Err(parse_err(
                    line,
                    format!("time {time} goes backwards (previous {last})"),
                ));
            }
            Some(&last) if time == last => {}
            _ => {
                times.push(time);
                steps.push(HashMap::new());
            }
        }
        let next_id = node_ids.len();
        let node = *node_ids.entry(node_key.to_string()).or_insert(next_id);
        let step = steps.last_mut().expect("a step was pushed above");
        if let Some(prev) = step.get(&node) {
            return Err(parse_err(
                line,
                format!(
                    "duplicate (t={time}, node={node_key}); first seen on line {}",
                    prev.line
                ),
            ));
        }
        step.insert(node, Observation { line, values });
    }

    if steps.is_empty() {
        return Err(parse_err(1, "empty file: no data rows".to_string()));
    }

    let n_steps = steps.len();
    let n_nodes = node_ids.len();
    let d = resource_names.len();

    // Normalization is decided before gap filling so range errors name the
    // offending input line.
    let mut column_max = vec![0.0f64; d];
    for step in &steps {
        for obs in step.values() {
            for (r, v) in obs.values.iter().enumerate() {
                column_max[r] = column_max[r].max(*v);
            }
        }
    }
    for step in steps.iter_mut() {
        for obs in step.values_mut() {
            for (r, v) in obs.values.iter_mut().enumerate() {
                *v = match schema.normalization {
                    Normalization::Strict => *v,
                    Normalization::Clamp => v.clamp(0.0, 1.0),
                    Normalization::MaxDivide { pre_clamp } => {
                        let x = if pre_clamp { v.max(0.0) } else { *v };
                        if column_max[r] > 0.0 {
                            x / column_max[r]
                        } else {
                            x
                        }
                    }
                };
                if !(0.0..=1.0).contains(v) {
                    return Err(parse_err(
                        obs.line,
                        format!(
                            "value {} in column `{}` outside [0,1]",
                            v, resource_names[r]
                        ),
                    ));
                }
            }
        }
    }

    let mut first_seen: Vec<Option<&[f64]>> = vec![None; n_nodes];
    for step in &steps {
        for (&node, obs) in step {
            if first_seen[node].is_none() {
                first_seen[node] = Some(&obs.values);
            }
        }
    }
    let mut values = Vec::with_capacity(n_steps * n_nodes * d);
    let mut carry: Vec<&[f64]> = first_seen
        .into_iter()
        .map(|o| o.expect("every node id came from some row"))
        .collect();
    for step in &steps {
        for (node, held) in carry.iter_mut().enumerate() {
            if let Some(obs) = step.get(&node) {
                *held = &obs.values;
            }
            values.extend_from_slice(held);
        }
    }

    let step_seconds = match schema.step_seconds {
        Some(s) => s,
        None if times.len() >= 2 && times[1] > times[0] => times[1] - times[0],
        None => 1.0,
    };
    TraceDataset::new(n_steps, n_nodes, resource_names, step_seconds, values)
}

/// Writes the canonical long-form CSV.
///
/// `t` is written as `step × step_seconds` and values in their shortest
/// round-trip decimal form, so [`load_csv`] with the default schema
/// reproduces the dataset exactly.
pub fn write_csv(dataset: &TraceDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    write!(out, "t,node").map_err(io)?;
    for name in dataset.resource_names() {
        write!(out, ",{name}").map_err(io)?;
    }
    writeln!(out).map_err(io)?;
    for t in 0..dataset.n_steps() {
        let time = t as f64 * dataset.step_seconds();
        for node in 0..dataset.n_nodes() {
            write!(out, "{time},{node}").map_err(io)?;
            for v in dataset.measurement(t, node) {
                write!(out, ",{v}").map_err(io)?;
            }
            writeln!(out).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

/// Shape of each latent group's base signal, in units of the level spacing
/// `1/G` between groups.
///
/// A group's signal for one resource is
/// `level + amplitude·sin(2πt/period + phase) + walk(t) + jump(t)` where
/// `walk` is a Gaussian random walk reflected inside `±walk_bound` and
/// `jump` is a piecewise-constant level redrawn uniformly in `±jump_bound`
/// with probability `jump_probability` per step. The defaults keep groups
/// from ever crossing (total excursion below half the spacing).
#[derive(Debug, Clone, PartialEq)]
pub struct SignalShape {
    pub amplitude: f64,
    pub period_min: f64,
    pub period_max: f64,
    pub walk_std: f64,
    pub walk_bound: f64,
    pub jump_probability: f64,
    pub jump_bound: f64,
}

impl Default for SignalShape {
    fn default() -> Self {
        Self {
            amplitude: 0.15,
            period_min: 50.0,
            period_max: 300.0,
            walk_std: 0.01,
            walk_bound: 0.05,
            jump_probability: 0.002,
            jump_bound: 0.05,
        }
    }
}

impl SignalShape {
    /// Frequent, large level jumps. Groups may overlap during bursts.
    pub fn bursty() -> Self {
        Self {
            jump_probability: 0.02,
            jump_bound: 0.3,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_nodes: usize,
    pub n_steps: usize,
    pub n_resources: usize,
    pub n_groups: usize,
    pub switch_probability: f64,
    pub noise_std: f64,
    pub seed: u64,
    pub shape: SignalShape,
}

impl SyntheticSpec {
    pub fn new(n_nodes: usize, n_steps: usize, n_groups: usize, seed: u64) -> Self {
        Self {
            n_nodes,
            n_steps,
            n_resources: 1,
            n_groups,
            switch_probability: 0.0,
            noise_std: 0.0,
            seed,
            shape: SignalShape::default(),
        }
    }
}

/// Synthetic trace plus the latent group of every node at every step.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTrace {
    pub dataset: TraceDataset,
    /// `ground_truth[t][node]` is the latent group index.
    pub ground_truth: Vec<Vec<usize>>,
}

struct GroupSignal {
    level: f64,
    period: f64,
    phase: f64,
    walk: f64,
    jump: f64,
}

/// Generates a trace whose nodes follow `G` latent group signals.
///
/// Node `i` starts in group `i mod G`. Each step every node independently
/// moves to a uniformly chosen other group with `switch_probability`.
/// Output is a pure function of `spec`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticTrace> {
    if spec.n_nodes == 0 || spec.n_steps == 0 || spec.n_resources == 0 || spec.n_groups == 0 {
        return Err(Error::invalid(
            "synthetic dimensions (nodes, steps, resources, groups) must be positive",
        ));
    }
    if spec.n_groups > spec.n_nodes {
        return Err(Error::invalid(format!(
            "groups ({}) exceed nodes ({})",
            spec.n_groups, spec.n_nodes
        )));
    }
    if !(0.0..1.0).contains(&spec.switch_probability) {
        return Err(Error::invalid(format!(
            "switch_probability must lie in [0,1), got {}",
            spec.switch_probability
        )));
    }
    if !(spec.noise_std.is_finite() && spec.noise_std >= 0.0) {
        return Err(Error::invalid(format!(
            "noise_std must be non-negative, got {}",
            spec.noise_std
        )));
    }
    let shape = &spec.shape;
    if !(shape.period_min > 0.0 && shape.period_max >= shape.period_min) {
        return Err(Error::invalid("signal period range must be positive and ordered"));
    }
    if !(0.0..=1.0).contains(&shape.jump_probability) {
        return Err(Error::invalid("jump_probability must lie in [0,1]"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let g = spec.n_groups;
    let spacing = 1.0 / g as f64;
    let walk_noise = Normal::new(0.0, shape.walk_std * spacing)
        .map_err(|e| Error::invalid(format!("walk_std: {e}")))?;
    let node_noise = Normal::new(0.0, spec.noise_std)
        .map_err(|e| Error::invalid(format!("noise_std: {e}")))?;
    let walk_bound = shape.walk_bound * spacing;
    let jump_bound = shape.jump_bound * spacing;
    let amplitude = shape.amplitude * spacing;

    let mut signals: Vec<Vec<GroupSignal>> = (0..g)
        .map(|group| {
            (0..spec.n_resources)
                .map(|_| GroupSignal {
                    level: (group as f64 + 0.5) * spacing,
                    period: rng.random_range(shape.period_min..=shape.period_max),
                    phase: rng.random_range(0.0..TAU),
                    walk: 0.0,
                    jump: 0.0,
                })
                .collect()
        })
        .collect();

    let mut membership: Vec<usize> = (0..spec.n_nodes).map(|i| i % g).collect();
    let mut ground_truth = Vec::with_capacity(spec.n_steps);
    let mut values = Vec::with_capacity(spec.n_steps * spec.n_nodes * spec.n_resources);
    let mut base = vec![0.0; g * spec.n_resources];

    for t in 0..spec.n_steps {
        if t > 0 && g > 1 {
            for group in membership.iter_mut() {
                if rng.random::<f64>() < spec.switch_probability {
                    let other = rng.random_range(0..g - 1);
                    *group = if other >= *group { other + 1 } else { other };
                }
            }
        }
        for (group, per_resource) in signals.iter_mut().enumerate() {
            for (r, s) in per_resource.iter_mut().enumerate() {
                s.walk += walk_noise.sample(&mut rng);
                if s.walk > walk_bound {
                    s.walk = 2.0 * walk_bound - s.walk;
                } else if s.walk < -walk_bound {
                    s.walk = -2.0 * walk_bound - s.walk;
                }
                s.walk = s.walk.clamp(-walk_bound, walk_bound);
                if rng.random::<f64>() < shape.jump_probability {
                    s.jump = if jump_bound > 0.0 {
                        rng.random_range(-jump_bound..=jump_bound)
                    } else {
                        0.0
                    };
                }
                base[group * spec.n_resources + r] = s.level
                    + amplitude * (TAU * t as f64 / s.period + s.phase).sin()
                    + s.walk
                    + s.jump;
            }
        }
        for &group in &membership {
            for r in 0..spec.n_resources {
                let noise = node_noise.sample(&mut rng);
                values.push((base[group * spec.n_resources + r] + noise).clamp(0.0, 1.0));
            }
        }
        ground_truth.push(membership.clone());
    }

    let resource_names = default_resource_names(spec.n_resources);
    let dataset = TraceDataset::new(spec.n_steps, spec.n_nodes, resource_names, 1.0, values)?;
    Ok(SyntheticTrace {
        dataset,
        ground_truth,
    })
}

/// `cpu`, `mem`, then `r2`, `r3`, ...
pub fn default_resource_names(d: usize) -> Vec<String> {
    (0..d)
        .map(|r| match r {
            0 => "cpu".to_string(),
            1 => "mem".to_string(),
            _ => format!("r{r}"),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_file(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut f = File::create(&path).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        path
    }

    #[test]
    fn constant_csv_loads_densely() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            &dir,
            "c.csv",
            "t,node,cpu\n0,a,0.5\n0,b,0.5\n1,a,0.5\n1,b,0.5\n2,a,0.5\n2,b,0.5\n",
        );
        let ds = load_csv(&path, &CsvSchema::default()).unwrap();
        assert_eq!((ds.n_steps(), ds.n_nodes(), ds.n_resources()), (3, 2, 1));
        assert!(ds.values().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn out_of_range_value_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "r.csv", "t,node,cpu\n0,0,0.2\n0,1,1.7\n");
        let err = load_csv(&path, &CsvSchema::default()).unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("1.7"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn clamp_mode_accepts_out_of_range() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "r.csv", "t,node,cpu\n0,0,-0.2\n0,1,1.7\n");
        let schema = CsvSchema {
            normalization: Normalization::Clamp,
            ..CsvSchema::default()
        };
        let ds = load_csv(&path, &schema).unwrap();
        assert_eq!(ds.values(), &[0.0, 1.0]);
    }

    #[test]
    fn max_division_matches_hand_recomputation() {
        // raw core counts; column max cpu = 16, mem = 64
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            &dir,
            "m.csv",
            "t,node,cpu,mem\n0,0,4,16\n0,1,16,8\n1,0,2,64\n1,1,8,32\n2,0,12,48\n",
        );
        let schema = CsvSchema {
            normalization: Normalization::MaxDivide { pre_clamp: true },
            ..CsvSchema::default()
        };
        let ds = load_csv(&path, &schema).unwrap();
        // node 1 is missing at t=2 and carries (8/16, 32/64) forward
        let expected = [
            0.25, 0.25, 1.0, 0.125, //
            0.125, 1.0, 0.5, 0.5, //
            0.75, 0.75, 0.5, 0.5,
        ];
        assert_eq!(ds.values(), &expected);
    }

    #[test]
    fn max_division_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let raw = write_file(&dir, "a.csv", "t,node,cpu\n0,0,3\n0,1,6\n1,0,1.5\n1,1,4.5\n");
        let schema = CsvSchema {
            normalization: Normalization::MaxDivide { pre_clamp: false },
            ..CsvSchema::default()
        };
        let once = load_csv(&raw, &schema).unwrap();
        let out = dir.path().join("b.csv");
        write_csv(&once, &out).unwrap();
        let twice = load_csv(&out, &schema).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn leading_gap_takes_first_observation() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "g.csv", "t,node,cpu\n0,a,0.1\n1,a,0.2\n1,b,0.9\n2,b,0.7\n");
        let ds = load_csv(&path, &CsvSchema::default()).unwrap();
        assert_eq!(ds.node_series(0, 0), vec![0.1, 0.2, 0.2]);
        assert_eq!(ds.node_series(1, 0), vec![0.9, 0.9, 0.7]);
    }

    #[test]
    fn malformed_row_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "bad.csv", "t,node,cpu\n0,0,0.1\n1,0,abc\n");
        let err = load_csv(&path, &CsvSchema::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn duplicate_and_backwards_rows_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let dup = write_file(&dir, "d.csv", "t,node,cpu\n0,0,0.1\n0,0,0.2\n");
        let err = load_csv(&dup, &CsvSchema::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(err.to_string().contains("duplicate"));

        let back = write_file(&dir, "b.csv", "t,node,cpu\n1,0,0.1\n0,0,0.2\n");
        let err = load_csv(&back, &CsvSchema::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn empty_inputs_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let empty = write_file(&dir, "e.csv", "");
        assert!(load_csv(&empty, &CsvSchema::default()).is_err());
        let header_only = write_file(&dir, "h.csv", "t,node,cpu\n");
        assert!(load_csv(&header_only, &CsvSchema::default()).is_err());
        assert!(TraceDataset::new(0, 3, vec!["cpu".into()], 1.0, vec![]).is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_csv("/nonexistent/trace.csv", &CsvSchema::default()).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("/nonexistent/trace.csv"));
    }

    #[test]
    fn small_round_trip() {
        let values: Vec<f64> = (0..18).map(|i| i as f64 / 17.0).collect();
        let ds = TraceDataset::new(3, 3, default_resource_names(2), 300.0, values).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.csv");
        write_csv(&ds, &path).unwrap();
        assert_eq!(load_csv(&path, &CsvSchema::default()).unwrap(), ds);
    }

    #[test]
    fn synthetic_single_group_without_noise_is_identical_across_nodes() {
        let spec = SyntheticSpec::new(5, 200, 1, 9);
        let trace = generate_synthetic(&spec).unwrap();
        let ds = &trace.dataset;
        for t in 0..ds.n_steps() {
            let first = ds.value(t, 0, 0);
            assert!((1..5).all(|i| ds.value(t, i, 0) == first));
        }
    }

    #[test]
    fn synthetic_is_deterministic_and_seed_sensitive() {
        let mut spec = SyntheticSpec::new(10, 300, 3, 42);
        spec.noise_std = 0.05;
        spec.switch_probability = 0.01;
        spec.n_resources = 2;
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        assert_eq!(a, b);
        spec.seed = 43;
        assert_ne!(generate_synthetic(&spec).unwrap().dataset, a.dataset);
    }

    #[test]
    fn synthetic_rejects_more_groups_than_nodes() {
        let spec = SyntheticSpec::new(2, 10, 3, 0);
        assert!(generate_synthetic(&spec).is_err());
    }

    #[test]
    fn default_shape_keeps_groups_apart() {
        let spec = SyntheticSpec::new(6, 2000, 3, 5);
        let trace = generate_synthetic(&spec).unwrap();
        let ds = &trace.dataset;
        for t in 0..ds.n_steps() {
            let mut by_group = [f64::NAN; 3];
            for i in 0..3 {
                by_group[trace.ground_truth[t][i]] = ds.value(t, i, 0);
            }
            assert!(by_group[0] < by_group[1] && by_group[1] < by_group[2]);
        }
    }
}
