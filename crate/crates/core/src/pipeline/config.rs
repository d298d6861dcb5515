use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::clustering::SimilarityKind;
use crate::error::{Error, Result};
use crate::transmission::TransmitterParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClusterMode {
    /// One independent clustering pipeline per resource on scalar values.
    #[default]
    PerResource,
    /// One pipeline on the joint `d`-dimensional vectors.
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransmitterKind {
    #[default]
    Adaptive,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClusteringKind {
    #[default]
    Dynamic,
    /// Offline: needs every node's full series before the run starts.
    Static,
    MinDistance,
}

macro_rules! str_enum {
    ($ty:ty { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok(Self::$variant),)+
                    other => Err(Error::Config(format!(
                        concat!("unknown ", stringify!($ty), " `{}`"), other
                    ))),
                }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $name,)+ })
            }
        }
    };
}

str_enum!(ClusterMode { PerResource => "per-resource", Joint => "joint" });
str_enum!(TransmitterKind { Adaptive => "adaptive", Uniform => "uniform" });
str_enum!(ClusteringKind { Dynamic => "dynamic", Static => "static", MinDistance => "min-distance" });

/// Every knob of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub budget: f64,
    pub v0: f64,
    pub gamma: f64,
    pub queue_projection: bool,
    pub k: usize,
    pub m: usize,
    pub m_prime: usize,
    /// Horizons to report; the objective covers `0..=max(horizons)`.
    pub horizons: Vec<usize>,
    pub window: usize,
    pub cluster_mode: ClusterMode,
    pub similarity: SimilarityKind,
    pub forecaster: String,
    pub order: usize,
    pub w_init: usize,
    pub w_retrain: usize,
    pub transmitter: TransmitterKind,
    pub clustering: ClusteringKind,
    /// Count forecasts issued before the first training in aggregates.
    pub include_warmup: bool,
    pub write_assignments: bool,
    pub write_forecasts: bool,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            budget: 0.3,
            v0: 1e-12,
            gamma: 0.65,
            queue_projection: false,
            k: 3,
            m: 1,
            m_prime: 5,
            horizons: vec![0, 1, 5, 10],
            window: 1,
            cluster_mode: ClusterMode::PerResource,
            similarity: SimilarityKind::Intersection,
            forecaster: "ar".to_string(),
            order: 3,
            w_init: 1000,
            w_retrain: 288,
            transmitter: TransmitterKind::Adaptive,
            clustering: ClusteringKind::Dynamic,
            include_warmup: false,
            write_assignments: false,
            write_forecasts: false,
            seed: 0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("bad boolean `{value}` for `{key}`"))),
    }
}

/// Comma-separated horizons, e.g. `0,1,5,10`.
pub fn parse_horizons(value: &str) -> Result<Vec<usize>> {
    let mut out: Vec<usize> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse("horizons", s))
        .collect::<Result<_>>()?;
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        return Err(Error::Config("horizons list is empty".to_string()));
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn transmitter_params(&self) -> TransmitterParams {
        TransmitterParams {
            budget: self.budget,
            v0: self.v0,
            gamma: self.gamma,
            project_queue: self.queue_projection,
        }
    }

    /// `H`: the largest reported horizon.
    pub fn max_horizon(&self) -> usize {
        self.horizons.iter().copied().max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.budget > 0.0 && self.budget <= 1.0) {
            return bad(format!("budget must lie in (0,1], got {}", self.budget));
        }
        if !(self.v0.is_finite() && self.v0 > 0.0) {
            return bad(format!("v0 must be positive, got {}", self.v0));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma must lie in (0,1), got {}", self.gamma));
        }
        if self.k == 0 {
            return bad("k must be at least 1".to_string());
        }
        if self.m == 0 {
            return bad("m must be at least 1".to_string());
        }
        if self.window == 0 {
            return bad("window must be at least 1".to_string());
        }
        if self.horizons.is_empty() {
            return bad("horizons list is empty".to_string());
        }
        if self.order == 0 {
            return bad("order must be at least 1".to_string());
        }
        if self.w_init == 0 || self.w_retrain == 0 {
            return bad("w_init and w_retrain must be at least 1".to_string());
        }
        Ok(())
    }

    /// Sets one field from its key/value text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "budget" => self.budget = parse(key, value)?,
            "v0" => self.v0 = parse(key, value)?,
            "gamma" => self.gamma = parse(key, value)?,
            "queue_projection" => self.queue_projection = parse_bool(key, value)?,
            "k" => self.k = parse(key, value)?,
            "m" => self.m = parse(key, value)?,
            "m_prime" => self.m_prime = parse(key, value)?,
            "horizons" => self.horizons = parse_horizons(value)?,
            "window" => self.window = parse(key, value)?,
            "cluster_mode" => self.cluster_mode = value.parse()?,
            "similarity" => self.similarity = value.parse()?,
            "forecaster" => self.forecaster = value.to_string(),
            "order" => self.order = parse(key, value)?,
            "w_init" => self.w_init = parse(key, value)?,
            "w_retrain" => self.w_retrain = parse(key, value)?,
            "transmitter" => self.transmitter = value.parse()?,
            "clustering" => self.clustering = value.parse()?,
            "include_warmup" => self.include_warmup = parse_bool(key, value)?,
            "write_assignments" => self.write_assignments = parse_bool(key, value)?,
            "write_forecasts" => self.write_forecasts = parse_bool(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            other => return Err(Error::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Field values in declaration order, formatted for [`set`](Self::set).
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let horizons = self
            .horizons
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",");
        vec![
            ("budget", self.budget.to_string()),
            ("v0", self.v0.to_string()),
            ("gamma", self.gamma.to_string()),
            ("queue_projection", self.queue_projection.to_string()),
            ("k", self.k.to_string()),
            ("m", self.m.to_string()),
            ("m_prime", self.m_prime.to_string()),
            ("horizons", horizons),
            ("window", self.window.to_string()),
            ("cluster_mode", self.cluster_mode.to_string()),
            ("similarity", self.similarity.to_string()),
            ("forecaster", self.forecaster.clone()),
            ("order", self.order.to_string()),
            ("w_init", self.w_init.to_string()),
            ("w_retrain", self.w_retrain.to_string()),
            ("transmitter", self.transmitter.to_string()),
            ("clustering", self.clustering.to_string()),
            ("include_warmup", self.include_warmup.to_string()),
            ("write_assignments", self.write_assignments.to_string()),
            ("write_forecasts", self.write_forecasts.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }

    /// Parses `key = value` lines over the defaults. Blank lines and `#`
    /// comments are ignored; unknown keys are errors.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut config = Self::default();
        config.apply_kv_str(text)?;
        Ok(config)
    }

    pub fn apply_kv_str(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_kv_str(&text)
    }

    pub fn to_kv_string(&self) -> String {
        self.to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_reference_setup() {
        let c = ExperimentConfig::default();
        assert_eq!((c.budget, c.v0, c.gamma), (0.3, 1e-12, 0.65));
        assert_eq!((c.k, c.m, c.m_prime), (3, 1, 5));
        assert_eq!((c.w_init, c.w_retrain, c.order), (1000, 288, 3));
        c.validate().unwrap();
    }

    #[test]
    fn kv_round_trip() {
        let mut c = ExperimentConfig::default();
        c.budget = 0.25;
        c.horizons = vec![0, 2, 7];
        c.cluster_mode = ClusterMode::Joint;
        c.clustering = ClusteringKind::MinDistance;
        c.similarity = SimilarityKind::Jaccard;
        c.seed = 12345678901234;
        let text = c.to_kv_string();
        assert_eq!(ExperimentConfig::from_kv_str(&text).unwrap(), c);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(ExperimentConfig::from_kv_str("bogus = 1").is_err());
        assert!(ExperimentConfig::from_kv_str("k = three").is_err());
        assert!(ExperimentConfig::from_kv_str("no equals sign").is_err());
        let c = ExperimentConfig::from_kv_str("# comment\n\nbudget = 1.5\n").unwrap();
        assert!(c.validate().is_err());
        let c = ExperimentConfig {
            m: 0,
            ..ExperimentConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn horizons_are_sorted_and_deduplicated() {
        assert_eq!(parse_horizons("5, 0,1,5").unwrap(), vec![0, 1, 5]);
        assert!(parse_horizons(" , ").is_err());
    }
}
