use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::run::{run, AggregateMetrics};
use crate::error::{Error, Result};
use crate::trace::TraceDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Budget,
    K,
    /// Sets the horizon list to `{0, h}` so the objective spans `0..=h`.
    Horizon,
    M,
    MPrime,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "B" | "budget" => Ok(Self::Budget),
            "K" | "k" => Ok(Self::K),
            "h" | "H" | "horizon" => Ok(Self::Horizon),
            "M" | "m" => Ok(Self::M),
            "M'" | "m'" | "mprime" | "m_prime" => Ok(Self::MPrime),
            other => Err(Error::Config(format!("unknown sweep axis `{other}`"))),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Budget => "B",
            Self::K => "K",
            Self::Horizon => "h",
            Self::M => "M",
            Self::MPrime => "M'",
        })
    }
}

impl SweepAxis {
    /// Copy of `template` with this axis set to `value`.
    pub fn apply(self, template: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
        let mut c = template.clone();
        let count = || -> Result<usize> {
            if value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
                Ok(value as usize)
            } else {
                Err(Error::Config(format!("axis {self} needs a non-negative integer, got {value}")))
            }
        };
        match self {
            Self::Budget => c.budget = value,
            Self::K => c.k = count()?,
            Self::Horizon => c.horizons = vec![0, count()?],
            Self::M => c.m = count()?,
            Self::MPrime => c.m_prime = count()?,
        }
        c.horizons.dedup();
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub config: ExperimentConfig,
    pub aggregate: AggregateMetrics,
}

/// One run per value, all sharing the template's seed.
pub fn sweep(template: &ExperimentConfig, dataset: &TraceDataset, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".to_string()));
    }
    let configs = values
        .iter()
        .map(|&v| axis.apply(template, v))
        .collect::<Result<Vec<_>>>()?;
    configs
        .into_par_iter()
        .zip(values.par_iter())
        .map(|(config, &value)| {
            let out = run(&config, dataset)?;
            Ok(SweepPoint {
                value,
                config,
                aggregate: out.aggregate,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_names() {
        assert_eq!("B".parse::<SweepAxis>().unwrap(), SweepAxis::Budget);
        assert_eq!("mprime".parse::<SweepAxis>().unwrap(), SweepAxis::MPrime);
        assert!("q".parse::<SweepAxis>().is_err());
    }

    #[test]
    fn apply_sets_one_field() {
        let t = ExperimentConfig::default();
        assert_eq!(SweepAxis::K.apply(&t, 5.0).unwrap().k, 5);
        assert_eq!(SweepAxis::Horizon.apply(&t, 7.0).unwrap().horizons, vec![0, 7]);
        assert_eq!(SweepAxis::Horizon.apply(&t, 0.0).unwrap().horizons, vec![0]);
        assert!(SweepAxis::K.apply(&t, 2.5).is_err());
        assert!(SweepAxis::Budget.apply(&t, 0.0).is_err());
    }
}
