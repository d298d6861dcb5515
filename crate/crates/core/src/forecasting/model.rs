//! Pluggable centroid forecasters.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use log::warn;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Trains a model on a centroid history.
pub trait Forecaster: Send + Sync + fmt::Debug {
    fn kind(&self) -> &str;

    /// Fits on `series` (all values up to and including step `trained_at`).
    fn fit(&self, series: &[f64], trained_at: usize) -> Result<Box<dyn ForecasterModel>>;
}

/// A trained model. Forecasts condition on the full, current history so the
/// transient state tracks every new centroid without refitting.
pub trait ForecasterModel: Send + Sync + fmt::Debug {
    fn kind(&self) -> &str;

    fn trained_at(&self) -> usize;

    /// Forecasts for horizons `1..=max_h`; element `h - 1` is horizon `h`.
    fn forecast_path(&self, history: &[f64], max_h: usize) -> Result<Vec<f64>>;

    fn forecast(&self, history: &[f64], h: usize) -> Result<f64> {
        if h == 0 {
            return Err(Error::invalid("forecast horizon must be at least 1"));
        }
        Ok(*self.forecast_path(history, h)?.last().expect("h >= 1"))
    }

    /// True when fitting failed and the model degraded to sample-and-hold.
    fn degraded(&self) -> bool {
        false
    }
}

fn last_value(history: &[f64]) -> Result<f64> {
    history
        .last()
        .copied()
        .ok_or_else(|| Error::InsufficientData("empty centroid history".to_string()))
}

/// Repeats the latest centroid for every horizon.
#[derive(Debug, Clone, Copy, Default)]
pub struct SampleAndHold;

#[derive(Debug, Clone, Copy)]
pub struct HoldModel {
    trained_at: usize,
}

impl Forecaster for SampleAndHold {
    fn kind(&self) -> &str {
        "sample-and-hold"
    }

    fn fit(&self, series: &[f64], trained_at: usize) -> Result<Box<dyn ForecasterModel>> {
        if series.is_empty() {
            return Err(Error::InsufficientData("sample-and-hold needs one value".to_string()));
        }
        Ok(Box::new(HoldModel { trained_at }))
    }
}

impl HoldModel {
    pub fn new(trained_at: usize) -> Self {
        Self { trained_at }
    }
}

impl ForecasterModel for HoldModel {
    fn kind(&self) -> &str {
        "sample-and-hold"
    }

    fn trained_at(&self) -> usize {
        self.trained_at
    }

    fn forecast_path(&self, history: &[f64], max_h: usize) -> Result<Vec<f64>> {
        if max_h == 0 {
            return Err(Error::invalid("forecast horizon must be at least 1"));
        }
        Ok(vec![last_value(history)?; max_h])
    }
}

/// AR(p) with intercept, fitted by least squares on the lag matrix.
#[derive(Debug, Clone, Copy)]
pub struct Autoregressive {
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArModel {
    pub intercept: f64,
    /// `coefficients[l]` multiplies the value `l + 1` steps back.
    pub coefficients: Vec<f64>,
    pub trained_at: usize,
    /// Set when the solve failed and forecasts fall back to sample-and-hold.
    pub fallback: bool,
}

impl Autoregressive {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("AR order must be at least 1"));
        }
        Ok(Self { order })
    }

    pub fn fit_model(&self, series: &[f64], trained_at: usize) -> Result<ArModel> {
        let p = self.order;
        if series.len() < p + 1 {
            return Err(Error::InsufficientData(format!(
                "AR({p}) needs at least {} values, got {}",
                p + 1,
                series.len()
            )));
        }
        let rows = series.len() - p;
        let design = DMatrix::from_fn(rows, p + 1, |r, c| {
            if c == 0 {
                1.0
            } else {
                series[r + p - c]
            }
        });
        let target = DVector::from_iterator(rows, series[p..].iter().copied());

        // Minimum-norm least squares: rank-deficient lag matrices (constant
        // or pure sinusoidal centroids) still get an exact in-sample fit.
        let svd = design.svd(true, true);
        let max_sv = svd.singular_values.max();
        let eps = max_sv * 1e-10;
        let solution = if max_sv > 0.0 {
            svd.solve(&target, eps).ok()
        } else {
            None
        };
        match solution.filter(|s| s.iter().all(|v| v.is_finite())) {
            Some(beta) => Ok(ArModel {
                intercept: beta[0],
                coefficients: beta.iter().skip(1).copied().collect(),
                trained_at,
                fallback: false,
            }),
            None => {
                warn!("AR({p}) fit at step {trained_at} is singular; holding last centroid");
                Ok(ArModel {
                    intercept: 0.0,
                    coefficients: vec![0.0; p],
                    trained_at,
                    fallback: true,
                })
            }
        }
    }
}

impl Forecaster for Autoregressive {
    fn kind(&self) -> &str {
        "ar"
    }

    fn fit(&self, series: &[f64], trained_at: usize) -> Result<Box<dyn ForecasterModel>> {
        Ok(Box::new(self.fit_model(series, trained_at)?))
    }
}

impl ForecasterModel for ArModel {
    fn kind(&self) -> &str {
        "ar"
    }

    fn trained_at(&self) -> usize {
        self.trained_at
    }

    fn degraded(&self) -> bool {
        self.fallback
    }

    fn forecast_path(&self, history: &[f64], max_h: usize) -> Result<Vec<f64>> {
        if max_h == 0 {
            return Err(Error::invalid("forecast horizon must be at least 1"));
        }
        let p = self.coefficients.len();
        if self.fallback || history.len() < p {
            return Ok(vec![last_value(history)?; max_h]);
        }
        // lags[0] is the most recent value
        let mut lags: Vec<f64> = history.iter().rev().take(p).copied().collect();
        let mut path = Vec::with_capacity(max_h);
        for _ in 0..max_h {
            let next = self.intercept
                + self
                    .coefficients
                    .iter()
                    .zip(&lags)
                    .map(|(a, x)| a * x)
                    .sum::<f64>();
            path.push(next);
            lags.rotate_right(1);
            lags[0] = next;
        }
        Ok(path)
    }
}

type Factory = Arc<dyn Fn(usize) -> Result<Box<dyn Forecaster>> + Send + Sync>;

/// Forecasters by name. `sample-and-hold` and `ar` are built in; callers may
/// register their own.
#[derive(Clone)]
pub struct ForecasterRegistry {
    factories: BTreeMap<String, Factory>,
}

impl fmt::Debug for ForecasterRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.factories.keys()).finish()
    }
}

impl Default for ForecasterRegistry {
    fn default() -> Self {
        let mut registry = Self {
            factories: BTreeMap::new(),
        };
        registry.register("sample-and-hold", |_| Ok(Box::new(SampleAndHold)));
        registry.register("ar", |order| Ok(Box::new(Autoregressive::new(order)?)));
        registry
    }
}

impl ForecasterRegistry {
    pub fn register<F>(&mut self, kind: &str, factory: F)
    where
        F: Fn(usize) -> Result<Box<dyn Forecaster>> + Send + Sync + 'static,
    {
        self.factories.insert(kind.to_string(), Arc::new(factory));
    }

    pub fn kinds(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn build(&self, kind: &str, order: usize) -> Result<Box<dyn Forecaster>> {
        let factory = self
            .factories
            .get(kind)
            .ok_or_else(|| Error::Config(format!("unknown forecaster `{kind}`")))?;
        factory(order)
    }

    /// Builds and fits in one go.
    pub fn fit(&self, kind: &str, order: usize, series: &[f64], trained_at: usize) -> Result<Box<dyn ForecasterModel>> {
        self.build(kind, order)?.fit(series, trained_at)
    }
}
