//! The trained model: a set of static planets plus the global constants that
//! govern training and prediction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::PlanetIndex;

/// Distance function used everywhere a planet is compared with a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
}

impl Metric {
    /// Checked distance between two vectors.
    pub fn distance(self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        check_finite(a)?;
        check_finite(b)?;
        Ok(self.eval(a, b))
    }

    /// Distance without validation. Callers guarantee equal lengths.
    #[inline]
    pub(crate) fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "manhattan" => Ok(Metric::Manhattan),
            other => Err(Error::InvalidConfig(format!("unknown metric `{other}`"))),
        }
    }
}

/// Spread of a planet's Gaussian as a function of its radius, used by the
/// probabilistic predictor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaFn {
    Identity,
    #[default]
    Square,
}

impl SigmaFn {
    #[inline]
    pub fn apply(self, radius: f64) -> f64 {
        match self {
            SigmaFn::Identity => radius,
            SigmaFn::Square => radius * radius,
        }
    }
}

pub(crate) fn check_finite(v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Hyperparameters and numeric-safety tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniverseConfig {
    /// Radius given to every newly created planet.
    pub initial_radius: f64,
    /// Length of each normalized step of the test mass.
    pub step_fraction: f64,
    /// Number of force-integration steps.
    pub iteration_count: u32,
    pub distance_metric: Metric,
    /// Clamp for distances and denominators near zero.
    pub epsilon_distance: f64,
    /// Check for capture after every simulation step instead of only at the end.
    pub early_stop_on_collision: bool,
    pub sigma: SigmaFn,
}

impl Default for UniverseConfig {
    fn default() -> Self {
        UniverseConfig {
            initial_radius: 50.0,
            step_fraction: 0.01,
            iteration_count: 100,
            distance_metric: Metric::Euclidean,
            epsilon_distance: 1e-9,
            early_stop_on_collision: false,
            sigma: SigmaFn::Square,
        }
    }
}

impl UniverseConfig {
    pub fn new(initial_radius: f64, step_fraction: f64, iteration_count: u32) -> Self {
        UniverseConfig {
            initial_radius,
            step_fraction,
            iteration_count,
            ..Default::default()
        }
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.distance_metric = metric;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("initial_radius", self.initial_radius)?;
        positive("step_fraction", self.step_fraction)?;
        positive("epsilon_distance", self.epsilon_distance)?;
        if self.iteration_count == 0 {
            return Err(Error::InvalidConfig("iteration_count must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Planet {
    pub id: u64,
    pub class_label: u32,
    pub mass: f64,
    pub radius: f64,
    pub position: Vec<f64>,
}

/// A weighted training vector. The mass rates how much the sample counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridSample {
    pub position: Vec<f64>,
    pub mass: f64,
    pub class_label: u32,
}

impl HybridSample {
    pub fn new(position: Vec<f64>, mass: f64, class_label: u32) -> Self {
        HybridSample {
            position,
            mass,
            class_label,
        }
    }

    /// Unit-mass sample.
    pub fn unit(position: Vec<f64>, class_label: u32) -> Self {
        Self::new(position, 1.0, class_label)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::NonPositiveMass(self.mass));
        }
        check_finite(&self.position)
    }
}

/// Planet set plus global constants. Planet ids are dense: the planet with id
/// `k` is the `k`-th planet created.
#[derive(Debug, Clone)]
pub struct Universe {
    pub(crate) config: UniverseConfig,
    pub(crate) planets: Vec<Planet>,
    pub(crate) dimension: Option<usize>,
    pub(crate) index: PlanetIndex,
}

impl PartialEq for Universe {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.dimension == other.dimension
            && self.planets == other.planets
    }
}

impl Universe {
    pub fn new(config: UniverseConfig) -> Result<Self> {
        config.validate()?;
        Ok(Universe {
            config,
            planets: Vec::new(),
            dimension: None,
            index: PlanetIndex::new(),
        })
    }

    /// Reassemble a universe from persisted parts, rebuilding the index.
    /// Ids must be `0..planets.len()` in order.
    pub fn from_parts(config: UniverseConfig, dimension: Option<usize>, planets: Vec<Planet>) -> Result<Self> {
        config.validate()?;
        if dimension.is_none() && !planets.is_empty() {
            return Err(Error::InvalidConfig("planets present but dimension unset".into()));
        }
        for (slot, p) in planets.iter().enumerate() {
            if p.id != slot as u64 {
                return Err(Error::InvalidConfig(format!(
                    "planet ids must be dense and ascending; expected {slot}, found {}",
                    p.id
                )));
            }
            let d = dimension.unwrap_or(0);
            if p.position.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.position.len(),
                });
            }
            check_finite(&p.position)?;
            if !(p.mass > 0.0 && p.radius > 0.0 && p.mass.is_finite() && p.radius.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "planet {} must have positive finite mass and radius",
                    p.id
                )));
            }
        }
        let index = PlanetIndex::build(dimension, &planets);
        Ok(Universe {
            config,
            planets,
            dimension,
            index,
        })
    }

    pub fn config(&self) -> &UniverseConfig {
        &self.config
    }

    /// Replace prediction-time settings. Training constants (`initial_radius`)
    /// are only meaningful before the first sample.
    pub fn config_mut(&mut self) -> &mut UniverseConfig {
        &mut self.config
    }

    pub fn planets(&self) -> &[Planet] {
        &self.planets
    }

    pub fn planet(&self, id: u64) -> Option<&Planet> {
        self.planets.get(id as usize)
    }

    pub fn dimension(&self) -> Option<usize> {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.planets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planets.is_empty()
    }

    pub fn index(&self) -> &PlanetIndex {
        &self.index
    }

    pub fn total_mass(&self) -> f64 {
        self.planets.iter().map(|p| p.mass).sum()
    }

    /// Distinct class labels, ascending.
    pub fn class_labels(&self) -> Vec<u32> {
        let mut labels: Vec<u32> = self.planets.iter().map(|p| p.class_label).collect();
        labels.sort_unstable();
        labels.dedup();
        labels
    }

    pub(crate) fn check_point(&self, point: &[f64]) -> Result<()> {
        if let Some(d) = self.dimension {
            if point.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: point.len(),
                });
            }
        }
        check_finite(point)
    }

    /// Planets whose radius reaches `point`, by linear scan, ascending id.
    pub fn planets_containing(&self, point: &[f64]) -> Result<Vec<&Planet>> {
        self.check_point(point)?;
        let metric = self.config.distance_metric;
        Ok(self
            .planets
            .iter()
            .filter(|p| metric.eval(&p.position, point) <= p.radius)
            .collect())
    }
}
