//! Train/test evaluation of both predictors and the resulting report.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{kfold, split, Dataset, MinMaxScaler, SplitMode, SplitSpec};
use crate::error::{Error, Result};
use crate::universe::{Metric, Universe, UniverseConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modes {
    Sim,
    Prob,
    Both,
}

impl Modes {
    pub fn sim(self) -> bool {
        matches!(self, Modes::Sim | Modes::Both)
    }

    pub fn prob(self) -> bool {
        matches!(self, Modes::Prob | Modes::Both)
    }
}

impl FromStr for Modes {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sim" => Ok(Modes::Sim),
            "prob" => Ok(Modes::Prob),
            "both" => Ok(Modes::Both),
            other => Err(Error::InvalidConfig(format!("unknown mode `{other}`"))),
        }
    }
}

/// Rows are true classes, columns predicted classes, both in `labels` order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<u32>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<u32>) -> Self {
        let n = labels.len();
        ConfusionMatrix {
            labels,
            counts: vec![vec![0; n]; n],
        }
    }

    fn slot(&mut self, label: u32) -> usize {
        match self.labels.binary_search(&label) {
            Ok(i) => i,
            Err(i) => {
                self.labels.insert(i, label);
                for row in &mut self.counts {
                    row.insert(i, 0);
                }
                self.counts.insert(i, vec![0; self.labels.len()]);
                i
            }
        }
    }

    pub fn record(&mut self, truth: u32, predicted: u32) {
        let r = self.slot(truth);
        let c = self.slot(predicted);
        self.counts[r][c] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (r, &truth) in other.labels.iter().enumerate() {
            for (c, &pred) in other.labels.iter().enumerate() {
                let n = other.counts[r][c];
                if n > 0 {
                    let (i, j) = (self.slot(truth), self.slot(pred));
                    self.counts[i][j] += n;
                }
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.correct() as f64 / total as f64
        }
    }

    pub fn row_total(&self, label: u32) -> u64 {
        self.labels
            .binary_search(&label)
            .map_or(0, |i| self.counts[i].iter().sum())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub r_init: f64,
    pub alpha: f64,
    pub beta: u32,
    pub metric: Metric,
    pub early_stop_on_collision: bool,
    pub scale: Scale,
    pub shuffle_seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    None,
    MinMax,
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Scale::None),
            "minmax" => Ok(Scale::MinMax),
            other => Err(Error::InvalidConfig(format!("unknown scaling `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub train_seconds: f64,
    pub predict_sim_seconds: f64,
    pub predict_prob_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub dataset: String,
    pub split: String,
    pub seed: u64,
    pub config: ReportConfig,
    pub train_size: usize,
    pub test_size: usize,
    /// Planets in the trained universe; the mean over folds for k-fold runs.
    pub planet_count: usize,
    pub accuracy_sim: Option<f64>,
    pub accuracy_prob: Option<f64>,
    pub confusion_sim: Option<ConfusionMatrix>,
    pub confusion_prob: Option<ConfusionMatrix>,
    pub label_names: Vec<String>,
    pub wall_time: PhaseTimes,
    pub notes: Vec<String>,
}

/// Everything needed to run one evaluation.
#[derive(Debug, Clone)]
pub struct EvalPlan {
    pub split: SplitSpec,
    pub config: UniverseConfig,
    pub modes: Modes,
    pub scale: Scale,
    pub shuffle_seed: Option<u64>,
}

impl EvalPlan {
    pub fn new(split: SplitSpec, config: UniverseConfig) -> Self {
        EvalPlan {
            split,
            config,
            modes: Modes::Both,
            scale: Scale::None,
            shuffle_seed: None,
        }
    }
}

struct FoldResult {
    planets: usize,
    sim: Option<ConfusionMatrix>,
    prob: Option<ConfusionMatrix>,
    times: PhaseTimes,
    train_size: usize,
    test_size: usize,
}

/// Train on `train` (in its current order) and score `test` with the
/// requested predictors.
fn run_fold(train: &Dataset, test: &Dataset, plan: &EvalPlan) -> Result<FoldResult> {
    let (mut train, mut test) = (train.clone(), test.clone());
    if plan.scale == Scale::MinMax {
        let scaler = MinMaxScaler::fit(&train);
        scaler.transform(&mut train);
        scaler.transform(&mut test);
    }
    if let Some(seed) = plan.shuffle_seed {
        train = train.shuffled(seed);
    }

    let mut times = PhaseTimes::default();
    let start = Instant::now();
    let mut universe = Universe::new(plan.config.clone())?;
    universe.train_batch(&train.samples)?;
    times.train_seconds = start.elapsed().as_secs_f64();

    let labels = train
        .class_labels
        .iter()
        .chain(&test.class_labels)
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect::<Vec<_>>();

    let score = |predict: &(dyn Fn(&[f64]) -> Result<u32> + Sync)| -> Result<(ConfusionMatrix, f64)> {
        let start = Instant::now();
        let predictions: Vec<u32> = test
            .samples
            .par_iter()
            .map(|s| predict(&s.position))
            .collect::<Result<_>>()?;
        let mut cm = ConfusionMatrix::new(labels.clone());
        for (s, p) in test.samples.iter().zip(predictions) {
            cm.record(s.class_label, p);
        }
        Ok((cm, start.elapsed().as_secs_f64()))
    };

    let sim = if plan.modes.sim() {
        let (cm, t) = score(&|x| Ok(universe.predict_sim(x)?.predicted_class))?;
        times.predict_sim_seconds = t;
        Some(cm)
    } else {
        None
    };
    let prob = if plan.modes.prob() {
        let (cm, t) = score(&|x| universe.predict_prob(x))?;
        times.predict_prob_seconds = t;
        Some(cm)
    } else {
        None
    };

    Ok(FoldResult {
        planets: universe.len(),
        sim,
        prob,
        times,
        train_size: train.len(),
        test_size: test.len(),
    })
}

/// Split `ds`, train, and evaluate. K-fold runs every fold and pools the
/// confusion matrices.
pub fn evaluate(ds: &Dataset, plan: &EvalPlan) -> Result<EvaluationReport> {
    plan.config.validate()?;
    let folds = match plan.split.mode {
        SplitMode::KFold(k) => kfold(ds, k, plan.split.seed)?,
        _ => vec![split(ds, &plan.split)?],
    };

    let mut results = Vec::with_capacity(folds.len());
    for (train, test) in &folds {
        results.push(run_fold(train, test, plan)?);
    }

    let pool = |pick: fn(&FoldResult) -> &Option<ConfusionMatrix>| {
        results.iter().filter_map(|r| pick(r).as_ref()).fold(None, |acc: Option<ConfusionMatrix>, cm| {
            Some(match acc {
                None => cm.clone(),
                Some(mut a) => {
                    a.merge(cm);
                    a
                }
            })
        })
    };
    let confusion_sim = pool(|r| &r.sim);
    let confusion_prob = pool(|r| &r.prob);

    let n = results.len();
    let mut wall_time = PhaseTimes::default();
    for r in &results {
        wall_time.train_seconds += r.times.train_seconds;
        wall_time.predict_sim_seconds += r.times.predict_sim_seconds;
        wall_time.predict_prob_seconds += r.times.predict_prob_seconds;
    }
    let planets: usize = results.iter().map(|r| r.planets).sum();

    let c = &plan.config;
    Ok(EvaluationReport {
        dataset: ds.name.clone(),
        split: plan.split.mode.to_string(),
        seed: plan.split.seed,
        config: ReportConfig {
            r_init: c.initial_radius,
            alpha: c.step_fraction,
            beta: c.iteration_count,
            metric: c.distance_metric,
            early_stop_on_collision: c.early_stop_on_collision,
            scale: plan.scale,
            shuffle_seed: plan.shuffle_seed,
        },
        train_size: results.iter().map(|r| r.train_size).sum::<usize>() / n,
        test_size: results.iter().map(|r| r.test_size).sum(),
        planet_count: (planets as f64 / n as f64).round() as usize,
        accuracy_sim: confusion_sim.as_ref().map(ConfusionMatrix::accuracy),
        accuracy_prob: confusion_prob.as_ref().map(ConfusionMatrix::accuracy),
        confusion_sim,
        confusion_prob,
        label_names: ds.label_names.clone(),
        wall_time,
        notes: Vec::new(),
    })
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    fn label(&self, l: u32) -> String {
        self.label_names
            .get(l as usize)
            .cloned()
            .unwrap_or_else(|| l.to_string())
    }
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |a| format!("{:.2}%", 100.0 * a))
}

impl fmt::Display for EvaluationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        writeln!(f, "dataset      {}", self.dataset)?;
        writeln!(f, "split        {} (seed {})", self.split, self.seed)?;
        writeln!(
            f,
            "config       r_init={} alpha={} beta={} metric={} scale={:?}",
            c.r_init, c.alpha, c.beta, c.metric, c.scale
        )?;
        writeln!(
            f,
            "sizes        train={} test={} planets={}",
            self.train_size, self.test_size, self.planet_count
        )?;
        writeln!(f, "accuracy     sim={}  prob={}", pct(self.accuracy_sim), pct(self.accuracy_prob))?;
        for (name, cm) in [("sim", &self.confusion_sim), ("prob", &self.confusion_prob)] {
            let Some(cm) = cm else { continue };
            writeln!(f, "confusion ({name}; rows = truth)")?;
            let names: Vec<String> = cm.labels.iter().map(|&l| self.label(l)).collect();
            let width = names.iter().map(String::len).max().unwrap_or(1).max(5);
            write!(f, "  {:>width$}", "")?;
            for n in &names {
                write!(f, " {n:>width$}")?;
            }
            writeln!(f)?;
            for (n, row) in names.iter().zip(&cm.counts) {
                write!(f, "  {n:>width$}")?;
                for v in row {
                    write!(f, " {v:>width$}")?;
                }
                writeln!(f)?;
            }
        }
        writeln!(
            f,
            "wall time    train={:.3}s sim={:.3}s prob={:.3}s",
            self.wall_time.train_seconds, self.wall_time.predict_sim_seconds, self.wall_time.predict_prob_seconds
        )?;
        for note in &self.notes {
            writeln!(f, "note         {note}")?;
        }
        Ok(())
    }
}
