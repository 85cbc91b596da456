//! CSV ingestion, seeded train/test splitting and optional min-max scaling.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::universe::HybridSample;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub samples: Vec<HybridSample>,
    pub dimension: usize,
    /// Distinct labels present, ascending.
    pub class_labels: Vec<u32>,
    /// Original string for each dense label when the file used names.
    pub label_names: Vec<String>,
    pub feature_names: Vec<String>,
    /// Zero-based position of each sample in the source file.
    pub source_rows: Vec<usize>,
}

/// Which CSV columns hold the label and the optional per-sample weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub label_column: String,
    pub weight_column: Option<String>,
}

impl CsvSchema {
    pub fn new(label_column: impl Into<String>) -> Self {
        CsvSchema {
            label_column: label_column.into(),
            weight_column: None,
        }
    }

    pub fn with_weight(mut self, column: impl Into<String>) -> Self {
        self.weight_column = Some(column.into());
        self
    }
}

impl Dataset {
    pub fn from_samples(name: impl Into<String>, samples: Vec<HybridSample>) -> Result<Self> {
        let name = name.into();
        let dimension = samples.first().map_or(0, |s| s.position.len());
        for (i, s) in samples.iter().enumerate() {
            if s.position.len() != dimension {
                return Err(Error::Sample {
                    index: i,
                    source: Box::new(Error::DimensionMismatch {
                        expected: dimension,
                        found: s.position.len(),
                    }),
                });
            }
        }
        let source_rows = (0..samples.len()).collect();
        Ok(Dataset {
            class_labels: distinct_labels(&samples),
            feature_names: (0..dimension).map(|i| format!("x{i}")).collect(),
            name,
            samples,
            dimension,
            label_names: Vec::new(),
            source_rows,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Display name for a dense label.
    pub fn label_name(&self, label: u32) -> String {
        self.label_names
            .get(label as usize)
            .cloned()
            .unwrap_or_else(|| label.to_string())
    }

    /// Samples at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let samples: Vec<HybridSample> = indices.iter().map(|&i| self.samples[i].clone()).collect();
        Dataset {
            name: self.name.clone(),
            class_labels: distinct_labels(&samples),
            samples,
            dimension: self.dimension,
            label_names: self.label_names.clone(),
            feature_names: self.feature_names.clone(),
            source_rows: indices.iter().map(|&i| self.source_rows[i]).collect(),
        }
    }

    /// Same samples in a seeded random order.
    pub fn shuffled(&self, seed: u64) -> Dataset {
        let mut order: Vec<usize> = (0..self.len()).collect();
        shuffle(&mut order, &mut Xoshiro256StarStar::seed_from_u64(seed));
        self.subset(&order)
    }

    /// Sample indices grouped by class, ascending label, file order within.
    fn by_class(&self) -> Vec<Vec<usize>> {
        let mut groups: HashMap<u32, Vec<usize>> = HashMap::new();
        for (i, s) in self.samples.iter().enumerate() {
            groups.entry(s.class_label).or_default().push(i);
        }
        self.class_labels
            .iter()
            .map(|l| groups.remove(l).unwrap_or_default())
            .collect()
    }
}

fn distinct_labels(samples: &[HybridSample]) -> Vec<u32> {
    samples
        .iter()
        .map(|s| s.class_label)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Read a headered CSV. Feature columns are every column other than the label
/// and weight columns. Labels that are all non-negative integers are used
/// as-is; anything else is mapped to dense integers in order of first
/// appearance. Row numbers in errors are file line numbers.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let fail = |message: String| Error::Dataset {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| fail(e.to_string()))?;
    let headers = reader.headers().map_err(|e| fail(e.to_string()))?.clone();

    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| fail(format!("no column named `{name}`")))
    };
    let label_col = column(&schema.label_column)?;
    let weight_col = schema.weight_column.as_deref().map(column).transpose()?;
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&c| c != label_col && Some(c) != weight_col)
        .collect();
    if feature_cols.is_empty() {
        return Err(fail("no feature columns".into()));
    }

    let mut positions = Vec::new();
    let mut masses = Vec::new();
    let mut raw_labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| match e.position() {
            Some(pos) => Error::Row {
                row: pos.line(),
                message: csv_message(&e),
            },
            None => fail(e.to_string()),
        })?;
        let row = record.position().map_or(0, |p| p.line());
        let row_err = |message: String| Error::Row { row, message };

        let mut position = Vec::with_capacity(feature_cols.len());
        for &c in &feature_cols {
            let cell = &record[c];
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| row_err(format!("non-numeric value `{cell}` in column `{}`", &headers[c])))?;
            position.push(v);
        }
        let mass = match weight_col {
            None => 1.0,
            Some(c) => {
                let cell = &record[c];
                let w: f64 = cell
                    .parse()
                    .map_err(|_| row_err(format!("non-numeric weight `{cell}`")))?;
                if !(w.is_finite() && w > 0.0) {
                    return Err(row_err("non-positive weight".into()));
                }
                w
            }
        };
        positions.push(position);
        masses.push(mass);
        raw_labels.push(record[label_col].to_string());
    }
    if positions.is_empty() {
        return Err(fail("no data rows".into()));
    }

    let integral: Option<Vec<u32>> = raw_labels.iter().map(|l| l.parse::<u32>().ok()).collect();
    let (labels, label_names) = match integral {
        Some(labels) => (labels, Vec::new()),
        None => {
            let mut names: Vec<String> = Vec::new();
            let mut lookup: HashMap<&str, u32> = HashMap::new();
            let labels = raw_labels
                .iter()
                .map(|l| {
                    *lookup.entry(l.as_str()).or_insert_with(|| {
                        names.push(l.clone());
                        (names.len() - 1) as u32
                    })
                })
                .collect();
            (labels, names)
        }
    };

    let samples: Vec<HybridSample> = positions
        .into_iter()
        .zip(masses)
        .zip(labels)
        .map(|((position, mass), label)| HybridSample::new(position, mass, label))
        .collect();
    let name = path
        .file_stem()
        .map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
    let mut ds = Dataset::from_samples(name, samples)?;
    ds.label_names = label_names;
    ds.feature_names = feature_cols.iter().map(|&c| headers[c].to_string()).collect();
    Ok(ds)
}

fn csv_message(e: &csv::Error) -> String {
    match e.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => format!("ragged row: expected {expected_len} fields, found {len}"),
        _ => e.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SplitMode {
    /// Stratified: `floor(n_c * fraction)` samples of each class go to test.
    Fraction(f64),
    /// One seed-chosen training sample per class; everything else is test.
    OnePerClass,
    /// Stratified k-fold; `split` returns the first fold.
    KFold(usize),
}

impl fmt::Display for SplitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitMode::Fraction(x) => write!(f, "frac:{x}"),
            SplitMode::OnePerClass => f.write_str("one-per-class"),
            SplitMode::KFold(k) => write!(f, "kfold:{k}"),
        }
    }
}

impl FromStr for SplitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Split(format!("cannot parse `{s}`; expected frac:<f>, one-per-class or kfold:<k>"));
        let mode = if s == "one-per-class" {
            SplitMode::OnePerClass
        } else if let Some(f) = s.strip_prefix("frac:") {
            SplitMode::Fraction(f.parse().map_err(|_| bad())?)
        } else if let Some(k) = s.strip_prefix("kfold:") {
            SplitMode::KFold(k.parse().map_err(|_| bad())?)
        } else {
            return Err(bad());
        };
        mode.validate()?;
        Ok(mode)
    }
}

impl SplitMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SplitMode::Fraction(f) if !(f > 0.0 && f < 1.0) => {
                Err(Error::Split(format!("test fraction must lie in (0, 1), got {f}")))
            }
            SplitMode::KFold(k) if k < 2 => Err(Error::Split(format!("k-fold needs k >= 2, got {k}"))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub mode: SplitMode,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(mode: SplitMode, seed: u64) -> Self {
        SplitSpec { mode, seed }
    }
}

/// Uniform integer in `0..n` by 128-bit multiply-shift.
fn bounded(rng: &mut Xoshiro256StarStar, n: usize) -> usize {
    ((rng.next_u64() as u128 * n as u128) >> 64) as usize
}

/// Fisher-Yates, walking down from the last element.
fn shuffle(items: &mut [usize], rng: &mut Xoshiro256StarStar) {
    for i in (1..items.len()).rev() {
        let j = bounded(rng, i + 1);
        items.swap(i, j);
    }
}

/// Split into `(train, test)`. Both halves keep the dataset's original order.
pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    spec.mode.validate()?;
    let mut rng = Xoshiro256StarStar::seed_from_u64(spec.seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    match spec.mode {
        SplitMode::Fraction(fraction) => {
            for mut group in ds.by_class() {
                shuffle(&mut group, &mut rng);
                let n_test = (group.len() as f64 * fraction).floor() as usize;
                test.extend_from_slice(&group[..n_test]);
                train.extend_from_slice(&group[n_test..]);
            }
        }
        SplitMode::OnePerClass => {
            for group in ds.by_class() {
                if group.len() < 2 {
                    return Err(Error::Split(format!(
                        "one-per-class needs at least two samples of class {}",
                        ds.label_name(ds.samples[group[0]].class_label)
                    )));
                }
                let pick = bounded(&mut rng, group.len());
                for (k, &i) in group.iter().enumerate() {
                    if k == pick {
                        train.push(i);
                    } else {
                        test.push(i);
                    }
                }
            }
        }
        SplitMode::KFold(k) => {
            return kfold(ds, k, spec.seed)?
                .into_iter()
                .next()
                .ok_or_else(|| Error::Split("no folds".into()));
        }
    }
    if test.is_empty() {
        return Err(Error::Split("split leaves the test set empty".into()));
    }
    if train.is_empty() {
        return Err(Error::Split("split leaves the training set empty".into()));
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((ds.subset(&train), ds.subset(&test)))
}

/// Stratified k-fold: each class is shuffled and dealt round-robin over the
/// folds, continuing the deal across classes. Returns `(train, test)` per fold.
pub fn kfold(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<(Dataset, Dataset)>> {
    SplitMode::KFold(k).validate()?;
    if ds.len() < k {
        return Err(Error::Split(format!("{} samples cannot fill {k} folds", ds.len())));
    }
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut fold_of = vec![0usize; ds.len()];
    let mut deal = 0usize;
    for mut group in ds.by_class() {
        shuffle(&mut group, &mut rng);
        for i in group {
            fold_of[i] = deal % k;
            deal += 1;
        }
    }
    Ok((0..k)
        .map(|fold| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..ds.len()).partition(|&i| fold_of[i] == fold);
            (ds.subset(&train), ds.subset(&test))
        })
        .collect())
}

/// Per-feature min-max scaling to `[0, 1]`, fitted on one dataset and applied
/// to others. Constant features map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(ds: &Dataset) -> Self {
        let mut min = vec![f64::INFINITY; ds.dimension];
        let mut max = vec![f64::NEG_INFINITY; ds.dimension];
        for s in &ds.samples {
            for (j, &x) in s.position.iter().enumerate() {
                min[j] = min[j].min(x);
                max[j] = max[j].max(x);
            }
        }
        MinMaxScaler { min, max }
    }

    pub fn transform_point(&self, x: &mut [f64]) {
        for ((v, &lo), &hi) in x.iter_mut().zip(&self.min).zip(&self.max) {
            let span = hi - lo;
            *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
        }
    }

    pub fn transform(&self, ds: &mut Dataset) {
        for s in &mut ds.samples {
            self.transform_point(&mut s.position);
        }
    }
}
