//! Credit-scoring style datasets: CSV loading, standardization, and a seeded
//! synthetic generator for desk-scale experiments.
//!
//! Standardization uses the population convention (divide by n): the
//! empirical distribution of the rows is treated as the true base distribution,
//! so "unit standard deviation" is meant with respect to that distribution.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::rng::{bernoulli, seeded, standard_normal};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV at line {line}: {message}")]
    Malformed { line: u64, message: String },

    #[error("label column {0:?} not found in header")]
    MissingLabelColumn(String),

    #[error("feature column {0:?} not found in header")]
    MissingFeatureColumn(String),

    #[error("non-numeric value {value:?} at line {line}, column {column:?}")]
    NonNumeric {
        line: u64,
        column: String,
        value: String,
    },

    #[error("label {value} at line {line} is not 0 or 1")]
    BadLabel { line: u64, value: f64 },

    #[error("column {0:?} is constant and cannot be standardized")]
    ConstantColumn(String),

    #[error("invalid dataset: {0}")]
    Invalid(String),
}

/// Binary-labelled feature matrix, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    columns: Vec<String>,
    features: Vec<f64>,
    labels: Vec<f64>,
    dim: usize,
    /// Per-column (mean, std) removed by [`preprocess`], if it was applied.
    standardization: Option<(Vec<f64>, Vec<f64>)>,
}

impl Dataset {
    /// Builds a dataset from row-major features. Column names default to `x0, x1, …`.
    pub fn new(features: Vec<f64>, dim: usize, labels: Vec<f64>) -> Result<Self, DataError> {
        let columns = (0..dim).map(|j| format!("x{j}")).collect();
        Self::with_columns(columns, features, labels)
    }

    pub fn with_columns(
        columns: Vec<String>,
        features: Vec<f64>,
        labels: Vec<f64>,
    ) -> Result<Self, DataError> {
        let dim = columns.len();
        if dim == 0 {
            return Err(DataError::Invalid("need at least one feature column".into()));
        }
        if features.len() != dim * labels.len() {
            return Err(DataError::Invalid(format!(
                "{} feature values do not form {} rows of dimension {dim}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 0.0 && y != 1.0) {
            return Err(DataError::Invalid(format!("label {bad} is not 0 or 1")));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(DataError::Invalid("non-finite feature value".into()));
        }
        Ok(Dataset {
            columns,
            features,
            labels,
            dim,
            standardization: None,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.dim)
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn feature_means(&self) -> Option<&[f64]> {
        self.standardization.as_ref().map(|(m, _)| m.as_slice())
    }

    pub fn feature_stds(&self) -> Option<&[f64]> {
        self.standardization.as_ref().map(|(_, s)| s.as_slice())
    }

    /// Per-column (mean, population std).
    pub fn column_moments(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.len() as f64;
        let mut mean = vec![0.0; self.dim];
        for row in self.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; self.dim];
        for row in self.rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        (mean, var.into_iter().map(|s| (s / n).sqrt()).collect())
    }

    pub fn positive_rate(&self) -> f64 {
        self.labels.iter().sum::<f64>() / self.len() as f64
    }

    /// Deterministic subsample: the first `cap` rows after a shuffle seeded by `seed`.
    pub fn subsample(&self, cap: usize, seed: u64) -> Dataset {
        if cap >= self.len() {
            return self.clone();
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut seeded(seed));
        order.truncate(cap);
        let mut features = Vec::with_capacity(cap * self.dim);
        let mut labels = Vec::with_capacity(cap);
        for &i in &order {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            columns: self.columns.clone(),
            features,
            labels,
            dim: self.dim,
            standardization: None,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CsvOptions {
    pub label_column: String,
    /// Feature columns in order; all non-label columns when `None`.
    pub feature_columns: Option<Vec<String>>,
}

impl CsvOptions {
    pub fn with_label(label_column: impl Into<String>) -> Self {
        CsvOptions {
            label_column: label_column.into(),
            feature_columns: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LoadedCsv {
    pub dataset: Dataset,
    /// Rows skipped because a used cell was empty.
    pub dropped_rows: usize,
}

/// Parses a comma-separated file with a header row.
///
/// Rows with an empty cell in any used column are dropped and counted; any
/// other unparsable cell is an error carrying its line and column.
pub fn load_credit_csv(path: &Path, options: &CsvOptions) -> Result<LoadedCsv, DataError> {
    let io_err = |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::open(path).map_err(io_err)?;
    read_credit_csv(file, options)
}

pub fn read_credit_csv<R: std::io::Read>(reader: R, options: &CsvOptions) -> Result<LoadedCsv, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let malformed = |e: csv::Error| DataError::Malformed {
        line: e.position().map(|p| p.line()).unwrap_or(0),
        message: e.to_string(),
    };
    let header: Vec<String> = rdr
        .headers()
        .map_err(malformed)?
        .iter()
        .map(str::to_string)
        .collect();
    let label_idx = header
        .iter()
        .position(|h| *h == options.label_column)
        .ok_or_else(|| DataError::MissingLabelColumn(options.label_column.clone()))?;
    let feature_idx: Vec<usize> = match &options.feature_columns {
        Some(names) => names
            .iter()
            .map(|name| {
                header
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| DataError::MissingFeatureColumn(name.clone()))
            })
            .collect::<Result<_, _>>()?,
        None => (0..header.len()).filter(|&j| j != label_idx).collect(),
    };
    let columns: Vec<String> = feature_idx.iter().map(|&j| header[j].clone()).collect();

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut dropped_rows = 0;
    let mut row = Vec::with_capacity(feature_idx.len());
    for record in rdr.records() {
        let record = record.map_err(malformed)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let used = feature_idx.iter().chain(std::iter::once(&label_idx));
        if used.clone().any(|&j| record.get(j).is_none_or(str::is_empty)) {
            dropped_rows += 1;
            continue;
        }
        let parse = |j: usize| -> Result<f64, DataError> {
            let cell = &record[j];
            cell.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| DataError::NonNumeric {
                    line,
                    column: header[j].clone(),
                    value: cell.to_string(),
                })
        };
        row.clear();
        for &j in &feature_idx {
            row.push(parse(j)?);
        }
        let y = parse(label_idx)?;
        if y != 0.0 && y != 1.0 {
            return Err(DataError::BadLabel { line, value: y });
        }
        features.extend_from_slice(&row);
        labels.push(y);
    }
    let dataset = Dataset::with_columns(columns, features, labels)?;
    Ok(LoadedCsv {
        dataset,
        dropped_rows,
    })
}

/// Standardizes every feature column to zero mean and unit (population) std.
pub fn preprocess(raw: &Dataset) -> Result<Dataset, DataError> {
    if raw.len() < 2 {
        return Err(DataError::Invalid(format!(
            "need at least 2 rows to standardize, got {}",
            raw.len()
        )));
    }
    let (mean, std) = raw.column_moments();
    for (j, (&s, &m)) in std.iter().zip(&mean).enumerate() {
        // Relative threshold: a column of identical values still has rounding-level spread.
        if !(s > 1e-12 * m.abs().max(1.0)) {
            return Err(DataError::ConstantColumn(raw.columns[j].clone()));
        }
    }
    let mut features = raw.features.clone();
    for row in features.chunks_exact_mut(raw.dim) {
        for ((v, m), s) in row.iter_mut().zip(&mean).zip(&std) {
            *v = (*v - m) / s;
        }
    }
    Ok(Dataset {
        columns: raw.columns.clone(),
        features,
        labels: raw.labels.clone(),
        dim: raw.dim,
        standardization: Some((mean, std)),
    })
}

/// Seeded stand-in for the credit data: standard normal features, labels from
/// a fixed logistic model whose intercept is tuned so the expected positive
/// rate equals `label_balance`, then standardized.
pub fn synthetic_credit(
    n: usize,
    d: usize,
    label_balance: f64,
    seed: u64,
) -> Result<Dataset, DataError> {
    if n < 10 || d == 0 {
        return Err(DataError::Invalid(format!("need n >= 10 and d >= 1 (n = {n}, d = {d})")));
    }
    if !(label_balance > 0.0 && label_balance < 1.0) {
        return Err(DataError::Invalid(format!(
            "label_balance must lie in (0, 1), got {label_balance}"
        )));
    }
    let mut rng = seeded(seed);
    let scale = 2.0 / (d as f64).sqrt();
    let weights: Vec<f64> = (0..d).map(|_| scale * standard_normal(&mut rng)).collect();
    let features: Vec<f64> = (0..n * d).map(|_| standard_normal(&mut rng)).collect();
    let scores: Vec<f64> = features
        .chunks_exact(d)
        .map(|x| crate::params::dot(x, &weights))
        .collect();

    let mean_prob = |b: f64| {
        scores.iter().map(|s| crate::loss::sigmoid(s + b)).sum::<f64>() / n as f64
    };
    let (mut lo, mut hi) = (-50.0, 50.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_prob(mid) < label_balance {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let intercept = 0.5 * (lo + hi);
    let labels: Vec<f64> = scores
        .iter()
        .map(|s| {
            if bernoulli(&mut rng, crate::loss::sigmoid(s + intercept)) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    preprocess(&Dataset::new(features, d, labels)?)
}
