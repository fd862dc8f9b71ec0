//! Goodness-of-fit comparison criteria.
//!
//! Every criterion is a function of the observed cumulative counts `m_i`, the
//! fitted predictions `m(t_i)`, the fitted intensities `λ(t_i)` and the
//! number of model parameters `p`. [`FitSummary`] carries exactly those, so
//! criteria can be evaluated for a fitted model or for synthetic residuals.

use std::fmt::{self, Write as _};
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::FailureDataset;
use crate::fit::FittedModel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CriterionError {
    #[error("{criterion}: {reason}")]
    Precondition {
        criterion: CriterionId,
        reason: String,
    },
    #[error("model {model}, criterion {criterion}: {reason}")]
    Cell {
        model: String,
        criterion: CriterionId,
        reason: String,
    },
    #[error("fit of {model} was made on dataset `{fit_dataset}`, not `{dataset}`")]
    DatasetMismatch {
        model: String,
        fit_dataset: String,
        dataset: String,
    },
    #[error("criterion selection is empty")]
    EmptySelection,
    #[error("no models to compare")]
    NoModels,
    #[error("unknown criterion `{0}`")]
    Unknown(String),
    #[error("criteria table line {line}: {message}")]
    Table { line: u64, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CriterionId {
    Bias,
    MSE,
    MAE,
    MEOP,
    AE,
    Noise,
    PRR,
    Variance,
    RMSPE,
    Rsq,
    SSE,
    TS,
}

/// Whether small or large values indicate a better fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    LowerIsBetter,
    HigherIsBetter,
}

/// The ten criteria used for ranking by default.
pub const DEFAULT_SELECTION: [CriterionId; 10] = [
    CriterionId::MSE,
    CriterionId::MAE,
    CriterionId::MEOP,
    CriterionId::AE,
    CriterionId::Noise,
    CriterionId::RMSPE,
    CriterionId::SSE,
    CriterionId::TS,
    CriterionId::PRR,
    CriterionId::Rsq,
];

impl CriterionId {
    pub const ALL: [CriterionId; 12] = [
        CriterionId::Bias,
        CriterionId::MSE,
        CriterionId::MAE,
        CriterionId::MEOP,
        CriterionId::AE,
        CriterionId::Noise,
        CriterionId::PRR,
        CriterionId::Variance,
        CriterionId::RMSPE,
        CriterionId::Rsq,
        CriterionId::SSE,
        CriterionId::TS,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CriterionId::Bias => "Bias",
            CriterionId::MSE => "MSE",
            CriterionId::MAE => "MAE",
            CriterionId::MEOP => "MEOP",
            CriterionId::AE => "AE",
            CriterionId::Noise => "Noise",
            CriterionId::PRR => "PRR",
            CriterionId::Variance => "Variance",
            CriterionId::RMSPE => "RMSPE",
            CriterionId::Rsq => "Rsq",
            CriterionId::SSE => "SSE",
            CriterionId::TS => "TS",
        }
    }

    /// Natural direction: only R² rewards larger values.
    pub fn direction(self) -> Direction {
        match self {
            CriterionId::Rsq => Direction::HigherIsBetter,
            _ => Direction::LowerIsBetter,
        }
    }
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CriterionId {
    type Err = CriterionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let lower = match lower.as_str() {
            "rsqr" | "r_sq" | "r2" => "rsq",
            other => other,
        };
        CriterionId::ALL
            .into_iter()
            .find(|c| c.name().to_ascii_lowercase() == lower)
            .ok_or_else(|| CriterionError::Unknown(s.to_owned()))
    }
}

/// Everything a criterion needs from one fitted model on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct FitSummary {
    /// Observed cumulative counts `m_i`.
    pub observed: Vec<f64>,
    /// Predictions `m(t_i)`.
    pub predicted: Vec<f64>,
    /// Intensities `λ(t_i)`.
    pub intensity: Vec<f64>,
    /// Number of model parameters `p`.
    pub params: usize,
}

impl FitSummary {
    pub fn from_fit(
        dataset: &FailureDataset,
        fitted: &FittedModel,
    ) -> Result<Self, CriterionError> {
        let cell = |reason: String| CriterionError::Cell {
            model: fitted.model.short_name().to_owned(),
            criterion: CriterionId::SSE,
            reason,
        };
        let mut predicted = Vec::with_capacity(dataset.k());
        let mut intensity = Vec::with_capacity(dataset.k());
        for t in dataset.times() {
            predicted.push(
                fitted
                    .params
                    .mean_value(t)
                    .map_err(|e| cell(e.to_string()))?,
            );
            intensity.push(
                fitted
                    .params
                    .intensity(t)
                    .map_err(|e| cell(e.to_string()))?,
            );
        }
        Ok(Self {
            observed: dataset.counts().collect(),
            predicted,
            intensity,
            params: fitted.model.dim(),
        })
    }

    fn k(&self) -> usize {
        self.observed.len()
    }

    /// Residuals `m_i − m(t_i)`.
    fn residuals(&self) -> impl Iterator<Item = f64> + '_ {
        self.observed
            .iter()
            .zip(&self.predicted)
            .map(|(o, p)| o - p)
    }

    fn sse(&self) -> f64 {
        self.residuals().map(|r| r * r).sum()
    }

    fn abs_sum(&self) -> f64 {
        self.residuals().map(f64::abs).sum()
    }

    fn bias(&self) -> f64 {
        self.predicted
            .iter()
            .zip(&self.observed)
            .map(|(p, o)| p - o)
            .sum::<f64>()
            / self.k() as f64
    }

    fn variance(&self) -> f64 {
        let bias = self.bias();
        let ss: f64 = self.residuals().map(|r| (r - bias).powi(2)).sum();
        (ss / (self.k() - 1) as f64).sqrt()
    }
}

fn precondition(criterion: CriterionId, reason: impl Into<String>) -> CriterionError {
    CriterionError::Precondition {
        criterion,
        reason: reason.into(),
    }
}

/// Evaluates one criterion on a fit summary.
pub fn evaluate(id: CriterionId, s: &FitSummary) -> Result<f64, CriterionError> {
    let k = s.k();
    let p = s.params;
    if k < 2 || s.predicted.len() != k || s.intensity.len() != k {
        return Err(precondition(
            id,
            format!("need at least 2 aligned points, got {k}"),
        ));
    }
    let dof = |extra: usize| -> Result<f64, CriterionError> {
        let denom = (k + extra) as f64 - p as f64;
        if denom > 0.0 {
            Ok(denom)
        } else {
            Err(precondition(
                id,
                format!(
                    "k−p{} ≤ 0 for model with {p} parameters on {k} points",
                    if extra > 0 { "+1" } else { "" }
                ),
            ))
        }
    };
    let value = match id {
        CriterionId::Bias => s.bias(),
        CriterionId::MSE => s.sse() / dof(0)?,
        CriterionId::MAE => s.abs_sum() / dof(0)?,
        CriterionId::MEOP => s.abs_sum() / dof(1)?,
        CriterionId::AE => {
            let actual = s.observed[k - 1];
            if actual <= 0.0 {
                return Err(precondition(id, "actual total faults M_a is not positive"));
            }
            ((actual - s.predicted[k - 1]) / actual).abs()
        }
        CriterionId::Noise => {
            let mut total = 0.0;
            for (i, w) in s.intensity.windows(2).enumerate() {
                if w[0] == 0.0 {
                    return Err(precondition(id, format!("λ(t_{}) = 0", i + 1)));
                }
                total += ((w[1] - w[0]) / w[0]).abs();
            }
            total
        }
        CriterionId::PRR => {
            let mut total = 0.0;
            for (i, (&pred, &obs)) in s.predicted.iter().zip(&s.observed).enumerate() {
                if pred == 0.0 {
                    return Err(precondition(id, format!("m(t_{}) = 0", i + 1)));
                }
                total += (pred - obs) / pred;
            }
            total
        }
        CriterionId::Variance => s.variance(),
        CriterionId::RMSPE => {
            let (v, b) = (s.variance(), s.bias());
            (v * v + b * b).sqrt()
        }
        CriterionId::Rsq => {
            let mean = s.observed.iter().sum::<f64>() / k as f64;
            let total: f64 = s.observed.iter().map(|o| (o - mean).powi(2)).sum();
            if total == 0.0 {
                return Err(precondition(id, "observed counts have zero variation"));
            }
            1.0 - s.sse() / total
        }
        CriterionId::SSE => s.sse(),
        CriterionId::TS => {
            let squares: f64 = s.observed.iter().map(|o| o * o).sum();
            if squares == 0.0 {
                return Err(precondition(id, "all observed counts are zero"));
            }
            100.0 * (s.sse() / squares).sqrt()
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(precondition(id, format!("non-finite value {value}")))
    }
}

/// Evaluates one criterion for a fitted model on `dataset`.
pub fn evaluate_criterion(
    id: CriterionId,
    dataset: &FailureDataset,
    fitted: &FittedModel,
) -> Result<f64, CriterionError> {
    evaluate(id, &FitSummary::from_fit(dataset, fitted)?)
}

/// Criterion values for several models: rows are models, columns criteria.
#[derive(Debug, Clone, PartialEq)]
pub struct CriteriaMatrix {
    models: Vec<String>,
    criteria: Vec<CriterionId>,
    values: Vec<Vec<f64>>,
}

impl CriteriaMatrix {
    pub fn new(
        models: Vec<String>,
        criteria: Vec<CriterionId>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self, CriterionError> {
        if models.is_empty() {
            return Err(CriterionError::NoModels);
        }
        if criteria.is_empty() {
            return Err(CriterionError::EmptySelection);
        }
        for (model, row) in models.iter().zip(&values) {
            if row.len() != criteria.len() {
                return Err(CriterionError::Table {
                    line: 0,
                    message: format!(
                        "{model}: {} values for {} criteria",
                        row.len(),
                        criteria.len()
                    ),
                });
            }
            if let Some((j, v)) = row.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(CriterionError::Cell {
                    model: model.clone(),
                    criterion: criteria[j],
                    reason: format!("non-finite value {v}"),
                });
            }
        }
        if models.len() != values.len() {
            return Err(CriterionError::Table {
                line: 0,
                message: format!("{} model names for {} rows", models.len(), values.len()),
            });
        }
        Ok(Self {
            models,
            criteria,
            values,
        })
    }

    pub fn models(&self) -> &[String] {
        &self.models
    }

    pub fn criteria(&self) -> &[CriterionId] {
        &self.criteria
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn value(&self, model: usize, criterion: usize) -> f64 {
        self.values[model][criterion]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(move |row| row[j])
    }

    /// Column minima `(Amin)_j`.
    pub fn amin(&self) -> Vec<f64> {
        (0..self.criteria.len())
            .map(|j| self.column(j).fold(f64::INFINITY, f64::min))
            .collect()
    }

    /// Column maxima `(Amax)_j`.
    pub fn amax(&self) -> Vec<f64> {
        (0..self.criteria.len())
            .map(|j| self.column(j).fold(f64::NEG_INFINITY, f64::max))
            .collect()
    }

    /// CSV with a `model` column, one column per criterion, and trailing
    /// `Amin` / `Amax` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model");
        for c in &self.criteria {
            out.push(',');
            out.push_str(c.name());
        }
        out.push('\n');
        let mut row = |label: &str, vals: &[f64]| {
            out.push_str(&csv_field(label));
            for v in vals {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        };
        for (m, vals) in self.models.iter().zip(&self.values) {
            row(m, vals);
        }
        row("Amin", &self.amin());
        row("Amax", &self.amax());
        out
    }

    /// Reads the CSV form written by [`CriteriaMatrix::to_csv`]. `Amin` and
    /// `Amax` rows are ignored (they are recomputed).
    pub fn from_csv<R: Read>(source: R) -> Result<Self, CriterionError> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(source);
        let table_err = |line: u64, message: String| CriterionError::Table { line, message };
        let headers = reader
            .headers()
            .map_err(|e| table_err(1, e.to_string()))?
            .clone();
        if headers.get(0).map(str::to_ascii_lowercase).as_deref() != Some("model") {
            return Err(table_err(1, "first column must be `model`".into()));
        }
        let criteria = headers
            .iter()
            .skip(1)
            .map(str::parse)
            .collect::<Result<Vec<CriterionId>, _>>()?;
        let mut models = Vec::new();
        let mut values = Vec::new();
        for record in reader.records() {
            let record = record
                .map_err(|e| table_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
            let line = record.position().map_or(0, |p| p.line());
            let label = record.get(0).unwrap_or_default().to_owned();
            if matches!(label.as_str(), "Amin" | "Amax") {
                continue;
            }
            let row = record
                .iter()
                .skip(1)
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| table_err(line, format!("malformed number `{f}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            models.push(label);
            values.push(row);
        }
        Self::new(models, criteria, values)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Builds the criteria matrix for fitted models on one dataset.
pub fn evaluate_all(
    dataset: &FailureDataset,
    fits: &[FittedModel],
    selection: &[CriterionId],
) -> Result<CriteriaMatrix, CriterionError> {
    if selection.is_empty() {
        return Err(CriterionError::EmptySelection);
    }
    if fits.is_empty() {
        return Err(CriterionError::NoModels);
    }
    let mut values = Vec::with_capacity(fits.len());
    for fit in fits {
        let model = fit.model.short_name().to_owned();
        if fit.dataset_name != dataset.name() {
            return Err(CriterionError::DatasetMismatch {
                model,
                fit_dataset: fit.dataset_name.clone(),
                dataset: dataset.name().to_owned(),
            });
        }
        let summary = FitSummary::from_fit(dataset, fit)?;
        let row = selection
            .iter()
            .map(|&id| {
                evaluate(id, &summary).map_err(|e| CriterionError::Cell {
                    model: model.clone(),
                    criterion: id,
                    reason: match e {
                        CriterionError::Precondition { reason, .. } => reason,
                        other => other.to_string(),
                    },
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        values.push(row);
    }
    CriteriaMatrix::new(
        fits.iter()
            .map(|f| f.model.short_name().to_owned())
            .collect(),
        selection.to_vec(),
        values,
    )
}
