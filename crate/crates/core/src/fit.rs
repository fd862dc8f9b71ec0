//! Least-squares parameter estimation by Social Spider search.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::FailureDataset;
use crate::models::{mean_value_unchecked, ModelError, ModelId, ParamBounds, ParamVector};
use crate::par::Execution;
use crate::ssa::{self, SsaConfig, SsaError, PENALTY_FITNESS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ssa(#[from] SsaError),
    #[error("{model}: bounds have {got} coordinates, model has {expected} parameters")]
    BoundsDimension {
        model: ModelId,
        expected: usize,
        got: usize,
    },
    #[error("{model}: fixed parameter index {index} out of range")]
    FixedIndex { model: ModelId, index: usize },
    #[error("{model}: every parameter is fixed")]
    NothingToFit { model: ModelId },
}

/// Sum of squared residuals `Σ (m_i − m(t_i))²`. Parameters outside the
/// model's constraint region score [`PENALTY_FITNESS`].
pub fn objective(dataset: &FailureDataset, model: ModelId, params: &[f64]) -> f64 {
    if model.check_params(params).is_err() {
        return PENALTY_FITNESS;
    }
    let sse: f64 = dataset
        .points()
        .iter()
        .map(|p| {
            let r = p.m - mean_value_unchecked(model, params, p.t);
            r * r
        })
        .sum();
    if sse.is_finite() {
        sse
    } else {
        PENALTY_FITNESS
    }
}

/// What to fit and how.
#[derive(Debug, Clone, Default)]
pub struct FitSpec {
    pub config: SsaConfig,
    /// Search box; defaults to the model's default bounds.
    pub bounds: Option<ParamBounds>,
    /// Parameters held at a fixed value, as `(index, value)`.
    pub fixed: Vec<(usize, f64)>,
}

impl FitSpec {
    pub fn new(config: SsaConfig) -> Self {
        Self {
            config,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub model: ModelId,
    pub params: ParamVector,
    /// SSE at `params`.
    pub objective_value: f64,
    pub config_used: SsaConfig,
    pub dataset_name: String,
    /// No more observations than parameters.
    pub underdetermined: bool,
    pub iterations: usize,
    pub history: Vec<f64>,
    /// Best initial-population fitness of the run.
    pub initial_best: f64,
}

impl FittedModel {
    pub fn to_record(&self) -> FitRecord {
        FitRecord {
            model: self.model.short_name().to_owned(),
            model_id: self.model,
            params: self
                .params
                .named()
                .map(|(name, value)| NamedParam {
                    name: name.to_owned(),
                    value,
                })
                .collect(),
            objective_value: self.objective_value,
            dataset_name: self.dataset_name.clone(),
            underdetermined: self.underdetermined,
            iterations: self.iterations,
            runs: 1,
            config: self.config_used.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_record()).expect("fit record serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedParam {
    pub name: String,
    pub value: f64,
}

/// On-disk form of a [`FittedModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub model: String,
    pub model_id: ModelId,
    pub params: Vec<NamedParam>,
    pub objective_value: f64,
    pub dataset_name: String,
    pub underdetermined: bool,
    pub iterations: usize,
    pub runs: usize,
    pub config: SsaConfig,
}

impl FitRecord {
    pub fn param_vector(&self) -> Result<ParamVector, ModelError> {
        let names = self.model_id.param_names();
        let values = names
            .iter()
            .map(|n| {
                self.params
                    .iter()
                    .find(|p| p.name == *n)
                    .map(|p| p.value)
                    .ok_or(ModelError::Dimension {
                        model: self.model_id,
                        expected: names.len(),
                        got: self.params.len(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        ParamVector::new(self.model_id, values)
    }
}

pub fn fit_model(
    dataset: &FailureDataset,
    model: ModelId,
    config: &SsaConfig,
) -> Result<FittedModel, FitError> {
    fit_model_with(dataset, model, &FitSpec::new(config.clone()))
}

pub fn fit_model_with(
    dataset: &FailureDataset,
    model: ModelId,
    spec: &FitSpec,
) -> Result<FittedModel, FitError> {
    let dim = model.dim();
    let bounds = match &spec.bounds {
        Some(b) if b.dim() != dim => {
            return Err(FitError::BoundsDimension {
                model,
                expected: dim,
                got: b.dim(),
            })
        }
        Some(b) => b.clone(),
        None => model.default_bounds(dataset),
    };

    let mut fixed: Vec<Option<f64>> = vec![None; dim];
    for &(index, value) in &spec.fixed {
        *fixed
            .get_mut(index)
            .ok_or(FitError::FixedIndex { model, index })? = Some(value);
    }
    let free: Vec<usize> = (0..dim).filter(|&i| fixed[i].is_none()).collect();
    if free.is_empty() {
        return Err(FitError::NothingToFit { model });
    }
    let free_bounds = ParamBounds::new(
        free.iter().map(|&i| bounds.lower()[i]).collect(),
        free.iter().map(|&i| bounds.upper()[i]).collect(),
    )?;
    let expand = |x: &[f64]| -> Vec<f64> {
        let mut full: Vec<f64> = fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
        for (&i, &v) in free.iter().zip(x) {
            full[i] = v;
        }
        full
    };

    let result = ssa::optimize(
        |x| objective(dataset, model, &expand(x)),
        &free_bounds,
        &spec.config,
    )?;
    let values = expand(&result.best_position);
    let objective_value = objective(dataset, model, &values);
    let params = ParamVector::new(model, values)?;
    let initial_best = result
        .initial_fitness
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);

    Ok(FittedModel {
        model,
        params,
        objective_value,
        config_used: spec.config.clone(),
        dataset_name: dataset.name().to_owned(),
        underdetermined: dataset.k() <= dim,
        iterations: result.iterations,
        history: result.history,
        initial_best,
    })
}

/// Seed used for the model at `index` in a batch run.
pub fn sub_seed(seed: u64, model: ModelId) -> u64 {
    seed ^ model.index() as u64
}

/// Fits several models independently, each with seed `seed XOR model_index`.
/// Output order follows `models`; `execution` never changes the results.
pub fn fit_all(
    dataset: &FailureDataset,
    models: &[ModelId],
    spec: &FitSpec,
    fixed_for: impl Fn(ModelId) -> Vec<(usize, f64)> + Sync + Send,
    execution: Execution,
) -> Vec<Result<FittedModel, FitError>> {
    execution.map(models, |&model| {
        let config = SsaConfig {
            seed: sub_seed(spec.config.seed, model),
            ..spec.config.clone()
        };
        let spec = FitSpec {
            config,
            bounds: None,
            fixed: fixed_for(model),
        };
        fit_model_with(dataset, model, &spec)
    })
}
