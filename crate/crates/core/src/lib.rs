//! Software reliability growth model selection.
//!
//! Fits SRGMs to cumulative failure data with the Social Spider Algorithm,
//! scores the fits on a set of goodness-of-fit criteria and ranks models by
//! weighted criteria.

pub mod cli;
pub mod criteria;
pub mod dataset;
pub mod fit;
pub mod models;
pub mod par;
pub mod ranking;
pub mod ssa;

pub use criteria::{evaluate_all, CriteriaMatrix, CriterionId, Direction};
pub use dataset::FailureDataset;
pub use fit::{fit_all, fit_model, FitSpec, FittedModel};
pub use models::{ModelId, ParamBounds, ParamVector};
pub use par::Execution;
pub use ranking::{rank_models, DirectionRegistry, RankingResult};
pub use ssa::{optimize, SsaConfig, SsaResult};
