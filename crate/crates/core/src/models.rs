//! Catalog of the sixteen NHPP software reliability growth models.
//!
//! Each model supplies a closed-form mean-value function `m(t)` (expected
//! cumulative faults by time `t`), its analytic intensity `λ(t) = dm/dt`,
//! named parameters with validity constraints, and a scale-aware default
//! search box for fitting.
//!
//! Exponential terms go through [`exp_clamped`], so finite valid inputs never
//! produce NaN.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::FailureDataset;

/// Lower edge of every default search interval.
pub const BOUND_FLOOR: f64 = 1e-6;
/// Exponent magnitude beyond which `exp` arguments are clamped.
pub const EXP_CLAMP: f64 = 700.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{model}: expected {expected} parameters, got {got}")]
    Dimension {
        model: ModelId,
        expected: usize,
        got: usize,
    },
    #[error("{model}: parameter {name} = {value} violates {constraint}")]
    Constraint {
        model: ModelId,
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error("time must be finite and nonnegative, got {0}")]
    Time(f64),
    #[error("unknown model `{given}`; valid names: {valid}")]
    UnknownModel { given: String, valid: String },
    #[error("invalid bounds: {0}")]
    Bounds(String),
}

/// Identity of one of the sixteen catalogued models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelId {
    GoelOkumoto,
    GeneralizedGoel,
    Gompertz,
    InflectedS,
    LogisticGrowth,
    MusaOkumoto,
    YamadaDelayedS,
    ModifiedDuane,
    PhamZhangIFD,
    YamadaRayleigh,
    YamadaImperfect1,
    YamadaImperfect2,
    YamadaExponential,
    PNZ,
    PhamZhang,
    ZTP,
}

/// How a parameter's default search interval is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scale {
    /// Total-fault scale: `(floor, 100·m_k]`.
    Faults,
    /// Rate or shape exponent: `(floor, 5]`.
    Rate,
    /// Fraction strictly inside `(0, 1)`.
    Unit,
    /// Dimensionless inflection or saturation factor: `(floor, 100]`.
    Factor,
    /// Time scale: `(floor, 100·t_k]`.
    Time,
    /// Zhang-Teng-Pham `p`, kept above every admissible `β`: `[1, 2]`.
    AboveUnit,
}

struct ParamSpec {
    name: &'static str,
    scale: Scale,
}

const fn p(name: &'static str, scale: Scale) -> ParamSpec {
    ParamSpec { name, scale }
}

use Scale::*;

const GO: &[ParamSpec] = &[p("a", Faults), p("b", Rate)];
const GGOEL: &[ParamSpec] = &[p("a", Faults), p("b", Rate), p("c", Rate)];
const GOMPERTZ: &[ParamSpec] = &[p("a", Faults), p("b", Unit), p("k", Unit)];
const INF_S: &[ParamSpec] = &[p("a", Faults), p("b", Rate), p("beta", Factor)];
const LOGISTIC: &[ParamSpec] = &[p("a", Faults), p("b", Rate), p("k", Factor)];
const MODI_D: &[ParamSpec] = &[p("a", Faults), p("b", Time), p("c", Rate)];
const PZ_IFD: &[ParamSpec] = &[p("a", Faults), p("b", Rate), p("d", Rate)];
const Y_RAY: &[ParamSpec] = &[p("a", Faults), p("alpha", Factor), p("beta", Rate)];
const Y_M: &[ParamSpec] = &[p("a", Faults), p("b", Rate), p("alpha", Rate)];
const Y_EXP: &[ParamSpec] = &[p("a", Faults), p("r_alpha", Factor), p("beta", Rate)];
const PNZ: &[ParamSpec] = &[
    p("a", Faults),
    p("b", Rate),
    p("alpha", Rate),
    p("beta", Factor),
];
const PZ: &[ParamSpec] = &[
    p("a", Faults),
    p("b", Rate),
    p("c", Faults),
    p("alpha", Rate),
    p("beta", Factor),
];
const ZTP: &[ParamSpec] = &[
    p("a", Faults),
    p("b", Rate),
    p("c", Rate),
    p("p", AboveUnit),
    p("alpha", Factor),
    p("beta", Unit),
];

impl ModelId {
    pub const ALL: [ModelId; 16] = [
        ModelId::GoelOkumoto,
        ModelId::GeneralizedGoel,
        ModelId::Gompertz,
        ModelId::InflectedS,
        ModelId::LogisticGrowth,
        ModelId::MusaOkumoto,
        ModelId::YamadaDelayedS,
        ModelId::ModifiedDuane,
        ModelId::PhamZhangIFD,
        ModelId::YamadaRayleigh,
        ModelId::YamadaImperfect1,
        ModelId::YamadaImperfect2,
        ModelId::YamadaExponential,
        ModelId::PNZ,
        ModelId::PhamZhang,
        ModelId::ZTP,
    ];

    /// Position in [`ModelId::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// Display name used in every table and report.
    pub fn short_name(self) -> &'static str {
        match self {
            ModelId::GoelOkumoto => "Goel-O.",
            ModelId::GeneralizedGoel => "G.Goel",
            ModelId::Gompertz => "Gompert",
            ModelId::InflectedS => "Inf. S.",
            ModelId::LogisticGrowth => "Log. Gro.",
            ModelId::MusaOkumoto => "Musa-O.",
            ModelId::YamadaDelayedS => "Y. Del.",
            ModelId::ModifiedDuane => "Modi-D.",
            ModelId::PhamZhangIFD => "P-Z-IFD",
            ModelId::YamadaRayleigh => "Y. Ray.",
            ModelId::YamadaImperfect1 => "Y. M1",
            ModelId::YamadaImperfect2 => "Y. M2",
            ModelId::YamadaExponential => "Y. Exp.",
            ModelId::PNZ => "P-N-Z",
            ModelId::PhamZhang => "P-Z",
            ModelId::ZTP => "Z-T-P",
        }
    }

    /// Short name with spaces and periods removed, as accepted on the command line.
    pub fn cli_name(self) -> String {
        self.short_name()
            .chars()
            .filter(|c| !matches!(c, ' ' | '.'))
            .collect()
    }

    fn specs(self) -> &'static [ParamSpec] {
        match self {
            ModelId::GoelOkumoto | ModelId::MusaOkumoto | ModelId::YamadaDelayedS => GO,
            ModelId::GeneralizedGoel => GGOEL,
            ModelId::Gompertz => GOMPERTZ,
            ModelId::InflectedS => INF_S,
            ModelId::LogisticGrowth => LOGISTIC,
            ModelId::ModifiedDuane => MODI_D,
            ModelId::PhamZhangIFD => PZ_IFD,
            ModelId::YamadaRayleigh => Y_RAY,
            ModelId::YamadaImperfect1 | ModelId::YamadaImperfect2 => Y_M,
            ModelId::YamadaExponential => Y_EXP,
            ModelId::PNZ => PNZ,
            ModelId::PhamZhang => PZ,
            ModelId::ZTP => ZTP,
        }
    }

    pub fn param_names(self) -> Vec<&'static str> {
        self.specs().iter().map(|s| s.name).collect()
    }

    /// Number of free parameters.
    pub fn dim(self) -> usize {
        self.specs().len()
    }

    /// Checks a raw parameter slice against the model's constraint region.
    pub fn check_params(self, params: &[f64]) -> Result<(), ModelError> {
        let specs = self.specs();
        if params.len() != specs.len() {
            return Err(ModelError::Dimension {
                model: self,
                expected: specs.len(),
                got: params.len(),
            });
        }
        for (spec, &value) in specs.iter().zip(params) {
            let (ok, constraint) = match (self, spec.name) {
                (ModelId::Gompertz, "b" | "k") => (value > 0.0 && value < 1.0, "0 < x < 1"),
                (ModelId::ZTP, "beta") => (value >= 0.0, "x >= 0"),
                _ => (value > 0.0, "x > 0"),
            };
            if !ok || !value.is_finite() {
                return Err(ModelError::Constraint {
                    model: self,
                    name: spec.name,
                    value,
                    constraint,
                });
            }
        }
        if self == ModelId::ZTP && params[3] <= params[5] {
            return Err(ModelError::Constraint {
                model: self,
                name: "p",
                value: params[3],
                constraint: "p > beta",
            });
        }
        Ok(())
    }

    /// Default search box for fitting this model to `dataset`.
    pub fn default_bounds(self, dataset: &FailureDataset) -> ParamBounds {
        let fault_scale = 100.0 * dataset.total_faults().max(1.0);
        let time_scale = 100.0 * dataset.last_time();
        let (lower, upper) = self
            .specs()
            .iter()
            .map(|s| match s.scale {
                Faults => (BOUND_FLOOR, fault_scale),
                Rate => (BOUND_FLOOR, 5.0),
                Unit => (BOUND_FLOOR, 1.0 - BOUND_FLOOR),
                Factor => (BOUND_FLOOR, 100.0),
                Time => (BOUND_FLOOR, time_scale.max(1.0)),
                AboveUnit => (1.0, 2.0),
            })
            .unzip();
        ParamBounds { lower, upper }
    }

    /// Mean-value function `m(t)`.
    pub fn mean_value(self, params: &[f64], t: f64) -> Result<f64, ModelError> {
        self.check_params(params)?;
        check_time(t)?;
        Ok(mean_value_unchecked(self, params, t))
    }

    /// Failure intensity `λ(t) = dm/dt`.
    pub fn intensity(self, params: &[f64], t: f64) -> Result<f64, ModelError> {
        self.check_params(params)?;
        check_time(t)?;
        Ok(intensity_unchecked(self, params, t))
    }

    /// Estimated cumulative faults at the last observation time, `m(t_k)`.
    pub fn total_expected_faults(
        self,
        params: &[f64],
        dataset: &FailureDataset,
    ) -> Result<f64, ModelError> {
        self.mean_value(params, dataset.last_time())
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

fn normalize(s: &str) -> String {
    s.chars()
        .filter(|c| !matches!(c, ' ' | '.' | '-' | '_'))
        .flat_map(char::to_lowercase)
        .collect()
}

impl FromStr for ModelId {
    type Err = ModelError;

    /// Accepts the short table names with or without spaces, periods and
    /// hyphens (case-insensitive), as well as the variant names.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = normalize(s);
        ModelId::ALL
            .into_iter()
            .find(|m| normalize(m.short_name()) == wanted || normalize(&format!("{m:?}")) == wanted)
            .ok_or_else(|| ModelError::UnknownModel {
                given: s.to_owned(),
                valid: ModelId::ALL
                    .iter()
                    .map(|m| m.cli_name())
                    .collect::<Vec<_>>()
                    .join(", "),
            })
    }
}

/// Validated parameter values for one model, in the model's declared order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    model: ModelId,
    values: Vec<f64>,
}

impl ParamVector {
    pub fn new(model: ModelId, values: Vec<f64>) -> Result<Self, ModelError> {
        model.check_params(&values)?;
        Ok(Self { model, values })
    }

    pub fn model(&self) -> ModelId {
        self.model
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.model
            .specs()
            .iter()
            .position(|s| s.name == name)
            .map(|i| self.values[i])
    }

    /// `(name, value)` pairs in declaration order.
    pub fn named(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        self.model
            .specs()
            .iter()
            .map(|s| s.name)
            .zip(self.values.iter().copied())
    }

    pub fn mean_value(&self, t: f64) -> Result<f64, ModelError> {
        check_time(t)?;
        Ok(mean_value_unchecked(self.model, &self.values, t))
    }

    pub fn intensity(&self, t: f64) -> Result<f64, ModelError> {
        check_time(t)?;
        Ok(intensity_unchecked(self.model, &self.values, t))
    }
}

/// Per-parameter closed search box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ParamBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, ModelError> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(ModelError::Bounds(format!(
                "{} lower vs {} upper entries",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(ModelError::Bounds(format!(
                    "coordinate {i}: need finite lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }
}

fn check_time(t: f64) -> Result<(), ModelError> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::Time(t))
    }
}

/// `exp(x)` with `x` clamped to `[-700, 700]`.
#[inline]
pub fn exp_clamped(x: f64) -> f64 {
    x.clamp(-EXP_CLAMP, EXP_CLAMP).exp()
}

/// `1 − exp(−x)` for `x ≥ 0`, accurate for small `x`.
#[inline]
fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x.min(EXP_CLAMP)).exp_m1()
}

/// `(exp(−αt) − exp(−bt)) / (b − α)`, continuous through `b = α`.
fn exp_difference_quotient(alpha: f64, b: f64, t: f64) -> f64 {
    let x = (b - alpha) * t;
    if x.abs() < 1.0 {
        let ratio = if x == 0.0 { 1.0 } else { x.exp_m1() / x };
        t * exp_clamped(-b * t) * ratio
    } else {
        (exp_clamped(-alpha * t) - exp_clamped(-b * t)) / (b - alpha)
    }
}

/// Evaluates `m(t)` without validating inputs.
/// Overflowing products saturate at `±f64::MAX`.
fn saturate(x: f64) -> f64 {
    x.clamp(-f64::MAX, f64::MAX)
}

pub(crate) fn mean_value_unchecked(model: ModelId, q: &[f64], t: f64) -> f64 {
    saturate(mean_value_raw(model, q, t))
}

pub(crate) fn intensity_unchecked(model: ModelId, q: &[f64], t: f64) -> f64 {
    saturate(intensity_raw(model, q, t))
}

fn mean_value_raw(model: ModelId, q: &[f64], t: f64) -> f64 {
    match model {
        ModelId::GoelOkumoto => q[0] * one_minus_exp_neg(q[1] * t),
        ModelId::GeneralizedGoel => q[0] * one_minus_exp_neg(q[1] * t.powf(q[2])),
        ModelId::Gompertz => {
            let (a, b, k) = (q[0], q[1], q[2]);
            a * exp_clamped(k.ln() * exp_clamped(-b * t))
        }
        ModelId::InflectedS => {
            let (a, b, beta) = (q[0], q[1], q[2]);
            let e = exp_clamped(-b * t);
            a * one_minus_exp_neg(b * t) / (1.0 + beta * e)
        }
        ModelId::LogisticGrowth => {
            let (a, b, k) = (q[0], q[1], q[2]);
            a / (1.0 + k * exp_clamped(-b * t))
        }
        ModelId::MusaOkumoto => q[0] * (q[1] * t).ln_1p(),
        ModelId::YamadaDelayedS => {
            let (a, b) = (q[0], q[1]);
            let bt = b * t;
            // 1 − (1 + bt)e^{−bt} = (1 − e^{−bt}) − bt·e^{−bt}
            a * (one_minus_exp_neg(bt) - bt * exp_clamped(-bt))
        }
        ModelId::ModifiedDuane => {
            let (a, b, c) = (q[0], q[1], q[2]);
            // 1 − (b/(b+t))^c = 1 − exp(−c·ln(1 + t/b))
            a * one_minus_exp_neg(c * (t / b).ln_1p())
        }
        ModelId::PhamZhangIFD => {
            let (a, b, d) = (q[0], q[1], q[2]);
            a - a * exp_clamped(-b * t) * (1.0 + (b + d) * t + b * d * t * t)
        }
        ModelId::YamadaRayleigh => {
            let (a, alpha, beta) = (q[0], q[1], q[2]);
            let inner = one_minus_exp_neg(beta * t * t / 2.0);
            a * one_minus_exp_neg(alpha * inner)
        }
        ModelId::YamadaImperfect1 => {
            let (a, b, alpha) = (q[0], q[1], q[2]);
            a * b * (exp_clamped(alpha * t) - exp_clamped(-b * t)) / (alpha + b)
        }
        ModelId::YamadaImperfect2 => {
            let (a, b, alpha) = (q[0], q[1], q[2]);
            a * one_minus_exp_neg(b * t) * (1.0 - alpha / b) + a * alpha * t
        }
        ModelId::YamadaExponential => {
            let (a, g, beta) = (q[0], q[1], q[2]);
            a * one_minus_exp_neg(g * one_minus_exp_neg(beta * t))
        }
        ModelId::PNZ => {
            let (a, b, alpha, beta) = (q[0], q[1], q[2], q[3]);
            let num = a * one_minus_exp_neg(b * t) * (1.0 - alpha / b) + a * alpha * t;
            num / (1.0 + beta * exp_clamped(-b * t))
        }
        ModelId::PhamZhang => {
            let (a, b, c, alpha, beta) = (q[0], q[1], q[2], q[3], q[4]);
            let num =
                (c + a) * one_minus_exp_neg(b * t) - a * b * exp_difference_quotient(alpha, b, t);
            num / (1.0 + beta * exp_clamped(-b * t))
        }
        ModelId::ZTP => {
            let (a, b, c, pp, alpha, beta) = (q[0], q[1], q[2], q[3], q[4], q[5]);
            let gap = pp - beta;
            let e = exp_clamped(-b * t);
            // 1 − (1+α)e/(1+αe) = (1 − e)/(1 + αe)
            let base = one_minus_exp_neg(b * t) / (1.0 + alpha * e);
            a / gap * base.powf(c / b * gap)
        }
    }
}

/// Evaluates `λ(t) = dm/dt` without validating inputs.
fn intensity_raw(model: ModelId, q: &[f64], t: f64) -> f64 {
    match model {
        ModelId::GoelOkumoto => q[0] * q[1] * exp_clamped(-q[1] * t),
        ModelId::GeneralizedGoel => {
            let (a, b, c) = (q[0], q[1], q[2]);
            let tc = t.powf(c);
            a * b * c * t.powf(c - 1.0) * exp_clamped(-b * tc)
        }
        ModelId::Gompertz => {
            let (a, b, k) = (q[0], q[1], q[2]);
            let e = exp_clamped(-b * t);
            -a * b * k.ln() * e * exp_clamped(k.ln() * e)
        }
        ModelId::InflectedS => {
            let (a, b, beta) = (q[0], q[1], q[2]);
            let e = exp_clamped(-b * t);
            let den = 1.0 + beta * e;
            a * b * e * (1.0 + beta) / (den * den)
        }
        ModelId::LogisticGrowth => {
            let (a, b, k) = (q[0], q[1], q[2]);
            let e = exp_clamped(-b * t);
            let den = 1.0 + k * e;
            a * k * b * e / (den * den)
        }
        ModelId::MusaOkumoto => q[0] * q[1] / (1.0 + q[1] * t),
        ModelId::YamadaDelayedS => {
            let (a, b) = (q[0], q[1]);
            a * b * b * t * exp_clamped(-b * t)
        }
        ModelId::ModifiedDuane => {
            let (a, b, c) = (q[0], q[1], q[2]);
            a * c / (b + t) * exp_clamped(-c * (t / b).ln_1p())
        }
        ModelId::PhamZhangIFD => {
            let (a, b, d) = (q[0], q[1], q[2]);
            a * exp_clamped(-b * t) * (b * (b - d) * t + b * b * d * t * t - d)
        }
        ModelId::YamadaRayleigh => {
            let (a, alpha, beta) = (q[0], q[1], q[2]);
            let u = exp_clamped(-beta * t * t / 2.0);
            a * alpha * beta * t * u * exp_clamped(-alpha * one_minus_exp_neg(beta * t * t / 2.0))
        }
        ModelId::YamadaImperfect1 => {
            let (a, b, alpha) = (q[0], q[1], q[2]);
            a * b * (alpha * exp_clamped(alpha * t) + b * exp_clamped(-b * t)) / (alpha + b)
        }
        ModelId::YamadaImperfect2 => {
            let (a, b, alpha) = (q[0], q[1], q[2]);
            a * (b - alpha) * exp_clamped(-b * t) + a * alpha
        }
        ModelId::YamadaExponential => {
            let (a, g, beta) = (q[0], q[1], q[2]);
            let v = exp_clamped(-beta * t);
            a * g * beta * v * exp_clamped(-g * one_minus_exp_neg(beta * t))
        }
        ModelId::PNZ => {
            let (a, b, alpha, beta) = (q[0], q[1], q[2], q[3]);
            let e = exp_clamped(-b * t);
            let num = a * one_minus_exp_neg(b * t) * (1.0 - alpha / b) + a * alpha * t;
            let dnum = a * (b - alpha) * e + a * alpha;
            let den = 1.0 + beta * e;
            (dnum * den + num * b * beta * e) / (den * den)
        }
        ModelId::PhamZhang => {
            let (a, b, c, alpha, beta) = (q[0], q[1], q[2], q[3], q[4]);
            let e = exp_clamped(-b * t);
            let quot = exp_difference_quotient(alpha, b, t);
            let num = (c + a) * one_minus_exp_neg(b * t) - a * b * quot;
            // d/dt quot = e^{−bt} − α·quot
            let dnum = c * b * e + a * b * alpha * quot;
            let den = 1.0 + beta * e;
            (dnum * den + num * b * beta * e) / (den * den)
        }
        ModelId::ZTP => {
            let (a, b, c, pp, alpha, beta) = (q[0], q[1], q[2], q[3], q[4], q[5]);
            let gap = pp - beta;
            let s = c / b * gap;
            let e = exp_clamped(-b * t);
            let one_minus_e = one_minus_exp_neg(b * t);
            let den = 1.0 + alpha * e;
            a / gap * s * b * (1.0 + alpha) * e * one_minus_e.powf(s - 1.0) / den.powf(s + 1.0)
        }
    }
}
