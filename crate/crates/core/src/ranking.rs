//! Weighted-criteria ranking.
//!
//! For criteria values `a_ij` (model `i`, criterion `j`):
//!
//! * rating `X_ij = (Amax_j − a_ij)/(Amax_j − Amin_j)` for lower-is-better
//!   columns and `(a_ij − Amin_j)/(Amax_j − Amin_j)` for higher-is-better ones;
//! * weight `W_ij = 1 − X_ij`;
//! * weighted value `A_ij = W_ij · a_ij`;
//! * permanent value `Z_i = Σ_j A_ij / Σ_j W_ij`.
//!
//! Models are ranked by ascending `Z`.
//!
//! Which direction each column uses, and whether PRR enters signed or as an
//! absolute value, is set by a [`DirectionRegistry`]. The default,
//! [`DirectionRegistry::uniform`], rates every column lower-is-better and
//! takes PRR in absolute value. [`DirectionRegistry::semantic`] uses each
//! criterion's natural direction (R² higher-is-better) and signed PRR.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::criteria::{CriteriaMatrix, CriterionId, Direction};

/// How PRR values enter the ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrrMode {
    Raw,
    Absolute,
}

impl FromStr for PrrMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "raw" => Ok(PrrMode::Raw),
            "absolute" | "abs" => Ok(PrrMode::Absolute),
            other => Err(format!(
                "prr_direction must be `raw` or `absolute`, got `{other}`"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionRegistry {
    directions: BTreeMap<CriterionId, Direction>,
    pub prr: PrrMode,
}

impl Default for DirectionRegistry {
    fn default() -> Self {
        Self::uniform()
    }
}

impl DirectionRegistry {
    /// Every criterion lower-is-better, PRR in absolute value.
    pub fn uniform() -> Self {
        Self {
            directions: CriterionId::ALL
                .iter()
                .map(|&c| (c, Direction::LowerIsBetter))
                .collect(),
            prr: PrrMode::Absolute,
        }
    }

    /// Natural directions (R² higher-is-better), signed PRR.
    pub fn semantic() -> Self {
        Self {
            directions: CriterionId::ALL
                .iter()
                .map(|&c| (c, c.direction()))
                .collect(),
            prr: PrrMode::Raw,
        }
    }

    pub fn with_direction(mut self, criterion: CriterionId, direction: Direction) -> Self {
        self.directions.insert(criterion, direction);
        self
    }

    pub fn with_prr(mut self, prr: PrrMode) -> Self {
        self.prr = prr;
        self
    }

    pub fn direction(&self, criterion: CriterionId) -> Direction {
        self.directions
            .get(&criterion)
            .copied()
            .unwrap_or_else(|| criterion.direction())
    }

    /// The value of `criterion` as it enters the ranking.
    pub fn effective_value(&self, criterion: CriterionId, value: f64) -> f64 {
        if criterion == CriterionId::PRR && self.prr == PrrMode::Absolute {
            value.abs()
        } else {
            value
        }
    }
}

pub type Grid = Vec<Vec<f64>>;

/// Ratings `X` for a values grid with per-column directions. Degenerate
/// columns (`Amax = Amin`) rate every model 1.
pub fn rate(values: &[Vec<f64>], directions: &[Direction]) -> Grid {
    let cols = directions.len();
    let mut lo = vec![f64::INFINITY; cols];
    let mut hi = vec![f64::NEG_INFINITY; cols];
    for row in values {
        for j in 0..cols {
            lo[j] = lo[j].min(row[j]);
            hi[j] = hi[j].max(row[j]);
        }
    }
    values
        .iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let range = hi[j] - lo[j];
                    if range == 0.0 {
                        return 1.0;
                    }
                    let x = match directions[j] {
                        Direction::LowerIsBetter => (hi[j] - row[j]) / range,
                        Direction::HigherIsBetter => (row[j] - lo[j]) / range,
                    };
                    x.clamp(0.0, 1.0)
                })
                .collect()
        })
        .collect()
}

/// `W = 1 − X`.
pub fn weights(ratings: &[Vec<f64>]) -> Grid {
    ratings
        .iter()
        .map(|row| row.iter().map(|x| 1.0 - x).collect())
        .collect()
}

/// `A = W ⊙ a`.
pub fn weighted_values(weights: &[Vec<f64>], values: &[Vec<f64>]) -> Grid {
    weights
        .iter()
        .zip(values)
        .map(|(w, a)| w.iter().zip(a).map(|(w, a)| w * a).collect())
        .collect()
}

/// `(ΣW_i, ΣA_i, Z_i)` per model; `Z_i = −∞` when `ΣW_i = 0`.
pub fn permanent_values(weighted: &[Vec<f64>], weights: &[Vec<f64>]) -> Vec<(f64, f64, f64)> {
    weighted
        .iter()
        .zip(weights)
        .map(|(a, w)| {
            let sum_w: f64 = w.iter().sum();
            let sum_a: f64 = a.iter().sum();
            let z = if sum_w == 0.0 {
                f64::NEG_INFINITY
            } else {
                sum_a / sum_w
            };
            (sum_w, sum_a, z)
        })
        .collect()
}

/// 1-based ranks by ascending `Z`, then ascending `ΣW`, then name.
pub fn rank(z: &[f64], sum_weight: &[f64], names: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&i, &j| {
        z[i].total_cmp(&z[j])
            .then(sum_weight[i].total_cmp(&sum_weight[j]))
            .then_with(|| names[i].cmp(&names[j]))
            .then(i.cmp(&j))
    });
    let mut ranks = vec![0; z.len()];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos + 1;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingResult {
    pub models: Vec<String>,
    pub criteria: Vec<CriterionId>,
    /// Values as they entered the ranking (PRR possibly absolute).
    pub values: Grid,
    pub ratings: Grid,
    pub weights: Grid,
    pub weighted: Grid,
    pub sum_weight: Vec<f64>,
    pub sum_weighted_value: Vec<f64>,
    pub permanent_value: Vec<f64>,
    pub rank: Vec<usize>,
}

impl RankingResult {
    /// Model names ordered from rank 1 downwards.
    pub fn ordered(&self) -> Vec<&str> {
        let mut idx: Vec<usize> = (0..self.models.len()).collect();
        idx.sort_by_key(|&i| self.rank[i]);
        idx.into_iter().map(|i| self.models[i].as_str()).collect()
    }

    pub fn best(&self) -> &str {
        self.ordered()[0]
    }

    pub fn rank_of(&self, model: &str) -> Option<usize> {
        self.models
            .iter()
            .position(|m| m == model)
            .map(|i| self.rank[i])
    }

    /// CSV `model,sum_weight,sum_weighted_value,permanent_value,rank` in input order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,sum_weight,sum_weighted_value,permanent_value,rank\n");
        for i in 0..self.models.len() {
            let name = &self.models[i];
            let name = if name.contains([',', '"']) {
                format!("\"{}\"", name.replace('"', "\"\""))
            } else {
                name.clone()
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                name,
                self.sum_weight[i],
                self.sum_weighted_value[i],
                self.permanent_value[i],
                self.rank[i]
            );
        }
        out
    }
}

/// Runs the full rating → weighting → permanent value → rank pipeline.
pub fn rank_models(matrix: &CriteriaMatrix, registry: &DirectionRegistry) -> RankingResult {
    let criteria = matrix.criteria().to_vec();
    let values: Grid = matrix
        .values()
        .iter()
        .map(|row| {
            row.iter()
                .zip(&criteria)
                .map(|(&v, &c)| registry.effective_value(c, v))
                .collect()
        })
        .collect();
    let directions: Vec<Direction> = criteria.iter().map(|&c| registry.direction(c)).collect();
    let ratings = rate(&values, &directions);
    let w = weights(&ratings);
    let a = weighted_values(&w, &values);
    let perm = permanent_values(&a, &w);
    let sum_weight: Vec<f64> = perm.iter().map(|p| p.0).collect();
    let sum_weighted_value = perm.iter().map(|p| p.1).collect();
    let permanent_value: Vec<f64> = perm.iter().map(|p| p.2).collect();
    let models = matrix.models().to_vec();
    let ranks = rank(&permanent_value, &sum_weight, &models);
    RankingResult {
        models,
        criteria,
        values,
        ratings,
        weights: w,
        weighted: a,
        sum_weight,
        sum_weighted_value,
        permanent_value,
        rank: ranks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use Direction::*;

    #[test]
    fn rating_extremes() {
        let x = rate(&[vec![1.0], vec![3.0], vec![2.0]], &[LowerIsBetter]);
        assert_eq!(x, vec![vec![1.0], vec![0.0], vec![0.5]]);
        let x = rate(&[vec![1.0], vec![3.0]], &[HigherIsBetter]);
        assert_eq!(x, vec![vec![0.0], vec![1.0]]);
        let x = rate(&[vec![2.0], vec![2.0]], &[LowerIsBetter]);
        assert_eq!(x, vec![vec![1.0], vec![1.0]]);
    }

    #[test]
    fn mse_column_example() {
        // Goel-O. MSE 6.6637 in a column spanning [1.1412, 8.6727].
        let x = rate(
            &[vec![6.6637], vec![1.1412], vec![8.6727]],
            &[LowerIsBetter],
        );
        let oracle = (8.6727 - 6.6637) / (8.6727 - 1.1412);
        assert_relative_eq!(x[0][0], oracle, max_relative = 1e-14);
        assert!((x[0][0] - 0.2668).abs() < 1e-4);
        let w = weights(&x);
        assert!((w[0][0] - 0.7332).abs() < 1e-4);
        let a = weighted_values(&w, &[vec![6.6637], vec![1.1412], vec![8.6727]]);
        assert!((a[0][0] - 4.8855).abs() < 1e-3, "{}", a[0][0]);
    }

    #[test]
    fn weights_and_signs() {
        assert_eq!(weights(&[vec![1.0, 0.0]]), vec![vec![0.0, 1.0]]);
        let a = weighted_values(
            &[vec![0.0, 0.0], vec![0.5, 1.0]],
            &[vec![3.0, 4.0], vec![-4.4564, 2.0]],
        );
        assert_eq!(a[0], vec![0.0, 0.0]);
        assert!(a[1][0] < 0.0);
    }

    #[test]
    fn dominant_model_ranks_first() {
        let p = permanent_values(
            &[vec![0.0, 0.0], vec![1.0, 2.0]],
            &[vec![0.0, 0.0], vec![1.0, 1.0]],
        );
        assert_eq!(p[0].2, f64::NEG_INFINITY);
        assert_eq!(p[1].2, 1.5);
        let names = vec!["b".to_string(), "a".to_string()];
        assert_eq!(
            rank(&[p[0].2, p[1].2], &[p[0].0, p[1].0], &names),
            vec![1, 2]
        );
    }

    #[test]
    fn rank_examples() {
        let names: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        assert_eq!(rank(&[3.0, 1.0, 2.0], &[0.0; 3], &names), vec![3, 1, 2]);
        assert_eq!(rank(&[1.0; 3], &[2.0, 1.0, 2.0], &names), vec![2, 1, 3]);
        assert_eq!(rank(&[1.0; 3], &[1.0; 3], &names), vec![1, 2, 3]);
    }

    #[test]
    fn two_model_dominance() {
        let m = CriteriaMatrix::new(
            vec!["good".into(), "bad".into()],
            vec![CriterionId::MSE, CriterionId::SSE, CriterionId::AE],
            vec![vec![1.0, 2.0, 0.1], vec![3.0, 5.0, 0.2]],
        )
        .unwrap();
        let r = rank_models(&m, &DirectionRegistry::default());
        assert!(r.permanent_value[0] < r.permanent_value[1]);
        assert_eq!(r.sum_weight[0], 0.0);
        assert_eq!(r.best(), "good");
        let single =
            CriteriaMatrix::new(vec!["only".into()], vec![CriterionId::MSE], vec![vec![2.0]])
                .unwrap();
        assert_eq!(
            rank_models(&single, &DirectionRegistry::default()).rank,
            vec![1]
        );
    }

    #[test]
    fn registries() {
        let p = DirectionRegistry::uniform();
        assert_eq!(p.direction(CriterionId::Rsq), LowerIsBetter);
        assert_eq!(p.effective_value(CriterionId::PRR, -3.0), 3.0);
        let s = DirectionRegistry::semantic();
        assert_eq!(s.direction(CriterionId::Rsq), HigherIsBetter);
        assert_eq!(s.effective_value(CriterionId::PRR, -3.0), -3.0);
        let custom = s
            .with_direction(CriterionId::Noise, HigherIsBetter)
            .with_prr(PrrMode::Absolute);
        assert_eq!(custom.direction(CriterionId::Noise), HigherIsBetter);
        assert_eq!("abs".parse::<PrrMode>().unwrap(), PrrMode::Absolute);
        assert!("signed".parse::<PrrMode>().is_err());
    }

    #[test]
    fn ranking_csv_layout() {
        let m = CriteriaMatrix::new(
            vec!["A".into(), "B".into()],
            vec![CriterionId::MSE],
            vec![vec![1.0], vec![2.0]],
        )
        .unwrap();
        let csv = rank_models(&m, &DirectionRegistry::default()).to_csv();
        assert_eq!(
            csv,
            "model,sum_weight,sum_weighted_value,permanent_value,rank\nA,0,0,-inf,1\nB,1,2,2,2\n"
        );
    }

    fn grid() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Direction>)> {
        (1usize..8, 1usize..6).prop_flat_map(|(n, m)| {
            (
                prop::collection::vec(prop::collection::vec(-50.0f64..50.0, m), n),
                prop::collection::vec(
                    prop::bool::ANY.prop_map(|b| if b { HigherIsBetter } else { LowerIsBetter }),
                    m,
                ),
            )
        })
    }

    proptest! {
        #[test]
        fn ratings_and_weights_in_unit_interval((values, dirs) in grid()) {
            let x = rate(&values, &dirs);
            let w = weights(&x);
            for (xr, wr) in x.iter().zip(&w) {
                for (&xv, &wv) in xr.iter().zip(wr) {
                    prop_assert!((0.0..=1.0).contains(&xv));
                    prop_assert!((0.0..=1.0).contains(&wv));
                }
            }
        }

        #[test]
        fn positive_column_scaling_keeps_ratings((values, dirs) in grid(), c in 0.01f64..100.0) {
            let scaled: Vec<Vec<f64>> = values.iter().map(|r| r.iter().map(|v| v * c).collect()).collect();
            let (x, y) = (rate(&values, &dirs), rate(&scaled, &dirs));
            for (a, b) in x.iter().flatten().zip(y.iter().flatten()) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn duplicate_row_keeps_other_ratings((values, dirs) in grid(), pick in 0usize..8) {
            let mut dup = values.clone();
            dup.push(values[pick % values.len()].clone());
            let (x, y) = (rate(&values, &dirs), rate(&dup, &dirs));
            for (a, b) in x.iter().zip(&y) {
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn weakly_best_model_ranks_first((mut values, dirs) in grid()) {
            let best: Vec<f64> = (0..dirs.len())
                .map(|j| {
                    let col = values.iter().map(|r| r[j]);
                    match dirs[j] {
                        LowerIsBetter => col.fold(f64::INFINITY, f64::min),
                        HigherIsBetter => col.fold(f64::NEG_INFINITY, f64::max),
                    }
                })
                .collect();
            values.push(best);
            let x = rate(&values, &dirs);
            let w = weights(&x);
            let a = weighted_values(&w, &values);
            let p = permanent_values(&a, &w);
            let n = values.len() - 1;
            prop_assert_eq!(p[n].0, 0.0);
            let names: Vec<String> = (0..values.len()).map(|i| format!("m{i:02}")).collect();
            let z: Vec<f64> = p.iter().map(|q| q.2).collect();
            let sw: Vec<f64> = p.iter().map(|q| q.0).collect();
            // Ties among several fully dominant rows are broken by name; the
            // appended row must still share rank-1 permanent value.
            let r = rank(&z, &sw, &names);
            let first = r.iter().position(|&k| k == 1).unwrap();
            prop_assert_eq!(z[first], f64::NEG_INFINITY);
            prop_assert_eq!(z[n], f64::NEG_INFINITY);
        }
    }
}
