//! Social Spider Algorithm for box-constrained continuous minimization.
//!
//! Candidate solutions are spider positions on a web. Every iteration each
//! spider emits a vibration whose intensity grows as its fitness falls;
//! vibrations attenuate with Manhattan distance, each spider keeps the
//! strongest one it has seen as its target, and then walks towards a
//! "following position" assembled from the target and random peers according
//! to a binary dimension mask.
//!
//! # Reproducibility
//!
//! A run is a pure function of `(objective, bounds, config)`. The generator is
//! [`ChaCha8Rng`] seeded with [`SeedableRng::seed_from_u64`]`(config.seed)`,
//! and uniform draws are consumed in this fixed order:
//!
//! 1. initialization, spider by spider: `D` position coordinates, then one
//!    index draw for the all-zero mask fix-up;
//! 2. each iteration, after fitness evaluation and target selection (which
//!    draw nothing), spider by spider in index order:
//!    * one draw deciding whether the mask changes, then `D` bit draws and a
//!      possible fix-up index draw if it does;
//!    * one peer-index draw per mask bit equal to 1;
//!    * one scalar inertia draw, then `D` per-dimension step draws;
//!    * one draw per coordinate that left the box.
//!
//! Fitness evaluation may run in parallel ([`SsaConfig::execution`]); results
//! are applied in index order so the draw order above is unaffected.

use rand::distributions::{Distribution, Open01};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::ParamBounds;
use crate::par::Execution;

/// Fitness assigned to positions where the objective is NaN or infinite.
pub const PENALTY_FITNESS: f64 = 1e100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SsaError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("fitness {fitness} is not above the intensity constant C = {c}")]
    FitnessBelowConstant { fitness: f64, c: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsaConfig {
    /// Population size.
    pub pop: usize,
    /// Attenuation rate `r_a`.
    pub attenuation_rate: f64,
    /// Base probability `p_c` that a spider keeps its mask.
    pub mask_change: f64,
    /// Probability `p_m` that a regenerated mask bit is one.
    pub mask_one: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Intensity constant `C`; must lie below every fitness value.
    pub intensity_constant: f64,
    /// Stop early after this many iterations without improvement.
    pub stall_window: Option<usize>,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for SsaConfig {
    fn default() -> Self {
        Self {
            pop: 40,
            attenuation_rate: 1.0,
            mask_change: 0.7,
            mask_one: 0.1,
            max_iters: 500,
            seed: 0,
            intensity_constant: -1e-6,
            stall_window: None,
            execution: Execution::Sequential,
        }
    }
}

impl SsaConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SsaError> {
        let fail = |m: String| Err(SsaError::Config(m));
        if self.pop < 2 {
            return fail(format!("pop must be at least 2, got {}", self.pop));
        }
        if !(self.attenuation_rate > 0.0 && self.attenuation_rate.is_finite()) {
            return fail(format!(
                "r_a must be positive, got {}",
                self.attenuation_rate
            ));
        }
        for (name, v) in [("p_c", self.mask_change), ("p_m", self.mask_one)] {
            if !(v > 0.0 && v < 1.0) {
                return fail(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        if self.max_iters == 0 {
            return fail("max_iters must be at least 1".into());
        }
        if !(self.intensity_constant < 0.0 && self.intensity_constant.is_finite()) {
            return fail(format!(
                "C must be negative and finite, got {}",
                self.intensity_constant
            ));
        }
        if self.stall_window == Some(0) {
            return fail("stall window must be at least 1".into());
        }
        Ok(())
    }
}

/// A vibration as received by a spider.
#[derive(Debug, Clone, PartialEq)]
pub struct Vibration {
    pub source: Vec<f64>,
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spider {
    pub position: Vec<f64>,
    pub fitness: f64,
    pub target: Vibration,
    /// Iterations since the target vibration last changed.
    pub inactive: u32,
    pub previous_move: Vec<f64>,
    pub mask: Vec<bool>,
}

impl Spider {
    /// A spider at `position` with no movement history, an all-zero mask and
    /// itself as a zero-intensity target.
    pub fn new(position: Vec<f64>) -> Self {
        let d = position.len();
        Self {
            target: Vibration {
                source: position.clone(),
                intensity: 0.0,
            },
            position,
            fitness: f64::INFINITY,
            inactive: 0,
            previous_move: vec![0.0; d],
            mask: vec![false; d],
        }
    }
}

/// `I = ln(1/(f − C) + 1)`.
pub fn source_intensity(fitness: f64, c: f64) -> Result<f64, SsaError> {
    if fitness > c {
        Ok((1.0 / (fitness - c)).ln_1p())
    } else {
        Err(SsaError::FitnessBelowConstant { fitness, c })
    }
}

/// Intensity after travelling Manhattan distance `distance`:
/// `I·exp(−d/(σ̄·r_a))`. With `σ̄ = 0` (all spiders coincide) only the
/// zero-distance vibration survives.
pub fn attenuated_intensity(intensity: f64, distance: f64, sigma_bar: f64, r_a: f64) -> f64 {
    if distance == 0.0 {
        intensity
    } else if sigma_bar == 0.0 {
        0.0
    } else {
        intensity * (-distance / (sigma_bar * r_a)).exp()
    }
}

pub fn manhattan(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Mean over dimensions of the sample standard deviation of positions.
pub fn mean_std(positions: &[Vec<f64>]) -> f64 {
    let n = positions.len();
    if n < 2 {
        return 0.0;
    }
    let d = positions[0].len();
    let mut total = 0.0;
    for j in 0..d {
        let mean = positions.iter().map(|p| p[j]).sum::<f64>() / n as f64;
        let var = positions.iter().map(|p| (p[j] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        total += var.sqrt();
    }
    total / d as f64
}

/// Replaces the spider's target with the strongest received vibration if it
/// is strictly stronger than the stored one; otherwise the spider grows more
/// inactive. Ties go to the lowest index.
pub fn select_target(spider: &mut Spider, received: &[Vibration]) {
    let best = received
        .iter()
        .fold(None::<&Vibration>, |best, v| match best {
            Some(b) if b.intensity >= v.intensity => Some(b),
            _ => Some(v),
        });
    match best {
        Some(v) if v.intensity > spider.target.intensity => {
            spider.target = v.clone();
            spider.inactive = 0;
        }
        _ => spider.inactive += 1,
    }
}

/// Repairs a mask so it is neither all zeros nor all ones.
fn fix_mask<R: Rng + ?Sized>(mask: &mut [bool], rng: &mut R) {
    if mask.iter().all(|&b| !b) {
        let i = rng.gen_range(0..mask.len());
        mask[i] = true;
    } else if mask.iter().all(|&b| b) {
        let i = rng.gen_range(0..mask.len());
        mask[i] = false;
    }
}

/// With probability `1 − p_c^{d_in}` redraws every mask bit (one w.p. `p_m`),
/// then repairs degenerate masks. Returns whether the mask was redrawn.
pub fn update_mask<R: Rng + ?Sized>(spider: &mut Spider, p_c: f64, p_m: f64, rng: &mut R) -> bool {
    let change_prob = 1.0 - p_c.powi(spider.inactive.min(i32::MAX as u32) as i32);
    let changed = rng.gen::<f64>() < change_prob;
    if changed {
        for bit in spider.mask.iter_mut() {
            *bit = rng.gen::<f64>() < p_m;
        }
    }
    fix_mask(&mut spider.mask, rng);
    changed
}

/// Coordinate `i` comes from the target source where the mask bit is 0 and
/// from a uniformly chosen spider (redrawn per coordinate) where it is 1.
pub fn following_position<R: Rng + ?Sized>(
    spider: &Spider,
    positions: &[Vec<f64>],
    rng: &mut R,
) -> Vec<f64> {
    spider
        .mask
        .iter()
        .enumerate()
        .map(|(i, &bit)| {
            if bit {
                positions[rng.gen_range(0..positions.len())][i]
            } else {
                spider.target.source[i]
            }
        })
        .collect()
}

/// `p + prev·r + (p_fo − p)⊙R` for explicit random factors.
pub fn walk_step(
    position: &[f64],
    previous_move: &[f64],
    follow: &[f64],
    r: f64,
    steps: &[f64],
) -> Vec<f64> {
    position
        .iter()
        .zip(previous_move)
        .zip(follow.iter().zip(steps))
        .map(|((&p, &prev), (&fo, &rr))| p + prev * r + (fo - p) * rr)
        .collect()
}

/// Draws the inertia scalar and per-dimension factors, returns the proposed
/// position and records the move in `spider.previous_move`.
pub fn random_walk<R: Rng + ?Sized>(spider: &mut Spider, follow: &[f64], rng: &mut R) -> Vec<f64> {
    let r: f64 = rng.gen();
    let steps: Vec<f64> = (0..follow.len()).map(|_| rng.gen()).collect();
    let next = walk_step(&spider.position, &spider.previous_move, follow, r, &steps);
    for ((m, n), p) in spider
        .previous_move
        .iter_mut()
        .zip(&next)
        .zip(&spider.position)
    {
        *m = n - p;
    }
    next
}

/// Pulls an out-of-box coordinate back to a random point between the old
/// coordinate and the violated bound; `r ∈ (0, 1)`.
pub fn clamp_coordinate(old: f64, proposed: f64, lower: f64, upper: f64, r: f64) -> f64 {
    if proposed > upper {
        old + (upper - old) * r
    } else if proposed < lower {
        old - (old - lower) * r
    } else {
        proposed
    }
}

pub fn clamp_to_bounds<R: Rng + ?Sized>(
    old: &[f64],
    proposed: &[f64],
    bounds: &ParamBounds,
    rng: &mut R,
) -> Vec<f64> {
    old.iter()
        .zip(proposed)
        .zip(bounds.lower().iter().zip(bounds.upper()))
        .map(|((&o, &p), (&lo, &hi))| {
            if p > hi || p < lo || p.is_nan() {
                let r: f64 = Open01.sample(rng);
                // NaN proposals are treated as overshooting the upper bound.
                let p = if p.is_nan() { f64::INFINITY } else { p };
                clamp_coordinate(o, p, lo, hi, r)
            } else {
                p
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsaResult {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Best-ever fitness after each iteration's evaluation step.
    pub history: Vec<f64>,
    /// Fitness of every member of the initial population.
    pub initial_fitness: Vec<f64>,
    pub iterations: usize,
}

impl SsaResult {
    /// History as CSV `iter,best_fitness`, iterations numbered from 1.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("iter,best_fitness\n");
        for (i, f) in self.history.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, f));
        }
        out
    }
}

fn sanitize(f: f64) -> f64 {
    if f.is_finite() {
        f
    } else {
        PENALTY_FITNESS
    }
}

/// Minimizes `objective` over `bounds`.
pub fn optimize<F>(
    objective: F,
    bounds: &ParamBounds,
    config: &SsaConfig,
) -> Result<SsaResult, SsaError>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let mut observer = |_: usize, _: &[Spider]| {};
    optimize_observed(objective, bounds, config, &mut observer)
}

/// Like [`optimize`], calling `observer(iteration, spiders)` after each
/// iteration's moves.
pub fn optimize_observed<F, O>(
    objective: F,
    bounds: &ParamBounds,
    config: &SsaConfig,
    observer: &mut O,
) -> Result<SsaResult, SsaError>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
    O: FnMut(usize, &[Spider]),
{
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dim = bounds.dim();

    let mut spiders: Vec<Spider> = (0..config.pop)
        .map(|_| {
            let position = bounds
                .lower()
                .iter()
                .zip(bounds.upper())
                .map(|(&lo, &hi)| lo + (hi - lo) * rng.gen::<f64>())
                .collect();
            let mut s = Spider::new(position);
            fix_mask(&mut s.mask, &mut rng);
            s
        })
        .collect();

    let mut best_position = spiders[0].position.clone();
    let mut best_fitness = f64::INFINITY;
    let mut history = Vec::with_capacity(config.max_iters);
    let mut initial_fitness = Vec::new();
    let mut stall = 0usize;

    for iter in 0..config.max_iters {
        // Step 1: fitness.
        let fitness = config
            .execution
            .map(&spiders, |s| sanitize(objective(&s.position)));
        let mut improved = false;
        for (s, f) in spiders.iter_mut().zip(fitness) {
            s.fitness = f;
            if f < best_fitness {
                best_fitness = f;
                best_position.clone_from(&s.position);
                improved = true;
            }
        }
        history.push(best_fitness);
        if iter == 0 {
            initial_fitness = spiders.iter().map(|s| s.fitness).collect();
        }

        // Step 2: vibrations.
        let intensities = spiders
            .iter()
            .map(|s| source_intensity(s.fitness, config.intensity_constant))
            .collect::<Result<Vec<_>, _>>()?;
        if iter == 0 {
            for (s, &i) in spiders.iter_mut().zip(&intensities) {
                s.target = Vibration {
                    source: s.position.clone(),
                    intensity: i,
                };
            }
        }
        let positions: Vec<Vec<f64>> = spiders.iter().map(|s| s.position.clone()).collect();
        let sigma_bar = mean_std(&positions);
        let strongest = config.execution.map(&positions, |p| {
            let mut best: Option<(usize, f64)> = None;
            for (j, q) in positions.iter().enumerate() {
                let v = attenuated_intensity(
                    intensities[j],
                    manhattan(p, q),
                    sigma_bar,
                    config.attenuation_rate,
                );
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((j, v));
                }
            }
            best
        });
        for (s, best) in spiders.iter_mut().zip(strongest) {
            let received: Vec<Vibration> = best
                .map(|(j, v)| Vibration {
                    source: positions[j].clone(),
                    intensity: v,
                })
                .into_iter()
                .collect();
            select_target(s, &received);
        }

        // Steps 3-5: mask, walk, constraint handling.
        for s in spiders.iter_mut() {
            update_mask(s, config.mask_change, config.mask_one, &mut rng);
            let follow = following_position(s, &positions, &mut rng);
            let proposed = random_walk(s, &follow, &mut rng);
            s.position = clamp_to_bounds(&s.position, &proposed, bounds, &mut rng);
        }
        debug_assert!(spiders.iter().all(|s| s.position.len() == dim));
        observer(iter, &spiders);

        if improved {
            stall = 0;
        } else {
            stall += 1;
        }
        if config.stall_window.is_some_and(|w| stall >= w) {
            break;
        }
    }

    Ok(SsaResult {
        best_position,
        best_fitness,
        iterations: history.len(),
        history,
        initial_fitness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn intensity_values() {
        assert_relative_eq!(source_intensity(1.0, 0.0).unwrap(), 2f64.ln());
        // ln(1/3.000001 + 1) evaluated independently.
        let oracle = (1.0f64 / 3.000001 + 1.0).ln();
        assert_relative_eq!(
            source_intensity(3.0, -1e-6).unwrap(),
            oracle,
            max_relative = 1e-14
        );
        assert!((oracle - 0.287682).abs() < 1e-6);
        assert!(source_intensity(-1.0, -1e-6).is_err());
        assert!(source_intensity(-1e-6, -1e-6).is_err());
    }

    #[test]
    fn intensity_grows_as_gap_shrinks() {
        let c = -1e-6;
        let mut last = 0.0;
        for k in 0..12 {
            let f = 10f64.powi(-k);
            let i = source_intensity(f, c).unwrap();
            assert!(i > last);
            last = i;
        }
        assert!(source_intensity(0.0, -1e-300).unwrap() > 600.0);
    }

    #[test]
    fn attenuation_values() {
        assert_eq!(attenuated_intensity(3.0, 0.0, 1.2, 1.0), 3.0);
        assert_relative_eq!(
            attenuated_intensity(3.0, 2.4, 1.2, 2.0),
            3.0 / std::f64::consts::E
        );
        assert_relative_eq!(
            attenuated_intensity(2.0, 3.0, 1.5, 1.0),
            2.0 * (-2.0f64).exp(),
            max_relative = 1e-15
        );
        assert!((attenuated_intensity(2.0, 3.0, 1.5, 1.0) - 0.270671).abs() < 1e-6);
        assert_eq!(attenuated_intensity(3.0, 0.0, 0.0, 1.0), 3.0);
        assert_eq!(attenuated_intensity(3.0, 0.5, 0.0, 1.0), 0.0);
    }

    fn spider_with_target(intensity: f64, inactive: u32) -> Spider {
        let mut s = Spider::new(vec![0.0, 0.0]);
        s.target.intensity = intensity;
        s.inactive = inactive;
        s
    }

    fn vib(x: f64, intensity: f64) -> Vibration {
        Vibration {
            source: vec![x, x],
            intensity,
        }
    }

    #[test]
    fn target_kept_when_weaker() {
        let mut s = spider_with_target(5.0, 2);
        select_target(&mut s, &[vib(1.0, 4.0), vib(2.0, 3.0)]);
        assert_eq!(s.inactive, 3);
        assert_eq!(s.target.intensity, 5.0);
    }

    #[test]
    fn target_replaced_when_stronger() {
        let mut s = spider_with_target(5.0, 7);
        select_target(&mut s, &[vib(1.0, 4.0), vib(2.0, 6.0)]);
        assert_eq!(s.inactive, 0);
        assert_eq!(s.target, vib(2.0, 6.0));
    }

    #[test]
    fn target_kept_on_tie() {
        let mut s = spider_with_target(5.0, 0);
        select_target(&mut s, &[vib(1.0, 5.0)]);
        assert_eq!(s.inactive, 1);
        assert_eq!(s.target.source, vec![0.0, 0.0]);
    }

    #[test]
    fn mask_frozen_when_active() {
        let mut r = rng(3);
        for _ in 0..1000 {
            let mut s = Spider::new(vec![0.0; 4]);
            s.mask = vec![true, false, true, false];
            assert!(!update_mask(&mut s, 0.7, 0.1, &mut r));
            assert_eq!(s.mask, vec![true, false, true, false]);
        }
    }

    #[test]
    fn one_dimensional_mask_is_never_degenerate_pair() {
        let mut r = rng(4);
        for _ in 0..1000 {
            let mut s = Spider::new(vec![0.0]);
            s.inactive = 50;
            let before = s.mask.clone();
            let changed = update_mask(&mut s, 0.7, 0.1, &mut r);
            // D=1: all-zero becomes [1]; an all-one draw becomes [0].
            assert_eq!(s.mask.len(), 1);
            if !changed {
                assert_eq!(s.mask, vec![!before[0]]);
            }
        }
    }

    #[test]
    fn mask_never_all_zero_or_all_one() {
        let mut r = rng(5);
        let mut s = Spider::new(vec![0.0; 3]);
        for i in 0..5000u32 {
            s.inactive = i % 7;
            update_mask(&mut s, 0.7, 0.5, &mut r);
            assert!(s.mask.iter().any(|&b| b) && s.mask.iter().any(|&b| !b));
        }
    }

    #[test]
    fn following_position_hand_trace() {
        // pop=3, D=2, mask=[1,0]: coordinate 0 from a random peer, 1 from target.
        let positions = vec![vec![1.0, 10.0], vec![2.0, 20.0], vec![3.0, 30.0]];
        let mut s = Spider::new(positions[0].clone());
        s.target.source = vec![7.0, 70.0];
        s.mask = vec![true, false];
        let got = following_position(&s, &positions, &mut rng(11));
        let mut oracle = rng(11);
        let peer = oracle.gen_range(0..3usize);
        assert_eq!(got, vec![positions[peer][0], 70.0]);
    }

    #[test]
    fn walk_limits() {
        let p = [1.0, -2.0];
        let fo = [4.0, 6.0];
        assert_eq!(
            walk_step(&p, &[0.0, 0.0], &fo, 0.3, &[0.0, 0.0]),
            p.to_vec()
        );
        assert_eq!(
            walk_step(&p, &[0.0, 0.0], &fo, 0.3, &[1.0, 1.0]),
            fo.to_vec()
        );
    }

    #[test]
    fn random_walk_three_step_hand_trace() {
        let mut s = Spider::new(vec![0.5, -0.5]);
        let follows = [[1.0, 1.0], [0.0, 2.0], [-1.0, 0.0]];
        let mut r = rng(21);
        let mut oracle = rng(21);
        let (mut p, mut prev) = ([0.5f64, -0.5], [0.0f64, 0.0]);
        for fo in follows {
            let next = random_walk(&mut s, &fo, &mut r);
            s.position.clone_from(&next);
            let scalar: f64 = oracle.gen();
            let r0: f64 = oracle.gen();
            let r1: f64 = oracle.gen();
            let expect = [
                p[0] + prev[0] * scalar + (fo[0] - p[0]) * r0,
                p[1] + prev[1] * scalar + (fo[1] - p[1]) * r1,
            ];
            prev = [expect[0] - p[0], expect[1] - p[1]];
            p = expect;
            assert_eq!(next, p.to_vec());
            assert_eq!(s.previous_move, prev.to_vec());
        }
    }

    #[test]
    fn clamp_examples() {
        assert_eq!(clamp_coordinate(0.5, 0.7, 0.0, 1.0, 0.3), 0.7);
        assert_eq!(clamp_coordinate(0.5, 7.0, 0.0, 1.0, 0.5), 0.75);
        assert_eq!(clamp_coordinate(0.5, -7.0, 0.0, 1.0, 0.5), 0.25);
        let b = ParamBounds::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let out = clamp_to_bounds(&[0.5, 0.5], &[0.2, f64::NAN], &b, &mut rng(1));
        assert_eq!(out[0], 0.2);
        assert!(out[1] > 0.5 && out[1] < 1.0);
    }

    #[test]
    fn mean_std_matches_hand_value() {
        // columns: [0,2] → sd √2 ; [1,1] → 0
        let s = mean_std(&[vec![0.0, 1.0], vec![2.0, 1.0]]);
        assert_relative_eq!(s, 2f64.sqrt() / 2.0);
    }

    #[test]
    fn config_validation() {
        assert!(SsaConfig::default().validate().is_ok());
        let bad = [
            SsaConfig {
                pop: 1,
                ..Default::default()
            },
            SsaConfig {
                attenuation_rate: 0.0,
                ..Default::default()
            },
            SsaConfig {
                mask_change: 1.0,
                ..Default::default()
            },
            SsaConfig {
                mask_one: 0.0,
                ..Default::default()
            },
            SsaConfig {
                intensity_constant: 0.0,
                ..Default::default()
            },
            SsaConfig {
                max_iters: 0,
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(SsaError::Config(_))), "{c:?}");
        }
    }

    #[test]
    fn constant_objective_is_harmless() {
        let b = ParamBounds::new(vec![-1.0; 3], vec![1.0; 3]).unwrap();
        let cfg = SsaConfig {
            max_iters: 50,
            ..SsaConfig::with_seed(9)
        };
        let mut inside = true;
        let res = optimize_observed(|_| 2.5, &b, &cfg, &mut |_, sp: &[Spider]| {
            inside &= sp.iter().all(|s| b.contains(&s.position));
        })
        .unwrap();
        assert!(inside);
        assert_eq!(res.best_fitness, 2.5);
    }

    #[test]
    fn nan_objective_is_penalized() {
        let b = ParamBounds::new(vec![-1.0; 2], vec![1.0; 2]).unwrap();
        let cfg = SsaConfig {
            max_iters: 20,
            ..SsaConfig::with_seed(2)
        };
        let res = optimize(
            |x| if x[0] > 0.0 { f64::NAN } else { x[1] * x[1] },
            &b,
            &cfg,
        )
        .unwrap();
        assert!(res.best_fitness.is_finite());
        assert!(res.best_position[0] <= 0.0);
    }

    #[test]
    fn negative_fitness_below_constant_is_an_error() {
        let b = ParamBounds::new(vec![-1.0], vec![1.0]).unwrap();
        let err = optimize(|_| -1.0, &b, &SsaConfig::default()).unwrap_err();
        assert!(matches!(err, SsaError::FitnessBelowConstant { .. }));
    }

    #[test]
    fn stall_window_stops_early() {
        let b = ParamBounds::new(vec![-1.0], vec![1.0]).unwrap();
        let cfg = SsaConfig {
            stall_window: Some(5),
            ..SsaConfig::with_seed(1)
        };
        let res = optimize(|_| 1.0, &b, &cfg).unwrap();
        assert_eq!(res.iterations, 6);
    }

    #[test]
    fn deterministic_and_execution_independent() {
        let b = ParamBounds::new(vec![-5.0; 4], vec![5.0; 4]).unwrap();
        let f = |x: &[f64]| x.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>();
        let seq = SsaConfig {
            max_iters: 100,
            ..SsaConfig::with_seed(77)
        };
        let par = SsaConfig {
            execution: Execution::Parallel,
            ..seq.clone()
        };
        let a = optimize(f, &b, &seq).unwrap();
        let c = optimize(f, &b, &seq).unwrap();
        let d = optimize(f, &b, &par).unwrap();
        assert_eq!(a, c);
        assert_eq!(a, d);
        assert!(a.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn history_csv_format() {
        let r = SsaResult {
            best_position: vec![0.0],
            best_fitness: 0.5,
            history: vec![2.0, 0.5],
            initial_fitness: vec![2.0],
            iterations: 2,
        };
        assert_eq!(r.history_csv(), "iter,best_fitness\n1,2\n2,0.5\n");
    }
}
