//! Whale Optimization Algorithm over a bounded box.
//!
//! Per agent and iteration one of three moves is taken: encircling the best
//! agent (`p < 0.5`, `|A| < 1`), searching toward a random agent
//! (`p < 0.5`, `|A| >= 1`), or a logarithmic spiral around the best agent
//! (`p >= 0.5`). `a` falls linearly from 2 to 0 over the run.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WoaConfig {
    pub population: usize,
    pub max_iter: usize,
    /// Inclusive `(lower, upper)` per dimension.
    pub bounds: Vec<(f64, f64)>,
    pub spiral_constant: f64,
    pub seed: u64,
}

impl WoaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::InvalidArgument(format!(
                "population must be at least 2, got {}",
                self.population
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if self.bounds.is_empty() {
            return Err(Error::InvalidArgument("search space has no dimensions".into()));
        }
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidArgument(format!(
                    "dimension {i}: bounds ({lo}, {hi}) are not an interval"
                )));
            }
        }
        if !self.spiral_constant.is_finite() {
            return Err(Error::InvalidArgument("spiral constant must be finite".into()));
        }
        Ok(())
    }

    fn clamp(&self, position: &mut [f64]) {
        for (x, &(lo, hi)) in position.iter_mut().zip(&self.bounds) {
            *x = x.clamp(lo, hi);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchAgent {
    pub position: Vec<f64>,
    /// Lower is better.
    pub fitness: f64,
}

/// Something to minimise. `Info` carries whatever the caller wants recorded
/// alongside each fitness value (unit for plain functions).
pub trait Objective: Sync {
    type Info: Clone + Send;

    fn evaluate(&self, position: &[f64]) -> Result<(f64, Self::Info)>;
}

impl<F> Objective for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    type Info = ();

    fn evaluate(&self, position: &[f64]) -> Result<(f64, ())> {
        Ok((self(position), ()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry<I> {
    pub iteration: usize,
    pub best_fitness: f64,
    pub best_info: I,
}

/// Read-only view handed to progress observers after each iteration.
#[derive(Debug)]
pub struct IterationSnapshot<'a, I> {
    pub iteration: usize,
    pub max_iter: usize,
    pub a: f64,
    pub best_fitness: f64,
    pub best_position: &'a [f64],
    pub best_info: &'a I,
}

#[derive(Debug, Clone)]
pub struct WoaOutcome<I> {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    pub best_info: I,
    /// Best fitness after each iteration; entry `t` follows update `t`.
    pub history: Vec<HistoryEntry<I>>,
    pub population: Vec<SearchAgent>,
}

/// `a` at iteration `t`: 2 at the start, 0 at `max_iter`.
pub fn a_coefficient(t: usize, max_iter: usize) -> f64 {
    2.0 * (1.0 - t as f64 / max_iter as f64)
}

/// Random draws behind a single position update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveDraw {
    /// `A = 2 a r1 - a`
    pub big_a: f64,
    /// `C = 2 r2`
    pub big_c: f64,
    pub p: f64,
    /// Spiral parameter in `[-1, 1]`.
    pub l: f64,
}

/// New position for `current` given the best agent, a randomly picked agent
/// for the exploration branch and the draws for this move. Not clamped.
pub fn move_agent(
    current: &[f64],
    leader: &[f64],
    random_agent: &[f64],
    draw: MoveDraw,
    spiral_constant: f64,
) -> Vec<f64> {
    let MoveDraw { big_a, big_c, p, l } = draw;
    if p < 0.5 {
        let target = if big_a.abs() < 1.0 { leader } else { random_agent };
        current
            .iter()
            .zip(target)
            .map(|(&x, &t)| t - big_a * (big_c * t - x).abs())
            .collect()
    } else {
        let factor = (spiral_constant * l).exp() * (2.0 * PI * l).cos();
        current
            .iter()
            .zip(leader)
            .map(|(&x, &t)| (t - x).abs() * factor + t)
            .collect()
    }
}

fn evaluate_all<O: Objective>(objective: &O, agents: &[Vec<f64>]) -> Result<Vec<(f64, O::Info)>> {
    let results: Vec<(f64, O::Info)> = agents
        .par_iter()
        .map(|x| objective.evaluate(x))
        .collect::<Result<_>>()?;
    if let Some((i, (f, _))) = results.iter().enumerate().find(|(_, (f, _))| !f.is_finite()) {
        return Err(Error::NonFinite(format!(
            "objective returned {f} for agent {i} at {:?}",
            &agents[i][..agents[i].len().min(8)]
        )));
    }
    Ok(results)
}

/// Lowest fitness; ties go to the lowest index.
fn argmin<I>(results: &[(f64, I)]) -> usize {
    let mut best = 0;
    for (i, (f, _)) in results.iter().enumerate().skip(1) {
        if *f < results[best].0 {
            best = i;
        }
    }
    best
}

pub fn woa_run<O: Objective>(
    objective: &O,
    config: &WoaConfig,
    mut progress: Option<&mut dyn FnMut(&IterationSnapshot<'_, O::Info>)>,
) -> Result<WoaOutcome<O::Info>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.population;

    let mut positions: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            config
                .bounds
                .iter()
                .map(|&(lo, hi)| lo + rng.random::<f64>() * (hi - lo))
                .collect()
        })
        .collect();
    let mut results = evaluate_all(objective, &positions)?;
    let i0 = argmin(&results);
    let mut best_position = positions[i0].clone();
    let (mut best_fitness, mut best_info) = results[i0].clone();
    let mut history = Vec::with_capacity(config.max_iter);

    for t in 0..config.max_iter {
        let a = a_coefficient(t, config.max_iter);
        for i in 0..n {
            let r1: f64 = rng.random();
            let r2: f64 = rng.random();
            let p: f64 = rng.random();
            let l: f64 = rng.random_range(-1.0..=1.0);
            let draw = MoveDraw {
                big_a: 2.0 * a * r1 - a,
                big_c: 2.0 * r2,
                p,
                l,
            };
            let partner = if p < 0.5 && draw.big_a.abs() >= 1.0 {
                rng.random_range(0..n)
            } else {
                i
            };
            let mut next = move_agent(
                &positions[i],
                &best_position,
                &positions[partner],
                draw,
                config.spiral_constant,
            );
            config.clamp(&mut next);
            positions[i] = next;
        }

        results = evaluate_all(objective, &positions)?;
        let i = argmin(&results);
        if results[i].0 < best_fitness {
            best_position = positions[i].clone();
            (best_fitness, best_info) = results[i].clone();
        }
        history.push(HistoryEntry {
            iteration: t + 1,
            best_fitness,
            best_info: best_info.clone(),
        });
        if let Some(observer) = progress.as_mut() {
            observer(&IterationSnapshot {
                iteration: t + 1,
                max_iter: config.max_iter,
                a,
                best_fitness,
                best_position: &best_position,
                best_info: &best_info,
            });
        }
    }

    let population = positions
        .into_iter()
        .zip(results)
        .map(|(position, (fitness, _))| SearchAgent { position, fitness })
        .collect();
    Ok(WoaOutcome {
        best_position,
        best_fitness,
        best_info,
        history,
        population,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    fn config(dim: usize, seed: u64) -> WoaConfig {
        WoaConfig {
            population: 30,
            max_iter: 500,
            bounds: vec![(-10.0, 10.0); dim],
            spiral_constant: 1.0,
            seed,
        }
    }

    #[test]
    fn a_schedule_endpoints() {
        assert_eq!(a_coefficient(0, 1000), 2.0);
        assert_eq!(a_coefficient(1000, 1000), 0.0);
        assert_eq!(a_coefficient(250, 1000), 1.5);
    }

    #[test]
    fn zero_a_encircling_lands_on_leader() {
        let draw = MoveDraw { big_a: 0.0, big_c: 1.3, p: 0.2, l: 0.4 };
        let leader = [1.0, -2.0, 3.5];
        let out = move_agent(&[9.0, 9.0, 9.0], &leader, &[0.0; 3], draw, 1.0);
        assert_eq!(out, leader.to_vec());
    }

    #[test]
    fn exploration_uses_random_agent() {
        let draw = MoveDraw { big_a: 1.5, big_c: 1.0, p: 0.1, l: 0.0 };
        let out = move_agent(&[0.0], &[100.0], &[2.0], draw, 1.0);
        // 2 - 1.5 * |1*2 - 0|
        assert_eq!(out, vec![-1.0]);
    }

    #[test]
    fn spiral_branch() {
        let draw = MoveDraw { big_a: 0.3, big_c: 1.0, p: 0.7, l: 0.5 };
        let out = move_agent(&[1.0], &[3.0], &[0.0], draw, 1.0);
        let want = 2.0 * 0.5f64.exp() * PI.cos() + 3.0;
        assert!((out[0] - want).abs() < 1e-12);
        // l = 0 sits at distance D from the leader
        let d0 = MoveDraw { l: 0.0, ..draw };
        assert_eq!(move_agent(&[1.0], &[3.0], &[0.0], d0, 1.0), vec![5.0]);
    }

    #[test]
    fn sphere_converges() {
        let out = woa_run(&sphere, &config(10, 1), None).unwrap();
        assert!(out.best_fitness < 1e-3, "{}", out.best_fitness);
        assert_eq!(out.history.len(), 500);
    }

    #[test]
    fn history_monotone_and_bounds_respected() {
        let shifted = |x: &[f64]| x.iter().map(|v| (v - 9.5).powi(2)).sum::<f64>();
        let cfg = WoaConfig { max_iter: 60, ..config(5, 3) };
        let mut observed = 0;
        let mut obs = |s: &IterationSnapshot<'_, ()>| {
            observed += 1;
            assert!(s.best_position.iter().all(|v| (-10.0..=10.0).contains(v)));
        };
        let out = woa_run(&shifted, &cfg, Some(&mut obs)).unwrap();
        assert_eq!(observed, 60);
        assert!(out.history.windows(2).all(|w| w[1].best_fitness <= w[0].best_fitness));
        for agent in &out.population {
            assert!(agent.position.iter().all(|v| (-10.0..=10.0).contains(v)));
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let cfg = WoaConfig { max_iter: 40, ..config(6, 77) };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| woa_run(&sphere, &cfg, None).unwrap())
        };
        let (a, b) = (run(1), run(4));
        assert_eq!(a.best_position, b.best_position);
        assert_eq!(a.best_fitness.to_bits(), b.best_fitness.to_bits());
    }

    #[test]
    fn non_finite_objective_aborts() {
        let nan = |x: &[f64]| if x[0] > 0.0 { f64::NAN } else { 1.0 };
        let err = woa_run(&nan, &WoaConfig { max_iter: 5, ..config(2, 0) }, None).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
    }

    #[test]
    fn invalid_configs() {
        for cfg in [
            WoaConfig { population: 1, ..config(2, 0) },
            WoaConfig { max_iter: 0, ..config(2, 0) },
            WoaConfig { bounds: vec![(1.0, 1.0)], ..config(2, 0) },
            WoaConfig { bounds: vec![], ..config(2, 0) },
        ] {
            assert!(woa_run(&sphere, &cfg, None).is_err());
        }
    }
}
