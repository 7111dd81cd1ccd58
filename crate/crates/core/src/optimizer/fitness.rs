//! Watermarking objective: stay close to a PSNR target while keeping the
//! watermark readable after a fixed set of attacks.

use crate::attacks::{apply_attack, AttackSpec};
use crate::codec::{embed, extract, BlockAssignment, WatermarkBits};
use crate::error::{Error, Result};
use crate::imaging::RasterImage;
use crate::key::WatermarkKey;
use crate::metrics::{nc, psnr_scoped, PsnrScope, PEAK};
use crate::transforms::GraphPolicy;

use super::encoding::{decode_agent, AgentEncoding};
use super::woa::Objective;

pub const DEFAULT_PSNR_TARGET: f64 = 45.0;
pub const DEFAULT_PSNR_WEIGHT: f64 = 10.0;

/// Highest finite PSNR an 8-bit image with `samples` values can have: a
/// single sample off by one level. Stands in for an unchanged image, whose
/// PSNR is infinite, inside the objective.
pub fn psnr_ceiling(samples: usize) -> f64 {
    10.0 * (PEAK * PEAK * samples as f64).log10()
}

/// `weight * |psnr - target| + (1 - mean_nc)`
pub fn fitness_value(psnr: f64, mean_nc: f64, target: f64, weight: f64) -> f64 {
    weight * (psnr - target).abs() + (1.0 - mean_nc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitnessBreakdown {
    pub fitness: f64,
    /// Infinite when embedding left the host untouched.
    pub psnr: f64,
    /// 1 when no attacks are configured.
    pub mean_nc: f64,
    /// NC per attack, in the order the attacks were given.
    pub nc: Vec<f64>,
}

/// Everything needed to score one candidate assignment.
#[derive(Debug, Clone)]
pub struct FitnessContext<'a> {
    pub host: &'a RasterImage,
    pub watermark: &'a WatermarkBits,
    pub attacks: &'a [AttackSpec],
    pub policy: &'a GraphPolicy,
    pub encoding: AgentEncoding,
    pub psnr_target: f64,
    pub psnr_weight: f64,
    pub psnr_scope: PsnrScope,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub breakdown: FitnessBreakdown,
    pub watermarked: RasterImage,
    pub key: WatermarkKey,
}

impl FitnessContext<'_> {
    pub fn evaluate_assignment(&self, assignment: &[BlockAssignment]) -> Result<Evaluation> {
        let (watermarked, key) = embed(self.host, self.watermark, assignment, self.policy)?;
        let psnr = psnr_scoped(self.host, &watermarked, self.psnr_scope)?;
        let scores = self
            .attacks
            .iter()
            .map(|spec| {
                let attacked = apply_attack(&watermarked, spec)?;
                nc(self.watermark, &extract(&attacked, &key, self.policy)?)
            })
            .collect::<Result<Vec<f64>>>()?;
        let mean_nc = if scores.is_empty() {
            1.0
        } else {
            scores.iter().sum::<f64>() / scores.len() as f64
        };
        let samples = match self.psnr_scope {
            PsnrScope::AllChannels => self.host.data().len(),
            PsnrScope::EmbeddingChannel => self.host.width() * self.host.height(),
        };
        let fitness = fitness_value(
            psnr.min(psnr_ceiling(samples)),
            mean_nc,
            self.psnr_target,
            self.psnr_weight,
        );
        if !fitness.is_finite() {
            return Err(Error::NonFinite(format!(
                "fitness {fitness} (psnr {psnr}, mean nc {mean_nc})"
            )));
        }
        Ok(Evaluation {
            breakdown: FitnessBreakdown {
                fitness,
                psnr,
                mean_nc,
                nc: scores,
            },
            watermarked,
            key,
        })
    }

    pub fn watermark_fitness(&self, position: &[f64]) -> Result<FitnessBreakdown> {
        let decoded = decode_agent(position, &self.encoding)?;
        Ok(self.evaluate_assignment(&decoded.assignment())?.breakdown)
    }
}

impl Objective for FitnessContext<'_> {
    type Info = FitnessBreakdown;

    fn evaluate(&self, position: &[f64]) -> Result<(f64, FitnessBreakdown)> {
        let b = self.watermark_fitness(position)?;
        Ok((b.fitness, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::AttackKind;
    use crate::codec::sequential_assignment;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn formula() {
        assert!((fitness_value(44.0, 0.9, 45.0, 10.0) - 10.1).abs() < 1e-12);
        assert_eq!(fitness_value(45.0, 1.0, 45.0, 10.0), 0.0);
    }

    fn host() -> RasterImage {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data = (0..32 * 32 * 3).map(|_| rng.random_range(40..210)).collect();
        RasterImage::new(32, 32, 3, data).unwrap()
    }

    #[test]
    fn breakdown_is_coherent() {
        let host = host();
        let wm = WatermarkBits::random(3, 3, &mut ChaCha8Rng::seed_from_u64(1));
        let attacks: Vec<AttackSpec> =
            [AttackKind::MedianFilter, AttackKind::GaussianNoise].iter().map(|k| k.default_spec(3)).collect();
        let policy = GraphPolicy::default_uniform();
        let ctx = FitnessContext {
            host: &host,
            watermark: &wm,
            attacks: &attacks,
            policy: &policy,
            encoding: AgentEncoding::new(9, 16, 2.0, 50.0).unwrap(),
            psnr_target: 45.0,
            psnr_weight: 10.0,
            psnr_scope: PsnrScope::AllChannels,
        };
        let eval = ctx.evaluate_assignment(&sequential_assignment(9, 20.0)).unwrap();
        let b = &eval.breakdown;
        assert_eq!(b.nc.len(), 2);
        let want = fitness_value(b.psnr, b.mean_nc, 45.0, 10.0);
        assert!((b.fitness - want).abs() <= 1e-12);

        let none = FitnessContext { attacks: &[], ..ctx.clone() };
        let b0 = none.evaluate_assignment(&sequential_assignment(9, 20.0)).unwrap().breakdown;
        assert_eq!(b0.mean_nc, 1.0);
        assert!((b0.fitness - 10.0 * (b0.psnr - 45.0).abs()).abs() <= 1e-12);
    }

    #[test]
    fn untouched_host_scores_at_ceiling() {
        // a black host cannot absorb any watermark energy after clamping
        let host = RasterImage::filled(16, 16, 3, 0).unwrap();
        let wm = WatermarkBits::new(2, 1, vec![0, 0]).unwrap();
        let policy = GraphPolicy::default_uniform();
        let ctx = FitnessContext {
            host: &host,
            watermark: &wm,
            attacks: &[],
            policy: &policy,
            encoding: AgentEncoding::new(2, 4, 2.0, 50.0).unwrap(),
            psnr_target: 45.0,
            psnr_weight: 10.0,
            psnr_scope: PsnrScope::AllChannels,
        };
        let b = ctx.evaluate_assignment(&sequential_assignment(2, 5.0)).unwrap().breakdown;
        assert!(b.psnr.is_infinite());
        let ceiling = psnr_ceiling(16 * 16 * 3);
        assert!((ceiling - 10.0 * (65025.0f64 * 768.0).log10()).abs() < 1e-12);
        assert!((b.fitness - 10.0 * (ceiling - 45.0)).abs() < 1e-9);
    }
}
