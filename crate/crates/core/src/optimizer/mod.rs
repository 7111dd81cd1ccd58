//! Per-block embedding strength and block placement chosen by a whale swarm.

mod encoding;
mod fitness;
mod woa;

pub use encoding::{decode_agent, AgentEncoding, DecodedAgent};
pub use fitness::{
    fitness_value, psnr_ceiling, Evaluation, FitnessBreakdown, FitnessContext, DEFAULT_PSNR_TARGET,
    DEFAULT_PSNR_WEIGHT,
};
pub use woa::{
    a_coefficient, move_agent, woa_run, HistoryEntry, IterationSnapshot, MoveDraw, Objective,
    SearchAgent, WoaConfig, WoaOutcome,
};

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::attacks::{AttackKind, AttackSpec};
use crate::codec::WatermarkBits;
use crate::error::{Error, Result};
use crate::imaging::{extract_channel, read_to_string, BlockGrid, RasterImage};
use crate::key::WatermarkKey;
use crate::metrics::{format_psnr, PsnrScope};
use crate::transforms::GraphPolicy;

/// Below this, a bit-1 change spread evenly over an 8x8 block stays under
/// half a gray level and rounds away, so the mark cannot survive 8-bit output.
pub const DEFAULT_ALPHA_MIN: f64 = 4.0;
pub const DEFAULT_ALPHA_MAX: f64 = 50.0;

/// Settings for a watermark optimization run. Missing fields in a config
/// file take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeConfig {
    pub population: usize,
    pub max_iter: usize,
    pub spiral_constant: f64,
    pub seed: u64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub psnr_target: f64,
    pub psnr_weight: f64,
    pub psnr_scope: PsnrScope,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            population: 20,
            max_iter: 50,
            spiral_constant: 1.0,
            seed: 0,
            alpha_min: DEFAULT_ALPHA_MIN,
            alpha_max: DEFAULT_ALPHA_MAX,
            psnr_target: DEFAULT_PSNR_TARGET,
            psnr_weight: DEFAULT_PSNR_WEIGHT,
            psnr_scope: PsnrScope::AllChannels,
        }
    }
}

impl OptimizeConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = read_to_string(path.as_ref())?;
        serde_json::from_str(&text).map_err(|e| {
            Error::InvalidArgument(format!("config {}: {e}", path.as_ref().display()))
        })
    }

    pub fn woa_config(&self, encoding: &AgentEncoding) -> WoaConfig {
        WoaConfig {
            population: self.population,
            max_iter: self.max_iter,
            bounds: encoding.bounds(),
            spiral_constant: self.spiral_constant,
            seed: self.seed,
        }
    }
}

/// The objective's attack set, with every stochastic attack seeded by `seed`
/// for the whole run.
pub fn fitness_attacks(seed: u64) -> Vec<AttackSpec> {
    AttackKind::FITNESS_SUITE
        .iter()
        .map(|k| k.default_spec(seed))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRow {
    pub iteration: usize,
    pub best_fitness: f64,
    pub best_psnr: f64,
    pub mean_nc: f64,
}

#[derive(Debug, Clone)]
pub struct OptimizationOutcome {
    pub key: WatermarkKey,
    pub watermarked: RasterImage,
    pub best: FitnessBreakdown,
    pub history: Vec<HistoryRow>,
}

pub fn optimize_watermarking(
    host: &RasterImage,
    watermark: &WatermarkBits,
    attacks: &[AttackSpec],
    policy: &GraphPolicy,
    config: &OptimizeConfig,
    progress: Option<&mut dyn FnMut(&IterationSnapshot<'_, FitnessBreakdown>)>,
) -> Result<OptimizationOutcome> {
    let plane = extract_channel(host, host.embedding_channel())?;
    let grid = BlockGrid::for_plane(&plane, 2 * policy.size())?;
    let encoding = AgentEncoding::new(
        watermark.len(),
        grid.block_count(),
        config.alpha_min,
        config.alpha_max,
    )?;
    let ctx = FitnessContext {
        host,
        watermark,
        attacks,
        policy,
        encoding,
        psnr_target: config.psnr_target,
        psnr_weight: config.psnr_weight,
        psnr_scope: config.psnr_scope,
    };
    let outcome = woa_run(&ctx, &config.woa_config(&encoding), progress)?;
    let decoded = decode_agent(&outcome.best_position, &encoding)?;
    let eval = ctx.evaluate_assignment(&decoded.assignment())?;
    let history = outcome
        .history
        .iter()
        .map(|h| HistoryRow {
            iteration: h.iteration,
            best_fitness: h.best_fitness,
            best_psnr: h.best_info.psnr,
            mean_nc: h.best_info.mean_nc,
        })
        .collect();
    Ok(OptimizationOutcome {
        key: eval.key,
        watermarked: eval.watermarked,
        best: eval.breakdown,
        history,
    })
}

pub fn history_csv(rows: &[HistoryRow]) -> String {
    let mut out = String::from("iteration,best_fitness,best_psnr,mean_nc\n");
    for r in rows {
        let psnr = if r.best_psnr.is_infinite() {
            format_psnr(r.best_psnr)
        } else {
            r.best_psnr.to_string()
        };
        let _ = writeln!(out, "{},{},{},{}", r.iteration, r.best_fitness, psnr, r.mean_nc);
    }
    out
}
