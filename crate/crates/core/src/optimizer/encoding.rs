//! Mapping between a 2M-gene search vector and a block/strength assignment.
//!
//! Genes `0..M` select blocks (`floor`, clamped into the grid), genes `M..2M`
//! are strengths clamped into the alpha bounds. A block picked twice keeps
//! its first occurrence; each later duplicate, in gene order, takes the
//! smallest block index that no gene selects and that has not been handed out.

use serde::{Deserialize, Serialize};

use crate::codec::BlockAssignment;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentEncoding {
    /// Watermark bit count M.
    pub bits: usize,
    /// Blocks available in the host grid.
    pub blocks: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
}

impl AgentEncoding {
    pub fn new(bits: usize, blocks: usize, alpha_min: f64, alpha_max: f64) -> Result<Self> {
        let enc = Self {
            bits,
            blocks,
            alpha_min,
            alpha_max,
        };
        enc.validate()?;
        Ok(enc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bits == 0 {
            return Err(Error::InvalidArgument("watermark has no bits".into()));
        }
        if self.bits > self.blocks {
            return Err(Error::Capacity {
                bits: self.bits,
                blocks: self.blocks,
            });
        }
        if !(self.alpha_min > 0.0 && self.alpha_min < self.alpha_max && self.alpha_max.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "alpha bounds ({}, {}) must satisfy 0 < min < max",
                self.alpha_min, self.alpha_max
            )));
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        2 * self.bits
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(0.0, self.blocks as f64); self.bits];
        b.extend(std::iter::repeat_n((self.alpha_min, self.alpha_max), self.bits));
        b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedAgent {
    pub blocks: Vec<usize>,
    pub alphas: Vec<f64>,
}

impl DecodedAgent {
    pub fn assignment(&self) -> Vec<BlockAssignment> {
        self.blocks
            .iter()
            .zip(&self.alphas)
            .map(|(&block, &alpha)| BlockAssignment { block, alpha })
            .collect()
    }
}

pub fn decode_agent(position: &[f64], encoding: &AgentEncoding) -> Result<DecodedAgent> {
    encoding.validate()?;
    let m = encoding.bits;
    if position.len() != 2 * m {
        return Err(Error::Dimension(format!(
            "agent has {} genes, encoding needs {}",
            position.len(),
            2 * m
        )));
    }
    let last = (encoding.blocks - 1) as f64;
    let raw: Vec<usize> = position[..m]
        .iter()
        .map(|&g| {
            let g = if g.is_nan() { 0.0 } else { g };
            g.floor().clamp(0.0, last) as usize
        })
        .collect();

    let mut used = vec![false; encoding.blocks];
    let mut keep = vec![false; m];
    for (i, &b) in raw.iter().enumerate() {
        if !used[b] {
            used[b] = true;
            keep[i] = true;
        }
    }
    let mut next_free = 0;
    let blocks = raw
        .iter()
        .zip(&keep)
        .map(|(&b, &kept)| {
            if kept {
                return b;
            }
            while used[next_free] {
                next_free += 1;
            }
            used[next_free] = true;
            next_free
        })
        .collect();

    let alphas = position[m..]
        .iter()
        .map(|&g| {
            let g = if g.is_nan() { encoding.alpha_min } else { g };
            g.clamp(encoding.alpha_min, encoding.alpha_max)
        })
        .collect();
    Ok(DecodedAgent { blocks, alphas })
}
