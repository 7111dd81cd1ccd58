//! Embedding and semi-blind extraction.
//!
//! Per block: Haar DWT, GBT of the LL band, SVD, then the largest singular
//! value becomes `s_h + alpha` for a 1 bit or `max(s_h - alpha, 0)` for a 0
//! bit. Extraction reads the largest singular value back and compares it
//! with the stored `s_h`.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imaging::{
    extract_channel, get_block, replace_channel, BlockGrid, Plane, RasterImage,
};
use crate::key::{KeyEntry, WatermarkKey};
use crate::transforms::{
    dwt2_haar, gbt2_forward, gbt2_inverse, idwt2_haar, svd, svd_reconstruct, GraphPolicy,
};

/// Binary logo, one bit per entry, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WatermarkBits {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl WatermarkBits {
    pub fn new(width: usize, height: usize, bits: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!("empty watermark {width}x{height}")));
        }
        if bits.len() != width * height {
            return Err(Error::Dimension(format!(
                "{width}x{height} watermark needs {} bits, got {}",
                width * height,
                bits.len()
            )));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidArgument(format!("watermark bit {b} is not 0 or 1")));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn random<R: Rng + ?Sized>(width: usize, height: usize, rng: &mut R) -> Self {
        let bits = (0..width * height).map(|_| rng.random_range(0..=1u8)).collect();
        Self {
            width,
            height,
            bits,
        }
    }

    /// Thresholds at 128: bright pixels are 1. RGB input uses BT.601 luma.
    pub fn from_image(image: &RasterImage) -> Self {
        let bits = image
            .data()
            .chunks_exact(image.channels())
            .map(|px| {
                let level = if px.len() == 3 {
                    0.299 * f64::from(px[0]) + 0.587 * f64::from(px[1]) + 0.114 * f64::from(px[2])
                } else {
                    f64::from(px[0])
                };
                u8::from(level >= 128.0)
            })
            .collect();
        Self {
            width: image.width(),
            height: image.height(),
            bits,
        }
    }

    /// Black/white grayscale rendering (1 -> 255).
    pub fn to_image(&self) -> RasterImage {
        let data = self.bits.iter().map(|&b| b * 255).collect();
        RasterImage::new(self.width, self.height, 1, data).expect("validated dimensions")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn same_shape(&self, other: &WatermarkBits) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Block and strength chosen for one watermark bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockAssignment {
    pub block: usize,
    pub alpha: f64,
}

/// Block `0..M` in order, all with the same strength.
pub fn sequential_assignment(bits: usize, alpha: f64) -> Vec<BlockAssignment> {
    (0..bits).map(|block| BlockAssignment { block, alpha }).collect()
}

/// `bits` distinct blocks drawn uniformly from the grid.
pub fn random_assignment<R: Rng + ?Sized>(
    bits: usize,
    blocks: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<Vec<BlockAssignment>> {
    if bits > blocks {
        return Err(Error::Capacity { bits, blocks });
    }
    Ok(sample(rng, blocks, bits)
        .into_iter()
        .map(|block| BlockAssignment { block, alpha })
        .collect())
}

pub fn assignment_from_key(key: &WatermarkKey) -> Vec<BlockAssignment> {
    key.entries
        .iter()
        .map(|e| BlockAssignment {
            block: e.block,
            alpha: e.alpha,
        })
        .collect()
}

fn block_size(policy: &GraphPolicy) -> usize {
    policy.size() * 2
}

fn check_block(block: &Plane, policy: &GraphPolicy) -> Result<()> {
    let n = block_size(policy);
    if block.width() != n || block.height() != n {
        return Err(Error::Dimension(format!(
            "expected {n}x{n} block, got {}x{}",
            block.width(),
            block.height()
        )));
    }
    Ok(())
}

/// Largest singular value of the block's GBT-transformed LL band.
pub fn block_singular_value(block: &Plane, policy: &GraphPolicy) -> Result<f64> {
    check_block(block, policy)?;
    let bands = dwt2_haar(block)?;
    let graph = policy.graph_for(&bands.ll)?;
    let coeffs = gbt2_forward(&bands.ll, &graph)?;
    Ok(svd(&coeffs)?.largest())
}

/// Embeds one bit; returns the modified block (unquantized) and the host's
/// largest singular value.
pub fn embed_bit(block: &Plane, bit: u8, alpha: f64, policy: &GraphPolicy) -> Result<(Plane, f64)> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    if bit > 1 {
        return Err(Error::InvalidArgument(format!("bit {bit} is not 0 or 1")));
    }
    check_block(block, policy)?;
    let mut bands = dwt2_haar(block)?;
    let graph = policy.graph_for(&bands.ll)?;
    let coeffs = gbt2_forward(&bands.ll, &graph)?;
    let mut triple = svd(&coeffs)?;
    let s_h = triple.s[0];
    // s[0] may fall below s[1] for a 0 bit; the decoder still reads a value <= s_h.
    triple.s[0] = if bit == 1 { s_h + alpha } else { (s_h - alpha).max(0.0) };
    let modified = svd_reconstruct(&triple)?;
    bands.ll = gbt2_inverse(&modified, &graph)?;
    Ok((idwt2_haar(&bands)?, s_h))
}

/// Decodes one bit: 1 iff the recovered largest singular value exceeds `s_h`.
pub fn extract_bit(block: &Plane, s_h: f64, policy: &GraphPolicy) -> Result<u8> {
    Ok(u8::from(block_singular_value(block, policy)? > s_h))
}

fn grid_for(image: &RasterImage, policy: &GraphPolicy) -> Result<(usize, Plane, BlockGrid)> {
    let channel = image.embedding_channel();
    let plane = extract_channel(image, channel)?;
    let grid = BlockGrid::for_plane(&plane, block_size(policy))?;
    Ok((channel, plane, grid))
}

/// Embeds the whole watermark. Bit `i` (row-major) goes to `assignment[i]`.
pub fn embed(
    host: &RasterImage,
    watermark: &WatermarkBits,
    assignment: &[BlockAssignment],
    policy: &GraphPolicy,
) -> Result<(RasterImage, WatermarkKey)> {
    let (channel, mut plane, grid) = grid_for(host, policy)?;
    let (bits, blocks) = (watermark.len(), grid.block_count());
    if bits > blocks {
        return Err(Error::Capacity { bits, blocks });
    }
    if assignment.len() != bits {
        return Err(Error::InvalidArgument(format!(
            "{} assignments for {bits} watermark bits",
            assignment.len()
        )));
    }
    let mut seen = HashSet::with_capacity(bits);
    for a in assignment {
        if a.block >= blocks {
            return Err(Error::OutOfRange {
                index: a.block,
                limit: blocks,
            });
        }
        if !seen.insert(a.block) {
            return Err(Error::DuplicateBlock(a.block));
        }
        if !(a.alpha.is_finite() && a.alpha > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be positive, got {}",
                a.alpha
            )));
        }
    }

    let results: Vec<(Plane, f64)> = assignment
        .par_iter()
        .zip(watermark.bits().par_iter())
        .map(|(a, &bit)| embed_bit(&get_block(&plane, &grid, a.block)?, bit, a.alpha, policy))
        .collect::<Result<_>>()?;

    let mut entries = Vec::with_capacity(bits);
    for (a, (block, s_h)) in assignment.iter().zip(results) {
        crate::imaging::set_block(&mut plane, &grid, a.block, &block)?;
        entries.push(KeyEntry {
            block: a.block,
            alpha: a.alpha,
            s_h,
        });
    }
    let watermarked = replace_channel(host, channel, &plane)?;
    let key = WatermarkKey::new(
        grid.block_size,
        policy.kind(),
        watermark.width(),
        watermark.height(),
        entries,
    )?;
    Ok((watermarked, key))
}

pub fn extract(
    image: &RasterImage,
    key: &WatermarkKey,
    policy: &GraphPolicy,
) -> Result<WatermarkBits> {
    key.validate()?;
    if key.graph != policy.kind() {
        return Err(Error::Key(format!(
            "key was made with graph '{}', extractor uses '{}'",
            key.graph,
            policy.kind()
        )));
    }
    if key.block_size != block_size(policy) {
        return Err(Error::Key(format!(
            "key block size {} does not match the {}-point graph",
            key.block_size,
            policy.size()
        )));
    }
    let (_, plane, grid) = grid_for(image, policy)?;
    if let Some(e) = key.entries.iter().find(|e| e.block >= grid.block_count()) {
        return Err(Error::OutOfRange {
            index: e.block,
            limit: grid.block_count(),
        });
    }
    let bits = key
        .entries
        .par_iter()
        .map(|e| extract_bit(&get_block(&plane, &grid, e.block)?, e.s_h, policy))
        .collect::<Result<Vec<u8>>>()?;
    WatermarkBits::new(key.wm_width, key.wm_height, bits)
}
