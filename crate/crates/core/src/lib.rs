//! Semi-blind image watermarking in the wavelet domain.
//!
//! Each watermark bit lives in one 8x8 block of the host's blue channel: the
//! block goes through a one-level Haar DWT, its LL band through a path-graph
//! transform and an SVD, and the largest singular value is shifted up (bit 1)
//! or down (bit 0) by a per-block strength. Extraction repeats the cascade
//! and compares against the host value stored in the key. A whale
//! optimization search picks the blocks and strengths.

pub mod attacks;
pub mod bench;
pub mod cli;
pub mod codec;
pub mod error;
pub mod imaging;
pub mod key;
pub mod metrics;
pub mod optimizer;
pub mod transforms;

pub use error::{Error, Result};
