//! Seedable signal-processing attacks applied to watermarked images.
//!
//! Stochastic attacks draw from a ChaCha8 stream seeded only by the attack's
//! own `seed`, one draw per sample in interleaved row-major order, so results
//! are reproducible regardless of threading.

mod filter;
mod jpeg;
mod noise;
mod resample;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::RasterImage;

pub use jpeg::quantization_table;

pub const DEFAULT_GAUSSIAN_VARIANCE: f64 = 0.001;
pub const DEFAULT_SALT_PEPPER_DENSITY: f64 = 0.01;
pub const DEFAULT_SPECKLE_VARIANCE: f64 = 0.04;
pub const DEFAULT_KERNEL: usize = 3;
pub const DEFAULT_SCALE: f64 = 0.5;
pub const DEFAULT_QUALITY: u8 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackKind {
    GaussianNoise,
    SaltPepper,
    Speckle,
    MedianFilter,
    AverageFilter,
    Rescale,
    JpegCompress,
}

impl AttackKind {
    pub const ALL: [AttackKind; 7] = [
        AttackKind::GaussianNoise,
        AttackKind::SaltPepper,
        AttackKind::Speckle,
        AttackKind::MedianFilter,
        AttackKind::AverageFilter,
        AttackKind::Rescale,
        AttackKind::JpegCompress,
    ];

    /// The six attacks used inside the optimization objective.
    pub const FITNESS_SUITE: [AttackKind; 6] = [
        AttackKind::AverageFilter,
        AttackKind::MedianFilter,
        AttackKind::SaltPepper,
        AttackKind::GaussianNoise,
        AttackKind::Rescale,
        AttackKind::JpegCompress,
    ];

    /// The six attack columns of the robustness report.
    pub const REPORT_SUITE: [AttackKind; 6] = [
        AttackKind::GaussianNoise,
        AttackKind::SaltPepper,
        AttackKind::Speckle,
        AttackKind::MedianFilter,
        AttackKind::Rescale,
        AttackKind::JpegCompress,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttackKind::GaussianNoise => "gaussian-noise",
            AttackKind::SaltPepper => "salt-pepper",
            AttackKind::Speckle => "speckle",
            AttackKind::MedianFilter => "median-filter",
            AttackKind::AverageFilter => "average-filter",
            AttackKind::Rescale => "rescale",
            AttackKind::JpegCompress => "jpeg-compress",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(
            self,
            AttackKind::GaussianNoise | AttackKind::SaltPepper | AttackKind::Speckle
        )
    }

    /// The attack with its default parameters.
    pub fn default_spec(self, seed: u64) -> AttackSpec {
        match self {
            AttackKind::GaussianNoise => AttackSpec::GaussianNoise {
                variance: DEFAULT_GAUSSIAN_VARIANCE,
                seed,
            },
            AttackKind::SaltPepper => AttackSpec::SaltPepper {
                density: DEFAULT_SALT_PEPPER_DENSITY,
                seed,
            },
            AttackKind::Speckle => AttackSpec::Speckle {
                variance: DEFAULT_SPECKLE_VARIANCE,
                seed,
            },
            AttackKind::MedianFilter => AttackSpec::MedianFilter {
                kernel: DEFAULT_KERNEL,
            },
            AttackKind::AverageFilter => AttackSpec::AverageFilter {
                kernel: DEFAULT_KERNEL,
            },
            AttackKind::Rescale => AttackSpec::Rescale {
                scale: DEFAULT_SCALE,
            },
            AttackKind::JpegCompress => AttackSpec::JpegCompress {
                quality: DEFAULT_QUALITY,
            },
        }
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AttackKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown attack '{s}'")))
    }
}

/// An attack together with its parameters. Serialized with a `type` tag
/// using the same names and parameter keys as the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum AttackSpec {
    /// Additive zero-mean noise; variance is on the [0, 1] intensity scale.
    GaussianNoise { variance: f64, seed: u64 },
    SaltPepper { density: f64, seed: u64 },
    /// Multiplicative noise `x (1 + u)`.
    Speckle { variance: f64, seed: u64 },
    MedianFilter { kernel: usize },
    AverageFilter { kernel: usize },
    /// Bilinear downscale by `scale`, then back up to the original size.
    Rescale { scale: f64 },
    /// 8x8 DCT quantization with the scaled standard luminance table.
    JpegCompress { quality: u8 },
}

impl AttackSpec {
    pub fn kind(&self) -> AttackKind {
        match self {
            AttackSpec::GaussianNoise { .. } => AttackKind::GaussianNoise,
            AttackSpec::SaltPepper { .. } => AttackKind::SaltPepper,
            AttackSpec::Speckle { .. } => AttackKind::Speckle,
            AttackSpec::MedianFilter { .. } => AttackKind::MedianFilter,
            AttackSpec::AverageFilter { .. } => AttackKind::AverageFilter,
            AttackSpec::Rescale { .. } => AttackKind::Rescale,
            AttackSpec::JpegCompress { .. } => AttackKind::JpegCompress,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match *self {
            AttackSpec::GaussianNoise { variance, .. } | AttackSpec::Speckle { variance, .. } => {
                if !(variance.is_finite() && variance > 0.0) {
                    return bad(format!("variance must be positive, got {variance}"));
                }
            }
            AttackSpec::SaltPepper { density, .. } => {
                if !(density > 0.0 && density < 1.0) {
                    return bad(format!("density must be in (0, 1), got {density}"));
                }
            }
            AttackSpec::MedianFilter { kernel } | AttackSpec::AverageFilter { kernel } => {
                if kernel < 3 || kernel % 2 == 0 {
                    return bad(format!("kernel must be odd and at least 3, got {kernel}"));
                }
            }
            AttackSpec::Rescale { scale } => {
                if !(scale > 0.0 && scale < 1.0) {
                    return bad(format!("scale must be in (0, 1), got {scale}"));
                }
            }
            AttackSpec::JpegCompress { quality } => {
                if !(1..=100).contains(&quality) {
                    return bad(format!("quality must be in [1, 100], got {quality}"));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for AttackSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackSpec::GaussianNoise { variance, seed } => {
                write!(f, "gaussian-noise(variance={variance}, seed={seed})")
            }
            AttackSpec::SaltPepper { density, seed } => {
                write!(f, "salt-pepper(density={density}, seed={seed})")
            }
            AttackSpec::Speckle { variance, seed } => {
                write!(f, "speckle(variance={variance}, seed={seed})")
            }
            AttackSpec::MedianFilter { kernel } => write!(f, "median-filter(kernel={kernel})"),
            AttackSpec::AverageFilter { kernel } => write!(f, "average-filter(kernel={kernel})"),
            AttackSpec::Rescale { scale } => write!(f, "rescale(scale={scale})"),
            AttackSpec::JpegCompress { quality } => write!(f, "jpeg-compress(quality={quality})"),
        }
    }
}

/// Applies one attack. Output has the input's dimensions, channel count and
/// alpha plane.
pub fn apply_attack(image: &RasterImage, spec: &AttackSpec) -> Result<RasterImage> {
    spec.validate()?;
    let mut out = image.clone();
    match *spec {
        AttackSpec::GaussianNoise { variance, seed } => noise::gaussian(&mut out, variance, seed),
        AttackSpec::SaltPepper { density, seed } => noise::salt_pepper(&mut out, density, seed),
        AttackSpec::Speckle { variance, seed } => noise::speckle(&mut out, variance, seed),
        AttackSpec::MedianFilter { kernel } => filter::median(&mut out, image, kernel),
        AttackSpec::AverageFilter { kernel } => filter::average(&mut out, image, kernel),
        AttackSpec::Rescale { scale } => resample::rescale(&mut out, image, scale),
        AttackSpec::JpegCompress { quality } => jpeg::compress(&mut out, image, quality),
    }
    Ok(out)
}
