//! PSNR, SSIM, normalized correlation and bit error rate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::codec::WatermarkBits;
use crate::error::{Error, Result};
use crate::imaging::RasterImage;

pub const PEAK: f64 = 255.0;

/// Which samples enter the PSNR mean squared error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsnrScope {
    #[default]
    AllChannels,
    /// Only the channel that carries the watermark.
    EmbeddingChannel,
}

fn check_images(a: &RasterImage, b: &RasterImage) -> Result<()> {
    if !a.same_shape(b) {
        return Err(Error::Dimension(format!(
            "images differ: {}x{}x{} vs {}x{}x{}",
            a.width(),
            a.height(),
            a.channels(),
            b.width(),
            b.height(),
            b.channels()
        )));
    }
    Ok(())
}

pub fn mse(reference: &RasterImage, test: &RasterImage, scope: PsnrScope) -> Result<f64> {
    check_images(reference, test)?;
    let ch = reference.channels();
    let (step, skip) = match scope {
        PsnrScope::AllChannels => (1, 0),
        PsnrScope::EmbeddingChannel => (ch, reference.embedding_channel()),
    };
    let (sum, count) = reference
        .data()
        .iter()
        .zip(test.data())
        .skip(skip)
        .step_by(step)
        .fold((0u64, 0u64), |(s, n), (&a, &b)| {
            let d = i64::from(a) - i64::from(b);
            (s + (d * d) as u64, n + 1)
        });
    Ok(sum as f64 / count as f64)
}

/// `10 log10(255^2 / MSE)` over all pixels and channels; identical images
/// give `f64::INFINITY`.
pub fn psnr(reference: &RasterImage, test: &RasterImage) -> Result<f64> {
    psnr_scoped(reference, test, PsnrScope::AllChannels)
}

pub fn psnr_scoped(reference: &RasterImage, test: &RasterImage, scope: PsnrScope) -> Result<f64> {
    let e = mse(reference, test, scope)?;
    if e == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (PEAK * PEAK / e).log10())
}

fn check_bits(a: &WatermarkBits, b: &WatermarkBits) -> Result<()> {
    if !a.same_shape(b) {
        return Err(Error::Dimension(format!(
            "watermarks differ: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

fn mismatches(a: &WatermarkBits, b: &WatermarkBits) -> usize {
    a.bits().iter().zip(b.bits()).filter(|(x, y)| x != y).count()
}

/// Fraction of matching bits.
pub fn nc(reference: &WatermarkBits, test: &WatermarkBits) -> Result<f64> {
    check_bits(reference, test)?;
    let n = reference.len();
    Ok((n - mismatches(reference, test)) as f64 / n as f64)
}

/// Fraction of mismatched bits.
pub fn ber(reference: &WatermarkBits, test: &WatermarkBits) -> Result<f64> {
    check_bits(reference, test)?;
    Ok(mismatches(reference, test) as f64 / reference.len() as f64)
}

// ---------------------------------------------------------------------------
// SSIM

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

fn luma(image: &RasterImage) -> Vec<f64> {
    if image.channels() == 1 {
        return image.data().iter().map(|&v| f64::from(v)).collect();
    }
    image
        .data()
        .chunks_exact(3)
        .map(|p| 0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2]))
        .collect()
}

fn gaussian_window() -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as f64;
    let mut w: Vec<f64> = (0..SSIM_WINDOW * SSIM_WINDOW)
        .map(|i| {
            let (y, x) = ((i / SSIM_WINDOW) as f64 - half, (i % SSIM_WINDOW) as f64 - half);
            (-(x * x + y * y) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

/// Gaussian-windowed SSIM on the luma plane, mean-pooled over every window
/// position that fits inside the image.
pub fn ssim(reference: &RasterImage, test: &RasterImage) -> Result<f64> {
    check_images(reference, test)?;
    let (w, h) = (reference.width(), reference.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::Dimension(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW}, image is {w}x{h}"
        )));
    }
    let x = luma(reference);
    let y = luma(test);
    let window = gaussian_window();
    let c1 = (SSIM_K1 * PEAK).powi(2);
    let c2 = (SSIM_K2 * PEAK).powi(2);

    let mut total = 0.0;
    let mut count = 0usize;
    for oy in 0..=h - SSIM_WINDOW {
        for ox in 0..=w - SSIM_WINDOW {
            let (mut mx, mut my, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for (i, wt) in window.iter().enumerate() {
                let idx = (oy + i / SSIM_WINDOW) * w + ox + i % SSIM_WINDOW;
                let (a, b) = (x[idx], y[idx]);
                mx += wt * a;
                my += wt * b;
                sxx += wt * a * a;
                syy += wt * b * b;
                sxy += wt * a * b;
            }
            let vx = sxx - mx * mx;
            let vy = syy - my * my;
            let cov = sxy - mx * my;
            total += ((2.0 * mx * my + c1) * (2.0 * cov + c2))
                / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    Ok(total / count as f64)
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackScore {
    pub nc: f64,
    pub ber: f64,
}

impl AttackScore {
    pub fn compare(reference: &WatermarkBits, extracted: &WatermarkBits) -> Result<Self> {
        Ok(Self {
            nc: nc(reference, extracted)?,
            ber: ber(reference, extracted)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    #[serde(with = "psnr_value")]
    pub psnr: f64,
    pub ssim: f64,
    /// Keyed by attack name.
    pub attacks: BTreeMap<String, AttackScore>,
}

/// Formats a PSNR for text output; infinity prints as `inf`.
pub fn format_psnr(value: f64) -> String {
    if value.is_infinite() {
        "inf".to_string()
    } else {
        format!("{value:.2}")
    }
}

/// Serializes an infinite PSNR as the string `"inf"`, finite values as numbers.
pub mod psnr_value {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
        if value.is_infinite() && *value > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*value)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("bad PSNR '{t}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(w: usize, h: usize, ch: usize, f: impl Fn(usize) -> u8) -> RasterImage {
        RasterImage::new(w, h, ch, (0..w * h * ch).map(f).collect()).unwrap()
    }

    #[test]
    fn psnr_identical_is_infinite() {
        let a = img(4, 4, 3, |i| (i * 7) as u8);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
    }

    #[test]
    fn psnr_unit_error() {
        let a = img(8, 8, 3, |i| (i % 200) as u8 + 10);
        let b = img(8, 8, 3, |i| (i % 200) as u8 + 11);
        let p = psnr(&a, &b).unwrap();
        assert!((p - 20.0 * 255f64.log10()).abs() < 1e-12);
        assert!((p - 48.1308).abs() < 1e-3);
    }

    #[test]
    fn psnr_full_scale_error_is_zero_db() {
        let a = img(4, 4, 1, |_| 0);
        let b = img(4, 4, 1, |_| 255);
        assert!(psnr(&a, &b).unwrap().abs() < 1e-12);
    }

    #[test]
    fn psnr_dimension_mismatch() {
        assert!(psnr(&img(4, 4, 1, |_| 0), &img(4, 5, 1, |_| 0)).is_err());
        assert!(psnr(&img(4, 4, 1, |_| 0), &img(4, 4, 3, |_| 0)).is_err());
    }

    #[test]
    fn psnr_embedding_channel_scope() {
        let a = img(4, 4, 3, |_| 100);
        let b = img(4, 4, 3, |i| if i % 3 == 2 { 102 } else { 100 });
        let all = psnr_scoped(&a, &b, PsnrScope::AllChannels).unwrap();
        let blue = psnr_scoped(&a, &b, PsnrScope::EmbeddingChannel).unwrap();
        assert!((blue - 10.0 * (PEAK * PEAK / 4.0).log10()).abs() < 1e-12);
        assert!(all > blue);
    }

    #[test]
    fn psnr_decreases_with_error() {
        let a = img(8, 8, 1, |_| 100);
        let mut last = f64::INFINITY;
        for d in 1..50u8 {
            let b = img(8, 8, 1, |_| 100 + d);
            let p = psnr(&a, &b).unwrap();
            assert!(p < last);
            last = p;
        }
    }

    #[test]
    fn nc_and_ber_examples() {
        let a = WatermarkBits::new(4, 1, vec![1, 0, 1, 1]).unwrap();
        let inv = WatermarkBits::new(4, 1, vec![0, 1, 0, 0]).unwrap();
        let half = WatermarkBits::new(4, 1, vec![0, 1, 1, 1]).unwrap();
        assert_eq!(nc(&a, &a).unwrap(), 1.0);
        assert_eq!(nc(&a, &inv).unwrap(), 0.0);
        assert_eq!(nc(&a, &half).unwrap(), 0.5);
        assert_eq!(ber(&a, &a).unwrap(), 0.0);
        let mut bits = vec![0u8; 400];
        let reference = WatermarkBits::new(20, 20, bits.clone()).unwrap();
        bits[123] = 1;
        let one_off = WatermarkBits::new(20, 20, bits).unwrap();
        assert_eq!(ber(&reference, &one_off).unwrap(), 0.0025);
        let other = WatermarkBits::new(2, 2, vec![0; 4]).unwrap();
        assert!(nc(&a, &other).is_err());
        assert!(ber(&a, &other).is_err());
    }

    #[test]
    fn ssim_identity_and_constants() {
        let a = img(16, 16, 3, |i| ((i * 31) % 251) as u8);
        assert_eq!(ssim(&a, &a).unwrap(), 1.0);
        let c = img(12, 12, 1, |_| 90);
        assert_eq!(ssim(&c, &c.clone()).unwrap(), 1.0);
    }

    #[test]
    fn ssim_errors() {
        let a = img(10, 20, 1, |_| 0);
        assert!(ssim(&a, &a).is_err());
        assert!(ssim(&img(12, 12, 1, |_| 0), &img(12, 13, 1, |_| 0)).is_err());
    }

    #[test]
    fn ssim_heavy_noise_on_mid_gray() {
        use crate::attacks::{apply_attack, AttackSpec};
        let gray = img(64, 64, 1, |_| 128);
        let noisy = apply_attack(&gray, &AttackSpec::GaussianNoise { variance: 0.05, seed: 3 }).unwrap();
        let s = ssim(&gray, &noisy).unwrap();
        assert!(s < 0.9, "{s}");
        assert!(s > -1.0);
    }

    #[test]
    fn report_serializes_infinite_psnr_as_string() {
        let r = MetricReport {
            psnr: f64::INFINITY,
            ssim: 1.0,
            attacks: BTreeMap::new(),
        };
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"psnr\":\"inf\""), "{text}");
        let back: MetricReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn bit_pair() -> impl Strategy<Value = (WatermarkBits, WatermarkBits)> {
            (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
                (
                    proptest::collection::vec(0u8..=1, w * h),
                    proptest::collection::vec(0u8..=1, w * h),
                )
                    .prop_map(move |(a, b)| {
                        (WatermarkBits::new(w, h, a).unwrap(), WatermarkBits::new(w, h, b).unwrap())
                    })
            })
        }

        fn image_pair() -> impl Strategy<Value = (RasterImage, RasterImage)> {
            (11usize..20, 11usize..20, prop_oneof![Just(1usize), Just(3usize)]).prop_flat_map(
                |(w, h, c)| {
                    (
                        proptest::collection::vec(any::<u8>(), w * h * c),
                        proptest::collection::vec(any::<u8>(), w * h * c),
                    )
                        .prop_map(move |(a, b)| {
                            (
                                RasterImage::new(w, h, c, a).unwrap(),
                                RasterImage::new(w, h, c, b).unwrap(),
                            )
                        })
                },
            )
        }

        proptest! {
            #[test]
            fn nc_plus_ber_is_one((a, b) in bit_pair()) {
                prop_assert_eq!(nc(&a, &b).unwrap() + ber(&a, &b).unwrap(), 1.0);
            }

            #[test]
            fn bit_metrics_symmetric((a, b) in bit_pair()) {
                prop_assert_eq!(nc(&a, &b).unwrap(), nc(&b, &a).unwrap());
                prop_assert_eq!(ber(&a, &b).unwrap(), ber(&b, &a).unwrap());
            }

            #[test]
            fn bit_metrics_permutation_invariant((a, b) in bit_pair(), seed in any::<u64>()) {
                use rand::{seq::SliceRandom, SeedableRng};
                let mut perm: Vec<usize> = (0..a.len()).collect();
                perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
                let permute = |x: &WatermarkBits| {
                    let bits = perm.iter().map(|&i| x.bits()[i]).collect();
                    WatermarkBits::new(x.width(), x.height(), bits).unwrap()
                };
                prop_assert_eq!(ber(&a, &b).unwrap(), ber(&permute(&a), &permute(&b)).unwrap());
                prop_assert_eq!(nc(&a, &b).unwrap(), nc(&permute(&a), &permute(&b)).unwrap());
            }

            #[test]
            fn image_metrics_symmetric((a, b) in image_pair()) {
                prop_assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
                let (s1, s2) = (ssim(&a, &b).unwrap(), ssim(&b, &a).unwrap());
                prop_assert!((s1 - s2).abs() < 1e-12);
                prop_assert_eq!(ssim(&a, &a).unwrap(), 1.0);
            }
        }
    }
}
