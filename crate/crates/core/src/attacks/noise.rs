use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::imaging::{quantize, RasterImage};

fn normal(variance: f64) -> Normal<f64> {
    Normal::new(0.0, variance.sqrt()).expect("validated variance")
}

fn requantize(unit: f64) -> u8 {
    quantize(unit.clamp(0.0, 1.0) * 255.0)
}

pub(super) fn gaussian(image: &mut RasterImage, variance: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = normal(variance);
    for v in image.data_mut() {
        let x = f64::from(*v) / 255.0;
        *v = requantize(x + dist.sample(&mut rng));
    }
}

pub(super) fn speckle(image: &mut RasterImage, variance: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = normal(variance);
    for v in image.data_mut() {
        let x = f64::from(*v) / 255.0;
        *v = requantize(x * (1.0 + dist.sample(&mut rng)));
    }
}

pub(super) fn salt_pepper(image: &mut RasterImage, density: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = density / 2.0;
    for v in image.data_mut() {
        let u: f64 = rng.random();
        if u < half {
            *v = 0;
        } else if u < density {
            *v = 255;
        }
    }
}
