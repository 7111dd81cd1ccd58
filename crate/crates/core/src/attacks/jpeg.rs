use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::imaging::{quantize, RasterImage};

const N: usize = 8;

const LUMINANCE: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Standard luminance table scaled with the usual IJG quality mapping.
pub fn quantization_table(quality: u8) -> [f64; 64] {
    let q = u32::from(quality.clamp(1, 100));
    let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
    let mut table = [0.0; 64];
    for (t, &base) in table.iter_mut().zip(&LUMINANCE) {
        *t = ((u32::from(base) * scale + 50) / 100).clamp(1, 255) as f64;
    }
    table
}

/// Orthonormal 8-point DCT-II matrix, row k = frequency k.
fn dct_matrix() -> &'static [[f64; N]; N] {
    static M: OnceLock<[[f64; N]; N]> = OnceLock::new();
    M.get_or_init(|| {
        let mut m = [[0.0; N]; N];
        for (k, row) in m.iter_mut().enumerate() {
            let a = if k == 0 { (1.0 / N as f64).sqrt() } else { (2.0 / N as f64).sqrt() };
            for (i, v) in row.iter_mut().enumerate() {
                *v = a * (PI * k as f64 * (2 * i + 1) as f64 / (2 * N) as f64).cos();
            }
        }
        m
    })
}

fn transform(block: &[[f64; N]; N], inverse: bool) -> [[f64; N]; N] {
    let m = dct_matrix();
    let coef = |a: usize, b: usize| if inverse { m[b][a] } else { m[a][b] };
    let mut tmp = [[0.0; N]; N];
    for r in 0..N {
        for k in 0..N {
            tmp[r][k] = (0..N).map(|i| coef(k, i) * block[r][i]).sum();
        }
    }
    let mut out = [[0.0; N]; N];
    for k in 0..N {
        for c in 0..N {
            out[k][c] = (0..N).map(|i| coef(k, i) * tmp[i][c]).sum();
        }
    }
    out
}

/// Each channel independently: level shift, 8x8 DCT, quantize/dequantize,
/// inverse DCT. Partial edge blocks are padded by replication and cropped.
pub(super) fn compress(out: &mut RasterImage, src: &RasterImage, quality: u8) {
    let table = quantization_table(quality);
    let (w, h, ch) = (src.width(), src.height(), src.channels());
    for c in 0..ch {
        for by in (0..h).step_by(N) {
            for bx in (0..w).step_by(N) {
                let mut block = [[0.0; N]; N];
                for (r, row) in block.iter_mut().enumerate() {
                    for (col, v) in row.iter_mut().enumerate() {
                        let (x, y) = ((bx + col).min(w - 1), (by + r).min(h - 1));
                        *v = f64::from(src.get(x, y, c)) - 128.0;
                    }
                }
                let mut coeffs = transform(&block, false);
                for (r, row) in coeffs.iter_mut().enumerate() {
                    for (col, v) in row.iter_mut().enumerate() {
                        let q = table[r * N + col];
                        *v = (*v / q).round() * q;
                    }
                }
                let pixels = transform(&coeffs, true);
                for (r, row) in pixels.iter().enumerate().take(h - by) {
                    for (col, v) in row.iter().enumerate().take(w - bx) {
                        out.set(bx + col, by + r, c, quantize(v + 128.0));
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_scaling() {
        assert_eq!(quantization_table(50)[0], 16.0);
        assert!(quantization_table(100).iter().all(|&q| q == 1.0));
        assert_eq!(quantization_table(10)[0], 80.0);
    }

    #[test]
    fn dct_round_trip() {
        let mut b = [[0.0; N]; N];
        for (r, row) in b.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = ((r * 13 + c * 7) % 17) as f64;
            }
        }
        let back = transform(&transform(&b, false), true);
        for r in 0..N {
            for c in 0..N {
                assert!((back[r][c] - b[r][c]).abs() < 1e-9);
            }
        }
    }
}
