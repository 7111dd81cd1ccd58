use crate::imaging::{quantize, RasterImage};

/// Bilinear resampling of an interleaved float buffer with pixel-centre
/// alignment and edge clamping.
fn bilinear(
    src: &[f64],
    (sw, sh): (usize, usize),
    (dw, dh): (usize, usize),
    channels: usize,
) -> Vec<f64> {
    let coords = |d: usize, dn: usize, sn: usize| {
        let pos = ((d as f64 + 0.5) * sn as f64 / dn as f64 - 0.5).clamp(0.0, (sn - 1) as f64);
        let i0 = pos.floor() as usize;
        let i1 = (i0 + 1).min(sn - 1);
        (i0, i1, pos - i0 as f64)
    };
    let mut out = Vec::with_capacity(dw * dh * channels);
    for y in 0..dh {
        let (y0, y1, fy) = coords(y, dh, sh);
        for x in 0..dw {
            let (x0, x1, fx) = coords(x, dw, sw);
            for c in 0..channels {
                let at = |xx: usize, yy: usize| src[(yy * sw + xx) * channels + c];
                let top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
                let bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
                out.push(top * (1.0 - fy) + bottom * fy);
            }
        }
    }
    out
}

pub(super) fn rescale(out: &mut RasterImage, src: &RasterImage, scale: f64) {
    let (w, h, ch) = (src.width(), src.height(), src.channels());
    let small = (
        ((w as f64 * scale).round() as usize).max(1),
        ((h as f64 * scale).round() as usize).max(1),
    );
    let full: Vec<f64> = src.data().iter().map(|&v| f64::from(v)).collect();
    // the intermediate image is 8-bit, as a saved file would be
    let down: Vec<f64> = bilinear(&full, (w, h), small, ch)
        .into_iter()
        .map(|v| f64::from(quantize(v)))
        .collect();
    let up = bilinear(&down, small, (w, h), ch);
    for (dst, v) in out.data_mut().iter_mut().zip(up) {
        *dst = quantize(v);
    }
}
