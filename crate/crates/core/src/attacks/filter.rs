use crate::imaging::{quantize, RasterImage};

/// Runs `reduce` over every k x k window of each channel, clamping
/// coordinates at the border (replicate padding).
fn sliding(
    out: &mut RasterImage,
    src: &RasterImage,
    kernel: usize,
    mut reduce: impl FnMut(&mut [u8]) -> u8,
) {
    let (w, h, ch) = (src.width(), src.height(), src.channels());
    let r = (kernel / 2) as isize;
    let mut window = vec![0u8; kernel * kernel];
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                let mut i = 0;
                for dy in -r..=r {
                    let sy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
                    for dx in -r..=r {
                        let sx = (x as isize + dx).clamp(0, w as isize - 1) as usize;
                        window[i] = src.get(sx, sy, c);
                        i += 1;
                    }
                }
                out.set(x, y, c, reduce(&mut window));
            }
        }
    }
}

pub(super) fn median(out: &mut RasterImage, src: &RasterImage, kernel: usize) {
    let mid = kernel * kernel / 2;
    sliding(out, src, kernel, |win| *win.select_nth_unstable(mid).1);
}

pub(super) fn average(out: &mut RasterImage, src: &RasterImage, kernel: usize) {
    let n = (kernel * kernel) as f64;
    sliding(out, src, kernel, |win| {
        quantize(win.iter().map(|&v| f64::from(v)).sum::<f64>() / n)
    });
}
