use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::imaging::Plane;

/// One-level 2D Haar decomposition.
///
/// Band names give the horizontal filter first: `lh` is low-pass along rows
/// and high-pass along columns, `hl` the opposite.
#[derive(Debug, Clone, PartialEq)]
pub struct DwtSubbands {
    pub ll: Plane,
    pub lh: Plane,
    pub hl: Plane,
    pub hh: Plane,
}

impl DwtSubbands {
    pub fn sum_of_squares(&self) -> f64 {
        self.ll.sum_of_squares()
            + self.lh.sum_of_squares()
            + self.hl.sum_of_squares()
            + self.hh.sum_of_squares()
    }
}

/// Orthonormal Haar analysis: rows first, then columns.
pub fn dwt2_haar(block: &Plane) -> Result<DwtSubbands> {
    let (w, h) = (block.width(), block.height());
    if w % 2 != 0 || h % 2 != 0 {
        return Err(Error::Dimension(format!(
            "Haar analysis needs even dimensions, got {w}x{h}"
        )));
    }
    let (hw, hh) = (w / 2, h / 2);

    // horizontal pass
    let mut lo = Plane::zeros(hw, h);
    let mut hi = Plane::zeros(hw, h);
    for r in 0..h {
        let row = block.row(r);
        for k in 0..hw {
            let (a, b) = (row[2 * k], row[2 * k + 1]);
            lo.set(r, k, (a + b) * FRAC_1_SQRT_2);
            hi.set(r, k, (a - b) * FRAC_1_SQRT_2);
        }
    }

    // vertical pass
    let split = |p: &Plane| {
        let mut low = Plane::zeros(hw, hh);
        let mut high = Plane::zeros(hw, hh);
        for k in 0..hh {
            for c in 0..hw {
                let (a, b) = (p.get(2 * k, c), p.get(2 * k + 1, c));
                low.set(k, c, (a + b) * FRAC_1_SQRT_2);
                high.set(k, c, (a - b) * FRAC_1_SQRT_2);
            }
        }
        (low, high)
    };
    let (ll, lh) = split(&lo);
    let (hl, hh_band) = split(&hi);
    Ok(DwtSubbands {
        ll,
        lh,
        hl,
        hh: hh_band,
    })
}

/// Haar synthesis; exact inverse of [`dwt2_haar`].
pub fn idwt2_haar(bands: &DwtSubbands) -> Result<Plane> {
    let (hw, hh) = (bands.ll.width(), bands.ll.height());
    for (name, b) in [("lh", &bands.lh), ("hl", &bands.hl), ("hh", &bands.hh)] {
        if b.width() != hw || b.height() != hh {
            return Err(Error::Dimension(format!(
                "sub-band {name} is {}x{}, LL is {hw}x{hh}",
                b.width(),
                b.height()
            )));
        }
    }
    let (w, h) = (hw * 2, hh * 2);

    let merge = |low: &Plane, high: &Plane| {
        let mut p = Plane::zeros(hw, h);
        for k in 0..hh {
            for c in 0..hw {
                let (l, d) = (low.get(k, c), high.get(k, c));
                p.set(2 * k, c, (l + d) * FRAC_1_SQRT_2);
                p.set(2 * k + 1, c, (l - d) * FRAC_1_SQRT_2);
            }
        }
        p
    };
    let lo = merge(&bands.ll, &bands.lh);
    let hi = merge(&bands.hl, &bands.hh);

    let mut out = Plane::zeros(w, h);
    for r in 0..h {
        for k in 0..hw {
            let (l, d) = (lo.get(r, k), hi.get(r, k));
            out.set(r, 2 * k, (l + d) * FRAC_1_SQRT_2);
            out.set(r, 2 * k + 1, (l - d) * FRAC_1_SQRT_2);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_block_has_only_ll() {
        let c = 37.5;
        let bands = dwt2_haar(&Plane::from_fn(8, 8, |_, _| c)).unwrap();
        assert!(bands.ll.values().iter().all(|v| (v - 2.0 * c).abs() < 1e-12));
        for b in [&bands.lh, &bands.hl, &bands.hh] {
            assert!(b.values().iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn two_by_two_matches_hand_applied_basis() {
        let (a, b, c, d) = (3.0, -1.0, 4.0, 10.0);
        let bands = dwt2_haar(&Plane::from_rows(&[[a, b], [c, d]]).unwrap()).unwrap();
        // Orthonormal 2D Haar basis vectors on a 2x2 block.
        assert!((bands.ll.get(0, 0) - (a + b + c + d) / 2.0).abs() < 1e-12);
        assert!((bands.lh.get(0, 0) - (a + b - c - d) / 2.0).abs() < 1e-12);
        assert!((bands.hl.get(0, 0) - (a - b + c - d) / 2.0).abs() < 1e-12);
        assert!((bands.hh.get(0, 0) - (a - b - c + d) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn odd_dimension_rejected() {
        assert!(dwt2_haar(&Plane::zeros(3, 4)).is_err());
        assert!(dwt2_haar(&Plane::zeros(4, 5)).is_err());
    }

    #[test]
    fn inverse_of_constant_ll() {
        let c = 9.0;
        let z = Plane::zeros(1, 1);
        let bands = DwtSubbands {
            ll: Plane::from_rows(&[[2.0 * c]]).unwrap(),
            lh: z.clone(),
            hl: z.clone(),
            hh: z,
        };
        let out = idwt2_haar(&bands).unwrap();
        assert!(out.values().iter().all(|v| (v - c).abs() < 1e-12));
    }

    #[test]
    fn inverse_of_zero_bands_is_zero() {
        let z = Plane::zeros(4, 4);
        let bands = DwtSubbands {
            ll: z.clone(),
            lh: z.clone(),
            hl: z.clone(),
            hh: z,
        };
        assert_eq!(idwt2_haar(&bands).unwrap(), Plane::zeros(8, 8));
    }

    #[test]
    fn mismatched_bands_rejected() {
        let bands = DwtSubbands {
            ll: Plane::zeros(2, 2),
            lh: Plane::zeros(2, 2),
            hl: Plane::zeros(3, 2),
            hh: Plane::zeros(2, 2),
        };
        assert!(idwt2_haar(&bands).is_err());
    }

    #[test]
    fn ramp_round_trip() {
        let x = Plane::from_fn(4, 4, |r, c| (r * 4 + c) as f64);
        let y = idwt2_haar(&dwt2_haar(&x).unwrap()).unwrap();
        assert!(x.max_abs_diff(&y) < 1e-9);
    }
}
