//! One-level Haar DWT, path-graph GBT and small dense SVD.

mod dwt;
mod eigen;
mod gbt;
mod graph;
mod svd;

pub use dwt::{dwt2_haar, idwt2_haar, DwtSubbands};
pub use eigen::symmetric_eigen;
pub use gbt::{gbt2_forward, gbt2_inverse};
pub use graph::{build_graph, GraphKind, GraphPolicy, GraphSpec};
pub use svd::{svd, svd_reconstruct, SvdTriple};

/// Flips `v` so that its first component with magnitude above 1e-12 is positive.
/// Returns whether a flip happened.
pub(crate) fn fix_sign(v: &mut [f64]) -> bool {
    match v.iter().find(|x| x.abs() > 1e-12) {
        Some(&first) if first < 0.0 => {
            v.iter_mut().for_each(|x| *x = -*x);
            true
        }
        _ => false,
    }
}
