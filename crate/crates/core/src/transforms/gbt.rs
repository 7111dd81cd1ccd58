use crate::error::{Error, Result};
use crate::imaging::Plane;

use super::GraphSpec;

fn check(block: &Plane, graph: &GraphSpec) -> Result<()> {
    let n = graph.size();
    if block.width() != n || block.height() != n {
        return Err(Error::Dimension(format!(
            "graph of size {n} applied to {}x{} block",
            block.width(),
            block.height()
        )));
    }
    Ok(())
}

/// Separable graph transform. Every row `s` becomes `V^T s`, then every
/// column of that intermediate is transformed the same way, which amounts to
/// `V^T X V`.
pub fn gbt2_forward(block: &Plane, graph: &GraphSpec) -> Result<Plane> {
    check(block, graph)?;
    let rows = block.matmul(&graph.basis)?;
    graph.basis.transpose().matmul(&rows)
}

/// Inverse of [`gbt2_forward`]: `V C V^T`.
pub fn gbt2_inverse(coeffs: &Plane, graph: &GraphSpec) -> Result<Plane> {
    check(coeffs, graph)?;
    graph
        .basis
        .matmul(coeffs)?
        .matmul(&graph.basis.transpose())
}
