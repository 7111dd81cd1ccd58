use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::Plane;

use super::symmetric_eigen;

/// Edge weighting of the path graph over the N samples of a row or column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    /// Unit weights between neighbours. The resulting basis is the DCT-II.
    PathUniform,
    /// Neighbour weight `1 / (1 + |s_i - s_{i+1}|)` from a supplied signal.
    PathAdaptive,
}

impl GraphKind {
    pub fn id(self) -> &'static str {
        match self {
            GraphKind::PathUniform => "path-uniform",
            GraphKind::PathAdaptive => "path-adaptive",
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "path-uniform" => Ok(GraphKind::PathUniform),
            "path-adaptive" => Ok(GraphKind::PathAdaptive),
            other => Err(Error::InvalidArgument(format!("unknown graph kind '{other}'"))),
        }
    }
}

/// Path graph, its Laplacian `L = D - A` and the eigendecomposition
/// `L = V diag(eigenvalues) V^T` with eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSpec {
    pub kind: GraphKind,
    pub adjacency: Plane,
    pub degree: Plane,
    pub laplacian: Plane,
    pub basis: Plane,
    pub eigenvalues: Vec<f64>,
}

impl GraphSpec {
    pub fn size(&self) -> usize {
        self.adjacency.width()
    }
}

pub fn build_graph(size: usize, kind: GraphKind, signal: Option<&[f64]>) -> Result<GraphSpec> {
    if size < 2 {
        return Err(Error::InvalidArgument(format!(
            "graph needs at least 2 vertices, got {size}"
        )));
    }
    let weights: Vec<f64> = match kind {
        GraphKind::PathUniform => vec![1.0; size - 1],
        GraphKind::PathAdaptive => {
            let s = signal.ok_or_else(|| {
                Error::InvalidArgument("adaptive graph requires a signal".into())
            })?;
            if s.len() != size {
                return Err(Error::Dimension(format!(
                    "adaptive graph of size {size} given a signal of length {}",
                    s.len()
                )));
            }
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("graph signal".into()));
            }
            s.windows(2).map(|w| 1.0 / (1.0 + (w[0] - w[1]).abs())).collect()
        }
    };

    let mut adjacency = Plane::zeros(size, size);
    for (i, &w) in weights.iter().enumerate() {
        adjacency.set(i, i + 1, w);
        adjacency.set(i + 1, i, w);
    }
    let degree = Plane::from_fn(size, size, |r, c| {
        if r == c {
            adjacency.row(r).iter().sum()
        } else {
            0.0
        }
    });
    let laplacian = degree.sub(&adjacency)?;
    let (eigenvalues, basis) = symmetric_eigen(&laplacian)?;
    Ok(GraphSpec {
        kind,
        adjacency,
        degree,
        laplacian,
        basis,
        eigenvalues,
    })
}

/// How the codec obtains the GBT graph for an LL sub-band.
///
/// The uniform graph is built once and shared. The adaptive policy rebuilds a
/// graph per block from the column means of that block's LL matrix.
#[derive(Debug, Clone)]
pub enum GraphPolicy {
    Fixed(GraphSpec),
    Adaptive { size: usize },
}

impl GraphPolicy {
    pub fn new(kind: GraphKind, size: usize) -> Result<Self> {
        match kind {
            GraphKind::PathUniform => Ok(GraphPolicy::Fixed(build_graph(size, kind, None)?)),
            GraphKind::PathAdaptive => {
                if size < 2 {
                    return Err(Error::InvalidArgument(format!(
                        "graph needs at least 2 vertices, got {size}"
                    )));
                }
                Ok(GraphPolicy::Adaptive { size })
            }
        }
    }

    /// Uniform path graph over the 4x4 LL band of an 8x8 block.
    pub fn default_uniform() -> Self {
        Self::new(GraphKind::PathUniform, 4).expect("4-vertex path graph")
    }

    pub fn kind(&self) -> GraphKind {
        match self {
            GraphPolicy::Fixed(g) => g.kind,
            GraphPolicy::Adaptive { .. } => GraphKind::PathAdaptive,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            GraphPolicy::Fixed(g) => g.size(),
            GraphPolicy::Adaptive { size } => *size,
        }
    }

    pub fn graph_for(&self, ll: &Plane) -> Result<Cow<'_, GraphSpec>> {
        match self {
            GraphPolicy::Fixed(g) => Ok(Cow::Borrowed(g)),
            GraphPolicy::Adaptive { size } => {
                let n = *size;
                if ll.width() != n || ll.height() != n {
                    return Err(Error::Dimension(format!(
                        "graph of size {n} applied to {}x{} matrix",
                        ll.width(),
                        ll.height()
                    )));
                }
                let signal: Vec<f64> = (0..n)
                    .map(|c| ll.column(c).iter().sum::<f64>() / n as f64)
                    .collect();
                Ok(Cow::Owned(build_graph(n, GraphKind::PathAdaptive, Some(&signal))?))
            }
        }
    }
}
