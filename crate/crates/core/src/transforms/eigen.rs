use crate::error::{Error, Result};
use crate::imaging::Plane;

use super::fix_sign;

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigendecomposition of a real symmetric matrix.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as the columns of the returned matrix. Each eigenvector is
/// sign-normalised so its first component above 1e-12 in magnitude is positive.
pub fn symmetric_eigen(matrix: &Plane) -> Result<(Vec<f64>, Plane)> {
    let n = matrix.width();
    if matrix.height() != n {
        return Err(Error::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            matrix.height(),
            n
        )));
    }
    if matrix.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix has NaN or infinite entries".into()));
    }
    for r in 0..n {
        for c in r + 1..n {
            let (x, y) = (matrix.get(r, c), matrix.get(c, r));
            if (x - y).abs() > 1e-12 * (1.0 + x.abs().max(y.abs())) {
                return Err(Error::InvalidArgument("matrix is not symmetric".into()));
            }
        }
    }

    let mut a: Vec<Vec<f64>> = (0..n).map(|r| matrix.row(r).to_vec()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|r| (0..n).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
        .collect();
    let total: f64 = matrix.sum_of_squares();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[r][c] * a[r][c])
            .sum();
        if off <= total * 1e-32 || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let mut vectors = Plane::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: Vec<f64> = (0..n).map(|r| v[r][src]).collect();
        fix_sign(&mut col);
        for (r, x) in col.into_iter().enumerate() {
            vectors.set(r, dst, x);
        }
    }
    Ok((values, vectors))
}
