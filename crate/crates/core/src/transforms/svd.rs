use crate::error::{Error, Result};
use crate::imaging::Plane;

use super::fix_sign;

const MAX_SWEEPS: usize = 100;

/// Full singular value decomposition `A = U diag(s) V^T`.
///
/// `u` is m x m, `v` is n x n and `s` holds `min(m, n)` non-negative values
/// in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdTriple {
    pub u: Plane,
    pub s: Vec<f64>,
    pub v: Plane,
}

impl SvdTriple {
    pub fn largest(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Sign convention: for every column pair with a non-zero singular value the
/// left vector's first component above 1e-12 in magnitude is positive and the
/// right vector follows it. Columns spanning the null space are completed from
/// the standard basis and sign-normalised independently.
pub fn svd(matrix: &Plane) -> Result<SvdTriple> {
    if matrix.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("SVD input has NaN or infinite entries".into()));
    }
    if matrix.height() < matrix.width() {
        let t = svd_tall(&matrix.transpose());
        return Ok(SvdTriple {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    Ok(svd_tall(matrix))
}

fn svd_tall(a: &Plane) -> SvdTriple {
    let (m, n) = (a.height(), a.width());
    // columns of the working matrix and of V
    let mut w: Vec<Vec<f64>> = (0..n).map(|c| a.column(c)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|c| (0..n).map(|r| if r == c { 1.0 } else { 0.0 }).collect())
        .collect();

    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let rotate = |cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64| {
        let (left, right) = cols.split_at_mut(q);
        for (xp, xq) in left[p].iter_mut().zip(right[0].iter_mut()) {
            let (a, b) = (*xp, *xq);
            *xp = c * a - s * b;
            *xq = s * a + c * b;
        }
    };

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = w.iter().map(|col| dot(col, col).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let s: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let tol = s[0] * (m.max(n) as f64) * f64::EPSILON;

    let mut u_cols: Vec<Option<Vec<f64>>> = vec![None; m];
    let mut v_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (k, &src) in order.iter().enumerate() {
        let mut vk = v[src].clone();
        if s[k] > tol && s[k] > 0.0 {
            let mut uk: Vec<f64> = w[src].iter().map(|x| x / s[k]).collect();
            if fix_sign(&mut uk) {
                vk.iter_mut().for_each(|x| *x = -*x);
            }
            u_cols[k] = Some(uk);
        } else {
            fix_sign(&mut vk);
        }
        v_cols.push(vk);
    }
    complete_basis(&mut u_cols);

    let u = Plane::from_fn(m, m, |r, c| u_cols[c].as_ref().expect("completed")[r]);
    let v = Plane::from_fn(n, n, |r, c| v_cols[c][r]);
    SvdTriple { u, s, v }
}

/// Fills the empty slots with unit vectors orthogonal to every filled column,
/// drawn from the standard basis by twice-repeated Gram-Schmidt.
fn complete_basis(cols: &mut [Option<Vec<f64>>]) {
    let m = cols.len();
    let mut candidate = 0;
    for slot in 0..m {
        if cols[slot].is_some() {
            continue;
        }
        while candidate < m {
            let mut e = vec![0.0; m];
            e[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for col in cols.iter().flatten() {
                    let proj: f64 = col.iter().zip(&e).map(|(a, b)| a * b).sum();
                    e.iter_mut().zip(col).for_each(|(x, c)| *x -= proj * c);
                }
            }
            let norm = e.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-6 {
                e.iter_mut().for_each(|x| *x /= norm);
                fix_sign(&mut e);
                cols[slot] = Some(e);
                break;
            }
        }
    }
}

/// `U diag(s) V^T`.
pub fn svd_reconstruct(triple: &SvdTriple) -> Result<Plane> {
    let (m, n) = (triple.u.height(), triple.v.height());
    if triple.u.width() != m || triple.v.width() != n || triple.s.len() != m.min(n) {
        return Err(Error::Dimension(format!(
            "inconsistent SVD triple: U {}x{}, {} singular values, V {}x{}",
            triple.u.height(),
            triple.u.width(),
            triple.s.len(),
            triple.v.height(),
            triple.v.width()
        )));
    }
    let mut out = Plane::zeros(n, m);
    for (k, &sk) in triple.s.iter().enumerate() {
        if sk == 0.0 {
            continue;
        }
        for r in 0..m {
            let ur = triple.u.get(r, k) * sk;
            for c in 0..n {
                out.set(r, c, out.get(r, c) + ur * triple.v.get(c, k));
            }
        }
    }
    Ok(out)
}
