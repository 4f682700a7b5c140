//! Cyclic Jacobi eigensolver for dense real symmetric matrices.
//!
//! Rotations are applied in a fixed row-cyclic order, so the output is a
//! deterministic function of the input bits.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 64;

/// Eigenvalues in ascending order and the matching orthonormal eigenvector
/// columns. The first component of each eigenvector whose magnitude exceeds
/// `1e-12` is made positive.
pub(crate) fn jacobi_eigen(input: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = input.nrows();
    let mut a = input.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    if n == 0 {
        return Ok((Vec::new(), v));
    }
    let frob = a.norm();
    if !frob.is_finite() {
        return Err(Error::NonFinite);
    }
    let floor = f64::MIN_POSITIVE.max(frob * f64::EPSILON * 1e-3);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // High relative accuracy criterion; the floor stops rotations on pure roundoff.
                if apq.abs() <= f64::EPSILON * (app.abs() * aqq.abs()).sqrt() || apq.abs() <= floor {
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t =
                    if theta.abs() > 1e150 { 0.5 / theta } else { theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt()) };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s, t, apq);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[(i, j)] * a[(i, j)];
                }
            }
        }
        let off = off.sqrt();
        // Anything at roundoff level is still a usable answer.
        if off > 1e-12 * frob {
            return Err(Error::NoConvergence { sweeps: MAX_SWEEPS, off_diagonal: off });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]).then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src).into_owned();
        if let Some(first) = col.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                col.neg_mut();
            }
        }
        vectors.set_column(dst, &col);
    }
    Ok((values, vectors))
}

/// One-sided (Hestenes) Jacobi SVD of an `m × k` matrix.
///
/// Returns the singular values in descending order and the matching columns
/// of `X V`, whose norms are those singular values; normalizing a column with
/// nonzero norm gives the corresponding left singular vector. Small singular
/// values are computed to high relative accuracy.
pub(crate) fn jacobi_svd(input: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let k = input.ncols();
    let mut x = input.clone();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let frob = x.norm();
    // Pairs of columns at roundoff level relative to the whole matrix are left alone.
    let floor = f64::MIN_POSITIVE.max((frob * f64::EPSILON).powi(2));
    let mut converged = k < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let alpha = x.column(p).norm_squared();
                let beta = x.column(q).norm_squared();
                let gamma = x.column(p).dot(&x.column(q));
                if gamma.abs() <= floor || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta.abs() > 1e150 { 0.5 / zeta } else { zeta.signum() / (zeta.abs() + (zeta * zeta + 1.0).sqrt()) };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..x.nrows() {
                    let xp = x[(r, p)];
                    let xq = x[(r, q)];
                    x[(r, p)] = c * xp - s * xq;
                    x[(r, q)] = s * xp + c * xq;
                }
            }
        }
        converged = !rotated;
    }
    if !converged {
        let mut off = 0.0f64;
        for p in 0..k {
            for q in (p + 1)..k {
                off = off.max(x.column(p).dot(&x.column(q)).abs());
            }
        }
        if off > 1e-12 * frob * frob {
            return Err(Error::NoConvergence { sweeps: MAX_SWEEPS, off_diagonal: off });
        }
    }
    let norms: Vec<f64> = (0..k).map(|j| x.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let mut columns = DMatrix::zeros(x.nrows(), k);
    for (dst, &src) in order.iter().enumerate() {
        columns.set_column(dst, &x.column(src));
    }
    Ok((order.iter().map(|&i| norms[i]).collect(), columns))
}

#[allow(clippy::too_many_arguments)]
fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64, t: f64, apq: f64) {
    let n = a.nrows();
    let tau = s / (1.0 + c);
    let h = t * apq;
    a[(p, p)] -= h;
    a[(q, q)] += h;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let g = a[(r, p)];
        let hh = a[(r, q)];
        let np = g - s * (hh + g * tau);
        let nq = hh + s * (g - hh * tau);
        a[(r, p)] = np;
        a[(p, r)] = np;
        a[(r, q)] = nq;
        a[(q, r)] = nq;
    }
    for r in 0..n {
        let g = v[(r, p)];
        let hh = v[(r, q)];
        v[(r, p)] = g - s * (hh + g * tau);
        v[(r, q)] = hh + s * (g - hh * tau);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let (vals, vecs) = jacobi_eigen(&a).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-15);
        assert!((vals[1] - 3.0).abs() < 1e-15);
        for k in 0..2 {
            let v = vecs.column(k);
            let r = &a * v - v * vals[k];
            assert!(r.norm() < 1e-14);
        }
        // sign convention
        assert!(vecs[(0, 0)] > 0.0 && vecs[(0, 1)] > 0.0);
    }

    #[test]
    fn empty_and_scalar() {
        let (vals, _) = jacobi_eigen(&DMatrix::zeros(0, 0)).unwrap();
        assert!(vals.is_empty());
        let (vals, vecs) = jacobi_eigen(&DMatrix::from_element(1, 1, -3.5)).unwrap();
        assert_eq!(vals, vec![-3.5]);
        assert_eq!(vecs[(0, 0)], 1.0);
    }

    #[test]
    fn svd_recovers_tiny_singular_values() {
        // Columns (1, 0, 0) and (1, 1e-12, 0): singular values ≈ √2 and 1e-12/√2.
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 0.0, 1e-12, 0.0, 0.0]);
        let (sigma, cols) = jacobi_svd(&x).unwrap();
        assert!((sigma[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!((sigma[1] / (1e-12 / 2f64.sqrt()) - 1.0).abs() < 1e-10);
        assert!(cols.column(0).dot(&cols.column(1)).abs() < 1e-14 * sigma[0]);
    }

    #[test]
    fn svd_reconstructs_rank_deficient_input() {
        let x = DMatrix::from_fn(6, 5, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let (sigma, cols) = jacobi_svd(&x).unwrap();
        let gram = cols.transpose() * &cols;
        for i in 0..5 {
            for j in 0..5 {
                let expected = if i == j { sigma[i] * sigma[i] } else { 0.0 };
                assert!((gram[(i, j)] - expected).abs() < 1e-12 * sigma[0] * sigma[0]);
            }
        }
        // X Xᵀ is invariant under the right rotation.
        assert!((&cols * cols.transpose() - &x * x.transpose()).amax() < 1e-12);
    }

    #[test]
    fn svd_of_roundoff_matrix_converges() {
        let x = DMatrix::from_row_slice(3, 3, &[-2.8e-17, -1.1e-16, -5.6e-17, 0.0, -5.6e-17, 0.0, 0.0, 5.6e-17, 0.0]);
        let (sigma, _) = jacobi_svd(&x).unwrap();
        assert!(sigma[0] > 0.0 && sigma[0] < 2e-16);
    }

    #[test]
    fn zero_diagonal() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let (vals, _) = jacobi_eigen(&a).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-15 && (vals[1] - 1.0).abs() < 1e-15);
    }
}
