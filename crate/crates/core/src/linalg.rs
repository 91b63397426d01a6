//! Dense real linear-algebra helpers shared by the rest of the crate.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Condition numbers above this are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Max-norm distance between two equally shaped matrices.
pub fn max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

pub fn max_diff_vec(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Numerical rank from singular values, relative to the largest one.
pub fn rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0_f64, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > tol * top.max(1.0)).count()
}

/// 1-norm condition number estimate `|A|_1 |A^-1|_1`.
fn cond_1(a: &DMatrix<f64>, inv: &DMatrix<f64>) -> f64 {
    let norm1 = |m: &DMatrix<f64>| {
        m.column_iter()
            .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0_f64, f64::max)
    };
    norm1(a) * norm1(inv)
}

/// Inverse through partially pivoted LU, with the 1-norm condition number.
///
/// Fails with [`Error::Singular`] (carrying the numerical rank) when the
/// factorization breaks down, and with [`Error::IllConditioned`] when the
/// condition number exceeds [`MAX_CONDITION`].
pub fn inverse_with_condition(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    if a.nrows() != a.ncols() {
        return Err(Error::Singular {
            rank: rank(a, 1e-12),
            dim: a.nrows().max(a.ncols()),
        });
    }
    let n = a.nrows();
    let singular = || Error::Singular {
        rank: rank(a, 1e-12),
        dim: n,
    };
    let inv = a.clone().lu().try_inverse().ok_or_else(singular)?;
    let cond = cond_1(a, &inv);
    if !cond.is_finite() {
        return Err(singular());
    }
    if cond > MAX_CONDITION {
        if rank(a, 1e-12) < n {
            return Err(singular());
        }
        return Err(Error::IllConditioned {
            cond,
            limit: MAX_CONDITION,
        });
    }
    Ok((inv, cond))
}

/// Greedy first-seen pivot selection: returns the indices of a maximal
/// linearly independent subset, scanning the vectors in order.
pub fn independent_subset(vectors: &[DVector<f64>], tol: f64) -> Vec<usize> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut picked = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        let scale = max_abs_vec(v).max(1.0);
        let mut r = v.clone();
        // two passes of Gram-Schmidt keep the residual honest
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&r);
                r.axpy(-c, q, 1.0);
            }
        }
        let norm = r.norm();
        if norm > tol.max(1e-12) * scale {
            basis.push(r / norm);
            picked.push(i);
        }
    }
    picked
}

/// Orthonormal basis (as columns) of the span of `vectors`.
pub fn orthonormal_span(vectors: &[DVector<f64>], dim: usize, tol: f64) -> DMatrix<f64> {
    if vectors.is_empty() {
        return DMatrix::zeros(dim, 0);
    }
    let m = DMatrix::from_columns(vectors);
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let top = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let mut cols = Vec::new();
    for (j, s) in svd.singular_values.iter().enumerate() {
        if *s > tol.max(1e-12) * top.max(1.0) {
            cols.push(u.column(j).into_owned());
        }
    }
    if cols.is_empty() {
        return DMatrix::zeros(dim, 0);
    }
    DMatrix::from_columns(&cols)
}

/// Orthonormal basis (as columns) of the null space of `m`.
pub fn null_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    // pad so the SVD returns a full set of right singular vectors
    let mut padded = DMatrix::zeros(rows.max(cols), cols);
    padded.view_mut((0, 0), (rows, cols)).copy_from(m);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let top = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let thresh = tol.max(1e-12) * top.max(1.0);
    let null: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= thresh)
        .map(|(j, _)| vt.row(j).transpose().into_owned())
        .collect();
    if null.is_empty() {
        DMatrix::zeros(cols, 0)
    } else {
        DMatrix::from_columns(&null)
    }
}

/// Least-squares solve of `a x = b` via the pseudo-inverse; returns the
/// solution and the max-norm residual.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let pinv = a
        .clone()
        .pseudo_inverse(1e-12)
        .unwrap_or_else(|_| DMatrix::zeros(a.ncols(), a.nrows()));
    let x = &pinv * b;
    let r = max_diff_vec(&(a * &x), b);
    (x, r)
}

pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

pub fn kron_vec(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_inverse_reports_rank() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 0.0, 1.0, 1.0]);
        match inverse_with_condition(&a) {
            Err(Error::Singular { rank, dim }) => {
                assert_eq!(rank, 2);
                assert_eq!(dim, 3);
            }
            other => panic!("expected singular, got {other:?}"),
        }
    }

    #[test]
    fn independent_subset_is_first_seen() {
        let vs = vec![
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![2.0, 0.0]),
            DVector::from_vec(vec![1.0, 1.0]),
            DVector::from_vec(vec![0.0, 1.0]),
        ];
        assert_eq!(independent_subset(&vs, 1e-9), vec![0, 2]);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let n = null_space(&m, 1e-12);
        assert_eq!(n.ncols(), 2);
        assert!(max_abs(&(&m * &n)) < 1e-12);
    }

    #[test]
    fn kron_is_row_major() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let i = DMatrix::<f64>::identity(2, 2);
        let k = kron(&a, &i);
        // NOT (x) id swaps the (0,*) and (1,*) blocks
        assert_eq!(k[(0, 2)], 1.0);
        assert_eq!(k[(1, 3)], 1.0);
        assert_eq!(k[(2, 0)], 1.0);
        assert_eq!(k[(3, 1)], 1.0);
        assert_eq!(k.sum(), 4.0);
    }
}
