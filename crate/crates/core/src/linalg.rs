//! Rank and null-space computation for moment matrices.
//!
//! The exact backend reduces to reduced row echelon form with rational
//! pivots; rank is then unambiguous. The float backend goes through
//! singular values (one-sided Jacobi) and counts those above a relative
//! threshold, so its rank decisions inherit the tolerance.

use alloc::vec::Vec;

use num_traits::Float;

use crate::scalar::Scalar;

// Keeps sqrt available without the standard library, where f64 has no
// inherent method.
fn sqrt(x: f64) -> f64 {
    Float::sqrt(x)
}

/// Rank of `rows` (r x c) and, when rank < c, a nonzero right-null
/// vector of length c.
pub fn rank_and_nullvec<S: Scalar>(rows: &[Vec<S>], cols: usize, eps: f64) -> (usize, Option<Vec<S>>) {
    if S::EXACT {
        exact_rank_nullvec(rows, cols)
    } else {
        float_rank_nullvec(rows, cols, eps)
    }
}

fn exact_rank_nullvec<S: Scalar>(rows: &[Vec<S>], cols: usize) -> (usize, Option<Vec<S>>) {
    let mut a: Vec<Vec<S>> = rows.to_vec();
    let nrows = a.len();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut r = 0usize;
    for c in 0..cols {
        // Find a nonzero pivot at or below row r.
        let Some(p) = (r..nrows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let pivot = a[r][c].clone();
        for x in a[r].iter_mut() {
            *x = x.clone() / pivot.clone();
        }
        for i in 0..nrows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    a[i][j] = a[i][j].clone() - f.clone() * a[r][j].clone();
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == nrows {
            break;
        }
    }
    let rank = pivot_cols.len();
    if rank == cols {
        return (rank, None);
    }
    // First free column supplies a null vector: set it to one and read
    // the pivot coordinates off the reduced rows.
    let free = (0..cols).find(|c| !pivot_cols.contains(c)).expect("rank < cols");
    let mut v = alloc::vec![S::zero(); cols];
    v[free] = S::one();
    for (i, &pc) in pivot_cols.iter().enumerate() {
        v[pc] = -a[i][free].clone();
    }
    (rank, Some(v))
}

fn float_rank_nullvec<S: Scalar>(rows: &[Vec<S>], cols: usize, eps: f64) -> (usize, Option<Vec<S>>) {
    let nrows = rows.len();
    // Columns of the matrix as f64 vectors.
    let mut a: Vec<Vec<f64>> = (0..cols)
        .map(|c| (0..nrows).map(|r| rows[r][c].to_f64()).collect())
        .collect();
    // Right singular vectors accumulate here.
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|i| (0..cols).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    // One-sided Jacobi: rotate column pairs until all are orthogonal.
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for i in 0..cols {
            for j in (i + 1)..cols {
                let aii = dot(&a[i], &a[i]);
                let ajj = dot(&a[j], &a[j]);
                let aij = dot(&a[i], &a[j]);
                if aij.abs() <= 1e-30 || aij.abs() <= 1e-15 * sqrt(aii * ajj) {
                    continue;
                }
                off = off.max(aij.abs());
                let tau = (ajj - aii) / (2.0 * aij);
                let t = tau.signum() / (tau.abs() + sqrt(1.0 + tau * tau));
                let c = 1.0 / sqrt(1.0 + t * t);
                let s = c * t;
                for r in 0..nrows {
                    let x = a[i][r];
                    let y = a[j][r];
                    a[i][r] = c * x - s * y;
                    a[j][r] = s * x + c * y;
                }
                for r in 0..cols {
                    let x = v[i][r];
                    let y = v[j][r];
                    v[i][r] = c * x - s * y;
                    v[j][r] = s * x + c * y;
                }
            }
        }
        if off == 0.0 {
            break;
        }
    }
    let sigmas: Vec<f64> = (0..cols).map(|c| sqrt(dot(&a[c], &a[c]))).collect();
    let sigma_max = sigmas.iter().cloned().fold(0.0f64, f64::max);
    if sigma_max == 0.0 {
        // Zero matrix: every unit vector is a null vector.
        let mut w = alloc::vec![S::zero(); cols];
        if cols > 0 {
            w[0] = S::one();
        }
        return (0, if cols > 0 { Some(w) } else { None });
    }
    let thresh = eps * sigma_max;
    let rank = sigmas.iter().filter(|&&s| s > thresh).count();
    if rank == cols {
        return (rank, None);
    }
    let (weakest, _) = sigmas
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.partial_cmp(b).expect("finite singular values"))
        .expect("cols > 0");
    // Sign convention: largest-magnitude entry positive.
    let col = &v[weakest];
    let lead = col.iter().cloned().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    let flip = if lead < 0.0 { -1.0 } else { 1.0 };
    let w = col
        .iter()
        .map(|&x| S::from_f64(flip * x).expect("rotation entries are finite"))
        .collect();
    (rank, Some(w))
}
