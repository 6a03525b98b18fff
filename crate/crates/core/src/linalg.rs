//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Largest absolute entry, zero for empty matrices.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// `max |M + Mᵀ|` for a square matrix.
pub fn skew_defect(m: &Matrix) -> f64 {
    let n = m.nrows();
    let mut d = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            d = d.max((m[(i, j)] + m[(j, i)]).abs());
        }
    }
    d
}

/// `max |M − Mᵀ|` for a square matrix.
pub fn sym_defect(m: &Matrix) -> f64 {
    let n = m.nrows();
    let mut d = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            d = d.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    d
}

pub fn antisymmetrize(m: &Matrix) -> Matrix {
    let n = m.nrows();
    Matrix::from_fn(n, n, |i, j| (m[(i, j)] - m[(j, i)]) / 2.0)
}

pub fn symmetrize(m: &Matrix) -> Matrix {
    let n = m.nrows();
    Matrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)]) / 2.0)
}

/// Smallest eigenvalue of the symmetric part of `m`; zero when `m` is empty.
pub fn min_sym_eigenvalue(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let s = symmetrize(m);
    s.symmetric_eigenvalues().min()
}

pub fn block_diag(blocks: &[&Matrix]) -> Matrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

pub fn vstack(parts: &[&Vector]) -> Vector {
    let n: usize = parts.iter().map(|p| p.len()).sum();
    let mut out = Vector::zeros(n);
    let mut k = 0;
    for p in parts {
        out.rows_mut(k, p.len()).copy_from(*p);
        k += p.len();
    }
    out
}

fn svd_tolerance(sv: &Vector, rows: usize, cols: usize) -> f64 {
    let smax = sv.iter().fold(0.0_f64, |a, v| a.max(*v));
    smax * (rows.max(cols) as f64) * f64::EPSILON * 16.0
}

/// Numerical rank from the singular values.
pub fn numerical_rank(m: &Matrix) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let tol = svd_tolerance(&sv, m.nrows(), m.ncols());
    sv.iter().filter(|s| **s > tol).count()
}

/// Orthonormal basis (columns) of the left null space `{w : wᵀ M = 0}`.
pub fn left_null_space(m: &Matrix) -> Matrix {
    let n = m.nrows();
    if n == 0 {
        return Matrix::zeros(0, 0);
    }
    // Pad to a square matrix so the SVD yields a full U.
    let cols = m.ncols().max(n);
    let mut padded = Matrix::zeros(n, cols);
    padded.view_mut((0, 0), (n, m.ncols())).copy_from(m);
    let svd = padded.svd(true, false);
    let u = svd.u.expect("U requested");
    let tol = svd_tolerance(&svd.singular_values, n, m.ncols()).max(1e-300);
    let null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= tol)
        .collect();
    let mut out = Matrix::zeros(n, null.len());
    for (c, &k) in null.iter().enumerate() {
        out.set_column(c, &u.column(k));
    }
    out
}

/// Minimum-norm least-squares solution of `A x = b`.
pub fn lstsq_min_norm(a: &Matrix, b: &Vector) -> Vector {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vector::zeros(a.ncols());
    }
    let svd = a.clone().svd(true, true);
    let tol = svd_tolerance(&svd.singular_values, a.nrows(), a.ncols());
    svd.solve(b, tol).expect("U and V were computed")
}

/// 2-norm condition number estimate via singular values.
pub fn condition_number(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// Orthonormalizes the columns of `v` (thin QR). Opt-in helper for projection bases.
pub fn orthonormalize(v: &Matrix) -> Matrix {
    if v.ncols() == 0 {
        return v.clone();
    }
    v.clone().qr().q()
}

/// Leading `r` left singular vectors of `snapshots` (thin SVD basis).
pub fn svd_basis(snapshots: &Matrix, r: usize) -> Matrix {
    let svd = snapshots.clone().svd(true, false);
    let u = svd.u.expect("U requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let r = r.min(order.len());
    let mut out = Matrix::zeros(snapshots.nrows(), r);
    for (c, &k) in order.iter().take(r).enumerate() {
        out.set_column(c, &u.column(k));
    }
    out
}

/// Formats a float as the shortest decimal that round-trips.
pub fn format_float(x: f64) -> String {
    if x == 0.0 || (1e-4..1e16).contains(&x.abs()) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
