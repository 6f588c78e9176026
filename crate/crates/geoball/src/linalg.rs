//! Dense linear algebra on matrices up to 4x4.
//!
//! The elimination routines are generic over [`Analytic`] so the same code
//! inverts a matrix of plain numbers or of jets; pivots are chosen by the
//! magnitude of the value part, which is the right criterion in both cases.

use crate::jet::Analytic;

/// Determinant and inverse of the leading `n`-by-`n` block via Gauss-Jordan
/// elimination with partial pivoting. Returns `None` on an exactly zero
/// pivot; near-singular inputs are the caller's concern (condition check).
pub fn det_inverse<T: Analytic>(a: &[[T; 4]; 4], n: usize) -> Option<(T, [[T; 4]; 4])> {
    let zero = a[0][0].lift(0.0);
    let mut m = *a;
    let mut inv = [[zero; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate().take(n) {
        row[i] = a[0][0].lift(1.0);
    }
    let mut det = a[0][0].lift(1.0);

    for col in 0..n {
        let mut piv = col;
        let mut best = m[col][col].value().abs();
        for (r, row) in m.iter().enumerate().take(n).skip(col + 1) {
            let mag = row[col].value().abs();
            if mag > best {
                best = mag;
                piv = r;
            }
        }
        if best == 0.0 {
            return None;
        }
        if piv != col {
            m.swap(col, piv);
            inv.swap(col, piv);
            det = -det;
        }
        let p = m[col][col];
        det = det * p;
        let pinv = p.recip();
        for j in 0..n {
            m[col][j] = m[col][j] * pinv;
            inv[col][j] = inv[col][j] * pinv;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r][col];
            if f.value() == 0.0 {
                // Still multiply through for jets: a zero value can carry
                // nonzero derivative coefficients.
            }
            for j in 0..n {
                let mj = m[col][j];
                let ij = inv[col][j];
                m[r][j] = m[r][j] - f * mj;
                inv[r][j] = inv[r][j] - f * ij;
            }
        }
    }
    Some((det, inv))
}

/// Infinity norm of the leading `n`-by-`n` block.
pub fn inf_norm(a: &[[f64; 4]; 4], n: usize) -> f64 {
    let mut best = 0.0f64;
    for row in a.iter().take(n) {
        let s: f64 = row.iter().take(n).map(|v| v.abs()).sum();
        best = best.max(s);
    }
    best
}

/// Condition estimate ||g|| * ||g^-1|| in the infinity norm.
pub fn condition_estimate(g: &[[f64; 4]; 4], g_inv: &[[f64; 4]; 4], n: usize) -> f64 {
    inf_norm(g, n) * inf_norm(g_inv, n)
}

/// Lower-triangular Cholesky factor of the leading `n`-by-`n` block, or
/// `None` when the matrix is not positive definite.
pub fn cholesky_lower(g: &[[f64; 4]; 4], n: usize) -> Option<[[f64; 4]; 4]> {
    let mut l = [[0.0f64; 4]; 4];
    for i in 0..n {
        for j in 0..=i {
            let mut s = g[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Columns of L^-T for a lower-triangular L: an orthonormal-frame matrix for
/// the inner product whose Gram matrix L L^T is. Column `i` solves
/// L^T f = e_i by back substitution.
pub fn inverse_transpose_columns(l: &[[f64; 4]; 4], n: usize) -> [[f64; 4]; 4] {
    let mut cols = [[0.0f64; 4]; 4];
    for i in 0..n {
        let mut f = [0.0f64; 4];
        for r in (0..n).rev() {
            let mut s = if r == i { 1.0 } else { 0.0 };
            for k in r + 1..n {
                s -= l[k][r] * f[k];
            }
            f[r] = s / l[r][r];
        }
        cols[i] = f;
    }
    cols
}

/// Determinant of a 3x3 matrix.
pub fn det3(a: &[[f64; 3]; 3]) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}
