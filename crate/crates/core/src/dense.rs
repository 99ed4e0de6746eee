//! Small dense kernels for cell-local blocks.

use crate::error::{Error, Result};
use crate::real::Real;

/// In-place Cholesky factorization of a row-major SPD matrix (lower factor).
pub fn cholesky<T: Real>(a: &mut [T], n: usize) -> Result<()> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > T::zero()) {
            return Err(Error::IndefiniteOperator(d.to_f64_lossy()));
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
        for i in 0..j {
            a[i * n + j] = T::zero();
        }
    }
    Ok(())
}

/// Solves `L L^T x = b` in place given the factor from [`cholesky`].
pub fn cholesky_solve<T: Real>(l: &[T], n: usize, b: &mut [T]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Gaussian elimination with partial pivoting; returns `None` for singular input.
pub fn lu_solve<T: Real>(a: &[T], n: usize, b: &[T]) -> Option<Vec<T>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            m[i * n + col]
                .abs()
                .partial_cmp(&m[j * n + col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[piv * n + col] == T::zero() {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
            }
            x.swap(piv, col);
        }
        for i in col + 1..n {
            let f = m[i * n + col] / m[col * n + col];
            if f != T::zero() {
                for k in col..n {
                    let v = m[col * n + k];
                    m[i * n + k] -= f * v;
                }
                let v = x[col];
                x[i] -= f * v;
            }
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s -= m[i * n + k] * x[k];
        }
        x[i] = s / m[i * n + i];
    }
    Some(x)
}

/// Inverse of a small nonsingular matrix.
pub fn inverse<T: Real>(a: &[T], n: usize) -> Option<Vec<T>> {
    let mut inv = vec![T::zero(); n * n];
    let mut e = vec![T::zero(); n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = T::zero());
        e[j] = T::one();
        let col = lu_solve(a, n, &e)?;
        for i in 0..n {
            inv[i * n + j] = col[i];
        }
    }
    Some(inv)
}

/// `y = A x` for a row-major `rows x cols` matrix.
#[inline]
pub fn matvec<T: Real>(a: &[T], rows: usize, cols: usize, x: &[T], y: &mut [T]) {
    for i in 0..rows {
        let row = &a[i * cols..(i + 1) * cols];
        y[i] = row.iter().zip(x).map(|(&p, &q)| p * q).sum();
    }
}

/// `y += A^T x` for a row-major `rows x cols` matrix.
#[inline]
pub fn matvec_t_add<T: Real>(a: &[T], rows: usize, cols: usize, x: &[T], y: &mut [T]) {
    for i in 0..rows {
        let xi = x[i];
        if xi == T::zero() {
            continue;
        }
        let row = &a[i * cols..(i + 1) * cols];
        for (yj, &aij) in y.iter_mut().zip(row) {
            *yj += aij * xi;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_round_trip() {
        let a: [f64; 9] = [4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        let mut l = a;
        cholesky(&mut l, 3).unwrap();
        let mut x = [1.0, 2.0, 3.0];
        cholesky_solve(&l, 3, &mut x);
        let mut y = [0.0; 3];
        matvec(&a, 3, 3, &x, &mut y);
        for (v, w) in y.iter().zip([1.0, 2.0, 3.0]) {
            assert!((v - w).abs() < 1e-13);
        }
    }

    #[test]
    fn lu_matches_inverse() {
        let a = [0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let inv = inverse(&a, 3).unwrap();
        let mut prod = [0.0f64; 9];
        for i in 0..3 {
            for j in 0..3 {
                prod[i * 3 + j] = (0..3).map(|k| a[i * 3 + k] * inv[k * 3 + j]).sum();
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((prod[i * 3 + j] - e).abs() < 1e-13);
            }
        }
    }
}
