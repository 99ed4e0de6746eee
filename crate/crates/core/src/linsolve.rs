//! Matrix-free Krylov solvers with optional Jacobi preconditioning.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{dot, norm2, Real};

pub trait LinearOperator<T> {
    fn size(&self) -> usize;
    /// `y = A x`
    fn apply(&self, x: &[T], y: &mut [T]);
    fn diagonal(&self) -> Option<Vec<T>> {
        None
    }
}

/// Operator defined by a closure.
pub struct FnOperator<F> {
    pub n: usize,
    pub f: F,
}

impl<T, F: Fn(&[T], &mut [T])> LinearOperator<T> for FnOperator<F> {
    fn size(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[T], y: &mut [T]) {
        (self.f)(x, y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Relative residual tolerance `||b - A x|| <= tol ||b||`.
    pub tol: f64,
    pub max_iter: usize,
    /// GMRES restart length.
    pub restart: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            max_iter: 1000,
            restart: 50,
        }
    }
}

impl SolverConfig {
    pub fn with_tol(tol: f64) -> Self {
        SolverConfig {
            tol,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Final relative residual.
    pub final_residual: f64,
    pub converged: bool,
}

fn inv_diag<T: Real>(d: Option<&[T]>, n: usize) -> Vec<T> {
    match d {
        Some(d) => d
            .iter()
            .map(|&v| if v != T::zero() { T::one() / v } else { T::one() })
            .collect(),
        None => vec![T::one(); n],
    }
}

/// Preconditioned conjugate gradients for symmetric positive definite operators.
pub fn cg<T: Real, A: LinearOperator<T> + ?Sized>(
    op: &A,
    rhs: &[T],
    x0: Option<&[T]>,
    cfg: &SolverConfig,
    precond: Option<&[T]>,
) -> Result<(Vec<T>, SolveReport)> {
    let n = op.size();
    assert_eq!(rhs.len(), n);
    let bnorm = norm2(rhs);
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![T::zero(); n]);
    if bnorm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok((
            x,
            SolveReport {
                iterations: 0,
                final_residual: 0.0,
                converged: true,
            },
        ));
    }
    let minv = inv_diag(precond, n);
    let tol = T::lit(cfg.tol) * bnorm;
    let mut r = vec![T::zero(); n];
    op.apply(&x, &mut r);
    for i in 0..n {
        r[i] = rhs[i] - r[i];
    }
    let mut rn = norm2(&r);
    if rn <= tol {
        return Ok((
            x,
            SolveReport {
                iterations: 0,
                final_residual: (rn / bnorm).to_f64_lossy(),
                converged: true,
            },
        ));
    }
    let mut z: Vec<T> = r.iter().zip(&minv).map(|(&a, &b)| a * b).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    for it in 1..=cfg.max_iter {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::IndefiniteOperator(pap.to_f64_lossy()));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rn = norm2(&r);
        if rn <= tol {
            return Ok((
                x,
                SolveReport {
                    iterations: it,
                    final_residual: (rn / bnorm).to_f64_lossy(),
                    converged: true,
                },
            ));
        }
        for i in 0..n {
            z[i] = r[i] * minv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence {
        what: "conjugate gradients".into(),
        iterations: cfg.max_iter,
        residual: (rn / bnorm).to_f64_lossy(),
    })
}

/// Restarted GMRES with right Jacobi preconditioning, so the monitored residual
/// is the true residual.
pub fn gmres<T: Real, A: LinearOperator<T> + ?Sized>(
    op: &A,
    rhs: &[T],
    x0: Option<&[T]>,
    cfg: &SolverConfig,
    precond: Option<&[T]>,
) -> Result<(Vec<T>, SolveReport)> {
    let n = op.size();
    assert_eq!(rhs.len(), n);
    let bnorm = norm2(rhs);
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![T::zero(); n]);
    if bnorm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok((
            x,
            SolveReport {
                iterations: 0,
                final_residual: 0.0,
                converged: true,
            },
        ));
    }
    let minv = inv_diag(precond, n);
    let tol = T::lit(cfg.tol) * bnorm;
    let m = cfg.restart.max(1).min(n.max(1));
    let mut total = 0usize;
    let mut r = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let mut z = vec![T::zero(); n];
    let mut rn;
    loop {
        op.apply(&x, &mut r);
        for i in 0..n {
            r[i] = rhs[i] - r[i];
        }
        rn = norm2(&r);
        if rn <= tol {
            return Ok((
                x,
                SolveReport {
                    iterations: total,
                    final_residual: (rn / bnorm).to_f64_lossy(),
                    converged: true,
                },
            ));
        }
        if total >= cfg.max_iter {
            break;
        }
        let mut v: Vec<Vec<T>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|&a| a / rn).collect());
        let mut h = vec![vec![T::zero(); m]; m + 1];
        let mut cs = vec![T::zero(); m];
        let mut sn = vec![T::zero(); m];
        let mut g = vec![T::zero(); m + 1];
        g[0] = rn;
        let mut k_used = 0;
        for k in 0..m {
            for i in 0..n {
                z[i] = v[k][i] * minv[i];
            }
            op.apply(&z, &mut w);
            for (j, vj) in v.iter().enumerate() {
                let hj = dot(&w, vj);
                h[j][k] = hj;
                for i in 0..n {
                    w[i] -= hj * vj[i];
                }
            }
            let hn = norm2(&w);
            h[k + 1][k] = hn;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let denom = (h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]).sqrt();
            if denom == T::zero() {
                cs[k] = T::one();
                sn[k] = T::zero();
            } else {
                cs[k] = h[k][k] / denom;
                sn[k] = h[k + 1][k] / denom;
            }
            h[k][k] = cs[k] * h[k][k] + sn[k] * h[k + 1][k];
            h[k + 1][k] = T::zero();
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            total += 1;
            k_used = k + 1;
            let breakdown = hn <= T::epsilon() * rn;
            if g[k + 1].abs() <= tol || total >= cfg.max_iter || breakdown {
                break;
            }
            v.push(w.iter().map(|&a| a / hn).collect());
        }
        // back substitution
        let mut y = vec![T::zero(); k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = if h[i][i] != T::zero() { s / h[i][i] } else { T::zero() };
        }
        z.iter_mut().for_each(|a| *a = T::zero());
        for (j, &yj) in y.iter().enumerate() {
            for i in 0..n {
                z[i] += yj * v[j][i];
            }
        }
        for i in 0..n {
            x[i] += z[i] * minv[i];
        }
    }
    Err(Error::NoConvergence {
        what: "GMRES".into(),
        iterations: total,
        residual: (rn / bnorm).to_f64_lossy(),
    })
}
