//! Three-stage additive Runge-Kutta pair (explicit tableau with free parameter
//! `alpha`, implicit TR-BDF2 tableau), Courant numbers, and the absolute
//! monotonicity / linear stability analysis of the explicit part.

use crate::dg::Discretization;
use crate::eos::EosModel;
use crate::error::Result;
use crate::real::Real;

/// `gamma = 2 - sqrt(2)`.
pub fn imex_gamma() -> f64 {
    2.0 - std::f64::consts::SQRT_2
}

/// Explicit third-row weight that maximizes the linear stability region.
pub fn original_alpha() -> f64 {
    (7.0 - 2.0 * imex_gamma()) / 6.0
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImexTableau {
    pub a: [[f64; 3]; 3],
    pub a_tilde: [[f64; 3]; 3],
    pub b: [f64; 3],
    pub c: [f64; 3],
    pub alpha: f64,
    pub gamma: f64,
}

impl ImexTableau {
    pub fn ark2(alpha: f64) -> Self {
        let g = imex_gamma();
        let s2 = std::f64::consts::SQRT_2;
        ImexTableau {
            a: [[0.0; 3], [g, 0.0, 0.0], [1.0 - alpha, alpha, 0.0]],
            a_tilde: [
                [0.0; 3],
                [0.5 * g, 0.5 * g, 0.0],
                [0.5 / s2, 0.5 / s2, 1.0 - 1.0 / s2],
            ],
            b: [0.5 - 0.25 * g, 0.5 - 0.25 * g, 0.5 * g],
            c: [0.0, g, 1.0],
            alpha,
            gamma: g,
        }
    }

    pub fn stages(&self) -> usize {
        3
    }

    /// `(sum b, sum b c)` for the explicit and the implicit method.
    pub fn order_conditions(&self) -> [(f64, f64); 2] {
        let sb: f64 = self.b.iter().sum();
        let sbc: f64 = self.b.iter().zip(&self.c).map(|(b, c)| b * c).sum();
        [(sb, sbc), (sb, sbc)]
    }

    /// Largest deviation between row sums and abscissae over both tableaux.
    pub fn row_sum_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for l in 0..3 {
            let se: f64 = self.a[l].iter().sum();
            let si: f64 = self.a_tilde[l].iter().sum();
            d = d.max((se - self.c[l]).abs()).max((si - self.c[l]).abs());
        }
        d
    }

    /// Stability function of the explicit part, `1 + z + alpha gamma z^2`.
    pub fn stability_function(&self, re: f64, im: f64) -> (f64, f64) {
        let k = self.alpha * self.gamma;
        // z^2 = (re^2 - im^2) + 2 i re im
        (1.0 + re + k * (re * re - im * im), im + 2.0 * k * re * im)
    }
}

impl Default for ImexTableau {
    fn default() -> Self {
        ImexTableau::ark2(0.5)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CourantPair<T> {
    pub acoustic: T,
    pub advective: T,
}

/// `C = r max(c/M) dt / H` and `C_u = r max|u| dt / H` over the volume
/// quadrature points; `r` is replaced by 1 for piecewise constants.
pub fn courant_numbers<T: Real>(
    disc: &Discretization<T>,
    rho: &[T],
    u: &[T],
    p: &[T],
    eos: &EosModel<T>,
    dt: T,
    mach: T,
) -> Result<CourantPair<T>> {
    let (cmax, umax) = max_speeds(disc, rho, u, p, eos)?;
    let r = T::lit(disc.degree().max(1) as f64);
    let h = disc.mesh.min_diameter();
    Ok(CourantPair {
        acoustic: r * cmax / mach * dt / h,
        advective: r * umax * dt / h,
    })
}

/// Maximum sound speed and flow speed over the volume quadrature points.
pub fn max_speeds<T: Real>(
    disc: &Discretization<T>,
    rho: &[T],
    u: &[T],
    p: &[T],
    eos: &EosModel<T>,
) -> Result<(T, T)> {
    let nq = disc.elem.nq;
    let mut r = vec![T::zero(); nq];
    let mut ux = vec![T::zero(); nq];
    let mut uy = vec![T::zero(); nq];
    let mut pq = vec![T::zero(); nq];
    let (mut cmax, mut umax) = (T::zero(), T::zero());
    for c in 0..disc.n_cells() {
        disc.eval(disc.block(rho, c), &mut r);
        disc.eval(disc.vblock(u, c, 0), &mut ux);
        disc.eval(disc.vblock(u, c, 1), &mut uy);
        disc.eval(disc.block(p, c), &mut pq);
        for q in 0..nq {
            let s = eos.sound_speed(pq[q], r[q], None)?;
            cmax = cmax.max(s);
            umax = umax.max((ux[q] * ux[q] + uy[q] * uy[q]).sqrt());
        }
    }
    Ok((cmax, umax))
}

/// `A(xi) = A (I - xi A)^-1`, `b(xi)^T = b^T (I - xi A)^-1`,
/// `e(xi) = (I - xi A)^-1 e`, `phi(xi) = 1 + xi b^T (I - xi A)^-1 e`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonotonicityMatrices {
    pub a: [[f64; 3]; 3],
    pub b: [f64; 3],
    pub e: [f64; 3],
    pub phi: f64,
}

/// Evaluated numerically from the explicit tableau.
pub fn monotonicity_matrices(tab: &ImexTableau, xi: f64) -> MonotonicityMatrices {
    // (I - xi A)^-1 by forward substitution, A strictly lower triangular
    let a = tab.a;
    let mut inv = [[0.0; 3]; 3];
    for col in 0..3 {
        let mut x = [0.0; 3];
        for i in 0..3 {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for j in 0..i {
                s += xi * a[i][j] * x[j];
            }
            x[i] = s;
        }
        for i in 0..3 {
            inv[i][col] = x[i];
        }
    }
    let mut am = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            am[i][j] = (0..3).map(|k| a[i][k] * inv[k][j]).sum();
        }
    }
    let mut b = [0.0; 3];
    for j in 0..3 {
        b[j] = (0..3).map(|k| tab.b[k] * inv[k][j]).sum();
    }
    let mut e = [0.0; 3];
    for i in 0..3 {
        e[i] = inv[i].iter().sum();
    }
    let phi = 1.0 + xi * (0..3).map(|k| tab.b[k] * e[k]).sum::<f64>();
    MonotonicityMatrices { a: am, b, e, phi }
}

/// Elementwise nonnegativity of `A(xi)`, `b(xi)`, `e(xi)` and `phi(xi)`.
pub fn is_absolutely_monotone(tab: &ImexTableau, xi: f64) -> bool {
    const TOL: f64 = -1e-14;
    let m = monotonicity_matrices(tab, xi);
    m.a.iter().flatten().all(|&v| v >= TOL)
        && m.b.iter().all(|&v| v >= TOL)
        && m.e.iter().all(|&v| v >= TOL)
        && m.phi >= TOL
}

/// Largest `R` with absolute monotonicity on `[-R, 0]`: scan with the given
/// resolution, then bisect the first violation.
pub fn monotonicity_radius(tab: &ImexTableau, scan_resolution: f64) -> f64 {
    const XI_MAX: f64 = 20.0;
    if !is_absolutely_monotone(tab, 0.0) {
        return 0.0;
    }
    let h = scan_resolution.min(1e-4);
    let n = (XI_MAX / h).ceil() as usize;
    let mut good = 0.0;
    for k in 1..=n {
        let r = k as f64 * h;
        if is_absolutely_monotone(tab, -r) {
            good = r;
            continue;
        }
        let (mut lo, mut hi) = (good, r);
        while hi - lo > 1e-14 * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if is_absolutely_monotone(tab, -mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return lo;
    }
    XI_MAX
}

/// Extent of the stability region `|1 + z + alpha gamma z^2| < 1` along the
/// imaginary axis.
pub fn stability_boundary(alpha: f64) -> f64 {
    const Y_MAX: f64 = 20.0;
    const H: f64 = 1e-3;
    let tab = ImexTableau::ark2(alpha);
    let inside = |y: f64| {
        let (re, im) = tab.stability_function(0.0, y);
        re * re + im * im < 1.0
    };
    let n = (Y_MAX / H) as usize;
    let mut good = 0.0;
    for k in 1..=n {
        let y = k as f64 * H;
        if inside(y) {
            good = y;
            continue;
        }
        if good == 0.0 {
            // check whether the region touches the axis below the first sample
            let mut y_small = H;
            while y_small > 1e-12 && !inside(y_small) {
                y_small *= 0.5;
            }
            if y_small <= 1e-12 {
                return 0.0;
            }
            good = y_small;
        }
        let (mut lo, mut hi) = (good, y);
        while hi - lo > 1e-14 {
            let mid = 0.5 * (lo + hi);
            if inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return lo;
    }
    Y_MAX
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableauAnalysis {
    pub alpha: f64,
    pub radius: f64,
    pub imag_extent: f64,
}

/// `steps + 1` equally spaced samples in `[alpha_min, alpha_max]`.
pub fn analyze_alpha_range(alpha_min: f64, alpha_max: f64, steps: usize) -> Vec<TableauAnalysis> {
    let steps = steps.max(1);
    (0..=steps)
        .map(|k| {
            let alpha = alpha_min + (alpha_max - alpha_min) * k as f64 / steps as f64;
            TableauAnalysis {
                alpha,
                radius: monotonicity_radius(&ImexTableau::ark2(alpha), 1e-4),
                imag_extent: stability_boundary(alpha),
            }
        })
        .collect()
}

pub fn analysis_csv(rows: &[TableauAnalysis]) -> String {
    let mut s = String::from("alpha,R,imag_axis_extent\n");
    for r in rows {
        s.push_str(&format!("{:.6},{:.12e},{:.12e}\n", r.alpha, r.radius, r.imag_extent));
    }
    s
}
