//! Isentropic vortex advected by a uniform background flow on a periodic box.

use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VortexParams<T> {
    pub beta: T,
    pub mach: T,
    pub gamma: T,
    pub center: [T; 2],
    /// Background velocity before the Mach scaling.
    pub background: [T; 2],
    /// Periodic box `[lo, hi]^2`.
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Default for VortexParams<T> {
    fn default() -> Self {
        VortexParams {
            beta: T::lit(10.0),
            mach: T::lit(0.1),
            gamma: T::lit(1.4),
            center: [T::zero(); 2],
            background: [T::lit(10.0); 2],
            lo: T::lit(-10.0),
            hi: T::lit(10.0),
        }
    }
}

impl<T: Real> VortexParams<T> {
    /// `u_inf = M u~_inf`
    pub fn background_velocity(&self) -> [T; 2] {
        [self.mach * self.background[0], self.mach * self.background[1]]
    }

    fn wrap(&self, x: T) -> T {
        let l = self.hi - self.lo;
        let mut y = (x - self.lo) % l;
        if y < T::zero() {
            y += l;
        }
        self.lo + y
    }

    /// Initial condition `(rho, u, p)`.
    pub fn initial(&self, x: [T; 2]) -> (T, [T; 2], T) {
        let pi = T::PI();
        let g = self.gamma;
        let (dx, dy) = (x[0] - self.center[0], x[1] - self.center[1]);
        let r2 = dx * dx + dy * dy;
        let m2 = self.mach * self.mach;
        let dt = (T::one() - g) / (T::lit(8.0) * g * pi * pi) * m2 * self.beta * self.beta
            * (T::one() - r2).exp();
        let base = T::one() + dt;
        let rho = base.powf(T::one() / (g - T::one()));
        let p = m2 * base.powf(g / (g - T::one()));
        let s = self.beta * self.mach * (T::half() * (T::one() - r2)).exp() / (T::two() * pi);
        let ub = self.background_velocity();
        (rho, [ub[0] - s * dy, ub[1] + s * dx], p)
    }

    /// Exact solution: the initial data transported with `u_inf`, wrapped
    /// periodically.
    pub fn exact(&self, x: [T; 2], t: T) -> (T, [T; 2], T) {
        let ub = self.background_velocity();
        self.initial([self.wrap(x[0] - ub[0] * t), self.wrap(x[1] - ub[1] * t)])
    }
}
