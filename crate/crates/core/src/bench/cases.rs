//! The benchmark cases as configurations, and the evaluation of their initial
//! conditions.

use crate::adapt::{IndicatorKind, MarkingStrategy};
use crate::bench::riemann::{PrimitiveState, RiemannState};
use crate::bench::vortex::VortexParams;
use crate::config::{AdaptConfig, CaseConfig, InitialCondition, MeshConfig, OutputConfig, PhysicsConfig, TimeConfig};
use crate::dg::Discretization;
use crate::eos::{n2o_coeffs, CubicEosParams, EosModel, IdealGasParams};
use crate::error::{Error, Result};
use crate::hyperbolic::{FluxMode, HyperbolicSettings};
use crate::imex::original_alpha;
use crate::model::{BoundaryCondition, FlowState};
use crate::real::Real;
use crate::viscous::ViscousSettings;

type Bc = BoundaryCondition<f64>;

const PERIODIC4: [Bc; 4] = [Bc::Periodic; 4];

fn wall() -> Bc {
    Bc::wall()
}

fn base(name: &str, eos: EosModel<f64>, physics: PhysicsConfig, mesh: MeshConfig, time: TimeConfig, initial: InitialCondition) -> CaseConfig {
    CaseConfig {
        name: name.into(),
        eos,
        physics,
        mesh,
        time,
        hyperbolic: HyperbolicSettings::default(),
        viscous: ViscousSettings::default(),
        adapt: None,
        output: OutputConfig::default(),
        initial,
    }
}

/// Isentropic vortex on `(-10, 10)^2`, `nel^2` cells, acoustic Courant number `courant`.
pub fn vortex(nel: usize, degree: usize, courant: f64, alpha: Option<f64>) -> CaseConfig {
    base(
        "vortex",
        EosModel::ideal(1.4),
        PhysicsConfig {
            mach: 0.1,
            froude: None,
            reynolds: None,
            prandtl: 1.0,
            boundaries: PERIODIC4,
        },
        MeshConfig {
            lo: [-10.0, -10.0],
            hi: [10.0, 10.0],
            cells: [nel, nel],
            degree,
            one_dimensional: false,
        },
        TimeConfig {
            final_time: 1.0,
            dt: None,
            courant: Some(courant),
            alpha,
            max_advective_courant: None,
        },
        InitialCondition::Vortex {
            beta: 10.0,
            center: [0.0, 0.0],
            background: [10.0, 10.0],
        },
    )
}

/// Vortex with the density-gradient indicator.
pub fn vortex_adaptive(nel: usize, degree: usize, courant: f64, levels: u32) -> CaseConfig {
    let mut c = vortex(nel, degree, courant, None);
    c.name = "vortex_adaptive".into();
    let h = 20.0 / nel as f64;
    c.adapt = Some(AdaptConfig {
        indicator: IndicatorKind::DensityGradient,
        strategy: MarkingStrategy::Threshold {
            refine: 2e-3,
            coarsen: 5e-4,
        },
        min_diameter: h / (1u64 << levels) as f64,
        max_diameter: h,
        every: 5,
        initial_cycles: levels as usize,
    });
    c
}

fn sod(name: &str, eos: EosModel<f64>) -> CaseConfig {
    let s = RiemannState::sod();
    let mut c = base(
        name,
        eos,
        PhysicsConfig {
            mach: 1.0,
            froude: None,
            reynolds: None,
            prandtl: 1.0,
            boundaries: [wall(), wall(), Bc::Periodic, Bc::Periodic],
        },
        MeshConfig {
            lo: [-0.5, 0.0],
            hi: [0.5, 1.0],
            cells: [500, 1],
            // the pressure is not limited, and its linear polynomial undershoots
            // to negative values where the shock enters a cell
            degree: 0,
            one_dimensional: true,
        },
        TimeConfig {
            final_time: 0.2,
            dt: Some(1e-4),
            courant: None,
            alpha: None,
            max_advective_courant: None,
        },
        InitialCondition::Riemann {
            left: s.left,
            right: s.right,
            x_d: s.x_d,
        },
    );
    c.hyperbolic.flux = FluxMode::LocalLaxFriedrichs;
    c.hyperbolic.limiter_threshold = Some(1e-6);
    c
}

pub fn sod_ideal() -> CaseConfig {
    sod("sod_ideal", EosModel::ideal(1.4))
}

/// `a = b = 0.5`, unit gas constant, `cv = 2.5` (`gamma = 1.4` in the ideal limit).
pub fn sod_vdw() -> CaseConfig {
    sod("sod_vdw", EosModel::van_der_waals(0.5, 0.5, 1.0, 2.5))
}

pub fn sod_pr() -> CaseConfig {
    sod("sod_pr", EosModel::peng_robinson(0.5, 0.5, 1.0, 2.5))
}

pub fn cavity(nel: usize, degree: usize) -> CaseConfig {
    let lid = Bc::Wall {
        velocity: [1.0, 0.0],
        temperature: None,
    };
    base(
        "cavity",
        EosModel::ideal(1.4),
        PhysicsConfig {
            mach: 1e-5f64.sqrt(),
            froude: None,
            reynolds: Some(100.0),
            prandtl: 0.71,
            boundaries: [wall(), wall(), wall(), lid],
        },
        MeshConfig {
            lo: [0.0, 0.0],
            hi: [1.0, 1.0],
            cells: [nel, nel],
            degree,
            one_dimensional: false,
        },
        TimeConfig {
            final_time: 30.0,
            dt: None,
            courant: Some(49.0),
            alpha: None,
            max_advective_courant: None,
        },
        InitialCondition::Uniform {
            rho: 1.0,
            u: [0.0, 0.0],
            p: 1.0,
        },
    )
}

pub fn cavity_adaptive() -> CaseConfig {
    let mut c = cavity(16, 1);
    c.name = "cavity_adaptive".into();
    c.adapt = Some(AdaptConfig {
        indicator: IndicatorKind::Vorticity,
        strategy: MarkingStrategy::Fraction {
            refine_frac: 0.05,
            coarsen_frac: 0.30,
        },
        min_diameter: 1.0 / 64.0,
        max_diameter: 1.0 / 16.0,
        every: 5,
        initial_cycles: 0,
    });
    c
}

/// Dry air with `R = 2.87e-3` (`cp = 1.0045e-2`) in units where reference
/// density, temperature and pressure are 1 kg/m^3, 1 K and 1e5 Pa.
pub fn cold_bubble_eos() -> EosModel<f64> {
    EosModel::Ideal(IdealGasParams {
        gamma: 1.4,
        rg: 2.87e-3,
    })
}

/// Cold bubble on `(0, 1000) x (0, 2000)` with `nx x 2nx` cells.
pub fn cold_bubble(nx: usize, degree: usize, dt: f64) -> CaseConfig {
    base(
        "cold_bubble",
        cold_bubble_eos(),
        PhysicsConfig {
            mach: 1e-5f64.sqrt(),
            froude: Some((1.0f64 / 9.81).sqrt()),
            reynolds: None,
            prandtl: 1.0,
            boundaries: [wall(); 4],
        },
        MeshConfig {
            lo: [0.0, 0.0],
            hi: [1000.0, 2000.0],
            cells: [nx, 2 * nx],
            degree,
            one_dimensional: false,
        },
        TimeConfig {
            final_time: 50.0,
            dt: Some(dt),
            courant: None,
            alpha: None,
            max_advective_courant: None,
        },
        InitialCondition::ColdBubble {
            theta0: 303.0,
            center: [500.0, 1250.0],
            r0: 50.0,
            sigma: 100.0,
            amplitude: -15.0,
            surface_pressure: 1.0,
        },
    )
}

/// Cold bubble with the potential-temperature-gradient indicator.
pub fn cold_bubble_adaptive() -> CaseConfig {
    let mut c = cold_bubble(50, 1, 0.08);
    c.name = "cold_bubble_adaptive".into();
    c.adapt = Some(AdaptConfig {
        indicator: IndicatorKind::PotentialTemperatureGradient {
            reference_pressure: 1.0,
        },
        strategy: MarkingStrategy::Threshold {
            refine: 1e-1,
            coarsen: 6e-2,
        },
        min_diameter: 5.0,
        max_diameter: 20.0,
        every: 5,
        initial_cycles: 2,
    });
    c
}

fn warm(name: &str, eos: EosModel<f64>, reynolds: f64, prandtl: f64, t_bg: f64, shift: f64, pressure: f64) -> CaseConfig {
    base(
        name,
        eos,
        PhysicsConfig {
            mach: 0.01,
            froude: Some(0.004),
            reynolds: Some(reynolds),
            prandtl,
            boundaries: [Bc::Periodic, Bc::Periodic, wall(), wall()],
        },
        MeshConfig {
            lo: [-0.5, -0.5],
            hi: [1.5, 1.5],
            cells: [120, 120],
            degree: 1,
            one_dimensional: false,
        },
        TimeConfig {
            final_time: 20.0,
            dt: None,
            courant: Some(118.0),
            alpha: None,
            max_advective_courant: None,
        },
        InitialCondition::WarmBubble {
            center: [0.5, 0.35],
            r0: 0.25,
            sigma: 2.0,
            background_temperature: t_bg,
            scale: 1e5 / 287.0,
            amplitude: 0.1,
            shift,
            pressure,
        },
    )
}

/// Ideal air, unit reference density, pressure and temperature.
pub fn warm_bubble() -> CaseConfig {
    warm(
        "warm_bubble",
        EosModel::Ideal(IdealGasParams { gamma: 1.4, rg: 287.0 }),
        804.9,
        0.71,
        386.48,
        0.0,
        1e5,
    )
}

fn n2o() -> EosModel<f64> {
    let p: CubicEosParams<f64> = n2o_coeffs();
    EosModel::Cubic(p)
}

/// Peng-Robinson nitrous oxide at the ideal-gas conditions.
pub fn warm_bubble_n2o() -> CaseConfig {
    let mut c = warm("warm_bubble_n2o", n2o(), 716.1, 0.73, 386.48, 0.0, 1e5);
    c.time.courant = Some(92.0);
    c
}

/// Peng-Robinson nitrous oxide near the saturation curve.
pub fn warm_bubble_n2o_dense() -> CaseConfig {
    let mut c = warm("warm_bubble_n2o_dense", n2o(), 810.7, 1.19, 298.0, -88.48, 4e6);
    c.time.courant = Some(74.5);
    c
}

/// Stiffened-gas fit of nitrous oxide near the saturation curve.
pub fn warm_bubble_n2o_sg() -> CaseConfig {
    let mut c = warm(
        "warm_bubble_n2o_sg",
        EosModel::stiffened_gas(1.0936, 0.0, 0.0, 1453.91),
        810.7,
        1.19,
        298.0,
        -88.48,
        4e6,
    );
    c.time.courant = Some(67.0);
    c
}

/// Every configured case with its default resolution.
pub fn case_library() -> Vec<CaseConfig> {
    vec![
        vortex(20, 1, 0.01, Some(original_alpha())),
        vortex_adaptive(10, 1, 0.1, 2),
        sod_ideal(),
        sod_vdw(),
        sod_pr(),
        cavity(32, 1),
        cavity_adaptive(),
        cold_bubble(200, 1, 0.08),
        cold_bubble_adaptive(),
        warm_bubble(),
        warm_bubble_n2o(),
        warm_bubble_n2o_dense(),
        warm_bubble_n2o_sg(),
    ]
}

pub fn case_by_name(name: &str) -> Result<CaseConfig> {
    case_library()
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| Error::Config(format!("unknown case '{name}'")))
}

/// Hydrostatic pressure `dp/dy = -(M^2/Fr^2) rho(p, T_bg)` tabulated by RK4
/// from `y0` upward and interpolated linearly.
struct HydrostaticProfile {
    y0: f64,
    dy: f64,
    p: Vec<f64>,
}

impl HydrostaticProfile {
    fn new(eos: &EosModel<f64>, g: f64, t_bg: f64, p0: f64, y0: f64, y1: f64) -> Result<Self> {
        let n = 4000;
        let dy = (y1 - y0) / n as f64;
        let f = |p: f64| -> Result<f64> { Ok(-g * eos.density_from_p_t(p, t_bg)?) };
        let mut p = Vec::with_capacity(n + 1);
        p.push(p0);
        let mut cur = p0;
        for _ in 0..n {
            let k1 = f(cur)?;
            let k2 = f(cur + 0.5 * dy * k1)?;
            let k3 = f(cur + 0.5 * dy * k2)?;
            let k4 = f(cur + dy * k3)?;
            cur += dy / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            p.push(cur);
        }
        Ok(HydrostaticProfile { y0, dy, p })
    }

    fn at(&self, y: f64) -> f64 {
        let s = ((y - self.y0) / self.dy).clamp(0.0, (self.p.len() - 1) as f64);
        let i = (s.floor() as usize).min(self.p.len() - 2);
        let w = s - i as f64;
        (1.0 - w) * self.p[i] + w * self.p[i + 1]
    }
}

type PointFn = Box<dyn Fn([f64; 2]) -> (f64, [f64; 2], f64) + Sync>;

/// Pointwise initial data `(rho, u, p)` of a case.
pub fn initial_point_fn(cfg: &CaseConfig) -> Result<PointFn> {
    let eos = cfg.eos;
    let mach = cfg.physics.mach;
    let g = cfg.physics.froude.map(|f| mach * mach / (f * f)).unwrap_or(0.0);
    match cfg.initial.clone() {
        InitialCondition::Vortex { beta, center, background } => {
            let gamma = eos
                .gamma()
                .filter(|_| matches!(eos, EosModel::Ideal(_)))
                .ok_or_else(|| Error::Config("the vortex needs the ideal gas".into()))?;
            let v = VortexParams {
                beta,
                mach,
                gamma,
                center,
                background,
                lo: cfg.mesh.lo[0],
                hi: cfg.mesh.hi[0],
            };
            Ok(Box::new(move |x| v.initial(x)))
        }
        InitialCondition::Riemann { left, right, x_d } => {
            let s = RiemannState { left, right, x_d };
            s.validate()?;
            Ok(Box::new(move |x| {
                let PrimitiveState { rho, u, p } = s.initial(x[0]);
                (rho, [u, 0.0], p)
            }))
        }
        InitialCondition::Uniform { rho, u, p } => Ok(Box::new(move |_| (rho, u, p))),
        InitialCondition::ColdBubble {
            theta0,
            center,
            r0,
            sigma,
            amplitude,
            surface_pressure,
        } => {
            let EosModel::Ideal(IdealGasParams { gamma, rg }) = eos else {
                return Err(Error::Config("the cold bubble needs the ideal gas".into()));
            };
            let cp = gamma / (gamma - 1.0) * rg;
            let kappa = rg / cp;
            Ok(Box::new(move |x| {
                let r = ((x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2)).sqrt();
                let dtheta = if r <= r0 {
                    amplitude
                } else {
                    amplitude * (-(r - r0).powi(2) / (sigma * sigma)).exp()
                };
                let exner = 1.0 - g * x[1] / (cp * theta0);
                let p = surface_pressure * exner.powf(1.0 / kappa);
                let t = (theta0 + dtheta) * exner;
                (p / (rg * t), [0.0, 0.0], p)
            }))
        }
        InitialCondition::WarmBubble {
            center,
            r0,
            sigma,
            background_temperature,
            scale,
            amplitude,
            shift,
            pressure,
        } => {
            let prof = HydrostaticProfile::new(&eos, g, background_temperature, pressure, cfg.mesh.lo[1], cfg.mesh.hi[1])?;
            Ok(Box::new(move |x| {
                let r2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
                let t = if r2.sqrt() > r0 {
                    background_temperature
                } else {
                    scale / (1.0 - amplitude * (r2 / (sigma * sigma)).exp()) + shift
                };
                let p = prof.at(x[1]);
                let rho = eos.density_from_p_t(p, t).unwrap_or(f64::NAN);
                (rho, [0.0, 0.0], p)
            }))
        }
    }
}

/// Initial DG state: L2 projection for discontinuous data, nodal
/// interpolation otherwise.
pub fn initial_state<T: Real>(cfg: &CaseConfig, disc: &Discretization<T>) -> Result<FlowState<T>> {
    let f = initial_point_fn(cfg)?;
    let g = |x: [T; 2]| {
        let (r, u, p) = f([x[0].to_f64_lossy(), x[1].to_f64_lossy()]);
        (T::lit(r), u.map(T::lit), T::lit(p))
    };
    let st = match cfg.initial {
        InitialCondition::Riemann { .. } => FlowState::project(disc, g),
        _ => FlowState::interpolate(disc, g),
    };
    if !st.is_finite() {
        return Err(Error::NonPhysicalState("initial condition is not finite".into()));
    }
    Ok(st)
}
