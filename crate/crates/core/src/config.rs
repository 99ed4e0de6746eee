//! Case description read from TOML: equation of state, non-dimensional
//! numbers, mesh, time stepping, solver settings, adaptivity, output and
//! initial condition.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adapt::{IndicatorKind, MarkingStrategy};
use crate::bench::riemann::PrimitiveState;
use crate::eos::EosModel;
use crate::error::{Error, Result};
use crate::hyperbolic::HyperbolicSettings;
use crate::mesh::AdaptiveMesh;
use crate::model::{BoundaryCondition, Physics};
use crate::real::Real;
use crate::viscous::ViscousSettings;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub name: String,
    pub eos: EosModel<f64>,
    pub physics: PhysicsConfig,
    pub mesh: MeshConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub hyperbolic: HyperbolicSettings,
    #[serde(default)]
    pub viscous: ViscousSettings,
    #[serde(default)]
    pub adapt: Option<AdaptConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    pub initial: InitialCondition,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub mach: f64,
    #[serde(default)]
    pub froude: Option<f64>,
    #[serde(default)]
    pub reynolds: Option<f64>,
    #[serde(default = "one")]
    pub prandtl: f64,
    /// x min, x max, y min, y max.
    pub boundaries: [BoundaryCondition<f64>; 4],
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub cells: [usize; 2],
    pub degree: usize,
    /// Unit-height strip with one periodic cell row; `cells[1]` is ignored.
    #[serde(default)]
    pub one_dimensional: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub final_time: f64,
    /// Fixed step; takes precedence over `courant`.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Acoustic Courant number of the initial state used to pick the step.
    #[serde(default)]
    pub courant: Option<f64>,
    /// Explicit tableau parameter; defaults to 0.5.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Caps the step so that the advective Courant number stays below this
    /// value (checked before every step).
    #[serde(default)]
    pub max_advective_courant: Option<f64>,
}

/// Maximizes the radius of absolute monotonicity of the explicit tableau.
pub const DEFAULT_ALPHA: f64 = 0.5;

impl TimeConfig {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(DEFAULT_ALPHA)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptConfig {
    pub indicator: IndicatorKind,
    pub strategy: MarkingStrategy,
    pub min_diameter: f64,
    pub max_diameter: f64,
    /// Remesh every this many steps.
    #[serde(default = "default_every")]
    pub every: usize,
    /// Remesh-and-reinitialize cycles applied to the initial condition.
    #[serde(default)]
    pub initial_cycles: usize,
}

fn default_every() -> usize {
    5
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; defaults to `out/<name>`.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Write a VTK snapshot every this many steps (the final state is always written).
    #[serde(default)]
    pub vtk_every: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// Isentropic vortex; `gamma` from the ideal EOS, `M` from the physics.
    Vortex {
        beta: f64,
        center: [f64; 2],
        background: [f64; 2],
    },
    /// Discontinuity in x at `x_d`.
    Riemann {
        left: PrimitiveState,
        right: PrimitiveState,
        x_d: f64,
    },
    Uniform {
        rho: f64,
        u: [f64; 2],
        p: f64,
    },
    /// Potential temperature anomaly in a neutral atmosphere (ideal gas).
    ColdBubble {
        theta0: f64,
        center: [f64; 2],
        r0: f64,
        sigma: f64,
        amplitude: f64,
        /// Pressure at `y = 0`.
        #[serde(default = "one")]
        surface_pressure: f64,
    },
    /// Truncated temperature bubble in an isothermal hydrostatic background.
    WarmBubble {
        center: [f64; 2],
        r0: f64,
        sigma: f64,
        background_temperature: f64,
        /// Inside `r0`: `scale / (1 - amplitude exp(r^2/sigma^2)) + shift`.
        scale: f64,
        amplitude: f64,
        #[serde(default)]
        shift: f64,
        /// Pressure at the bottom of the domain.
        pressure: f64,
    },
}

impl CaseConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: CaseConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output
            .dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("out").join(&self.name))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let p = &self.physics;
        for (name, v) in [("mach", Some(p.mach)), ("froude", p.froude), ("reynolds", p.reynolds)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(format!("{name} must be positive, got {v}"));
                }
            }
        }
        if !(p.prandtl > 0.0) {
            return bad(format!("prandtl must be positive, got {}", p.prandtl));
        }
        let m = &self.mesh;
        if m.cells[0] == 0 || (!m.one_dimensional && m.cells[1] == 0) {
            return bad("cell counts must be positive".into());
        }
        if !(m.hi[0] > m.lo[0] && m.hi[1] > m.lo[1]) {
            return bad("mesh extents must satisfy hi > lo".into());
        }
        if m.one_dimensional && !(p.boundaries[2].is_periodic() && p.boundaries[3].is_periodic()) {
            return bad("one-dimensional meshes are periodic in y".into());
        }
        let t = &self.time;
        if !(t.final_time > 0.0) {
            return bad("final_time must be positive".into());
        }
        match (t.dt, t.courant) {
            (None, None) => return bad("either time.dt or time.courant is required".into()),
            (Some(dt), _) if !(dt > 0.0) => return bad(format!("dt must be positive, got {dt}")),
            (_, Some(c)) if !(c > 0.0) => return bad(format!("courant must be positive, got {c}")),
            _ => {}
        }
        let a = t.alpha();
        if !(a > 0.0 && a <= 1.5) {
            return bad(format!("alpha must lie in (0, 1.5], got {a}"));
        }
        if let Some(ad) = &self.adapt {
            if ad.every == 0 {
                return bad("adapt.every must be positive".into());
            }
            if !(ad.min_diameter > 0.0 && ad.max_diameter >= ad.min_diameter) {
                return bad("adapt diameters must satisfy 0 < min <= max".into());
            }
        }
        self.hyperbolic.validate()?;
        self.physics::<f64>().validate()
    }

    pub fn physics<T: Real>(&self) -> Physics<T> {
        let p = &self.physics;
        let bc = p.boundaries.map(|b| match b {
            BoundaryCondition::Periodic => BoundaryCondition::Periodic,
            BoundaryCondition::Wall { velocity, temperature } => BoundaryCondition::Wall {
                velocity: velocity.map(T::lit),
                temperature: temperature.map(T::lit),
            },
        });
        Physics {
            eos: self.eos.cast(),
            mach: T::lit(p.mach),
            froude: p.froude.map(T::lit),
            reynolds: p.reynolds.map(T::lit),
            prandtl: T::lit(p.prandtl),
            boundaries: bc,
        }
    }

    pub fn build_mesh<T: Real>(&self) -> AdaptiveMesh<T> {
        let m = &self.mesh;
        let per = [
            self.physics.boundaries[0].is_periodic(),
            self.physics.boundaries[2].is_periodic(),
        ];
        if m.one_dimensional {
            AdaptiveMesh::interval(T::lit(m.lo[0]), T::lit(m.hi[0]), m.cells[0], per[0])
        } else {
            AdaptiveMesh::cartesian(m.lo.map(T::lit), m.hi.map(T::lit), m.cells, per)
        }
    }
}
