//! Time loop for a configured case: step-size selection, split steps,
//! periodic remeshing, logging, error measurement and file output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::adapt::{remesh, RemeshRecord};
use crate::bench::cases::initial_state;
use crate::bench::riemann::{ExactRiemann, RiemannState};
use crate::bench::vortex::VortexParams;
use crate::config::{CaseConfig, InitialCondition};
use crate::dg::Discretization;
use crate::eos::EosModel;
use crate::error::{Error, Result};
use crate::hyperbolic::hyperbolic_step;
use crate::imex::{courant_numbers, max_speeds, ImexTableau};
use crate::model::{FlowState, Physics};
use crate::real::Real;
use crate::viscous::{viscous_step_with, ViscousOperators};

/// Per-step log entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// Time at the end of the step.
    pub time: f64,
    pub dt: f64,
    pub acoustic: f64,
    pub advective: f64,
    /// Mean pressure fixed-point iterations over the implicit stages.
    pub fixed_point: f64,
    pub krylov: usize,
    pub n_cells: usize,
}

#[derive(Clone, Debug)]
pub struct RunResult<T> {
    pub disc: Discretization<T>,
    pub state: FlowState<T>,
    pub time: f64,
    pub steps: Vec<StepRecord>,
    pub remesh: Vec<RemeshRecord>,
}

impl<T> RunResult<T> {
    pub fn mean_fixed_point(&self) -> f64 {
        if self.steps.is_empty() {
            return 0.0;
        }
        self.steps.iter().map(|s| s.fixed_point).sum::<f64>() / self.steps.len() as f64
    }

    pub fn max_acoustic(&self) -> f64 {
        self.steps.iter().map(|s| s.acoustic).fold(0.0, f64::max)
    }

    pub fn max_advective(&self) -> f64 {
        self.steps.iter().map(|s| s.advective).fold(0.0, f64::max)
    }
}

/// Mesh and initial state, including the configured initial remeshing cycles
/// (each cycle refines on the interpolated initial data and re-evaluates it).
pub fn initial_discretization<T: Real>(
    cfg: &CaseConfig,
) -> Result<(Discretization<T>, FlowState<T>, Vec<RemeshRecord>)> {
    let phys: Physics<T> = cfg.physics();
    let mut disc = Discretization::new(cfg.build_mesh(), cfg.mesh.degree);
    let mut state = initial_state(cfg, &disc)?;
    let mut log = Vec::new();
    if let Some(ad) = &cfg.adapt {
        for _ in 0..ad.initial_cycles {
            let (d, _, rec) = remesh(
                &disc,
                &phys.eos,
                &state,
                ad.indicator,
                ad.strategy,
                T::lit(ad.min_diameter),
                T::lit(ad.max_diameter),
                0,
            )?;
            disc = d;
            state = initial_state(cfg, &disc)?;
            log.push(rec);
        }
    }
    Ok((disc, state, log))
}

/// `dt` giving the acoustic Courant number `courant` on the given state.
pub fn dt_for_courant<T: Real>(disc: &Discretization<T>, state: &FlowState<T>, eos: &EosModel<T>, mach: T, courant: f64) -> Result<f64> {
    let (cmax, _) = max_speeds(disc, &state.rho, &state.u, &state.p, eos)?;
    let r = disc.degree().max(1) as f64;
    let h = disc.mesh.min_diameter().to_f64_lossy();
    Ok(courant * h / (r * cmax.to_f64_lossy() / mach.to_f64_lossy()))
}

/// Runs a case to its final time. `observer` sees the state after every step.
pub fn simulate<T, F>(cfg: &CaseConfig, mut observer: F) -> Result<RunResult<T>>
where
    T: Real,
    F: FnMut(&Discretization<T>, &FlowState<T>, &StepRecord) -> Result<()>,
{
    cfg.validate()?;
    let phys: Physics<T> = cfg.physics();
    let tab = ImexTableau::ark2(cfg.time.alpha());
    let (mut disc, mut state, mut remesh_log) = initial_discretization::<T>(cfg)?;
    let t_end = cfg.time.final_time;
    let base_dt = match (cfg.time.dt, cfg.time.courant) {
        (Some(dt), _) => dt,
        (None, Some(c)) => {
            let dt = dt_for_courant(&disc, &state, &phys.eos, phys.mach, c)?;
            t_end / (t_end / dt - 1e-9).ceil().max(1.0)
        }
        (None, None) => unreachable!("validated"),
    };
    let mut time = 0.0;
    let mut step = 0;
    let mut steps = Vec::new();
    let every = cfg.adapt.as_ref().map(|a| a.every);
    while time < t_end * (1.0 - 1e-12) {
        let ops = phys
            .reynolds
            .map(|_| ViscousOperators::new(&disc, &phys, cfg.viscous.penalty_factor));
        loop {
            let mut dt = base_dt.min(t_end - time);
            let cn = courant_numbers(&disc, &state.rho, &state.u, &state.p, &phys.eos, T::lit(dt), phys.mach)?;
            let (mut acoustic, mut advective) = (cn.acoustic.to_f64_lossy(), cn.advective.to_f64_lossy());
            if let Some(cap) = cfg.time.max_advective_courant {
                if advective > cap {
                    let s = cap / advective;
                    dt *= s;
                    acoustic *= s;
                    advective = cap;
                }
            }
            step += 1;
            let fail = |e: Error| Error::StepFailed {
                step,
                time,
                source: Box::new(e),
            };
            let dt_t = T::lit(dt);
            let (next, rep) = match (&ops, phys.reynolds) {
                (Some(ops), Some(re)) if cfg.viscous.strang => {
                    let half = T::half() * dt_t;
                    let (s0, _) = viscous_step_with(ops, &tab, &cfg.viscous, &state, half, re).map_err(fail)?;
                    let (s1, r) = hyperbolic_step(&disc, &phys, &tab, &cfg.hyperbolic, &s0, dt_t).map_err(fail)?;
                    let (s2, _) = viscous_step_with(ops, &tab, &cfg.viscous, &s1, half, re).map_err(fail)?;
                    (s2, r)
                }
                (Some(ops), Some(re)) => {
                    let (s1, r) = hyperbolic_step(&disc, &phys, &tab, &cfg.hyperbolic, &state, dt_t).map_err(fail)?;
                    let (s2, _) = viscous_step_with(ops, &tab, &cfg.viscous, &s1, dt_t, re).map_err(fail)?;
                    (s2, r)
                }
                _ => hyperbolic_step(&disc, &phys, &tab, &cfg.hyperbolic, &state, dt_t).map_err(fail)?,
            };
            if !next.is_finite() {
                return Err(fail(Error::NonPhysicalState("non-finite values in the solution".into())));
            }
            state = next;
            time += dt;
            let rec = StepRecord {
                step,
                time,
                dt,
                acoustic,
                advective,
                fixed_point: rep.mean_fixed_point_iterations(),
                krylov: rep.krylov_iterations(),
                n_cells: disc.n_cells(),
            };
            observer(&disc, &state, &rec)?;
            steps.push(rec);
            if time >= t_end * (1.0 - 1e-12) {
                break;
            }
            if matches!(every, Some(n) if step % n == 0) {
                break;
            }
        }
        if let (Some(ad), true) = (&cfg.adapt, time < t_end * (1.0 - 1e-12)) {
            let (d, s, rec) = remesh(
                &disc,
                &phys.eos,
                &state,
                ad.indicator,
                ad.strategy,
                T::lit(ad.min_diameter),
                T::lit(ad.max_diameter),
                step,
            )?;
            disc = d;
            state = s;
            remesh_log.push(rec);
        }
    }
    Ok(RunResult {
        disc,
        state,
        time,
        steps,
        remesh: remesh_log,
    })
}

/// Exact solution `(rho, u, p)` at `(x, t)` when one is known.
pub type ExactFn = Box<dyn Fn([f64; 2], f64) -> (f64, [f64; 2], f64) + Sync>;

pub fn exact_solution(cfg: &CaseConfig) -> Option<ExactFn> {
    match cfg.initial {
        InitialCondition::Vortex { beta, center, background } => {
            let gamma = cfg.eos.gamma()?;
            let v = VortexParams {
                beta,
                mach: cfg.physics.mach,
                gamma,
                center,
                background,
                lo: cfg.mesh.lo[0],
                hi: cfg.mesh.hi[0],
            };
            Some(Box::new(move |x, t| v.exact(x, t)))
        }
        InitialCondition::Riemann { left, right, x_d } => {
            let EosModel::Ideal(g) = cfg.eos else { return None };
            if cfg.physics.mach != 1.0 {
                return None;
            }
            let ex = ExactRiemann::solve(RiemannState { left, right, x_d }, g.gamma).ok()?;
            Some(Box::new(move |x, t| {
                let s = ex.at(x[0], t);
                (s.rho, [s.u, 0.0], s.p)
            }))
        }
        _ => None,
    }
}

/// Relative L2 errors of density, velocity and pressure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorRow {
    pub nel: usize,
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

pub fn relative_errors<T: Real>(disc: &Discretization<T>, st: &FlowState<T>, exact: &ExactFn, t: f64) -> Result<[f64; 3]> {
    let x64 = |x: [T; 2]| [x[0].to_f64_lossy(), x[1].to_f64_lossy()];
    let er = disc.l2_error_relative(&st.rho, |x| T::lit(exact(x64(x), t).0))?;
    let eu = disc.l2_error_relative_vector(&st.u, |x| exact(x64(x), t).1.map(T::lit))?;
    let ep = disc.l2_error_relative(&st.p, |x| T::lit(exact(x64(x), t).2))?;
    Ok([er.to_f64_lossy(), eu.to_f64_lossy(), ep.to_f64_lossy()])
}

/// Observed order between consecutive rows; `None` for equal resolutions.
pub fn rate(coarse: (usize, f64), fine: (usize, f64)) -> Option<f64> {
    if coarse.0 == fine.0 || coarse.1 <= 0.0 || fine.1 <= 0.0 {
        return None;
    }
    Some((coarse.1 / fine.1).ln() / (fine.0 as f64 / coarse.0 as f64).ln())
}

/// Table with columns `N_el, L2_rel_rho, rate_rho, L2_rel_u, rate_u, L2_rel_p, rate_p`.
pub fn errors_csv(rows: &[ErrorRow]) -> String {
    let mut s = String::from("N_el,L2_rel_rho,rate_rho,L2_rel_u,rate_u,L2_rel_p,rate_p\n");
    for (i, r) in rows.iter().enumerate() {
        let fmt = |f: fn(&ErrorRow) -> f64| -> String {
            match i.checked_sub(1).and_then(|j| rate((rows[j].nel, f(&rows[j])), (r.nel, f(r)))) {
                Some(k) => format!("{k:.2}"),
                None => String::new(),
            }
        };
        let _ = writeln!(
            s,
            "{},{:.3e},{},{:.3e},{},{:.3e},{}",
            r.nel,
            r.rho,
            fmt(|r| r.rho),
            r.u,
            fmt(|r| r.u),
            r.p,
            fmt(|r| r.p)
        );
    }
    s
}

/// Runs the case at every resolution in `nels` (cells along x; y scales in
/// proportion) with the step chosen for the configured Courant number, so
/// that `dt` scales with the mesh size.
pub fn convergence_sweep(template: &CaseConfig, nels: &[usize]) -> Result<Vec<ErrorRow>> {
    if nels.len() < 2 {
        return Err(Error::Config("a convergence sweep needs at least two resolutions".into()));
    }
    let exact = exact_solution(template)
        .ok_or_else(|| Error::Config(format!("case '{}' has no exact solution", template.name)))?;
    let mut rows = Vec::new();
    let mut scaled_dt = None;
    for &nel in nels {
        let mut cfg = template.clone();
        let ratio = template.mesh.cells[1] as f64 / template.mesh.cells[0] as f64;
        cfg.mesh.cells = [nel, ((nel as f64 * ratio).round() as usize).max(1)];
        if let (Some(dt), None) = (template.time.dt, template.time.courant) {
            // hyperbolic scaling of a fixed step
            let (n0, dt0) = *scaled_dt.get_or_insert((nel, dt));
            cfg.time.dt = Some(dt0 * n0 as f64 / nel as f64);
        }
        let res = simulate::<f64, _>(&cfg, |_, _, _| Ok(()))?;
        let [rho, u, p] = relative_errors(&res.disc, &res.state, &exact, res.time)?;
        rows.push(ErrorRow { nel, rho, u, p });
    }
    Ok(rows)
}

fn csv_steps(steps: &[StepRecord]) -> String {
    let mut s = String::from("step,time,dt,C,C_u,fixed_point_iters,krylov_iters,n_cells\n");
    for r in steps {
        let _ = writeln!(
            s,
            "{},{:.6e},{:.6e},{:.4e},{:.4e},{:.3},{},{}",
            r.step, r.time, r.dt, r.acoustic, r.advective, r.fixed_point, r.krylov, r.n_cells
        );
    }
    s
}

fn csv_mesh(log: &[RemeshRecord]) -> String {
    let mut s = String::from("step,n_active_cells,marked_refine,marked_coarsen\n");
    for r in log {
        let _ = writeln!(s, "{},{},{},{}", r.step, r.n_active, r.marked_refine, r.marked_coarsen);
    }
    s
}

/// Cell means of density, velocity, pressure and temperature as VTK.
pub fn fields_vtk<T: Real>(disc: &Discretization<T>, st: &FlowState<T>, eos: &EosModel<T>) -> String {
    let rho = disc.cell_means(&st.rho);
    let p = disc.cell_means(&st.p);
    let ux = disc.cell_means(&st.velocity_component(disc, 0));
    let uy = disc.cell_means(&st.velocity_component(disc, 1));
    let t: Vec<T> = rho
        .iter()
        .zip(&p)
        .map(|(&r, &p)| eos.temperature_from_p_rho(p, r, None).unwrap_or(T::nan()))
        .collect();
    disc.mesh.to_vtk(&[
        ("density", rho),
        ("velocity_x", ux),
        ("velocity_y", uy),
        ("pressure", p),
        ("temperature", t),
    ])
}

/// Runs a case and writes `fields.vtk`, `courant.csv`, `mesh.csv` (adaptive
/// runs), `errors.csv` (cases with an exact solution) and the resolved
/// configuration to `out`.
pub fn run(cfg: &CaseConfig, out: &Path) -> Result<RunResult<f64>> {
    fs::create_dir_all(out)?;
    fs::write(out.join("config.toml"), cfg.to_toml()?)?;
    let eos: EosModel<f64> = cfg.eos;
    let vtk_every = cfg.output.vtk_every;
    let res = simulate::<f64, _>(cfg, |disc, st, rec| {
        if matches!(vtk_every, Some(n) if n > 0 && rec.step % n == 0) {
            fs::write(out.join(format!("fields_{:06}.vtk", rec.step)), fields_vtk(disc, st, &eos))?;
        }
        Ok(())
    })?;
    fs::write(out.join("fields.vtk"), fields_vtk(&res.disc, &res.state, &eos))?;
    fs::write(out.join("courant.csv"), csv_steps(&res.steps))?;
    if cfg.adapt.is_some() {
        fs::write(out.join("mesh.csv"), csv_mesh(&res.remesh))?;
    }
    if let Some(ex) = exact_solution(cfg) {
        let [rho, u, p] = relative_errors(&res.disc, &res.state, &ex, res.time)?;
        let row = ErrorRow {
            nel: cfg.mesh.cells[0],
            rho,
            u,
            p,
        };
        fs::write(out.join("errors.csv"), errors_csv(&[row]))?;
    }
    Ok(res)
}
