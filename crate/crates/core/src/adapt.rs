//! Refinement indicators, marking strategies and solution transfer between
//! meshes related by one refinement step.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense;
use crate::dg::Discretization;
use crate::eos::EosModel;
use crate::error::{Error, Result};
use crate::hyperbolic::density_jump_indicator;
use crate::mesh::{CellSource, RefinementPlan};
use crate::model::FlowState;
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorKind {
    /// `max_i |grad rho|` over the nodes of the cell.
    DensityGradient,
    /// `diam(K)^2 ||curl u||^2_K`.
    Vorticity,
    /// `max_i |grad theta|`, `theta = T (p0/p)^((gamma-1)/gamma)`; ideal gas only.
    PotentialTemperatureGradient { reference_pressure: f64 },
    /// `max_i |grad beta|`; cubic gas with constant `a` and `c_v` only.
    BetaGradient,
    /// `max_i |grad (p / rho^gamma_prho)|`.
    GammaPrhoInvariantGradient,
    /// `sum_faces ||rho+ - rho-||^2`.
    DensityFaceJump,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkingStrategy {
    /// Refine above `refine`, coarsen below `coarsen`.
    Threshold { refine: f64, coarsen: f64 },
    /// Refine the given fraction of cells with the largest values and coarsen
    /// the fraction with the smallest.
    Fraction { refine_frac: f64, coarsen_frac: f64 },
}

fn unsupported(kind: IndicatorKind, why: &str) -> Error {
    Error::UnsupportedIndicator(format!("{kind:?}: {why}"))
}

/// Per-cell maximum of the nodal gradient norm of a pointwise function of
/// the nodal primitive values.
fn nodal_gradient_max<T: Real, F>(disc: &Discretization<T>, st: &FlowState<T>, f: F) -> Result<Vec<T>>
where
    F: Fn(T, [T; 2], T) -> Result<T> + Sync,
{
    let n = disc.nloc();
    (0..disc.n_cells())
        .into_par_iter()
        .map(|c| {
            let rho = disc.block(&st.rho, c);
            let p = disc.block(&st.p, c);
            let ux = disc.vblock(&st.u, c, 0);
            let uy = disc.vblock(&st.u, c, 1);
            let vals = (0..n)
                .map(|i| f(rho[i], [ux[i], uy[i]], p[i]))
                .collect::<Result<Vec<T>>>()?;
            Ok(disc
                .node_gradients(c, &vals)
                .iter()
                .map(|g| (g[0] * g[0] + g[1] * g[1]).sqrt())
                .fold(T::zero(), T::max))
        })
        .collect()
}

/// Nonnegative indicator value per active cell. Nodal values of derived
/// fields are computed from the nodal primitive values and differentiated
/// with the local polynomial.
pub fn evaluate_indicator<T: Real>(
    kind: IndicatorKind,
    disc: &Discretization<T>,
    eos: &EosModel<T>,
    st: &FlowState<T>,
) -> Result<Vec<T>> {
    match kind {
        IndicatorKind::DensityGradient => nodal_gradient_max(disc, st, |r, _, _| Ok(r)),
        IndicatorKind::Vorticity => {
            let nq = disc.elem.nq;
            Ok((0..disc.n_cells())
                .into_par_iter()
                .map(|c| {
                    let z = || vec![T::zero(); nq];
                    let (mut ax, mut ay, mut bx, mut by) = (z(), z(), z(), z());
                    disc.eval_grad(c, disc.vblock(&st.u, c, 0), &mut ax, &mut ay);
                    disc.eval_grad(c, disc.vblock(&st.u, c, 1), &mut bx, &mut by);
                    let w: T = (0..nq)
                        .map(|q| {
                            let curl = bx[q] - ay[q];
                            disc.qp_weight(c, q) * curl * curl
                        })
                        .sum();
                    let d = disc.mesh.diameter(c);
                    d * d * w
                })
                .collect())
        }
        IndicatorKind::PotentialTemperatureGradient { reference_pressure } => {
            let Some(gamma) = eos.gamma().filter(|_| matches!(eos, EosModel::Ideal(_))) else {
                return Err(unsupported(kind, "requires the ideal gas model"));
            };
            let p0 = T::lit(reference_pressure);
            let ex = (gamma - T::one()) / gamma;
            nodal_gradient_max(disc, st, |r, _, p| {
                let t = eos.temperature_from_p_rho(p, r, None)?;
                Ok(t * (p0 / p).powf(ex))
            })
        }
        IndicatorKind::BetaGradient => {
            if !matches!(eos, EosModel::Cubic(_)) || !eos.is_closed_form() {
                return Err(unsupported(kind, "requires a cubic model with constant a and c_v"));
            }
            nodal_gradient_max(disc, st, |r, _, p| eos.isentropic_invariant_beta(p, r))
        }
        IndicatorKind::GammaPrhoInvariantGradient => nodal_gradient_max(disc, st, |r, _, p| {
            let g = eos.gamma_prho(p, r, None)?;
            Ok(p / r.powf(g))
        }),
        IndicatorKind::DensityFaceJump => Ok(density_jump_indicator(disc, &st.rho)),
    }
}

/// Refinement plan from indicator values; diameter bounds are enforced by
/// [`AdaptiveMesh::apply_refinement`](crate::mesh::AdaptiveMesh::apply_refinement).
pub fn mark<T: Real>(values: &[T], strategy: MarkingStrategy, min_diam: T, max_diam: T) -> RefinementPlan<T> {
    let mut refine = BTreeSet::new();
    let mut coarsen = BTreeSet::new();
    match strategy {
        MarkingStrategy::Threshold {
            refine: r,
            coarsen: c,
        } => {
            let (r, c) = (T::lit(r), T::lit(c));
            for (i, &v) in values.iter().enumerate() {
                if v > r {
                    refine.insert(i);
                } else if v < c {
                    coarsen.insert(i);
                }
            }
        }
        MarkingStrategy::Fraction {
            refine_frac,
            coarsen_frac,
        } => {
            let n = values.len();
            let mut order: Vec<usize> = (0..n).collect();
            // descending values, ties by index for determinism
            order.sort_by(|&a, &b| {
                values[b]
                    .partial_cmp(&values[a])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            let nr = ((refine_frac * n as f64).round() as usize).min(n);
            let nc = ((coarsen_frac * n as f64).round() as usize).min(n - nr);
            refine.extend(order[..nr].iter().copied());
            coarsen.extend(order[n - nc..].iter().copied());
        }
    }
    RefinementPlan {
        refine,
        coarsen,
        min_diam,
        max_diam,
    }
}

/// Maps a field with `ncomp` components from `old` to `new`: injection into
/// children (exact) and L2 projection of children onto a coarsened parent.
pub fn transfer_field<T: Real>(
    old: &Discretization<T>,
    new: &Discretization<T>,
    sources: &[CellSource],
    field: &[T],
    ncomp: usize,
) -> Vec<T> {
    let n = old.nloc();
    let e = &old.elem;
    let mut out = vec![T::zero(); new.n_cells() * ncomp * n];
    out.par_chunks_mut(ncomp * n)
        .zip(sources.par_iter())
        .for_each(|(o, src)| {
            for comp in 0..ncomp {
                let blk = |c: usize| &field[(ncomp * c + comp) * n..(ncomp * c + comp + 1) * n];
                let o = &mut o[comp * n..(comp + 1) * n];
                match *src {
                    CellSource::Same(c) => o.copy_from_slice(blk(c)),
                    CellSource::Child { parent, position } => {
                        dense::matvec(&e.inject[position], n, n, blk(parent), o)
                    }
                    CellSource::Parent { children } => {
                        let mut part = vec![T::zero(); n];
                        for (k, &ch) in children.iter().enumerate() {
                            dense::matvec(&e.restrict[k], n, n, blk(ch), &mut part);
                            o.iter_mut().zip(&part).for_each(|(a, &b)| *a += b);
                        }
                    }
                }
            }
        });
    out
}

pub fn transfer_state<T: Real>(
    old: &Discretization<T>,
    new: &Discretization<T>,
    sources: &[CellSource],
    st: &FlowState<T>,
) -> FlowState<T> {
    FlowState {
        rho: transfer_field(old, new, sources, &st.rho, 1),
        u: transfer_field(old, new, sources, &st.u, 2),
        p: transfer_field(old, new, sources, &st.p, 1),
    }
}

/// Summary of one remeshing event.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RemeshRecord {
    pub step: usize,
    pub n_active: usize,
    pub marked_refine: usize,
    pub marked_coarsen: usize,
}

/// Evaluates the indicator, marks, refines and transfers the state.
pub fn remesh<T: Real>(
    disc: &Discretization<T>,
    eos: &EosModel<T>,
    st: &FlowState<T>,
    kind: IndicatorKind,
    strategy: MarkingStrategy,
    min_diam: T,
    max_diam: T,
    step: usize,
) -> Result<(Discretization<T>, FlowState<T>, RemeshRecord)> {
    let eta = evaluate_indicator(kind, disc, eos, st)?;
    let plan = mark(&eta, strategy, min_diam, max_diam);
    let (mesh, sources, _) = disc.mesh.apply_refinement(&plan);
    let new = disc.remeshed(mesh);
    let state = transfer_state(disc, &new, &sources, st);
    let rec = RemeshRecord {
        step,
        n_active: new.n_cells(),
        marked_refine: plan.refine.len(),
        marked_coarsen: plan.coarsen.len(),
    };
    Ok((new, state, rec))
}
