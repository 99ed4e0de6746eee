//! 2:1-balanced quadtree meshes of axis-aligned rectangles.
//!
//! One-dimensional problems live on a strip of unit height with a single
//! periodic cell row; cell diameters then measure the x extent only.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::dg::element::SubFace;
use crate::real::Real;

/// Domain side: 0 = x min, 1 = x max, 2 = y min, 3 = y max.
pub type Side = usize;

#[derive(Clone, Debug)]
pub struct Cell {
    pub level: u32,
    pub ij: [i64; 2],
    pub parent: Option<usize>,
    pub children: Option<[usize; 4]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceKind {
    Interior,
    Periodic,
    Boundary(Side),
}

/// One side of a face: active cell index, local face of that cell and the
/// portion of the cell side it covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FaceSide {
    pub cell: usize,
    pub local_face: usize,
    pub sub: SubFace,
}

#[derive(Clone, Debug)]
pub struct Face<T> {
    pub kind: FaceKind,
    /// `sides[0]` always exists; `sides[1]` is `None` on boundary faces.
    pub sides: [Option<FaceSide>; 2],
    /// Unit normal pointing from `sides[0]` to `sides[1]` (outward on the boundary).
    pub normal: [T; 2],
    pub axis: usize,
    /// Start point of the face segment and its length (unit for 1D strips).
    pub origin: [T; 2],
    pub measure: T,
    pub hanging: bool,
}

impl<T: Real> Face<T> {
    pub fn inner(&self) -> FaceSide {
        self.sides[0].expect("face has an inner side")
    }

    pub fn outer(&self) -> Option<FaceSide> {
        self.sides[1]
    }

    /// Physical point at face parameter `s` in `[0, 1]`.
    pub fn point(&self, s: T) -> [T; 2] {
        let mut p = self.origin;
        p[1 - self.axis] += s * self.measure;
        p
    }
}

/// Where a cell of a new mesh takes its data from in the old mesh.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellSource {
    Same(usize),
    Child { parent: usize, position: usize },
    Parent { children: [usize; 4] },
}

/// Requested refinement; indices refer to active cells.
#[derive(Clone, Debug, Default)]
pub struct RefinementPlan<T> {
    pub refine: BTreeSet<usize>,
    pub coarsen: BTreeSet<usize>,
    pub min_diam: T,
    pub max_diam: T,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RefinementStats {
    pub refined: usize,
    pub coarsened: usize,
    pub balance_refined: usize,
    pub clipped: usize,
}

#[derive(Clone, Debug)]
pub struct AdaptiveMesh<T> {
    pub dim: usize,
    pub lo: [T; 2],
    pub hi: [T; 2],
    pub root: [usize; 2],
    pub periodic: [bool; 2],
    cells: Vec<Cell>,
    active: Vec<usize>,
    active_pos: Vec<usize>,
    lookup: HashMap<(u32, i64, i64), usize>,
    faces: Vec<Face<T>>,
}

const NONE: usize = usize::MAX;

impl<T: Real> AdaptiveMesh<T> {
    /// Uniform `nx x ny` grid on `[lo, hi]`.
    pub fn cartesian(lo: [T; 2], hi: [T; 2], n: [usize; 2], periodic: [bool; 2]) -> Self {
        assert!(n[0] >= 1 && n[1] >= 1, "at least one cell per direction");
        let mut mesh = AdaptiveMesh {
            dim: 2,
            lo,
            hi,
            root: n,
            periodic,
            cells: Vec::with_capacity(n[0] * n[1]),
            active: Vec::new(),
            active_pos: Vec::new(),
            lookup: HashMap::new(),
            faces: Vec::new(),
        };
        for j in 0..n[1] {
            for i in 0..n[0] {
                mesh.lookup.insert((0, i as i64, j as i64), mesh.cells.len());
                mesh.cells.push(Cell {
                    level: 0,
                    ij: [i as i64, j as i64],
                    parent: None,
                    children: None,
                });
            }
        }
        mesh.rebuild();
        mesh
    }

    /// Interval `[x0, x1]` with `n` cells as a unit-height periodic strip.
    pub fn interval(x0: T, x1: T, n: usize, periodic: bool) -> Self {
        let mut m = Self::cartesian([x0, T::zero()], [x1, T::one()], [n, 1], [periodic, true]);
        m.dim = 1;
        m
    }

    pub fn n_active(&self) -> usize {
        self.active.len()
    }

    pub fn faces(&self) -> &[Face<T>] {
        &self.faces
    }

    pub fn cell(&self, active_index: usize) -> &Cell {
        &self.cells[self.active[active_index]]
    }

    pub fn level(&self, active_index: usize) -> u32 {
        self.cell(active_index).level
    }

    pub fn max_level(&self) -> u32 {
        self.active.iter().map(|&c| self.cells[c].level).max().unwrap_or(0)
    }

    fn size_at(&self, level: u32) -> [T; 2] {
        let f = T::lit((1u64 << level) as f64);
        [
            (self.hi[0] - self.lo[0]) / (T::lit(self.root[0] as f64) * f),
            (self.hi[1] - self.lo[1]) / (T::lit(self.root[1] as f64) * f),
        ]
    }

    /// Cell extents `(hx, hy)`.
    pub fn cell_size(&self, active_index: usize) -> [T; 2] {
        self.size_at(self.cell(active_index).level)
    }

    /// Lower-left corner.
    pub fn cell_origin(&self, active_index: usize) -> [T; 2] {
        let c = self.cell(active_index);
        let h = self.size_at(c.level);
        [
            self.lo[0] + T::lit(c.ij[0] as f64) * h[0],
            self.lo[1] + T::lit(c.ij[1] as f64) * h[1],
        ]
    }

    pub fn cell_center(&self, active_index: usize) -> [T; 2] {
        let o = self.cell_origin(active_index);
        let h = self.cell_size(active_index);
        [o[0] + T::half() * h[0], o[1] + T::half() * h[1]]
    }

    /// Cell measure (length for 1D strips, area otherwise).
    pub fn cell_measure(&self, active_index: usize) -> T {
        let h = self.cell_size(active_index);
        h[0] * h[1]
    }

    /// Cell diameter: the side length (x extent on 1D strips).
    pub fn diameter(&self, active_index: usize) -> T {
        let h = self.cell_size(active_index);
        if self.dim == 1 {
            h[0]
        } else {
            h[0].max(h[1])
        }
    }

    fn diameter_at(&self, level: u32) -> T {
        let h = self.size_at(level);
        if self.dim == 1 {
            h[0]
        } else {
            h[0].max(h[1])
        }
    }

    pub fn min_diameter(&self) -> T {
        (0..self.n_active())
            .map(|c| self.diameter(c))
            .fold(T::infinity(), T::min)
    }

    pub fn max_diameter(&self) -> T {
        (0..self.n_active())
            .map(|c| self.diameter(c))
            .fold(T::zero(), T::max)
    }

    pub fn domain_measure(&self) -> T {
        (self.hi[0] - self.lo[0]) * (self.hi[1] - self.lo[1])
    }

    /// Active index of the cell containing `x` (boundary points go to the lower cell).
    pub fn locate(&self, x: [T; 2]) -> Option<usize> {
        let h0 = self.size_at(0);
        let mut ij = [0i64; 2];
        for d in 0..2 {
            let v = ((x[d] - self.lo[d]) / h0[d]).floor().to_f64_lossy() as i64;
            if v < 0 || v > self.root[d] as i64 {
                return None;
            }
            ij[d] = v.min(self.root[d] as i64 - 1);
        }
        let mut id = *self.lookup.get(&(0, ij[0], ij[1]))?;
        while let Some(ch) = self.cells[id].children {
            let lvl = self.cells[id].level + 1;
            let h = self.size_at(lvl);
            let mut pos = 0;
            for d in 0..2 {
                let k = ((x[d] - self.lo[d]) / h[d]).floor().to_f64_lossy() as i64;
                if k > 2 * self.cells[id].ij[d] {
                    pos |= 1 << d;
                }
            }
            id = ch[pos];
        }
        Some(self.active_pos[id])
    }

    fn grid_extent(&self, level: u32) -> [i64; 2] {
        [
            (self.root[0] as i64) << level,
            (self.root[1] as i64) << level,
        ]
    }

    /// Same-level neighbor key across `side`, honoring periodicity.
    fn neighbor_key(&self, level: u32, ij: [i64; 2], side: usize) -> Option<[i64; 2]> {
        let axis = side / 2;
        let step = if side % 2 == 0 { -1 } else { 1 };
        let n = self.grid_extent(level);
        let mut k = ij;
        k[axis] += step;
        if k[axis] < 0 || k[axis] >= n[axis] {
            if !self.periodic[axis] {
                return None;
            }
            k[axis] = k[axis].rem_euclid(n[axis]);
        }
        Some(k)
    }

    fn rebuild(&mut self) {
        // depth-first order over the root grid keeps siblings contiguous
        let mut active = Vec::new();
        let mut stack = Vec::new();
        for j in (0..self.root[1]).rev() {
            for i in (0..self.root[0]).rev() {
                stack.push(self.lookup[&(0, i as i64, j as i64)]);
            }
        }
        while let Some(id) = stack.pop() {
            match self.cells[id].children {
                Some(ch) => stack.extend(ch.iter().rev()),
                None => active.push(id),
            }
        }
        self.active_pos = vec![NONE; self.cells.len()];
        for (k, &id) in active.iter().enumerate() {
            self.active_pos[id] = k;
        }
        self.active = active;
        self.build_faces();
    }

    fn build_faces(&mut self) {
        let mut faces = Vec::new();
        for (a, &id) in self.active.iter().enumerate() {
            let cell = &self.cells[id];
            let h = self.size_at(cell.level);
            let origin = [
                self.lo[0] + T::lit(cell.ij[0] as f64) * h[0],
                self.lo[1] + T::lit(cell.ij[1] as f64) * h[1],
            ];
            for side in 0..4 {
                let axis = side / 2;
                let mut normal = [T::zero(); 2];
                normal[axis] = if side % 2 == 0 { -T::one() } else { T::one() };
                let mut forigin = origin;
                if side % 2 == 1 {
                    forigin[axis] += h[axis];
                }
                let measure = h[1 - axis];
                let me = FaceSide {
                    cell: a,
                    local_face: side,
                    sub: SubFace::Full,
                };
                let opposite = side ^ 1;
                let key = match self.neighbor_key(cell.level, cell.ij, side) {
                    None => {
                        faces.push(Face {
                            kind: FaceKind::Boundary(side),
                            sides: [Some(me), None],
                            normal,
                            axis,
                            origin: forigin,
                            measure,
                            hanging: false,
                        });
                        continue;
                    }
                    Some(k) => k,
                };
                let wrapped = {
                    let mut raw = cell.ij;
                    raw[axis] += if side % 2 == 0 { -1 } else { 1 };
                    raw != key
                };
                let kind = if wrapped {
                    FaceKind::Periodic
                } else {
                    FaceKind::Interior
                };
                match self.lookup.get(&(cell.level, key[0], key[1])) {
                    Some(&nid) => {
                        if self.cells[nid].children.is_some() {
                            continue; // finer neighbors own these faces
                        }
                        // conforming: owned by the cell on the positive side
                        if side % 2 == 0 {
                            continue;
                        }
                        faces.push(Face {
                            kind,
                            sides: [
                                Some(me),
                                Some(FaceSide {
                                    cell: self.active_pos[nid],
                                    local_face: opposite,
                                    sub: SubFace::Full,
                                }),
                            ],
                            normal,
                            axis,
                            origin: forigin,
                            measure,
                            hanging: false,
                        });
                    }
                    None => {
                        let coarse_key = (cell.level - 1, key[0] >> 1, key[1] >> 1);
                        let cid = *self
                            .lookup
                            .get(&coarse_key)
                            .expect("mesh is 2:1 balanced");
                        debug_assert!(self.cells[cid].children.is_none());
                        let tangential = cell.ij[1 - axis];
                        let sub = if tangential % 2 == 0 {
                            SubFace::Lower
                        } else {
                            SubFace::Upper
                        };
                        faces.push(Face {
                            kind,
                            sides: [
                                Some(me),
                                Some(FaceSide {
                                    cell: self.active_pos[cid],
                                    local_face: opposite,
                                    sub,
                                }),
                            ],
                            normal,
                            axis,
                            origin: forigin,
                            measure,
                            hanging: true,
                        });
                    }
                }
            }
        }
        self.faces = faces;
    }

    /// Active cells adjacent to `active_index` across `side` (empty on the boundary).
    pub fn neighbors(&self, active_index: usize, side: usize) -> Vec<usize> {
        let id = self.active[active_index];
        let cell = &self.cells[id];
        let key = match self.neighbor_key(cell.level, cell.ij, side) {
            None => return Vec::new(),
            Some(k) => k,
        };
        match self.lookup.get(&(cell.level, key[0], key[1])) {
            Some(&nid) => match self.cells[nid].children {
                None => vec![self.active_pos[nid]],
                Some(ch) => {
                    // the two children touching the shared side
                    let opposite = side ^ 1;
                    let axis = side / 2;
                    let mut out = Vec::new();
                    for (pos, &c) in ch.iter().enumerate() {
                        let bit = (pos >> axis) & 1;
                        if bit == opposite % 2 {
                            out.extend(self.descend_side(c, opposite));
                        }
                    }
                    out
                }
            },
            None => {
                let ck = (cell.level - 1, key[0] >> 1, key[1] >> 1);
                self.lookup
                    .get(&ck)
                    .map(|&c| vec![self.active_pos[c]])
                    .unwrap_or_default()
            }
        }
    }

    fn descend_side(&self, id: usize, side: usize) -> Vec<usize> {
        match self.cells[id].children {
            None => vec![self.active_pos[id]],
            Some(ch) => {
                let axis = side / 2;
                let mut out = Vec::new();
                for (pos, &c) in ch.iter().enumerate() {
                    if (pos >> axis) & 1 == side % 2 {
                        out.extend(self.descend_side(c, side));
                    }
                }
                out
            }
        }
    }

    /// True if every pair of face neighbors differs by at most one level.
    pub fn is_balanced(&self) -> bool {
        (0..self.n_active()).all(|a| {
            let l = self.level(a) as i64;
            (0..4).all(|s| {
                self.neighbors(a, s)
                    .iter()
                    .all(|&b| (self.level(b) as i64 - l).abs() <= 1)
            })
        })
    }

    /// Applies a refinement plan, enforcing 2:1 balance and the diameter bounds.
    pub fn apply_refinement(
        &self,
        plan: &RefinementPlan<T>,
    ) -> (AdaptiveMesh<T>, Vec<CellSource>, RefinementStats) {
        let mut stats = RefinementStats::default();
        let tol = T::lit(1e-12);
        let mut refine: BTreeSet<usize> = BTreeSet::new();
        for &a in &plan.refine {
            let child_diam = self.diameter(a) * T::half();
            if self.dim == 1 || child_diam < plan.min_diam * (T::one() - tol) {
                stats.clipped += 1;
            } else {
                refine.insert(a);
            }
        }
        let requested = refine.len();
        // balance closure: a refined cell forces coarser neighbors to refine
        let mut work: Vec<usize> = refine.iter().copied().collect();
        while let Some(a) = work.pop() {
            let l = self.level(a);
            for s in 0..4 {
                for b in self.neighbors(a, s) {
                    if self.level(b) < l && refine.insert(b) {
                        work.push(b);
                    }
                }
            }
        }
        stats.balance_refined = refine.len() - requested;
        stats.refined = refine.len();

        // coarsening: unanimous siblings, bounds, and balance after refinement
        let mut parents: BTreeSet<usize> = BTreeSet::new();
        for &a in &plan.coarsen {
            if refine.contains(&a) {
                continue;
            }
            if let Some(p) = self.cell(a).parent {
                parents.insert(p);
            }
        }
        let mut coarsen_parents = Vec::new();
        'parent: for p in parents {
            let ch = match self.cells[p].children {
                Some(ch) => ch,
                None => continue,
            };
            let mut kids = [0usize; 4];
            for (k, &c) in ch.iter().enumerate() {
                let a = self.active_pos[c];
                if a == NONE || !plan.coarsen.contains(&a) || refine.contains(&a) {
                    continue 'parent;
                }
                kids[k] = a;
            }
            if self.diameter_at(self.cells[p].level) > plan.max_diam * (T::one() + tol) {
                stats.clipped += 1;
                continue;
            }
            let lp = self.cells[p].level;
            for &a in &kids {
                for s in 0..4 {
                    for b in self.neighbors(a, s) {
                        if kids.contains(&b) {
                            continue;
                        }
                        let lb = self.level(b) + u32::from(refine.contains(&b));
                        if lb > lp + 1 {
                            stats.clipped += 1;
                            continue 'parent;
                        }
                    }
                }
            }
            coarsen_parents.push((p, kids));
        }
        stats.coarsened = coarsen_parents.len();

        let mut next = self.clone();
        for &a in &refine {
            let id = self.active[a];
            let (level, ij) = (self.cells[id].level + 1, self.cells[id].ij);
            let mut ch = [0usize; 4];
            for (pos, slot) in ch.iter_mut().enumerate() {
                let cij = [2 * ij[0] + (pos & 1) as i64, 2 * ij[1] + (pos >> 1) as i64];
                *slot = next.cells.len();
                next.lookup.insert((level, cij[0], cij[1]), *slot);
                next.cells.push(Cell {
                    level,
                    ij: cij,
                    parent: Some(id),
                    children: None,
                });
            }
            next.cells[id].children = Some(ch);
        }
        for &(p, _) in &coarsen_parents {
            if let Some(ch) = next.cells[p].children.take() {
                for c in ch {
                    let cell = &next.cells[c];
                    next.lookup.remove(&(cell.level, cell.ij[0], cell.ij[1]));
                }
            }
        }
        next.rebuild();

        let sources = next
            .active
            .iter()
            .map(|&id| {
                if id < self.active_pos.len() && self.active_pos[id] != NONE {
                    return CellSource::Same(self.active_pos[id]);
                }
                if let Some(ch) = self.cells.get(id).and_then(|c| c.children) {
                    return CellSource::Parent {
                        children: ch.map(|c| self.active_pos[c]),
                    };
                }
                let parent = next.cells[id].parent.expect("new cell has a parent");
                let position = next.cells[parent]
                    .children
                    .expect("parent refined")
                    .iter()
                    .position(|&c| c == id)
                    .expect("child listed");
                CellSource::Child {
                    parent: self.active_pos[parent],
                    position,
                }
            })
            .collect();
        (next, sources, stats)
    }

    /// Refines every active cell once.
    pub fn refine_all(&self) -> AdaptiveMesh<T> {
        let plan = RefinementPlan {
            refine: (0..self.n_active()).collect(),
            coarsen: BTreeSet::new(),
            min_diam: T::zero(),
            max_diam: T::infinity(),
        };
        self.apply_refinement(&plan).0
    }

    /// Legacy ASCII VTK dump of the active cells with optional cell data.
    pub fn to_vtk(&self, cell_data: &[(&str, Vec<T>)]) -> String {
        let n = self.n_active();
        let mut s = String::new();
        let _ = writeln!(s, "# vtk DataFile Version 3.0\nimexdg mesh\nASCII\nDATASET UNSTRUCTURED_GRID");
        let _ = writeln!(s, "POINTS {} double", 4 * n);
        for a in 0..n {
            let o = self.cell_origin(a);
            let h = self.cell_size(a);
            for (dx, dy) in [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)] {
                let _ = writeln!(
                    s,
                    "{} {} 0",
                    (o[0] + T::lit(dx) * h[0]).to_f64_lossy(),
                    (o[1] + T::lit(dy) * h[1]).to_f64_lossy()
                );
            }
        }
        let _ = writeln!(s, "CELLS {} {}", n, 5 * n);
        for a in 0..n {
            let _ = writeln!(s, "4 {} {} {} {}", 4 * a, 4 * a + 1, 4 * a + 2, 4 * a + 3);
        }
        let _ = writeln!(s, "CELL_TYPES {n}");
        for _ in 0..n {
            let _ = writeln!(s, "9");
        }
        let _ = writeln!(s, "CELL_DATA {n}");
        let _ = writeln!(s, "SCALARS level int 1\nLOOKUP_TABLE default");
        for a in 0..n {
            let _ = writeln!(s, "{}", self.level(a));
        }
        for (name, values) in cell_data {
            let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            for v in values {
                let _ = writeln!(s, "{}", v.to_f64_lossy());
            }
        }
        s
    }
}
