//! Discrete functions and fields on a double mesh, their scalar products,
//! projections of continuous data, and the piecewise-constant lifting back
//! to the domain and to space-time.
//!
//! Conventions:
//! - A [`DiscreteFunction`] carries one value per primal volume and one per
//!   dual volume, indexed by their mesh ids. Boundary slots ride along in
//!   the same arrays; plain functions leave them at zero, while a
//!   [`DiscreteFunctionBar`] gives them meaning (Dirichlet traces).
//! - All reductions run in mesh-index order with plain accumulation, so
//!   results are bit-reproducible across runs and thread counts.
//! - Quadrature: the base rules are exact for quadratics; [`Quadrature`]
//!   adds recursive midpoint subdivision of every simplex, sharpening the
//!   constant by roughly 4x per level.

use crate::geometry::{
    centroid, midpoint, point_in_tet, point_in_triangle_2d, tet_volume_signed,
    triangle_area_signed, Point,
};
use crate::mesh::DdfvMesh;

#[derive(Debug, thiserror::Error)]
pub enum FieldError {
    #[error("function sized for {got_primal} primal / {got_dual} dual volumes, mesh has {want_primal} / {want_dual}")]
    SizeMismatch { got_primal: usize, got_dual: usize, want_primal: usize, want_dual: usize },
    #[error("field sized for {got} diamonds, mesh has {want}")]
    FieldSizeMismatch { got: usize, want: usize },
    #[error("point ({x}, {y}, {z}) lies outside the domain")]
    OutsideDomain { x: f64, y: f64, z: f64 },
    #[error("time {t} outside the covered range [0, {t_max})")]
    OutsideTimeRange { t: f64, t_max: f64 },
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),
}

/// Values attached to the control volumes of both families, indexed by
/// primal id and by vertex (dual) id.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFunction {
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
}

impl DiscreteFunction {
    pub fn zeros(mesh: &DdfvMesh) -> Self {
        DiscreteFunction {
            primal: vec![0.0; mesh.primal.len()],
            dual: vec![0.0; mesh.dual.len()],
        }
    }

    pub fn constant(mesh: &DdfvMesh, c: f64) -> Self {
        DiscreteFunction {
            primal: vec![c; mesh.primal.len()],
            dual: vec![c; mesh.dual.len()],
        }
    }

    /// Samples `s` at every volume center (circumcenters and vertices).
    /// This is pointwise sampling, not the averaging projection.
    pub fn from_centers(mesh: &DdfvMesh, s: impl Fn(Point) -> f64) -> Self {
        DiscreteFunction {
            primal: mesh.primal.iter().map(|k| s(k.center)).collect(),
            dual: mesh.dual.iter().map(|d| s(d.center)).collect(),
        }
    }

    pub fn matches(&self, mesh: &DdfvMesh) -> bool {
        self.primal.len() == mesh.primal.len() && self.dual.len() == mesh.dual.len()
    }

    pub fn is_finite(&self) -> bool {
        self.primal.iter().chain(&self.dual).all(|v| v.is_finite())
    }

    fn check(&self, mesh: &DdfvMesh) -> Result<(), FieldError> {
        if self.matches(mesh) {
            Ok(())
        } else {
            Err(FieldError::SizeMismatch {
                got_primal: self.primal.len(),
                got_dual: self.dual.len(),
                want_primal: mesh.primal.len(),
                want_dual: mesh.dual.len(),
            })
        }
    }
}

/// A discrete function whose boundary entries carry meaning (the trace on
/// the boundary volumes of both families).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFunctionBar(pub DiscreteFunction);

impl std::ops::Deref for DiscreteFunctionBar {
    type Target = DiscreteFunction;
    fn deref(&self) -> &DiscreteFunction {
        &self.0
    }
}

impl std::ops::DerefMut for DiscreteFunctionBar {
    fn deref_mut(&mut self) -> &mut DiscreteFunction {
        &mut self.0
    }
}

impl DiscreteFunctionBar {
    pub fn zeros(mesh: &DdfvMesh) -> Self {
        DiscreteFunctionBar(DiscreteFunction::zeros(mesh))
    }

    /// True when every boundary entry (both families) is exactly zero.
    pub fn in_zero_space(&self, mesh: &DdfvMesh) -> bool {
        let bp = self.primal[mesh.n_interior_primal..].iter().all(|&v| v == 0.0);
        let bd = mesh.dual.iter().filter(|d| d.is_boundary).all(|d| self.dual[d.id] == 0.0);
        bp && bd
    }

    /// Forces every boundary entry to zero.
    pub fn zeroed_boundary(mut self, mesh: &DdfvMesh) -> Self {
        for v in &mut self.primal[mesh.n_interior_primal..] {
            *v = 0.0;
        }
        for d in &mesh.dual {
            if d.is_boundary {
                self.0.dual[d.id] = 0.0;
            }
        }
        self
    }
}

/// One vector per diamond, indexed by diamond id. A subdiamond inherits the
/// value of the diamond containing it.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField {
    pub per_diamond: Vec<Point>,
}

impl DiscreteField {
    pub fn zeros(mesh: &DdfvMesh) -> Self {
        DiscreteField { per_diamond: vec![Point::default(); mesh.diamonds.len()] }
    }

    pub fn constant(mesh: &DdfvMesh, v: Point) -> Self {
        DiscreteField { per_diamond: vec![v; mesh.diamonds.len()] }
    }

    /// Samples `f` at the interface crossing point of every diamond.
    pub fn from_crossings(mesh: &DdfvMesh, f: impl Fn(Point) -> Point) -> Self {
        DiscreteField {
            per_diamond: mesh
                .diamonds
                .iter()
                .map(|d| f(mesh.interfaces[d.interface].crossing))
                .collect(),
        }
    }

    /// The value a subdiamond sees: that of its parent diamond.
    pub fn at_subdiamond(&self, mesh: &DdfvMesh, subdiamond: usize) -> Point {
        self.per_diamond[mesh.subdiamonds[subdiamond].diamond]
    }

    pub fn matches(&self, mesh: &DdfvMesh) -> bool {
        self.per_diamond.len() == mesh.diamonds.len()
    }

    fn check(&self, mesh: &DdfvMesh) -> Result<(), FieldError> {
        if self.matches(mesh) {
            Ok(())
        } else {
            Err(FieldError::FieldSizeMismatch {
                got: self.per_diamond.len(),
                want: mesh.diamonds.len(),
            })
        }
    }
}

/// A time sequence of discrete functions: slices n = 0..=n_steps, slice n
/// living at time n*dt (slice 0 is the initial state).
#[derive(Debug, Clone)]
pub struct SpaceTimeFunction {
    pub slices: Vec<DiscreteFunctionBar>,
    pub dt: f64,
}

impl SpaceTimeFunction {
    pub fn new(slices: Vec<DiscreteFunctionBar>, dt: f64) -> Result<Self, FieldError> {
        if slices.is_empty() {
            return Err(FieldError::InvalidTimeGrid("no slices".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(FieldError::InvalidTimeGrid(format!("dt = {dt}")));
        }
        let (p, d) = (slices[0].primal.len(), slices[0].dual.len());
        if slices.iter().any(|s| s.primal.len() != p || s.dual.len() != d) {
            return Err(FieldError::InvalidTimeGrid("slices sized inconsistently".into()));
        }
        Ok(SpaceTimeFunction { slices, dt })
    }

    pub fn n_steps(&self) -> usize {
        self.slices.len() - 1
    }

    /// Whether the slab sequence covers a final time T, i.e.
    /// N*dt <= T < (N+1)*dt.
    pub fn covers(&self, t_final: f64) -> bool {
        let n = self.n_steps() as f64;
        n * self.dt <= t_final && t_final < (n + 1.0) * self.dt
    }
}

/// Scalar product of discrete functions: the primal cells weighted by 1/d
/// plus the vertex cells weighted by (d-1)/d.
///
/// The vertex cells of boundary vertices have positive measure and complete
/// the vertex-cell partition of the domain, so the vertex sum runs over all
/// of them; for zero-boundary functions this coincides with an
/// interior-only sum.
pub fn inner_functions(
    mesh: &DdfvMesh,
    w: &DiscreteFunction,
    v: &DiscreteFunction,
) -> Result<f64, FieldError> {
    w.check(mesh)?;
    v.check(mesh)?;
    let d = mesh.dim as f64;
    let mut prim = 0.0;
    for k in 0..mesh.n_interior_primal {
        // Pairing the values first keeps the product exactly symmetric.
        prim += mesh.primal[k].measure * (w.primal[k] * v.primal[k]);
    }
    let mut dual = 0.0;
    for dv in &mesh.dual {
        dual += dv.measure * (w.dual[dv.id] * v.dual[dv.id]);
    }
    Ok(prim / d + dual * (d - 1.0) / d)
}

/// Scalar product of discrete fields: sum of m_D F_D . G_D over diamonds.
pub fn inner_fields(
    mesh: &DdfvMesh,
    f: &DiscreteField,
    g: &DiscreteField,
) -> Result<f64, FieldError> {
    f.check(mesh)?;
    g.check(mesh)?;
    let mut acc = 0.0;
    for d in &mesh.diamonds {
        acc += d.measure * f.per_diamond[d.id].dot(g.per_diamond[d.id]);
    }
    Ok(acc)
}

/// Quadrature control for projections: `levels` recursive midpoint
/// subdivisions on top of base rules that are exact for quadratics.
#[derive(Debug, Clone, Copy, Default)]
pub struct Quadrature {
    pub levels: u32,
}

fn seg_avg<F: Fn(Point) -> f64>(a: Point, b: Point, s: &F, levels: u32) -> f64 {
    if levels == 0 {
        // Two-point Gauss-Legendre.
        let mid = midpoint(a, b);
        let e = (b - a) * (0.5 / 3f64.sqrt());
        return 0.5 * (s(mid - e) + s(mid + e));
    }
    let m = midpoint(a, b);
    0.5 * (seg_avg(a, m, s, levels - 1) + seg_avg(m, b, s, levels - 1))
}

fn tri_avg<F: Fn(Point) -> f64>(a: Point, b: Point, c: Point, s: &F, levels: u32) -> f64 {
    if levels == 0 {
        // Edge-midpoint rule, exact for quadratics.
        return (s(midpoint(a, b)) + s(midpoint(b, c)) + s(midpoint(c, a))) / 3.0;
    }
    let (ab, bc, ca) = (midpoint(a, b), midpoint(b, c), midpoint(c, a));
    let l = levels - 1;
    0.25 * (tri_avg(a, ab, ca, s, l)
        + tri_avg(ab, b, bc, s, l)
        + tri_avg(ca, bc, c, s, l)
        + tri_avg(ab, bc, ca, s, l))
}

fn tet_avg<F: Fn(Point) -> f64>(a: Point, b: Point, c: Point, d: Point, s: &F, levels: u32) -> f64 {
    if levels == 0 {
        // Four-point barycentric rule, exact for quadratics.
        let alpha = (5.0 + 3.0 * 5f64.sqrt()) / 20.0;
        let beta = (5.0 - 5f64.sqrt()) / 20.0;
        let pts = [a, b, c, d];
        let mut acc = 0.0;
        for i in 0..4 {
            let mut p = pts[i] * alpha;
            for (j, q) in pts.iter().enumerate() {
                if j != i {
                    p = p + *q * beta;
                }
            }
            acc += s(p);
        }
        return acc / 4.0;
    }
    // Four corner tets plus the central octahedron cut along one diagonal;
    // all eight children have one eighth of the volume.
    let (mab, mac, mad) = (midpoint(a, b), midpoint(a, c), midpoint(a, d));
    let (mbc, mbd, mcd) = (midpoint(b, c), midpoint(b, d), midpoint(c, d));
    let l = levels - 1;
    let mut acc = tet_avg(a, mab, mac, mad, s, l)
        + tet_avg(b, mab, mbc, mbd, s, l)
        + tet_avg(c, mac, mbc, mcd, s, l)
        + tet_avg(d, mad, mbd, mcd, s, l);
    acc += tet_avg(mab, mcd, mac, mad, s, l)
        + tet_avg(mab, mcd, mad, mbd, s, l)
        + tet_avg(mab, mcd, mbd, mbc, s, l)
        + tet_avg(mab, mcd, mbc, mac, s, l);
    acc / 8.0
}

fn simplex_avg<F: Fn(Point) -> f64>(pts: &[Point], s: &F, levels: u32) -> f64 {
    match pts.len() {
        2 => seg_avg(pts[0], pts[1], s, levels),
        3 => tri_avg(pts[0], pts[1], pts[2], s, levels),
        4 => tet_avg(pts[0], pts[1], pts[2], pts[3], s, levels),
        n => unreachable!("simplex with {n} vertices"),
    }
}

/// Mean of `s` over one dual cell, by fanning simplices out of the cell's
/// vertex. Valid because each cell is star-shaped from its vertex: inside
/// every incident primal simplex the cell piece is an intersection of
/// half-spaces through that vertex. Signed pieces self-normalize, so the
/// stored winding of the hull polygons does not matter.
fn dual_cell_avg<F: Fn(Point) -> f64>(mesh: &DdfvMesh, id: usize, s: &F, levels: u32) -> f64 {
    let dv = &mesh.dual[id];
    let c = dv.center;
    let mut num = 0.0;
    let mut den = 0.0;
    if mesh.dim == 2 {
        // One polygon: a closed ring for interior cells, an open polyline
        // (closing through the vertex itself) for boundary cells.
        let poly = &dv.hull_faces[0];
        let n = poly.len();
        let segments = if dv.is_boundary { n - 1 } else { n };
        for i in 0..segments {
            let (p, q) = (poly[i], poly[(i + 1) % n]);
            let w = triangle_area_signed(c, p, q);
            num += w * tri_avg(c, p, q, s, levels);
            den += w;
        }
    } else {
        // Cone from the vertex over every hull polygon. Faces through the
        // vertex itself (boundary closure pieces) contribute nothing and
        // are skipped; each remaining face gets a consistent orientation
        // from the sign of its total cone volume.
        let vol_eps = mesh.eps_geo() * mesh.char_length * mesh.char_length;
        for face in &mesh.dual[id].hull_faces {
            let q0 = centroid(face);
            let n = face.len();
            let mut total = 0.0;
            for i in 0..n {
                total += tet_volume_signed(c, q0, face[i], face[(i + 1) % n]);
            }
            if total.abs() <= vol_eps {
                continue;
            }
            let sgn = total.signum();
            for i in 0..n {
                let (p, q) = (face[i], face[(i + 1) % n]);
                let w = sgn * tet_volume_signed(c, q0, p, q);
                num += w * tet_avg(c, q0, p, q, s, levels);
                den += w;
            }
        }
    }
    debug_assert!(
        (den.abs() - dv.measure).abs() <= 1e-9 * dv.measure,
        "dual cell {id}: fan {} vs stored measure {}",
        den.abs(),
        dv.measure
    );
    num / den
}

/// Cell averages of `s` over interior volumes of both families; boundary
/// slots are left at zero.
pub fn project_cells(
    mesh: &DdfvMesh,
    s: impl Fn(Point) -> f64,
) -> Result<DiscreteFunction, FieldError> {
    project_cells_q(mesh, s, Quadrature::default())
}

pub fn project_cells_q(
    mesh: &DdfvMesh,
    s: impl Fn(Point) -> f64,
    q: Quadrature,
) -> Result<DiscreteFunction, FieldError> {
    let mut out = DiscreteFunction::zeros(mesh);
    for k in 0..mesh.n_interior_primal {
        let pts: Vec<Point> =
            mesh.primal[k].vertices.iter().map(|&v| mesh.points[v]).collect();
        out.primal[k] = simplex_avg(&pts, &s, q.levels);
    }
    for dv in &mesh.dual {
        if !dv.is_boundary {
            out.dual[dv.id] = dual_cell_avg(mesh, dv.id, &s, q.levels);
        }
    }
    if !out.is_finite() {
        return Err(FieldError::NonFinite("cell projection".into()));
    }
    Ok(out)
}

/// Projection of boundary-aware data: interior cell averages, boundary
/// volumes averaged over their own geometry (the face for primal boundary
/// volumes, the vertex cell for dual ones), plus the mean of the data over
/// every interface and dual interface.
#[derive(Debug, Clone)]
pub struct ProjectedBar {
    pub function: DiscreteFunctionBar,
    /// Mean over each primal interface, indexed by interface id.
    pub interface_means: Vec<f64>,
    /// Mean over each dual interface, indexed by dual interface id.
    pub dual_interface_means: Vec<f64>,
}

pub fn project_bar(mesh: &DdfvMesh, psi: impl Fn(Point) -> f64) -> ProjectedBar {
    project_bar_q(mesh, psi, Quadrature::default())
}

pub fn project_bar_q(mesh: &DdfvMesh, psi: impl Fn(Point) -> f64, q: Quadrature) -> ProjectedBar {
    let mut f = DiscreteFunction::zeros(mesh);
    for k in 0..mesh.primal.len() {
        let pts: Vec<Point> =
            mesh.primal[k].vertices.iter().map(|&v| mesh.points[v]).collect();
        f.primal[k] = simplex_avg(&pts, &psi, q.levels);
    }
    for dv in &mesh.dual {
        f.dual[dv.id] = dual_cell_avg(mesh, dv.id, &psi, q.levels);
    }
    let interface_means = mesh
        .interfaces
        .iter()
        .map(|i| {
            let pts: Vec<Point> = i.span.iter().map(|&v| mesh.points[v]).collect();
            simplex_avg(&pts, &psi, q.levels)
        })
        .collect();
    let dual_interface_means = mesh
        .dual_interfaces
        .iter()
        .map(|di| {
            let mut num = 0.0;
            let mut den = 0.0;
            for &si in &di.subdiamonds {
                let sd = &mesh.subdiamonds[si];
                if sd.m_sigma_star <= 0.0 {
                    continue;
                }
                let p = sd.sigma_star_pts;
                let avg = if mesh.dim == 2 {
                    seg_avg(p[0], p[1], &psi, q.levels)
                } else {
                    tri_avg(p[0], p[1], p[2], &psi, q.levels)
                };
                num += sd.m_sigma_star * avg;
                den += sd.m_sigma_star;
            }
            debug_assert!(den > 0.0, "dual interface {} has no area", di.id);
            num / den
        })
        .collect();
    ProjectedBar { function: DiscreteFunctionBar(f), interface_means, dual_interface_means }
}

/// Slab averages in time followed by the cell projection: entry n-1 of the
/// result holds the average over [(n-1)dt, n*dt) for n = 1..=n_steps.
pub fn time_average(
    mesh: &DdfvMesh,
    s: impl Fn(f64, Point) -> f64,
    dt: f64,
    n_steps: usize,
) -> Result<Vec<DiscreteFunction>, FieldError> {
    time_average_q(mesh, s, dt, n_steps, Quadrature::default())
}

pub fn time_average_q(
    mesh: &DdfvMesh,
    s: impl Fn(f64, Point) -> f64,
    dt: f64,
    n_steps: usize,
    q: Quadrature,
) -> Result<Vec<DiscreteFunction>, FieldError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(FieldError::InvalidTimeGrid(format!("dt = {dt}")));
    }
    // Three-point Gauss-Legendre in time (degree five) per slab.
    let node = (0.6f64).sqrt();
    let mut out = Vec::with_capacity(n_steps);
    for n in 1..=n_steps {
        let mid = (n as f64 - 0.5) * dt;
        let half = 0.5 * dt;
        let slab = |x: Point| {
            (8.0 * s(mid, x) + 5.0 * (s(mid - half * node, x) + s(mid + half * node, x))) / 18.0
        };
        out.push(project_cells_q(mesh, slab, q)?);
    }
    Ok(out)
}

/// Entrywise composition with a scalar map.
pub fn compose(u: &DiscreteFunctionBar, g: impl Fn(f64) -> f64) -> DiscreteFunctionBar {
    DiscreteFunctionBar(DiscreteFunction {
        primal: u.primal.iter().map(|&v| g(v)).collect(),
        dual: u.dual.iter().map(|&v| g(v)).collect(),
    })
}

/// Lq norm (q >= 1) of the piecewise-constant primal lift, over the
/// interior simplices.
pub fn lq_norm_primal(mesh: &DdfvMesh, w: &DiscreteFunction, q: f64) -> f64 {
    let mut acc = 0.0;
    for k in 0..mesh.n_interior_primal {
        acc += mesh.primal[k].measure * w.primal[k].abs().powf(q);
    }
    acc.powf(1.0 / q)
}

/// Lq norm of the piecewise-constant vertex-cell lift, over all vertex
/// cells (they partition the domain).
pub fn lq_norm_dual(mesh: &DdfvMesh, w: &DiscreteFunction, q: f64) -> f64 {
    let mut acc = 0.0;
    for dv in &mesh.dual {
        acc += dv.measure * w.dual[dv.id].abs().powf(q);
    }
    acc.powf(1.0 / q)
}

/// Lq norm of the combined lift (1/d primal + (d-1)/d dual), which is
/// piecewise constant on the overlaps of primal and dual cells.
pub fn lq_norm_combined(mesh: &DdfvMesh, w: &DiscreteFunction, q: f64) -> f64 {
    let d = mesh.dim as f64;
    let mut acc = 0.0;
    for (k, row) in mesh.overlaps.iter().enumerate() {
        for &(v, m) in row {
            let comb = w.primal[k] / d + w.dual[v] * (d - 1.0) / d;
            acc += m * comb.abs().powf(q);
        }
    }
    acc.powf(1.0 / q)
}

/// Values of the lifted function at one space-time point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftValues {
    pub primal: f64,
    pub dual: f64,
    pub combined: f64,
}

/// Piecewise-constant space-time evaluator: slab n covers
/// [(n-1)dt, n*dt) (half-open, so t = n*dt reads slab n+1), the primal
/// value comes from the simplex containing x and the dual value from its
/// nearest vertex.
pub struct Lifted<'a> {
    mesh: &'a DdfvMesh,
    u: &'a SpaceTimeFunction,
}

pub fn lift_to_q<'a>(
    mesh: &'a DdfvMesh,
    u: &'a SpaceTimeFunction,
) -> Result<Lifted<'a>, FieldError> {
    for s in &u.slices {
        s.check(mesh)?;
    }
    Ok(Lifted { mesh, u })
}

impl Lifted<'_> {
    /// The slab index n >= 1 whose half-open interval contains t.
    pub fn slab_index(&self, t: f64) -> Result<usize, FieldError> {
        let t_max = self.u.n_steps() as f64 * self.u.dt;
        if !(0.0..t_max).contains(&t) {
            return Err(FieldError::OutsideTimeRange { t, t_max });
        }
        Ok((t / self.u.dt).floor() as usize + 1)
    }

    pub fn eval(&self, t: f64, x: Point) -> Result<LiftValues, FieldError> {
        let n = self.slab_index(t)?;
        self.eval_slice(n, x)
    }

    /// Evaluate one slice directly (0 = initial state).
    pub fn eval_slice(&self, n: usize, x: Point) -> Result<LiftValues, FieldError> {
        let (cell, vertex) = locate(self.mesh, x)
            .ok_or(FieldError::OutsideDomain { x: x.x, y: x.y, z: x.z })?;
        let slice = &self.u.slices[n];
        let d = self.mesh.dim as f64;
        let primal = slice.primal[cell];
        let dual = slice.dual[vertex];
        Ok(LiftValues { primal, dual, combined: primal / d + dual * (d - 1.0) / d })
    }

    /// Lq norm over space-time of the combined lift: slabs 1..=N weighted
    /// by dt.
    pub fn lq_norm_combined(&self, q: f64) -> f64 {
        let mut acc = 0.0;
        for n in 1..=self.u.n_steps() {
            acc += self.u.dt * lq_norm_combined(self.mesh, &self.u.slices[n], q).powf(q);
        }
        acc.powf(1.0 / q)
    }

    pub fn lq_norm_primal(&self, q: f64) -> f64 {
        let mut acc = 0.0;
        for n in 1..=self.u.n_steps() {
            acc += self.u.dt * lq_norm_primal(self.mesh, &self.u.slices[n], q).powf(q);
        }
        acc.powf(1.0 / q)
    }

    pub fn lq_norm_dual(&self, q: f64) -> f64 {
        let mut acc = 0.0;
        for n in 1..=self.u.n_steps() {
            acc += self.u.dt * lq_norm_dual(self.mesh, &self.u.slices[n], q).powf(q);
        }
        acc.powf(1.0 / q)
    }
}

/// Finds the interior simplex containing x and its nearest vertex. The
/// nearest-vertex region inside a simplex is exactly the piece of that
/// vertex's cell there, so this reproduces the vertex-cell covering.
fn locate(mesh: &DdfvMesh, x: Point) -> Option<(usize, usize)> {
    let tol = mesh.eps_geo();
    for k in 0..mesh.n_interior_primal {
        let vs = &mesh.primal[k].vertices;
        let inside = if mesh.dim == 2 {
            point_in_triangle_2d(x, mesh.points[vs[0]], mesh.points[vs[1]], mesh.points[vs[2]], tol)
        } else {
            point_in_tet(
                x,
                mesh.points[vs[0]],
                mesh.points[vs[1]],
                mesh.points[vs[2]],
                mesh.points[vs[3]],
                tol,
            )
        };
        if inside {
            let vertex = *vs
                .iter()
                .min_by(|&&a, &&b| {
                    mesh.points[a].dist(x).partial_cmp(&mesh.points[b].dist(x)).unwrap()
                })
                .unwrap();
            return Some((k, vertex));
        }
    }
    None
}
