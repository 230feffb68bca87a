//! Construction of the double mesh from a simplicial partition.
//!
//! All heavy geometry reduces to closed forms: a subdiamond is the convex
//! cell spanned by the two primal centers and a dual pair, and because both
//! primal centers are equidistant from the dual pair, the dual bisector
//! plane passes through both of them. Cutting the subdiamond by the
//! interface plane and the bisector plane therefore yields cone volumes
//! with explicit base areas and heights — no general polytope booleans.

use super::*;
use crate::geometry::*;
use std::collections::BTreeMap;

/// Options for the builder; fields default to the spec'd behavior.
#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    /// Boundary marks: map from a sorted boundary-face vertex tuple to an
    /// integer mark, carried through to the mesh report.
    pub boundary_marks: BTreeMap<Vec<usize>, i64>,
}

/// Outcome of the standalone Delaunay validation.
#[derive(Debug, Clone, Copy, Default)]
pub struct DelaunayReport {
    /// Number of cocircular/cospherical (vertex, cell) incidences.
    pub ties: usize,
    /// Worst signed clearance of a foreign vertex from a circumball,
    /// relative to the characteristic length (negative = inside).
    pub min_margin: f64,
}

fn char_length(points: &[Point]) -> f64 {
    let mut lo = Point::new3(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new3(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo = Point::new3(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
        hi = Point::new3(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
    }
    (hi - lo).norm()
}

fn cell_dim(cells: &[Vec<usize>]) -> Result<usize, MeshError> {
    let arity = cells.first().map(|c| c.len()).unwrap_or(0);
    let dim = match arity {
        3 => 2,
        4 => 3,
        _ => return Err(MeshError::InvalidInput(format!("cells must have 3 or 4 vertices, got {arity}"))),
    };
    if cells.iter().any(|c| c.len() != arity) {
        return Err(MeshError::InvalidInput("mixed cell arities".into()));
    }
    Ok(dim)
}

fn simplex_measure(dim: usize, pts: &[Point]) -> f64 {
    match dim {
        2 => triangle_area_signed(pts[0], pts[1], pts[2]),
        _ => tet_volume_signed(pts[0], pts[1], pts[2], pts[3]),
    }
}

fn circumcenter(dim: usize, pts: &[Point]) -> Option<Point> {
    match dim {
        2 => circumcenter_triangle_2d(pts[0], pts[1], pts[2]),
        _ => circumcenter_tet(pts[0], pts[1], pts[2], pts[3]),
    }
}

/// The (d-1)-faces of a cell, each as a sorted vertex tuple.
fn cell_faces(dim: usize, cell: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(dim + 1);
    for skip in 0..=dim {
        let mut f: Vec<usize> = cell
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .map(|(_, &v)| v)
            .collect();
        f.sort_unstable();
        out.push(f);
    }
    out
}

/// Brute-force circumball emptiness over all vertices. Ties (vertices on a
/// circumball, within tolerance) are allowed and counted.
pub fn validate_delaunay(points: &[Point], cells: &[Vec<usize>]) -> Result<DelaunayReport, MeshError> {
    let dim = cell_dim(cells)?;
    let clen = char_length(points);
    let tol = EPS_GEO_REL * clen;
    let mut report = DelaunayReport { ties: 0, min_margin: f64::INFINITY };
    for (ci, cell) in cells.iter().enumerate() {
        let pts: Vec<Point> = cell.iter().map(|&v| points[v]).collect();
        let cc = circumcenter(dim, &pts)
            .ok_or_else(|| MeshError::DegenerateCell { what: format!("cell {ci} is flat") })?;
        let r = cell.iter().map(|&v| points[v].dist(cc)).fold(0.0f64, f64::max);
        for (vi, p) in points.iter().enumerate() {
            if cell.contains(&vi) {
                continue;
            }
            let margin = p.dist(cc) - r;
            report.min_margin = report.min_margin.min(margin / clen);
            if margin < -tol {
                return Err(MeshError::NonDelaunay { cell: ci, vertex: vi, depth: -margin });
            }
            if margin.abs() <= tol {
                report.ties += 1;
            }
        }
    }
    if !report.min_margin.is_finite() {
        report.min_margin = 0.0;
    }
    Ok(report)
}

/// Build the complete double mesh from a conforming simplicial partition.
pub fn build_from_simplicial(
    points: &[Point],
    cells: &[Vec<usize>],
    options: &BuildOptions,
) -> Result<DdfvMesh, MeshError> {
    let dim = cell_dim(cells)?;
    if points.iter().any(|p| !p.is_finite()) {
        return Err(MeshError::InvalidInput("non-finite point coordinates".into()));
    }
    if dim == 2 && points.iter().any(|p| p.z != 0.0) {
        return Err(MeshError::InvalidInput("2D mesh points must have zero third coordinate".into()));
    }
    for (ci, c) in cells.iter().enumerate() {
        let mut seen = c.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != c.len() || c.iter().any(|&v| v >= points.len()) {
            return Err(MeshError::InvalidInput(format!("cell {ci} has repeated or out-of-range vertices")));
        }
    }
    let clen = char_length(points);
    if clen <= 0.0 || !clen.is_finite() {
        return Err(MeshError::InvalidInput("degenerate point cloud".into()));
    }
    let eps = EPS_GEO_REL * clen;

    // Duplicate-point detection (exact coordinate ties are what occurs in
    // practice when a generator repeats a node).
    {
        let mut idx: Vec<usize> = (0..points.len()).collect();
        idx.sort_unstable_by(|&a, &b| {
            let (p, q) = (points[a], points[b]);
            (p.x, p.y, p.z).partial_cmp(&(q.x, q.y, q.z)).unwrap()
        });
        for w in idx.windows(2) {
            if points[w[0]].dist(points[w[1]]) <= eps {
                return Err(MeshError::InvalidInput(format!("points {} and {} coincide", w[0].min(w[1]), w[0].max(w[1]))));
            }
        }
    }

    // Positive orientation, degenerate-cell rejection.
    let mut cells: Vec<Vec<usize>> = cells.to_vec();
    for (ci, cell) in cells.iter_mut().enumerate() {
        let pts: Vec<Point> = cell.iter().map(|&v| points[v]).collect();
        let m = simplex_measure(dim, &pts);
        if m.abs() <= eps * clen.powi(dim as i32 - 1) {
            return Err(MeshError::DegenerateCell { what: format!("cell {ci} has zero measure") });
        }
        if m < 0.0 {
            cell.swap(dim - 1, dim);
        }
    }

    // Face table (sorted vertex tuple -> incident cells), conformity.
    let mut face_map: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (ci, cell) in cells.iter().enumerate() {
        for f in cell_faces(dim, cell) {
            face_map.entry(f).or_default().push(ci);
        }
    }
    for (f, cs) in &face_map {
        if cs.len() > 2 {
            return Err(MeshError::NonConforming { what: format!("face {f:?} shared by {} cells", cs.len()) });
        }
    }

    // Hanging vertices: a non-member vertex inside a closed cell.
    for (ci, cell) in cells.iter().enumerate() {
        let pts: Vec<Point> = cell.iter().map(|&v| points[v]).collect();
        for (vi, p) in points.iter().enumerate() {
            if cell.contains(&vi) {
                continue;
            }
            let inside = match dim {
                2 => point_in_triangle_2d(*p, pts[0], pts[1], pts[2], 1e-9),
                _ => point_in_tet(*p, pts[0], pts[1], pts[2], pts[3], 1e-9),
            };
            if inside {
                return Err(MeshError::NonConforming { what: format!("vertex {vi} hangs inside cell {ci}") });
            }
        }
    }

    let delaunay = validate_delaunay(points, &cells)?;

    // Interior primal volumes: circumcenters, measures, diameters.
    let n_cells = cells.len();
    let mut centers = Vec::with_capacity(n_cells);
    let mut centers_outside = 0usize;
    for (ci, cell) in cells.iter().enumerate() {
        let pts: Vec<Point> = cell.iter().map(|&v| points[v]).collect();
        let cc = circumcenter(dim, &pts)
            .ok_or_else(|| MeshError::DegenerateCell { what: format!("cell {ci} is flat") })?;
        let inside = match dim {
            2 => point_in_triangle_2d(cc, pts[0], pts[1], pts[2], 1e-9),
            _ => point_in_tet(cc, pts[0], pts[1], pts[2], pts[3], 1e-9),
        };
        if !inside {
            centers_outside += 1;
        }
        centers.push(cc);
    }

    // 3D: every face of every cell must contain its own circumcenter
    // (closed-face containment).
    let mut face_margin = f64::INFINITY;
    if dim == 3 {
        for (ci, cell) in cells.iter().enumerate() {
            for skip in 0..4 {
                let f: Vec<usize> = (0..4).filter(|&i| i != skip).map(|i| cell[i]).collect();
                let (a, b, c) = (points[f[0]], points[f[1]], points[f[2]]);
                let cf = circumcenter_triangle_3d(a, b, c)
                    .ok_or_else(|| MeshError::DegenerateCell { what: format!("cell {ci} has a flat face") })?;
                // Signed barycentric margin of cf in the face.
                let n = (b - a).cross(c - a);
                let nn = n.dot(n);
                let s0 = (b - cf).cross(c - cf).dot(n) / nn;
                let s1 = (c - cf).cross(a - cf).dot(n) / nn;
                let s2 = (a - cf).cross(b - cf).dot(n) / nn;
                let margin = s0.min(s1).min(s2);
                face_margin = face_margin.min(margin);
                if margin < -1e-9 {
                    return Err(MeshError::FaceCircumcenterOutside {
                        cell: ci,
                        v0: f[0],
                        v1: f[1],
                        v2: f[2],
                        margin,
                    });
                }
            }
        }
    }
    if !face_margin.is_finite() {
        face_margin = 0.0;
    }

    // Boundary faces become boundary primal volumes; assemble interfaces.
    let mut primal: Vec<PrimalVolume> = Vec::new();
    for (ci, cell) in cells.iter().enumerate() {
        let pts: Vec<Point> = cell.iter().map(|&v| points[v]).collect();
        primal.push(PrimalVolume {
            id: ci,
            center: centers[ci],
            measure: simplex_measure(dim, &pts),
            vertices: cell.clone(),
            neighbors: Vec::new(),
            interfaces: Vec::new(),
            is_boundary: false,
            diameter: diameter(&pts),
        });
    }
    let n_interior_primal = primal.len();

    let mut boundary_marks_out: BTreeMap<usize, i64> = BTreeMap::new();
    let mut boundary_vertex = vec![false; points.len()];

    struct RawInterface {
        volumes: (usize, usize),
        span: Vec<usize>,
        is_boundary: bool,
    }
    let mut raw: Vec<RawInterface> = Vec::new();
    for (f, cs) in &face_map {
        if cs.len() == 2 {
            let (k, l) = (cs[0].min(cs[1]), cs[0].max(cs[1]));
            raw.push(RawInterface { volumes: (k, l), span: f.clone(), is_boundary: false });
        } else {
            // Boundary face: spawn the boundary volume now (deterministic:
            // face_map iterates in sorted face order).
            let fpts: Vec<Point> = f.iter().map(|&v| points[v]).collect();
            let (center, measure) = if dim == 2 {
                (midpoint(fpts[0], fpts[1]), fpts[0].dist(fpts[1]))
            } else {
                let cf = circumcenter_triangle_3d(fpts[0], fpts[1], fpts[2])
                    .ok_or_else(|| MeshError::DegenerateCell { what: format!("boundary face {f:?} is flat") })?;
                (cf, triangle_area(fpts[0], fpts[1], fpts[2]))
            };
            let bid = primal.len();
            primal.push(PrimalVolume {
                id: bid,
                center,
                measure,
                vertices: f.clone(),
                neighbors: Vec::new(),
                interfaces: Vec::new(),
                is_boundary: true,
                diameter: diameter(&fpts),
            });
            for &v in f {
                boundary_vertex[v] = true;
            }
            if let Some(&mark) = options.boundary_marks.get(f) {
                boundary_marks_out.insert(bid, mark);
            }
            raw.push(RawInterface { volumes: (cs[0], bid), span: f.clone(), is_boundary: true });
        }
    }

    // Interfaces with conformity checks, diamonds, subdiamonds.
    let mut interfaces: Vec<Interface> = Vec::new();
    let mut diamonds: Vec<Diamond> = Vec::new();
    let mut subdiamonds: Vec<Subdiamond> = Vec::new();
    let mut conformity_residual = 0.0f64;

    for (iid, r) in raw.iter().enumerate() {
        let (k, l) = r.volumes;
        let xk = primal[k].center;
        let xl = primal[l].center;
        let d_kl = xk.dist(xl);
        if d_kl <= 1e-9 * clen {
            return Err(MeshError::DegenerateCell {
                what: format!(
                    "interface {:?} has coincident neighbor centers (degenerate diamond, d_KL = {d_kl:.3e})",
                    r.span
                ),
            });
        }
        let nu = (xl - xk) * (1.0 / d_kl);
        let fpts: Vec<Point> = r.span.iter().map(|&v| points[v]).collect();

        // Geometric face normal, oriented from K's side to L's side.
        let mut n_face = if dim == 2 {
            let e = (fpts[1] - fpts[0]).unit().unwrap();
            Point::new2(-e.y, e.x)
        } else {
            (fpts[1] - fpts[0]).cross(fpts[2] - fpts[0]).unit().unwrap()
        };
        let kc = centroid(&primal[k].vertices.iter().map(|&v| points[v]).collect::<Vec<_>>());
        if n_face.dot(centroid(&fpts) - kc) < 0.0 {
            n_face = -n_face;
        }
        let align = nu.dot(n_face);
        if align < 0.0 {
            return Err(MeshError::DegenerateCell {
                what: format!("interface {:?}: neighbor centers are ordered against the face normal (inverted diamond)", r.span),
            });
        }
        conformity_residual = conformity_residual.max((1.0 - align) * d_kl / clen);

        let crossing = if dim == 2 {
            midpoint(fpts[0], fpts[1])
        } else {
            circumcenter_triangle_3d(fpts[0], fpts[1], fpts[2]).unwrap()
        };
        let measure = if dim == 2 {
            fpts[0].dist(fpts[1])
        } else {
            triangle_area(fpts[0], fpts[1], fpts[2])
        };

        let sub_start = subdiamonds.len();
        if dim == 2 {
            let (a, b) = (r.span[0], r.span[1]);
            let d_dual = points[a].dist(points[b]);
            let nu_star = (points[b] - points[a]) * (1.0 / d_dual);
            subdiamonds.push(Subdiamond {
                id: sub_start,
                diamond: iid,
                dual: (a, b),
                measure: 0.5 * measure * d_kl,
                m_sigma: measure,
                nu,
                m_sigma_star: d_kl,
                nu_star,
                d_dual,
                sigma_star_pts: [xk, xl, xl],
            });
        } else {
            // Cycle the span so it is positively oriented around nu, then
            // each directed edge spawns one subdiamond.
            let mut span = r.span.clone();
            if (fpts[1] - fpts[0]).cross(fpts[2] - fpts[0]).dot(nu) < 0.0 {
                span.swap(1, 2);
            }
            let spts: Vec<Point> = span.iter().map(|&v| points[v]).collect();
            for e in 0..3 {
                let (va, vb) = (span[e], span[(e + 1) % 3]);
                let (pa, pb) = (spts[e], spts[(e + 1) % 3]);
                // Signed area of the sigma piece (pa, pb, crossing) in the
                // face plane; condition (3.1) makes it non-negative.
                let m_sigma_signed = 0.5 * (pb - pa).cross(crossing - pa).dot(nu);
                if m_sigma_signed < -1e-9 * measure {
                    return Err(MeshError::FaceCircumcenterOutside {
                        cell: k,
                        v0: span[0],
                        v1: span[1],
                        v2: span[2],
                        margin: m_sigma_signed / measure,
                    });
                }
                let m_sigma = m_sigma_signed.max(0.0);
                let (da, db) = (va.min(vb), va.max(vb));
                let d_dual = points[da].dist(points[db]);
                let nu_star = (points[db] - points[da]) * (1.0 / d_dual);
                subdiamonds.push(Subdiamond {
                    id: subdiamonds.len(),
                    diamond: iid,
                    dual: (da, db),
                    measure: m_sigma * d_kl / 3.0,
                    m_sigma,
                    nu,
                    m_sigma_star: m_sigma * d_kl / d_dual,
                    nu_star,
                    d_dual,
                    sigma_star_pts: [xk, xl, midpoint(points[da], points[db])],
                });
            }
        }
        let sub_end = subdiamonds.len();
        let m_d: f64 = subdiamonds[sub_start..sub_end].iter().map(|s| s.measure).sum();

        let mut diam_pts = vec![xk, xl];
        diam_pts.extend(fpts.iter().copied());
        diamonds.push(Diamond {
            id: iid,
            interface: iid,
            volumes: (k, l),
            measure: m_d,
            subdiamonds: sub_start..sub_end,
            diameter: diameter(&diam_pts),
        });
        interfaces.push(Interface {
            id: iid,
            volumes: (k, l),
            measure,
            normal: nu,
            distance: d_kl,
            span: r.span.clone(),
            crossing,
            is_boundary: r.is_boundary,
        });

        primal[k].neighbors.push(l);
        primal[k].interfaces.push(iid);
        if r.is_boundary {
            primal[l].interfaces.push(iid);
        } else {
            primal[l].neighbors.push(k);
            primal[l].interfaces.push(iid);
        }
    }

    // Dual interfaces: group subdiamonds by dual pair.
    let mut by_pair: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for s in &subdiamonds {
        by_pair.entry(s.dual).or_default().push(s.id);
    }
    let mut dual_interfaces: Vec<DualInterface> = Vec::new();
    for ((a, b), sids) in &by_pair {
        let d = points[*a].dist(points[*b]);
        dual_interfaces.push(DualInterface {
            id: dual_interfaces.len(),
            volumes: (*a, *b),
            measure: sids.iter().map(|&s| subdiamonds[s].m_sigma_star).sum(),
            normal: (points[*b] - points[*a]) * (1.0 / d),
            distance: d,
            subdiamonds: sids.clone(),
        });
    }

    // Dual volumes.
    let mut dual: Vec<DualVolume> = (0..points.len())
        .map(|v| DualVolume {
            id: v,
            center: points[v],
            measure: 0.0,
            neighbors: Vec::new(),
            interfaces: Vec::new(),
            subdiamonds: Vec::new(),
            is_boundary: boundary_vertex[v],
            diameter: 0.0,
            hull_faces: Vec::new(),
        })
        .collect();
    for di in &dual_interfaces {
        let (a, b) = di.volumes;
        dual[a].neighbors.push(b);
        dual[a].interfaces.push(di.id);
        dual[b].neighbors.push(a);
        dual[b].interfaces.push(di.id);
    }
    for s in &subdiamonds {
        dual[s.dual.0].subdiamonds.push(s.id);
        dual[s.dual.1].subdiamonds.push(s.id);
        dual[s.dual.0].measure += 0.5 * s.measure;
        dual[s.dual.1].measure += 0.5 * s.measure;
    }
    for dv in &mut dual {
        if dv.neighbors.is_empty() {
            return Err(MeshError::NonConforming { what: format!("vertex {} belongs to no cell", dv.id) });
        }
        if dv.measure <= 0.0 {
            return Err(MeshError::DegenerateCell { what: format!("dual volume {} has non-positive measure {:.3e}", dv.id, dv.measure) });
        }
    }

    build_dual_hulls(dim, points, &cells, &centers, &face_map, &mut dual, &dual_interfaces, &interfaces, &primal)?;

    // Overlap measures m_{K∩K*} from per-subdiamond cone pieces.
    let mut overlap_map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for s in &subdiamonds {
        let d = &diamonds[s.diamond];
        let ifc = &interfaces[d.interface];
        let (k, l) = d.volumes;
        let piece = s.m_sigma / (2.0 * dim as f64);
        let s_k = ifc.normal.dot(ifc.crossing - primal[k].center);
        for v in [s.dual.0, s.dual.1] {
            *overlap_map.entry((k, v)).or_insert(0.0) += piece * s_k;
        }
        if !ifc.is_boundary {
            let s_l = ifc.normal.dot(primal[l].center - ifc.crossing);
            for v in [s.dual.0, s.dual.1] {
                *overlap_map.entry((l, v)).or_insert(0.0) += piece * s_l;
            }
        }
    }
    let domain_measure: f64 = primal[..n_interior_primal].iter().map(|p| p.measure).sum();
    let mut overlaps: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_interior_primal];
    for (&(k, v), &m) in &overlap_map {
        if m < -1e-12 * domain_measure {
            return Err(MeshError::DegenerateCell {
                what: format!("overlap of primal volume {k} and dual volume {v} has negative measure {m:.3e}"),
            });
        }
        overlaps[k].push((v, m.max(0.0)));
    }

    // Partition identities.
    let mut partition_residual = 0.0f64;
    let sum_dual: f64 = dual.iter().map(|d| d.measure).sum();
    let sum_diamond: f64 = diamonds.iter().map(|d| d.measure).sum();
    partition_residual = partition_residual.max((sum_dual - domain_measure).abs() / domain_measure);
    partition_residual = partition_residual.max((sum_diamond - domain_measure).abs() / domain_measure);
    for k in 0..n_interior_primal {
        let s: f64 = overlaps[k].iter().map(|&(_, m)| m).sum();
        partition_residual = partition_residual.max((s - primal[k].measure).abs() / domain_measure);
    }
    let mut dual_sums = vec![0.0f64; points.len()];
    for row in &overlaps {
        for &(v, m) in row {
            dual_sums[v] += m;
        }
    }
    for dv in &dual {
        partition_residual = partition_residual.max((dual_sums[dv.id] - dv.measure).abs() / domain_measure);
    }
    if partition_residual > 1e-10 {
        return Err(MeshError::DegenerateCell {
            what: format!("partition identities violated (relative residual {partition_residual:.3e})"),
        });
    }

    // Signed flux stencils: for each volume, every incident subdiamond with
    // the measure signed so that sign * normal points outward.
    let mut primal_stencil: Vec<Vec<(usize, f64)>> = vec![Vec::new(); primal.len()];
    let mut dual_stencil: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dual.len()];
    for s in &subdiamonds {
        let (k, l) = diamonds[s.diamond].volumes;
        primal_stencil[k].push((s.id, s.m_sigma));
        primal_stencil[l].push((s.id, -s.m_sigma));
        dual_stencil[s.dual.0].push((s.id, s.m_sigma_star));
        dual_stencil[s.dual.1].push((s.id, -s.m_sigma_star));
    }

    let n_interior_dual = dual.iter().filter(|d| !d.is_boundary).count();
    let size = primal
        .iter()
        .map(|p| p.diameter)
        .chain(dual.iter().map(|d| d.diameter))
        .chain(diamonds.iter().map(|d| d.diameter))
        .fold(0.0f64, f64::max);

    let mut mesh = DdfvMesh {
        dim,
        points: points.to_vec(),
        cells,
        primal,
        n_interior_primal,
        dual,
        n_interior_dual,
        interfaces,
        diamonds,
        subdiamonds,
        dual_interfaces,
        overlaps,
        primal_stencil,
        dual_stencil,
        domain_measure,
        size,
        regularity: 0.0,
        char_length: clen,
        validation: ValidationReport {
            delaunay_ties: delaunay.ties,
            centers_outside_cell: centers_outside,
            conformity_residual,
            partition_residual,
            face_containment_margin: face_margin,
        },
        boundary_marks: boundary_marks_out,
    };
    mesh.regularity = regularity_constant(&mesh);
    Ok(mesh)
}

/// Dual-cell hull geometry (for diameters and output): the Voronoi wall of
/// each dual interface, boundary closure pieces, and per-cell assembly.
#[allow(clippy::too_many_arguments)]
fn build_dual_hulls(
    dim: usize,
    points: &[Point],
    cells: &[Vec<usize>],
    centers: &[Point],
    face_map: &BTreeMap<Vec<usize>, Vec<usize>>,
    dual: &mut [DualVolume],
    dual_interfaces: &[DualInterface],
    interfaces: &[Interface],
    primal: &[PrimalVolume],
) -> Result<(), MeshError> {
    if dim == 2 {
        // Fan-walk the triangles around each vertex.
        let mut by_vertex: Vec<Vec<usize>> = vec![Vec::new(); points.len()];
        for (ci, cell) in cells.iter().enumerate() {
            for &v in cell {
                by_vertex[v].push(ci);
            }
        }
        for v in 0..points.len() {
            let tris = &by_vertex[v];
            // Edge at v -> incident triangles among tris.
            let mut edge_tris: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for &t in tris {
                for &w in &cells[t] {
                    if w != v {
                        edge_tris.entry(w).or_default().push(t);
                    }
                }
            }
            let bnd_edges: Vec<usize> = edge_tris
                .iter()
                .filter(|(_, ts)| ts.len() == 1)
                .map(|(&w, _)| w)
                .collect();
            let is_bnd = dual[v].is_boundary;
            if (is_bnd && bnd_edges.len() != 2) || (!is_bnd && !bnd_edges.is_empty()) {
                return Err(MeshError::NonConforming {
                    what: format!("vertex {v} has an inconsistent boundary fan"),
                });
            }
            // Walk from a starting edge across triangles.
            let start_edge = if is_bnd { bnd_edges[0] } else { *edge_tris.keys().next().unwrap() };
            let mut poly: Vec<Point> = Vec::new();
            if is_bnd {
                poly.push(points[v]);
                poly.push(midpoint(points[v], points[start_edge]));
            }
            let mut cur_edge = start_edge;
            let mut prev_tri = usize::MAX;
            for _ in 0..tris.len() {
                let ts = &edge_tris[&cur_edge];
                let t = *ts
                    .iter()
                    .find(|&&t| t != prev_tri)
                    .ok_or_else(|| MeshError::NonConforming { what: format!("broken fan at vertex {v}") })?;
                poly.push(centers[t]);
                let next = cells[t]
                    .iter()
                    .copied()
                    .find(|&w| w != v && w != cur_edge)
                    .unwrap();
                prev_tri = t;
                cur_edge = next;
            }
            if is_bnd {
                poly.push(midpoint(points[v], points[cur_edge]));
            }
            dual[v].diameter = diameter(&poly);
            if polygon_area_signed(&poly) < 0.0 {
                poly.reverse();
            }
            dual[v].hull_faces = vec![poly];
        }
    } else {
        // One wall polygon per dual interface (ring of tets around the
        // primal edge), shared by both dual cells.
        let mut by_edge: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (ci, cell) in cells.iter().enumerate() {
            for i in 0..4 {
                for j in i + 1..4 {
                    let (a, b) = (cell[i].min(cell[j]), cell[i].max(cell[j]));
                    by_edge.entry((a, b)).or_default().push(ci);
                }
            }
        }
        for di in dual_interfaces {
            let (a, b) = di.volumes;
            let tets = &by_edge[&(a, b)];
            // Face-containing-the-edge adjacency between tets.
            let mut face_of: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
            for &t in tets {
                for f in cell_faces(3, &cells[t]) {
                    if f.contains(&a) && f.contains(&b) {
                        face_of.entry(f).or_default().push(t);
                    }
                }
            }
            let open_faces: Vec<&Vec<usize>> = face_of.iter().filter(|(_, ts)| ts.len() == 1).map(|(f, _)| f).collect();
            let mut poly: Vec<Point> = Vec::new();
            let face_cc = |f: &Vec<usize>| {
                circumcenter_triangle_3d(points[f[0]], points[f[1]], points[f[2]]).unwrap()
            };
            if open_faces.is_empty() {
                // Interior edge: closed ring.
                let start_face = face_of.keys().next().unwrap().clone();
                let mut cur_face = start_face.clone();
                let mut prev_tri = usize::MAX;
                for _ in 0..tets.len() {
                    let t = *face_of[&cur_face].iter().find(|&&t| t != prev_tri).ok_or_else(|| {
                        MeshError::NonConforming { what: format!("broken tet ring around edge ({a},{b})") }
                    })?;
                    poly.push(centers[t]);
                    let next = cell_faces(3, &cells[t])
                        .into_iter()
                        .find(|f| f.contains(&a) && f.contains(&b) && *f != cur_face)
                        .unwrap();
                    prev_tri = t;
                    cur_face = next;
                }
            } else {
                // Boundary edge: open chain closed through the boundary
                // faces' circumcenters and the edge midpoint.
                if open_faces.len() != 2 {
                    return Err(MeshError::NonConforming { what: format!("edge ({a},{b}) has {} boundary faces", open_faces.len()) });
                }
                let start_face = open_faces[0].clone();
                let end_face = open_faces[1].clone();
                poly.push(midpoint(points[a], points[b]));
                poly.push(face_cc(&start_face));
                let mut cur_face = start_face;
                let mut prev_tri = usize::MAX;
                for _ in 0..tets.len() {
                    let t = *face_of[&cur_face].iter().find(|&&t| t != prev_tri).ok_or_else(|| {
                        MeshError::NonConforming { what: format!("broken tet chain around edge ({a},{b})") }
                    })?;
                    poly.push(centers[t]);
                    let next = cell_faces(3, &cells[t])
                        .into_iter()
                        .find(|f| f.contains(&a) && f.contains(&b) && *f != cur_face)
                        .unwrap();
                    prev_tri = t;
                    cur_face = next;
                }
                poly.push(face_cc(&end_face));
            }
            dual[a].hull_faces.push(poly.clone());
            dual[b].hull_faces.push(poly);
        }
        // Boundary closure pieces: for each boundary face and each of its
        // vertices, the quad (v, edge midpoint, face circumcenter, edge
        // midpoint).
        for ifc in interfaces {
            if !ifc.is_boundary {
                continue;
            }
            let f = &ifc.span;
            let cf = ifc.crossing;
            for &v in f {
                let others: Vec<usize> = f.iter().copied().filter(|&w| w != v).collect();
                let quad = vec![
                    points[v],
                    midpoint(points[v], points[others[0]]),
                    cf,
                    midpoint(points[v], points[others[1]]),
                ];
                dual[v].hull_faces.push(quad);
            }
        }
        for dv in dual.iter_mut() {
            let mut pts: Vec<Point> = vec![dv.center];
            for f in &dv.hull_faces {
                pts.extend(f.iter().copied());
            }
            dv.diameter = diameter(&pts);
        }
        let _ = (face_map, primal);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// The acute-adjusted two-triangle square: circumcenters distinct.
    pub fn two_triangle_mesh() -> (Vec<Point>, Vec<Vec<usize>>) {
        let points = vec![
            Point::new2(0.0, 0.0),
            Point::new2(1.0, 0.0),
            Point::new2(1.0, 0.9),
            Point::new2(0.0, 1.0),
        ];
        let cells = vec![vec![0, 1, 2], vec![0, 2, 3]];
        (points, cells)
    }

    #[test]
    fn two_triangle_counts_and_measures() {
        let (points, cells) = two_triangle_mesh();
        let mesh = build_from_simplicial(&points, &cells, &BuildOptions::default()).unwrap();
        assert_eq!(mesh.dim, 2);
        assert_eq!(mesh.n_interior_primal, 2);
        assert_eq!(mesh.primal.len() - mesh.n_interior_primal, 4);
        assert_eq!(mesh.dual.len(), 4);
        assert!(mesh.dual.iter().all(|d| d.is_boundary));
        assert_eq!(mesh.n_interior_dual, 0);
        // Shoelace oracle for the quadrilateral domain.
        let area = polygon_area_signed(&points);
        let sum_dual: f64 = mesh.dual.iter().map(|d| d.measure).sum();
        assert!((sum_dual - area).abs() < 1e-12 * area);
        let sum_diamond: f64 = mesh.diamonds.iter().map(|d| d.measure).sum();
        assert!((sum_diamond - area).abs() < 1e-12 * area);
        assert!((mesh.domain_measure - area).abs() < 1e-12 * area);
        // 1 interior + 4 boundary interfaces, one diamond each.
        assert_eq!(mesh.interfaces.len(), 5);
        assert_eq!(mesh.interfaces.iter().filter(|i| !i.is_boundary).count(), 1);
    }

    #[test]
    fn conformity_and_diamond_identity_2d() {
        let (points, cells) = two_triangle_mesh();
        let mesh = build_from_simplicial(&points, &cells, &BuildOptions::default()).unwrap();
        for ifc in &mesh.interfaces {
            let (k, l) = ifc.volumes;
            let gap = mesh.primal[l].center - mesh.primal[k].center;
            assert!((ifc.normal.dot(gap) - ifc.distance).abs() < 1e-12);
            assert!(ifc.distance > 0.0);
            let d = &mesh.diamonds[ifc.id];
            assert!((d.measure - 0.5 * ifc.measure * ifc.distance).abs() < 1e-14);
        }
        for s in &mesh.subdiamonds {
            let (a, b) = s.dual;
            let gap = mesh.points[b] - mesh.points[a];
            assert!((s.nu_star.dot(gap) - s.d_dual).abs() < 1e-12);
            assert!((s.measure - 0.5 * s.m_sigma_star * s.d_dual).abs() < 1e-14);
        }
    }

    #[test]
    fn overlap_partition_identities() {
        let (points, cells) = two_triangle_mesh();
        let mesh = build_from_simplicial(&points, &cells, &BuildOptions::default()).unwrap();
        for k in 0..mesh.n_interior_primal {
            let s: f64 = mesh.overlaps[k].iter().map(|&(_, m)| m).sum();
            assert!((s - mesh.primal[k].measure).abs() < 1e-12, "primal {k}");
        }
        for dv in &mesh.dual {
            let s: f64 = (0..mesh.n_interior_primal).map(|k| mesh.overlap(k, dv.id)).sum();
            assert!((s - dv.measure).abs() < 1e-12, "dual {}", dv.id);
        }
    }

    #[test]
    fn overlap_matches_monte_carlo() {
        let (points, cells) = two_triangle_mesh();
        let mesh = build_from_simplicial(&points, &cells, &BuildOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 1_000_000usize;
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut inside_total = 0usize;
        // Uniform samples over the bounding box, classified by containing
        // cell and nearest vertex.
        let bbox_area = 1.0f64; // [0,1]^2 covers the domain
        for _ in 0..n {
            let p = Point::new2(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            let mut cell = None;
            for (ci, c) in mesh.cells.iter().enumerate() {
                if point_in_triangle_2d(p, points[c[0]], points[c[1]], points[c[2]], 0.0) {
                    cell = Some(ci);
                    break;
                }
            }
            let Some(ci) = cell else { continue };
            inside_total += 1;
            let v = (0..points.len())
                .min_by(|&a, &b| points[a].dist(p).partial_cmp(&points[b].dist(p)).unwrap())
                .unwrap();
            *counts.entry((ci, v)).or_insert(0) += 1;
        }
        assert!(inside_total > n / 2);
        for k in 0..mesh.n_interior_primal {
            for &(v, m) in &mesh.overlaps[k] {
                let c = counts.get(&(k, v)).copied().unwrap_or(0);
                let p_hat = c as f64 / n as f64;
                let est = p_hat * bbox_area;
                let sigma = bbox_area * (p_hat * (1.0 - p_hat) / n as f64).sqrt();
                assert!(
                    (est - m).abs() <= 3.0 * sigma + 1e-6,
                    "overlap ({k},{v}): exact {m:.6}, MC {est:.6} ± {sigma:.6}"
                );
            }
        }
    }

    #[test]
    fn same_direction_diagonals_are_cocircular_ties_but_degenerate() {
        // 4x4 grid, all squares split by the same diagonal: the Delaunay
        // check accepts with ties, the full build rejects the coincident
        // circumcenters.
        let n = 4usize;
        let h = 1.0 / n as f64;
        let mut points = Vec::new();
        for j in 0..=n {
            for i in 0..=n {
                points.push(Point::new2(i as f64 * h, j as f64 * h));
            }
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut cells = Vec::new();
        for j in 0..n {
            for i in 0..n {
                cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                cells.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        let report = validate_delaunay(&points, &cells).unwrap();
        assert!(report.ties > 0, "expected cocircular ties");
        let err = build_from_simplicial(&points, &cells, &BuildOptions::default()).unwrap_err();
        assert!(matches!(err, MeshError::DegenerateCell { .. }), "{err}");
    }

    #[test]
    fn non_delaunay_rejected() {
        // A thin kite triangulated against the Delaunay rule: the far
        // vertex falls strictly inside the first triangle's circumball.
        let points = vec![
            Point::new2(0.0, 0.0),
            Point::new2(1.0, -0.2),
            Point::new2(2.0, 0.0),
            Point::new2(1.0, 0.2),
        ];
        let cells = vec![vec![0, 1, 2], vec![0, 2, 3]];
        let err = build_from_simplicial(&points, &cells, &BuildOptions::default()).unwrap_err();
        assert!(matches!(err, MeshError::NonDelaunay { .. }), "{err}");
    }

    #[test]
    fn hanging_vertex_rejected() {
        let points = vec![
            Point::new2(0.0, 0.0),
            Point::new2(1.0, 0.0),
            Point::new2(0.0, 1.0),
            Point::new2(0.5, 0.0), // hangs on the bottom edge
            Point::new2(0.5, -0.5),
        ];
        let cells = vec![vec![0, 1, 2], vec![0, 3, 4]];
        let err = build_from_simplicial(&points, &cells, &BuildOptions::default()).unwrap_err();
        assert!(matches!(err, MeshError::NonConforming { .. }), "{err}");
    }

    #[test]
    fn single_tet_mesh_3d() {
        // A well-centered tetrahedron (regular): all faces acute.
        let points = vec![
            Point::new3(1.0, 1.0, 1.0),
            Point::new3(1.0, -1.0, -1.0),
            Point::new3(-1.0, 1.0, -1.0),
            Point::new3(-1.0, -1.0, 1.0),
        ];
        let cells = vec![vec![0, 1, 2, 3]];
        let mesh = build_from_simplicial(&points, &cells, &BuildOptions::default()).unwrap();
        assert_eq!(mesh.dim, 3);
        assert_eq!(mesh.n_interior_primal, 1);
        assert_eq!(mesh.primal.len(), 5);
        assert_eq!(mesh.interfaces.len(), 4);
        assert_eq!(mesh.subdiamonds.len(), 12);
        let vol = 8.0 / 3.0; // regular tet with edge 2*sqrt(2)
        assert!((mesh.domain_measure - vol).abs() < 1e-12 * vol);
        let sum_dual: f64 = mesh.dual.iter().map(|d| d.measure).sum();
        assert!((sum_dual - vol).abs() < 1e-12 * vol);
        for s in &mesh.subdiamonds {
            assert!(s.measure >= 0.0);
            assert!((s.measure - s.m_sigma * mesh.interfaces[s.diamond].distance / 3.0).abs() < 1e-14);
            assert!((s.measure - s.m_sigma_star * s.d_dual / 3.0).abs() < 1e-14);
            // Independent geometric route to m_sigma*: the triangle
            // (x_K, x_L, edge midpoint).
            let area = triangle_area(s.sigma_star_pts[0], s.sigma_star_pts[1], s.sigma_star_pts[2]);
            assert!((area - s.m_sigma_star).abs() < 1e-12);
        }
    }

    #[test]
    fn overlap_matches_monte_carlo_3d() {
        let points = vec![
            Point::new3(1.0, 1.0, 1.0),
            Point::new3(1.0, -1.0, -1.0),
            Point::new3(-1.0, 1.0, -1.0),
            Point::new3(-1.0, -1.0, 1.0),
        ];
        let cells = vec![vec![0, 1, 2, 3]];
        let mesh = build_from_simplicial(&points, &cells, &BuildOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let n = 1_000_000usize;
        let mut counts = vec![0usize; 4];
        let vol = mesh.domain_measure;
        let mut inside = 0usize;
        for _ in 0..n {
            let p = Point::new3(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if !point_in_tet(p, points[0], points[1], points[2], points[3], 0.0) {
                continue;
            }
            inside += 1;
            let v = (0..4).min_by(|&a, &b| points[a].dist(p).partial_cmp(&points[b].dist(p)).unwrap()).unwrap();
            counts[v] += 1;
        }
        for v in 0..4 {
            let m = mesh.overlap(0, v);
            let p_hat = counts[v] as f64 / inside as f64;
            let est = p_hat * vol;
            let sigma = vol * (p_hat * (1.0 - p_hat) / inside as f64).sqrt();
            assert!((est - m).abs() <= 3.0 * sigma + 1e-5, "dual {v}: exact {m:.6}, MC {est:.6} ± {sigma:.6}");
        }
    }

    /// Recomputes the five shape maxima of `regularity_constant` from the
    /// stored geometry by independent arithmetic (valence via dual
    /// interfaces, measures via shoelace / fan areas, diameters from raw
    /// point sets).
    fn brute_force_regularity(mesh: &DdfvMesh) -> f64 {
        let dual_diameter = |id: usize| {
            let dv = &mesh.dual[id];
            let mut pts = vec![dv.center];
            for f in &dv.hull_faces {
                pts.extend_from_slice(f);
            }
            diameter(&pts)
        };
        let mut reg: f64 = 0.0;
        for dv in &mesh.dual {
            let valence = mesh
                .dual_interfaces
                .iter()
                .filter(|di| di.volumes.0 == dv.id || di.volumes.1 == dv.id)
                .count();
            reg = reg.max(valence as f64);
        }
        for pv in &mesh.primal {
            let pts: Vec<Point> = pv.vertices.iter().map(|&v| mesh.points[v]).collect();
            let d = diameter(&pts);
            let m = if pv.is_boundary {
                assert_eq!(mesh.dim, 2, "oracle fixture is 2D");
                pts[0].dist(pts[1])
            } else {
                triangle_area(pts[0], pts[1], pts[2])
            };
            let p = if pv.is_boundary { d } else { d * d };
            reg = reg.max(p / m);
        }
        for dv in &mesh.dual {
            // Shoelace over the hull polygon; a boundary cell's polygon is
            // open (midpoint .. circumcenters .. midpoint) and closes through
            // the vertex itself.
            assert_eq!(dv.hull_faces.len(), 1, "oracle fixture is 2D");
            let mut poly = Vec::new();
            if dv.is_boundary {
                poly.push(dv.center);
            }
            poly.extend_from_slice(&dv.hull_faces[0]);
            let m = polygon_area_signed(&poly).abs();
            let d = dual_diameter(dv.id);
            reg = reg.max(d * d / m);
        }
        for diamond in &mesh.diamonds {
            let interface = &mesh.interfaces[diamond.interface];
            let mut pts: Vec<Point> = interface.span.iter().map(|&v| mesh.points[v]).collect();
            pts.push(mesh.primal[interface.volumes.0].center);
            pts.push(mesh.primal[interface.volumes.1].center);
            let dd = diameter(&pts);
            for v in [interface.volumes.0, interface.volumes.1] {
                let dk = {
                    let kpts: Vec<Point> =
                        mesh.primal[v].vertices.iter().map(|&w| mesh.points[w]).collect();
                    diameter(&kpts)
                };
                reg = reg.max(dk / dd + dd / dk);
            }
            for s in diamond.subdiamonds.clone() {
                let (a, b) = mesh.subdiamonds[s].dual;
                for v in [a, b] {
                    let dk = dual_diameter(v);
                    reg = reg.max(dk / dd + dd / dk);
                }
            }
        }
        reg
    }

    #[test]
    fn regularity_matches_brute_force_on_equilateral_fan() {
        // Six equilateral triangles around one interior vertex: strictly
        // Delaunay, circumcenters interior, every shape quantity benign.
        let mut points = vec![Point::new2(0.0, 0.0)];
        for a in 0..6 {
            let th = a as f64 * std::f64::consts::PI / 3.0;
            points.push(Point::new2(th.cos(), th.sin()));
        }
        let cells: Vec<Vec<usize>> =
            (0..6).map(|a| vec![0, 1 + a, 1 + (a + 1) % 6]).collect();
        let mesh = build_from_simplicial(&points, &cells, &BuildOptions::default()).unwrap();
        let brute = brute_force_regularity(&mesh);
        assert!(brute.is_finite());
        assert!(
            (mesh.regularity - brute).abs() <= 1e-12 * brute,
            "regularity {} vs brute force {}",
            mesh.regularity,
            brute
        );

        // Second regime: on the sliver pair below the primal shape ratio
        // dominates instead of the valence, exercising different maxima.
        let eps = 1e-3;
        let points = vec![
            Point::new2(0.0, 0.0),
            Point::new2(1.0, eps),
            Point::new2(1.0, -eps),
            Point::new2(2.0, 0.0),
        ];
        let cells = vec![vec![0, 1, 2], vec![1, 3, 2]];
        let mesh = build_from_simplicial(&points, &cells, &BuildOptions::default()).unwrap();
        let brute = brute_force_regularity(&mesh);
        assert!(brute.is_finite());
        assert!(
            (mesh.regularity - brute).abs() <= 1e-12 * brute,
            "sliver regularity {} vs brute force {}",
            mesh.regularity,
            brute
        );
    }

    #[test]
    fn sliver_cells_blow_up_the_regularity_constant() {
        // A thin-but-valid pair: splitting the long rhombus along its
        // short diagonal keeps everything strictly Delaunay with interior
        // circumcenters while diam^2 / area grows like 1/eps.
        let eps = 1e-3;
        let points = vec![
            Point::new2(0.0, 0.0),
            Point::new2(1.0, eps),
            Point::new2(1.0, -eps),
            Point::new2(2.0, 0.0),
        ];
        let cells = vec![vec![0, 1, 2], vec![1, 3, 2]];
        let sliver = build_from_simplicial(&points, &cells, &BuildOptions::default()).unwrap();

        let (points, cells) = two_triangle_mesh();
        let clean = build_from_simplicial(&points, &cells, &BuildOptions::default()).unwrap();
        assert!(
            sliver.regularity >= 10.0 * clean.regularity,
            "sliver {} vs clean {}",
            sliver.regularity,
            clean.regularity
        );
    }

    /// Every vector splits into its component along the interface normal
    /// plus the dual-normal components: in 2D the two normals are an
    /// orthonormal pair, in 3D the three dual normals enter weighted by
    /// 2 m_S / m_D. The discrete gradient is exact on affine functions
    /// precisely because of this identity.
    #[test]
    fn any_vector_reconstructs_from_diamond_normals() {
        let meshes = [
            {
                let (points, cells) = two_triangle_mesh();
                build_from_simplicial(&points, &cells, &BuildOptions::default()).unwrap()
            },
            crate::mesh::build_structured_2d(3, 4, [0.0, 0.0], [1.2, 0.9], Default::default())
                .unwrap(),
            crate::mesh::build_structured_3d(2, 3, 2, [0.0; 3], [1.0, 0.8, 1.3]).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for mesh in &meshes {
            for diamond in &mesh.diamonds {
                let nu = mesh.interfaces[diamond.interface].normal;
                for _ in 0..100 {
                    let r = Point::new3(
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        if mesh.dim == 3 { rng.gen_range(-1.0..1.0) } else { 0.0 },
                    );
                    let mut rec = nu * r.dot(nu);
                    for s in &mesh.subdiamonds[diamond.subdiamonds.clone()] {
                        let w = if mesh.dim == 2 {
                            1.0
                        } else {
                            2.0 * s.measure / diamond.measure
                        };
                        rec = rec + s.nu_star * (w * r.dot(s.nu_star));
                    }
                    assert!(
                        (rec - r).norm() <= 1e-12,
                        "diamond {} of the {}D mesh reconstructs {:?} as {:?}",
                        diamond.id,
                        mesh.dim,
                        r,
                        rec
                    );
                }
            }
        }
    }

    /// The signed flux stencils of interior volumes close: the outward
    /// area-weighted normals of a closed surface sum to zero.
    #[test]
    fn interior_flux_stencils_close() {
        let meshes = [
            crate::mesh::build_structured_2d(4, 3, [0.0, 0.0], [1.1, 0.9], Default::default())
                .unwrap(),
            crate::mesh::build_structured_3d(2, 2, 3, [0.0; 3], [1.0, 1.2, 0.8]).unwrap(),
        ];
        for mesh in &meshes {
            let tol = 1e-12 * mesh.char_length.powi(mesh.dim as i32 - 1);
            for k in 0..mesh.n_interior_primal {
                let mut total = Point::ZERO;
                for &(s, m) in &mesh.primal_stencil[k] {
                    total = total + mesh.subdiamonds[s].nu * m;
                }
                assert!(total.norm() <= 10.0 * tol, "primal volume {k}: {total:?}");
            }
            for dv in &mesh.dual {
                if dv.is_boundary {
                    continue;
                }
                let mut total = Point::ZERO;
                for &(s, m) in &mesh.dual_stencil[dv.id] {
                    total = total + mesh.subdiamonds[s].nu_star * m;
                }
                assert!(total.norm() <= 10.0 * tol, "dual volume {}: {total:?}", dv.id);
            }
        }
    }
}
