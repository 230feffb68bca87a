//! The double mesh: primal simplicial volumes, vertex-centered Voronoi dual
//! volumes, and the diamond/subdiamond cells spanned by interfaces.
//!
//! Geometry conventions used throughout:
//!
//! * Primal volume ids: `0..n_interior` are the input simplices, followed by
//!   one boundary volume per boundary face (so an ascending `(K, L)` pair on
//!   a boundary interface always points outward).
//! * The center of an interior volume is its circumcenter; the center of a
//!   boundary volume is the face circumcenter (3D) or edge midpoint (2D).
//! * Dual volume ids coincide with mesh vertex ids; the dual center is the
//!   vertex itself. A dual volume is a boundary one iff its vertex lies on
//!   the domain boundary.
//! * Each interface carries one diamond. In 2D the diamond is its own single
//!   subdiamond; in 3D it splits into three subdiamonds, one per edge of the
//!   triangular interface.
//! * All unit normals are oriented from the lower id to the higher id of
//!   their volume pair.

mod build;
mod io;
mod structured;

pub use build::{build_from_simplicial, validate_delaunay, BuildOptions, DelaunayReport};
pub use io::{read_mesh_text, write_mesh_text, MeshText};
pub use structured::{
    build_structured_2d, build_structured_3d, structured_cells_2d, structured_cells_3d,
    DiagonalPattern,
};

use crate::geometry::Point;
use std::collections::BTreeMap;

/// Geometric tolerance factor: equality checks use `EPS_GEO_REL` times the
/// characteristic length (domain bounding-box diagonal).
pub const EPS_GEO_REL: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("mesh is not Delaunay: vertex {vertex} lies strictly inside the circumball of cell {cell} (depth {depth:.3e})")]
    NonDelaunay { cell: usize, vertex: usize, depth: f64 },
    #[error("face circumcenter outside closed face: cell {cell}, face [{v0}, {v1}, {v2}] (margin {margin:.3e})")]
    FaceCircumcenterOutside { cell: usize, v0: usize, v1: usize, v2: usize, margin: f64 },
    #[error("degenerate cell or diamond: {what}")]
    DegenerateCell { what: String },
    #[error("non-conforming mesh: {what}")]
    NonConforming { what: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("mesh file: {0}")]
    Io(String),
}

/// A primal control volume: an interior simplex, or a boundary face acting
/// as a degenerate volume that carries the Dirichlet value.
#[derive(Debug, Clone)]
pub struct PrimalVolume {
    pub id: usize,
    /// Circumcenter for interior volumes; face circumcenter / edge midpoint
    /// for boundary volumes.
    pub center: Point,
    /// Measure in the volume's own dimension: d-measure for interior
    /// volumes, (d-1)-measure for boundary faces.
    pub measure: f64,
    pub vertices: Vec<usize>,
    /// Primal volumes across each interface of this volume (interior
    /// neighbors and boundary volumes alike). Empty for boundary volumes.
    pub neighbors: Vec<usize>,
    /// Interfaces incident to this volume, aligned with `neighbors`.
    pub interfaces: Vec<usize>,
    pub is_boundary: bool,
    pub diameter: f64,
}

/// A dual (Voronoi) control volume centered at a mesh vertex.
#[derive(Debug, Clone)]
pub struct DualVolume {
    pub id: usize,
    /// The vertex itself.
    pub center: Point,
    pub measure: f64,
    /// Vertex ids connected to this one by a primal edge.
    pub neighbors: Vec<usize>,
    /// Dual interfaces to each neighbor, aligned with `neighbors`.
    pub interfaces: Vec<usize>,
    /// Subdiamonds whose dual pair contains this vertex.
    pub subdiamonds: Vec<usize>,
    pub is_boundary: bool,
    pub diameter: f64,
    /// 2D: the Voronoi polygon in order. 3D: one ordered polygon per cell
    /// face. Used for output and diameters; measures are exact sums of
    /// subdiamond pieces.
    pub hull_faces: Vec<Vec<Point>>,
}

/// An interface between two primal volumes (a primal edge in 2D, a triangle
/// in 3D), together with its conformity data.
#[derive(Debug, Clone)]
pub struct Interface {
    pub id: usize,
    /// (K, L) with K < L; for boundary interfaces L is the boundary volume.
    pub volumes: (usize, usize),
    /// (d-1)-measure of the interface.
    pub measure: f64,
    /// Unit normal from K to L; equals (x_L - x_K)/d_KL by conformity.
    pub normal: Point,
    /// |x_L - x_K| > 0.
    pub distance: f64,
    /// Vertex ids spanning the interface: 2 in 2D, 3 in 3D.
    pub span: Vec<usize>,
    /// The point where the segment [x_K, x_L] crosses the interface plane:
    /// edge midpoint in 2D, face circumcenter in 3D.
    pub crossing: Point,
    pub is_boundary: bool,
}

/// The diamond cell of an interface: convex hull of the interface and the
/// two primal centers (union/difference of the two pyramids).
#[derive(Debug, Clone)]
pub struct Diamond {
    pub id: usize,
    /// Same id as the interface (1:1).
    pub interface: usize,
    pub volumes: (usize, usize),
    pub measure: f64,
    /// Contiguous subdiamond ids.
    pub subdiamonds: std::ops::Range<usize>,
    pub diameter: f64,
}

/// A subdiamond: the part of a diamond associated with one dual pair.
/// In 2D it coincides with its diamond.
#[derive(Debug, Clone)]
pub struct Subdiamond {
    pub id: usize,
    pub diamond: usize,
    /// (K*, L*) with K* < L*.
    pub dual: (usize, usize),
    pub measure: f64,
    /// (d-1)-measure of sigma = S ∩ K|L.
    pub m_sigma: f64,
    /// Unit normal of sigma, oriented K -> L (same as the interface normal).
    pub nu: Point,
    /// (d-1)-measure of sigma* = S ∩ K*|L*.
    pub m_sigma_star: f64,
    /// Unit normal of sigma*, oriented K* -> L*.
    pub nu_star: Point,
    /// |x_L* - x_K*|.
    pub d_dual: f64,
    /// Geometry of sigma*: segment [x_K, x_L] in 2D; triangle
    /// (x_K, x_L, edge midpoint) in 3D. Used for interface quadrature.
    pub sigma_star_pts: [Point; 3],
}

/// Dual interface between two dual volumes: the Voronoi face crossed by one
/// primal edge. Its area is the sum of the sigma* pieces of the subdiamonds
/// around that edge.
#[derive(Debug, Clone)]
pub struct DualInterface {
    pub id: usize,
    /// (K*, L*) with K* < L*.
    pub volumes: (usize, usize),
    pub measure: f64,
    /// Unit normal from K* to L* (the primal edge direction).
    pub normal: Point,
    /// |x_L* - x_K*|.
    pub distance: f64,
    /// Subdiamonds whose sigma* pieces tile this face.
    pub subdiamonds: Vec<usize>,
}

/// Validation outcome attached to a built mesh.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    /// Cocircular/cospherical ties detected during the Delaunay check.
    pub delaunay_ties: usize,
    /// Interior volumes whose circumcenter lies outside the closed cell
    /// (allowed, but reported).
    pub centers_outside_cell: usize,
    /// Worst conformity residual |nu_KL . (x_L - x_K) - d_KL| over all
    /// interfaces, relative to the characteristic length.
    pub conformity_residual: f64,
    /// Worst deviation of the three partition identities (primal, dual,
    /// diamond measures vs |Omega|), relative to |Omega|.
    pub partition_residual: f64,
    /// Smallest face-circumcenter containment margin over all 3D faces
    /// (non-negative means inside the closed face), relative to size.
    pub face_containment_margin: f64,
}

/// The complete double mesh.
#[derive(Debug, Clone)]
pub struct DdfvMesh {
    pub dim: usize,
    /// Mesh vertices; dual volume k is centered at `points[k]`.
    pub points: Vec<Point>,
    /// Input simplices (positively oriented), one per interior volume.
    pub cells: Vec<Vec<usize>>,
    pub primal: Vec<PrimalVolume>,
    pub n_interior_primal: usize,
    pub dual: Vec<DualVolume>,
    pub n_interior_dual: usize,
    pub interfaces: Vec<Interface>,
    pub diamonds: Vec<Diamond>,
    pub subdiamonds: Vec<Subdiamond>,
    pub dual_interfaces: Vec<DualInterface>,
    /// m_{K ∩ K*}: per interior primal volume, the (dual id, measure) pairs
    /// sorted by dual id. Boundary primal volumes have zero d-measure.
    pub overlaps: Vec<Vec<(usize, f64)>>,
    /// Per primal volume: (subdiamond id, signed m_sigma) with the sign
    /// chosen so that sign * nu points out of the volume. Flux sums never
    /// re-derive orientation.
    pub primal_stencil: Vec<Vec<(usize, f64)>>,
    /// Per dual volume: (subdiamond id, signed m_sigma_star), sign chosen so
    /// that sign * nu_star points out of the volume.
    pub dual_stencil: Vec<Vec<(usize, f64)>>,
    /// |Omega|.
    pub domain_measure: f64,
    /// max diameter over primal volumes, dual volumes and diamonds.
    pub size: f64,
    pub regularity: f64,
    /// Characteristic length used for geometric tolerances.
    pub char_length: f64,
    pub validation: ValidationReport,
    /// Optional per-boundary-face marks from mesh files.
    pub boundary_marks: BTreeMap<usize, i64>,
}

impl DdfvMesh {
    pub fn n_interfaces(&self) -> usize {
        self.interfaces.len()
    }

    /// Interior dual volume ids (vertices off the boundary).
    pub fn interior_duals(&self) -> impl Iterator<Item = usize> + '_ {
        self.dual.iter().filter(|d| !d.is_boundary).map(|d| d.id)
    }

    /// Geometric tolerance for this mesh.
    pub fn eps_geo(&self) -> f64 {
        EPS_GEO_REL * self.char_length
    }

    /// The overlap measure m_{K ∩ K*}, zero when the pair does not meet.
    pub fn overlap(&self, primal: usize, dual: usize) -> f64 {
        if primal >= self.n_interior_primal {
            return 0.0;
        }
        match self.overlaps[primal].binary_search_by_key(&dual, |&(d, _)| d) {
            Ok(i) => self.overlaps[primal][i].1,
            Err(_) => 0.0,
        }
    }

    /// Map (K, K*) -> m_{K∩K*} over all intersecting pairs.
    pub fn overlap_measures(&self) -> BTreeMap<(usize, usize), f64> {
        let mut m = BTreeMap::new();
        for (k, row) in self.overlaps.iter().enumerate() {
            for &(ks, v) in row {
                m.insert((k, ks), v);
            }
        }
        m
    }

    /// Summary counts for reports.
    pub fn counts(&self) -> MeshCounts {
        MeshCounts {
            dim: self.dim,
            points: self.points.len(),
            interior_primal: self.n_interior_primal,
            boundary_primal: self.primal.len() - self.n_interior_primal,
            interior_dual: self.n_interior_dual,
            boundary_dual: self.dual.len() - self.n_interior_dual,
            interfaces: self.interfaces.len(),
            diamonds: self.diamonds.len(),
            subdiamonds: self.subdiamonds.len(),
            dual_interfaces: self.dual_interfaces.len(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MeshCounts {
    pub dim: usize,
    pub points: usize,
    pub interior_primal: usize,
    pub boundary_primal: usize,
    pub interior_dual: usize,
    pub boundary_dual: usize,
    pub interfaces: usize,
    pub diamonds: usize,
    pub subdiamonds: usize,
    pub dual_interfaces: usize,
}

/// The regularity constant: the maximum of the five shape quantities
/// (dual valence, diameter-to-measure ratios of both volume families, and
/// the diameter ratios between volumes and the diamonds they meet).
pub fn regularity_constant(mesh: &DdfvMesh) -> f64 {
    let mut reg: f64 = 0.0;
    for dv in &mesh.dual {
        reg = reg.max(dv.neighbors.len() as f64);
    }
    let dpow = |x: f64| x.powi(mesh.dim as i32);
    for pv in &mesh.primal {
        // Boundary volumes use their natural (d-1)-measure.
        let p = if pv.is_boundary { pv.diameter.powi(mesh.dim as i32 - 1) } else { dpow(pv.diameter) };
        if pv.measure > 0.0 {
            reg = reg.max(p / pv.measure);
        }
    }
    for dv in &mesh.dual {
        reg = reg.max(dpow(dv.diameter) / dv.measure);
    }
    for d in &mesh.diamonds {
        let (k, l) = d.volumes;
        for v in [k, l] {
            let dv = mesh.primal[v].diameter;
            if dv > 0.0 && d.diameter > 0.0 {
                reg = reg.max(dv / d.diameter + d.diameter / dv);
            }
        }
        for s in d.subdiamonds.clone() {
            let (a, b) = mesh.subdiamonds[s].dual;
            for v in [a, b] {
                let dv = mesh.dual[v].diameter;
                if dv > 0.0 && d.diameter > 0.0 {
                    reg = reg.max(dv / d.diameter + d.diameter / dv);
                }
            }
        }
    }
    reg
}
