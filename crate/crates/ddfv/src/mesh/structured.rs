//! Structured triangulations of rectangles and boxes.
//!
//! Exact lattice splits are useless here no matter which diagonals are
//! picked: every lattice square (and every Kuhn cube) is inscribed in a
//! circle, so the cells sharing a diagonal share their circumcenter and
//! the center-to-center distance degenerates to zero.
//!
//! In 2D the fix is a column-alternating "stripe" jitter along (1, 1)
//! paired with the diagonal the displaced points actually prefer: the
//! main diagonal in even columns, the anti diagonal in odd ones.
//!
//! In 3D no bounded per-node parity jitter works: displacing whole
//! lattice planes rigidly keeps cospherical rings cospherical, while
//! alternating fields turn some of the all-right Kuhn faces obtuse and
//! push their circumcenters off the face. What does work is a small
//! global cyclic shear, x picking up -z, y picking up -x, z picking up
//! -y: it tightens every right-angle leg pair of the lattice at first
//! order, so paired circumcenters separate in the correct order while
//! the right faces stay right or sharpen. Components are clamped on the
//! nodes of their own boundary planes to keep the box exact, and the
//! shear angle scales like 1/max(n) so the clamped boundary layer stays
//! shape-regular at every resolution.

use crate::geometry::Point;
use crate::mesh::{build_from_simplicial, BuildOptions, DdfvMesh, MeshError};

/// Diagonal layout of a structured 2D grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiagonalPattern {
    /// Column-alternating diagonals on a stripe-jittered lattice. Produces
    /// a valid double mesh at every grid size.
    #[default]
    Alternating,
    /// Same-direction diagonals on the exact lattice. Every quad is
    /// cocircular: the Delaunay check passes with ties, but the full build
    /// is rejected because paired circumcenters coincide. Kept as the
    /// canonical degenerate input.
    Uniform,
}

/// Relative jitter amplitude, in units of the smaller cell edge.
const JITTER: f64 = 0.1;

/// Cyclic-shear angle of the 3D lattice, in index space, times max(n).
/// Validated up against the first failure (flat boundary-layer cells and
/// obtuse faces appear near 0.8) with a factor-four safety margin.
const SHEAR3D: f64 = 0.2;

fn check_extent(lo: f64, hi: f64, axis: &str) -> Result<(), MeshError> {
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(MeshError::InvalidInput(format!(
            "domain must have finite positive extent along {axis} (got [{lo}, {hi}])"
        )));
    }
    Ok(())
}

/// Lattice points and triangles of a structured grid, without validation.
///
/// `Alternating` applies the stripe jitter; `Uniform` returns the exact
/// lattice. Nodes are numbered row-major, `i + j * (nx + 1)`.
pub fn structured_cells_2d(
    nx: usize,
    ny: usize,
    lo: [f64; 2],
    hi: [f64; 2],
    pattern: DiagonalPattern,
) -> Result<(Vec<Point>, Vec<Vec<usize>>), MeshError> {
    if nx < 2 || ny < 2 {
        return Err(MeshError::InvalidInput(format!(
            "structured grid needs at least 2x2 cells, got {nx}x{ny}"
        )));
    }
    check_extent(lo[0], hi[0], "x")?;
    check_extent(lo[1], hi[1], "y")?;
    let hx = (hi[0] - lo[0]) / nx as f64;
    let hy = (hi[1] - lo[1]) / ny as f64;
    let s = match pattern {
        DiagonalPattern::Alternating => JITTER * hx.min(hy),
        DiagonalPattern::Uniform => 0.0,
    };

    let mut points = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let mut dx = sign * s;
            let mut dy = sign * s;
            // Drop the displacement component normal to a boundary line so
            // the domain stays the exact rectangle.
            if i == 0 || i == nx {
                dx = 0.0;
            }
            if j == 0 || j == ny {
                dy = 0.0;
            }
            points.push(Point::new3(
                lo[0] + i as f64 * hx + dx,
                lo[1] + j as f64 * hy + dy,
                0.0,
            ));
        }
    }

    let node = |i: usize, j: usize| i + j * (nx + 1);
    let mut cells = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let a = node(i, j);
            let b = node(i + 1, j);
            let c = node(i + 1, j + 1);
            let d = node(i, j + 1);
            let main_diagonal = match pattern {
                DiagonalPattern::Alternating => i % 2 == 0,
                DiagonalPattern::Uniform => true,
            };
            if main_diagonal {
                cells.push(vec![a, b, c]);
                cells.push(vec![a, c, d]);
            } else {
                cells.push(vec![a, b, d]);
                cells.push(vec![b, c, d]);
            }
        }
    }
    Ok((points, cells))
}

/// Builds the double mesh of a structured triangulation of the rectangle
/// `[lo, hi]`, `nx` by `ny` cells, two triangles each.
pub fn build_structured_2d(
    nx: usize,
    ny: usize,
    lo: [f64; 2],
    hi: [f64; 2],
    pattern: DiagonalPattern,
) -> Result<DdfvMesh, MeshError> {
    let (points, cells) = structured_cells_2d(nx, ny, lo, hi, pattern)?;
    build_from_simplicial(&points, &cells, &BuildOptions::default())
}

/// Lattice points and Kuhn tetrahedra of a structured box grid.
///
/// Each cube splits into the six tetrahedra around its main diagonal, the
/// same way in every cube, and the whole lattice is sheared cyclically in
/// index space: node (i, j, k) moves by
/// `-s * (hx * (k - nz/2), hy * (i - nx/2), hz * (j - ny/2))`
/// with the displacement component normal to a boundary plane dropped on
/// that plane's nodes. Nodes are numbered
/// `i + j * (nx + 1) + k * (nx + 1) * (ny + 1)`.
pub fn structured_cells_3d(
    nx: usize,
    ny: usize,
    nz: usize,
    lo: [f64; 3],
    hi: [f64; 3],
) -> Result<(Vec<Point>, Vec<Vec<usize>>), MeshError> {
    if nx < 2 || ny < 2 || nz < 2 {
        return Err(MeshError::InvalidInput(format!(
            "structured grid needs at least 2x2x2 cells, got {nx}x{ny}x{nz}"
        )));
    }
    check_extent(lo[0], hi[0], "x")?;
    check_extent(lo[1], hi[1], "y")?;
    check_extent(lo[2], hi[2], "z")?;
    let hx = (hi[0] - lo[0]) / nx as f64;
    let hy = (hi[1] - lo[1]) / ny as f64;
    let hz = (hi[2] - lo[2]) / nz as f64;
    let s = SHEAR3D / nx.max(ny).max(nz) as f64;
    let (cx, cy, cz) = (nx as f64 / 2.0, ny as f64 / 2.0, nz as f64 / 2.0);

    let mut points = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                let mut d = [
                    -s * hx * (k as f64 - cz),
                    -s * hy * (i as f64 - cx),
                    -s * hz * (j as f64 - cy),
                ];
                if i == 0 || i == nx {
                    d[0] = 0.0;
                }
                if j == 0 || j == ny {
                    d[1] = 0.0;
                }
                if k == 0 || k == nz {
                    d[2] = 0.0;
                }
                points.push(Point::new3(
                    lo[0] + i as f64 * hx + d[0],
                    lo[1] + j as f64 * hy + d[1],
                    lo[2] + k as f64 * hz + d[2],
                ));
            }
        }
    }

    // The six permutations of the axes; each one is a path from corner
    // (0,0,0) to corner (1,1,1) of the unit cube, i.e. one Kuhn tet.
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];

    let node = |b: [usize; 3]| b[0] + b[1] * (nx + 1) + b[2] * (nx + 1) * (ny + 1);
    let mut cells = Vec::with_capacity(6 * nx * ny * nz);
    for ck in 0..nz {
        for cj in 0..ny {
            for ci in 0..nx {
                let corner = |b: [usize; 3]| node([ci + b[0], cj + b[1], ck + b[2]]);
                for perm in PERMS {
                    let mut b = [0usize; 3];
                    let v0 = corner(b);
                    b[perm[0]] = 1;
                    let v1 = corner(b);
                    b[perm[1]] = 1;
                    let v2 = corner(b);
                    b[perm[2]] = 1;
                    let v3 = corner(b);
                    cells.push(vec![v0, v1, v2, v3]);
                }
            }
        }
    }
    Ok((points, cells))
}

/// Builds the double mesh of a structured Kuhn tetrahedralization of the
/// box `[lo, hi]`, six tetrahedra per cube.
pub fn build_structured_3d(
    nx: usize,
    ny: usize,
    nz: usize,
    lo: [f64; 3],
    hi: [f64; 3],
) -> Result<DdfvMesh, MeshError> {
    let (points, cells) = structured_cells_3d(nx, ny, nz, lo, hi)?;
    build_from_simplicial(&points, &cells, &BuildOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{diameter, point_in_triangle_2d};
    use crate::mesh::validate_delaunay;

    const UNIT2: ([f64; 2], [f64; 2]) = ([0.0, 0.0], [1.0, 1.0]);

    #[test]
    fn two_by_two_has_eight_triangles_with_contained_circumcenters() {
        let mesh = build_structured_2d(2, 2, UNIT2.0, UNIT2.1, DiagonalPattern::default())
            .expect("2x2 alternating grid must build");
        let interior: Vec<_> = mesh.primal.iter().filter(|v| !v.is_boundary).collect();
        assert_eq!(interior.len(), 8);
        for vol in interior {
            let [a, b, c] = [
                mesh.points[vol.vertices[0]],
                mesh.points[vol.vertices[1]],
                mesh.points[vol.vertices[2]],
            ];
            assert!(
                point_in_triangle_2d(vol.center, a, b, c, 1e-12),
                "circumcenter {:?} of cell {} escapes its closed triangle",
                vol.center,
                vol.id
            );
        }
    }

    #[test]
    fn structured_domains_are_the_exact_boxes() {
        // The jitter and the shear are clamped on the boundary planes, so
        // the meshed domain must be the requested box to the last bit:
        // every node inside the closed box, the measure equal to its
        // volume.
        let (lo, hi) = ([0.5, -0.25], [2.0, 1.0]);
        let mesh = build_structured_2d(5, 3, lo, hi, DiagonalPattern::default()).unwrap();
        let want = (hi[0] - lo[0]) * (hi[1] - lo[1]);
        assert!((mesh.domain_measure - want).abs() <= 1e-12 * want);
        for p in &mesh.points {
            assert!(p.x >= lo[0] && p.x <= hi[0] && p.y >= lo[1] && p.y <= hi[1]);
        }

        let (lo, hi) = ([0.0, -0.5, 1.0], [1.2, 0.7, 2.5]);
        let mesh = build_structured_3d(3, 4, 2, lo, hi).unwrap();
        let want = (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]);
        assert!((mesh.domain_measure - want).abs() <= 1e-12 * want);
        for p in &mesh.points {
            for a in 0..3 {
                assert!(p.coord(a) >= lo[a] && p.coord(a) <= hi[a]);
            }
        }
    }

    #[test]
    fn too_coarse_grids_are_rejected() {
        assert!(matches!(
            build_structured_2d(1, 1, UNIT2.0, UNIT2.1, DiagonalPattern::default()),
            Err(MeshError::InvalidInput(_))
        ));
        assert!(matches!(
            build_structured_2d(1, 4, UNIT2.0, UNIT2.1, DiagonalPattern::default()),
            Err(MeshError::InvalidInput(_))
        ));
        assert!(matches!(
            build_structured_3d(1, 2, 2, [0.0; 3], [1.0; 3]),
            Err(MeshError::InvalidInput(_))
        ));
    }

    #[test]
    fn four_by_two_size_matches_brute_force() {
        let mesh = build_structured_2d(4, 2, [0.0, 0.0], [2.0, 1.0], DiagonalPattern::default())
            .expect("4x2 grid must build");
        let mut expected: f64 = 0.0;
        for vol in &mesh.primal {
            let pts: Vec<Point> = vol.vertices.iter().map(|&v| mesh.points[v]).collect();
            expected = expected.max(diameter(&pts));
        }
        for vol in &mesh.dual {
            let mut pts = vec![vol.center];
            for face in &vol.hull_faces {
                pts.extend_from_slice(face);
            }
            expected = expected.max(diameter(&pts));
        }
        for diamond in &mesh.diamonds {
            let interface = &mesh.interfaces[diamond.interface];
            let mut pts: Vec<Point> =
                interface.span.iter().map(|&v| mesh.points[v]).collect();
            pts.push(mesh.primal[interface.volumes.0].center);
            pts.push(mesh.primal[interface.volumes.1].center);
            expected = expected.max(diameter(&pts));
        }
        assert!(
            (mesh.size - expected).abs() <= 1e-12 * expected,
            "size {} vs brute force {}",
            mesh.size,
            expected
        );
    }

    #[test]
    fn uniform_lattice_is_cocircular_everywhere() {
        let (points, cells) =
            structured_cells_2d(16, 16, UNIT2.0, UNIT2.1, DiagonalPattern::Uniform).unwrap();
        let report = validate_delaunay(&points, &cells).expect("ties are not a Delaunay failure");
        assert!(report.ties > 0, "exact lattice quads must be cocircular");
        match build_structured_2d(16, 16, UNIT2.0, UNIT2.1, DiagonalPattern::Uniform) {
            Err(MeshError::DegenerateCell { .. }) => {}
            other => panic!("expected coincident-circumcenter rejection, got {other:?}"),
        }
    }

    #[test]
    fn alternating_grids_build_at_many_sizes() {
        for (nx, ny) in [(2usize, 2usize), (2, 3), (3, 3), (4, 2), (5, 4), (16, 16)] {
            let mesh =
                build_structured_2d(nx, ny, [0.0, 0.0], [1.3, 0.9], DiagonalPattern::default())
                    .unwrap_or_else(|e| panic!("{nx}x{ny} failed: {e}"));
            let interior = mesh.primal.iter().filter(|v| !v.is_boundary).count();
            assert_eq!(interior, 2 * nx * ny);
            assert_eq!(mesh.validation.delaunay_ties, 0, "{nx}x{ny} should be strict");
            assert!(mesh.validation.partition_residual < 1e-10);
        }
    }

    #[test]
    fn kuhn_boxes_build_with_contained_face_circumcenters() {
        let mesh = build_structured_3d(2, 2, 2, [0.0; 3], [1.0; 3]).expect("2x2x2 must build");
        let interior = mesh.primal.iter().filter(|v| !v.is_boundary).count();
        assert_eq!(interior, 48);
        for interface in &mesh.interfaces {
            assert_eq!(interface.span.len(), 3, "3D interfaces are triangles");
        }
        assert!(
            mesh.validation.face_containment_margin >= -1e-12,
            "face circumcenters must stay in their closed faces, worst {}",
            mesh.validation.face_containment_margin
        );
        assert!(mesh.validation.conformity_residual <= 1e-12);

        let bigger = build_structured_3d(3, 2, 4, [0.0; 3], [1.1, 0.8, 1.7]).unwrap();
        assert_eq!(
            bigger.primal.iter().filter(|v| !v.is_boundary).count(),
            6 * 3 * 2 * 4
        );
    }

    #[test]
    fn regularity_is_stable_under_refinement() {
        let regs: Vec<f64> = [(4usize, 4usize), (8, 8), (16, 16)]
            .iter()
            .map(|&(nx, ny)| {
                build_structured_2d(nx, ny, UNIT2.0, UNIT2.1, DiagonalPattern::default())
                    .unwrap()
                    .regularity
            })
            .collect();
        for pair in regs.windows(2) {
            let change = (pair[1] - pair[0]).abs() / pair[0];
            assert!(
                change < 0.05,
                "regularity drifts under refinement: {regs:?}"
            );
        }
    }
}
