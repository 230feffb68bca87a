//! Plain-text mesh files.
//!
//! ```text
//! # comment
//! d npoints ncells
//! id x y [z]      (npoints lines)
//! id v1 v2 v3 [v4]  (ncells lines)
//! marks n         (optional)
//! v1 v2 [v3] mark   (n lines, one boundary face each)
//! ```
//!
//! Ids must form a permutation of `0..n`; coordinates are written with
//! shortest round-trip formatting, so a write/read cycle is exact.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::geometry::Point;
use crate::mesh::{build_from_simplicial, BuildOptions, DdfvMesh, MeshError};

/// The content of a mesh text file, before validation.
#[derive(Debug, Clone, Default)]
pub struct MeshText {
    pub dim: usize,
    pub points: Vec<Point>,
    pub cells: Vec<Vec<usize>>,
    /// Sorted boundary-face vertex tuple -> integer mark.
    pub boundary_marks: BTreeMap<Vec<usize>, i64>,
}

fn parse_err(line_no: usize, what: impl fmt::Display) -> MeshError {
    MeshError::InvalidInput(format!("mesh text, line {line_no}: {what}"))
}

impl MeshText {
    pub fn parse(text: &str) -> Result<MeshText, MeshError> {
        // (line number, tokens) with comments and blank lines dropped.
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("")))
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(n, l)| (n, l.split_whitespace().collect::<Vec<_>>()));

        let (n0, header) = lines
            .next()
            .ok_or_else(|| MeshError::InvalidInput("empty mesh text".into()))?;
        if header.len() != 3 {
            return Err(parse_err(n0, "expected `d npoints ncells`"));
        }
        let dim: usize = header[0]
            .parse()
            .map_err(|_| parse_err(n0, "bad dimension"))?;
        if dim != 2 && dim != 3 {
            return Err(parse_err(n0, format!("dimension must be 2 or 3, got {dim}")));
        }
        let npoints: usize = header[1]
            .parse()
            .map_err(|_| parse_err(n0, "bad point count"))?;
        let ncells: usize = header[2]
            .parse()
            .map_err(|_| parse_err(n0, "bad cell count"))?;

        let mut points = vec![None; npoints];
        for _ in 0..npoints {
            let (n, tok) = lines
                .next()
                .ok_or_else(|| MeshError::InvalidInput("mesh text ends inside points".into()))?;
            if tok.len() != 1 + dim {
                return Err(parse_err(n, format!("expected `id` and {dim} coordinates")));
            }
            let id: usize = tok[0].parse().map_err(|_| parse_err(n, "bad point id"))?;
            if id >= npoints {
                return Err(parse_err(n, format!("point id {id} out of range")));
            }
            if points[id].is_some() {
                return Err(parse_err(n, format!("duplicate point id {id}")));
            }
            let mut xyz = [0.0f64; 3];
            for (slot, t) in xyz.iter_mut().zip(&tok[1..]) {
                *slot = t
                    .parse()
                    .map_err(|_| parse_err(n, format!("bad coordinate `{t}`")))?;
            }
            points[id] = Some(Point::new3(xyz[0], xyz[1], xyz[2]));
        }
        let points: Vec<Point> = points.into_iter().map(Option::unwrap).collect();

        let mut cells = vec![None; ncells];
        for _ in 0..ncells {
            let (n, tok) = lines
                .next()
                .ok_or_else(|| MeshError::InvalidInput("mesh text ends inside cells".into()))?;
            if tok.len() != 2 + dim {
                return Err(parse_err(n, format!("expected `id` and {} vertices", dim + 1)));
            }
            let id: usize = tok[0].parse().map_err(|_| parse_err(n, "bad cell id"))?;
            if id >= ncells {
                return Err(parse_err(n, format!("cell id {id} out of range")));
            }
            if cells[id].is_some() {
                return Err(parse_err(n, format!("duplicate cell id {id}")));
            }
            let mut verts = Vec::with_capacity(dim + 1);
            for t in &tok[1..] {
                let v: usize = t
                    .parse()
                    .map_err(|_| parse_err(n, format!("bad vertex id `{t}`")))?;
                if v >= npoints {
                    return Err(parse_err(n, format!("vertex id {v} out of range")));
                }
                verts.push(v);
            }
            cells[id] = Some(verts);
        }
        let cells: Vec<Vec<usize>> = cells.into_iter().map(Option::unwrap).collect();

        let mut boundary_marks = BTreeMap::new();
        if let Some((n, tok)) = lines.next() {
            if tok[0] != "marks" || tok.len() != 2 {
                return Err(parse_err(n, "expected `marks n` or end of file"));
            }
            let nmarks: usize = tok[1].parse().map_err(|_| parse_err(n, "bad mark count"))?;
            for _ in 0..nmarks {
                let (n, tok) = lines.next().ok_or_else(|| {
                    MeshError::InvalidInput("mesh text ends inside marks".into())
                })?;
                if tok.len() != dim + 1 {
                    return Err(parse_err(n, format!("expected {dim} vertex ids and a mark")));
                }
                let mut face = Vec::with_capacity(dim);
                for t in &tok[..dim] {
                    let v: usize = t
                        .parse()
                        .map_err(|_| parse_err(n, format!("bad vertex id `{t}`")))?;
                    if v >= npoints {
                        return Err(parse_err(n, format!("vertex id {v} out of range")));
                    }
                    face.push(v);
                }
                face.sort_unstable();
                let mark: i64 = tok[dim]
                    .parse()
                    .map_err(|_| parse_err(n, "bad mark value"))?;
                if boundary_marks.insert(face.clone(), mark).is_some() {
                    return Err(parse_err(n, format!("duplicate mark for face {face:?}")));
                }
            }
        }
        if let Some((n, _)) = lines.next() {
            return Err(parse_err(n, "trailing content after mesh"));
        }

        Ok(MeshText {
            dim,
            points,
            cells,
            boundary_marks,
        })
    }

    /// Validates and builds the double mesh.
    pub fn build(&self) -> Result<DdfvMesh, MeshError> {
        let options = BuildOptions {
            boundary_marks: self.boundary_marks.clone(),
        };
        build_from_simplicial(&self.points, &self.cells, &options)
    }

    /// Snapshot of a built mesh in file form (points, cells, marks).
    pub fn from_mesh(mesh: &DdfvMesh) -> MeshText {
        let mut boundary_marks = BTreeMap::new();
        for (&vol, &mark) in &mesh.boundary_marks {
            let mut face = mesh.primal[vol].vertices.clone();
            face.sort_unstable();
            boundary_marks.insert(face, mark);
        }
        MeshText {
            dim: mesh.dim,
            points: mesh.points.clone(),
            cells: mesh.cells.clone(),
            boundary_marks,
        }
    }
}

impl fmt::Display for MeshText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {} {}", self.dim, self.points.len(), self.cells.len())?;
        for (id, p) in self.points.iter().enumerate() {
            write!(f, "{id} {} {}", p.x, p.y)?;
            if self.dim == 3 {
                write!(f, " {}", p.z)?;
            }
            writeln!(f)?;
        }
        for (id, cell) in self.cells.iter().enumerate() {
            write!(f, "{id}")?;
            for v in cell {
                write!(f, " {v}")?;
            }
            writeln!(f)?;
        }
        if !self.boundary_marks.is_empty() {
            writeln!(f, "marks {}", self.boundary_marks.len())?;
            for (face, mark) in &self.boundary_marks {
                for v in face {
                    write!(f, "{v} ")?;
                }
                writeln!(f, "{mark}")?;
            }
        }
        Ok(())
    }
}

pub fn read_mesh_text(path: impl AsRef<Path>) -> Result<MeshText, MeshError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| MeshError::Io(format!("{}: {e}", path.display())))?;
    MeshText::parse(&text)
}

pub fn write_mesh_text(path: impl AsRef<Path>, mesh: &MeshText) -> Result<(), MeshError> {
    let path = path.as_ref();
    std::fs::write(path, mesh.to_string())
        .map_err(|e| MeshError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_TRIANGLES: &str = "\
# a square with one corner pulled in
2 4 2
0 0 0
1 1 0
2 1 0.9
3 0 1
0 0 1 2
1 0 2 3
marks 2
0 1 10
2 3 11
";

    #[test]
    fn parses_and_builds_round_trip() {
        let text = MeshText::parse(TWO_TRIANGLES).unwrap();
        assert_eq!(text.dim, 2);
        assert_eq!(text.points.len(), 4);
        assert_eq!(text.cells, vec![vec![0, 1, 2], vec![0, 2, 3]]);
        assert_eq!(text.boundary_marks.len(), 2);

        let mesh = text.build().unwrap();
        let marked: Vec<i64> = mesh.boundary_marks.values().copied().collect();
        assert_eq!(marked, vec![10, 11]);

        let back = MeshText::from_mesh(&mesh);
        let reparsed = MeshText::parse(&back.to_string()).unwrap();
        assert_eq!(reparsed.points.len(), 4);
        assert_eq!(reparsed.cells.len(), 2);
        assert_eq!(reparsed.boundary_marks, text.boundary_marks);
        for (a, b) in reparsed.points.iter().zip(&text.points) {
            assert_eq!((a.x, a.y, a.z), (b.x, b.y, b.z));
        }
    }

    #[test]
    fn file_round_trip_is_exact() {
        let text = MeshText::parse(TWO_TRIANGLES).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mesh.txt");
        write_mesh_text(&path, &text).unwrap();
        let back = read_mesh_text(&path).unwrap();
        assert_eq!(back.cells, text.cells);
        for (a, b) in back.points.iter().zip(&text.points) {
            assert_eq!((a.x, a.y, a.z), (b.x, b.y, b.z));
        }
    }

    #[test]
    fn three_d_points_keep_their_z() {
        // Regular tet: its circumcenter sits at the centroid, so the
        // single-cell mesh is valid.
        let tet = "3 4 1\n0 1 1 1\n1 1 -1 -1\n2 -1 1 -1\n3 -1 -1 1\n0 0 1 2 3\n";
        let text = MeshText::parse(tet).unwrap();
        assert_eq!(text.dim, 3);
        assert_eq!(text.points[3].z, 1.0);
        assert!(text.build().is_ok());
    }

    #[test]
    fn malformed_input_is_reported_with_line_numbers() {
        for (bad, needle) in [
            ("", "empty"),
            ("2 4", "d npoints ncells"),
            ("4 1 0\n0 0 0 0 0\n", "dimension"),
            ("2 1 0\n0 zero 0\n", "bad coordinate"),
            ("2 1 1\n0 0 0\n0 0 0 7\n", "out of range"),
            ("2 2 1\n0 0 0\n0 1 1\n0 0 1 1\n", "duplicate point id"),
            ("2 1 0\n0 0 0\nstray\n", "marks"),
        ] {
            match MeshText::parse(bad) {
                Err(MeshError::InvalidInput(msg)) => {
                    assert!(msg.contains(needle), "`{msg}` should mention `{needle}`")
                }
                other => panic!("expected InvalidInput for {bad:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn missing_file_is_an_io_error() {
        match read_mesh_text("/nonexistent/mesh.txt") {
            Err(MeshError::Io(_)) => {}
            other => panic!("expected Io error, got {other:?}"),
        }
    }
}
