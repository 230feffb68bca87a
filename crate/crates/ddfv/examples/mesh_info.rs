//! Build structured double meshes and print their shape and health.
//!
//! Run with `cargo run --example mesh_info`.

use ddfv::mesh::{build_structured_2d, build_structured_3d, DdfvMesh, DiagonalPattern};

fn report(name: &str, mesh: &DdfvMesh) {
    let interior = mesh.primal.iter().filter(|v| !v.is_boundary).count();
    let boundary = mesh.primal.len() - interior;
    println!("{name}");
    println!("  dim {} | size {:.4} | reg {:.2}", mesh.dim, mesh.size, mesh.regularity);
    println!(
        "  primal {interior} interior + {boundary} boundary | dual {} ({} interior)",
        mesh.dual.len(),
        mesh.n_interior_dual
    );
    println!(
        "  interfaces {} | diamonds {} | subdiamonds {}",
        mesh.interfaces.len(),
        mesh.diamonds.len(),
        mesh.subdiamonds.len()
    );
    let v = &mesh.validation;
    println!(
        "  ties {} | conformity {:.2e} | partition {:.2e} | face margin {:.2e}",
        v.delaunay_ties, v.conformity_residual, v.partition_residual, v.face_containment_margin
    );
}

fn main() {
    let square = build_structured_2d(8, 8, [0.0, 0.0], [1.0, 1.0], DiagonalPattern::default())
        .expect("8x8 unit square");
    report("unit square, 8x8 cells, two triangles each", &square);

    let box3 = build_structured_3d(4, 3, 5, [0.0; 3], [1.0, 0.7, 1.3]).expect("4x3x5 box");
    report("anisotropic box, 4x3x5 cubes, six tetrahedra each", &box3);
}
