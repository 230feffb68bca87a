//! Discrete-duality finite-volume (DDFV) laboratory for degenerate
//! parabolic-hyperbolic problems
//!
//!   du/dt + div f(u) - div a(grad A(u)) + penalization = S,   u = 0 on the boundary,
//!
//! on double meshes (primal simplicial volumes + vertex-centered Voronoi
//! duals) in two and three space dimensions. The crate builds the double
//! mesh with all its geometric measures, provides the discrete gradient /
//! divergence / penalization / convection operators together with their
//! duality and entropy-dissipation identities as executable checks, and
//! runs the fully implicit scheme with per-step structure diagnostics.
//!
//! The `examples/` directory is the primary interface; each example is a
//! runnable demonstration of one capability:
//!
//! * `mesh_info` — build a mesh (structured or from a file), print counts,
//!   size, regularity, and validation flags.
//! * `duality_check` — the discrete divergence/gradient duality identity
//!   on seeded random data.
//! * `gradient_exactness` — affine reconstruction on every diamond and the
//!   planar projection identity on random triangles.
//! * `dissipation_inequality` — entropy dissipation of the diffusion
//!   operator and the penalization summation identity.
//! * `convection_duality` — entropy decomposition of monotone convection
//!   fluxes with signed and remainder terms.
//! * `porous_medium_run` — implicit run of a degenerate diffusion problem
//!   with bounds and aggregate estimates.
//! * `heat_convergence` — error ladder against the separable exact
//!   solution of the heat equation.
//! * `burgers_shock` — pure convection against a fine-grid viscous
//!   reference; shock position tracking.
//! * `entropy_residuals` — space-time entropy inequality residuals of a
//!   finished run.
//!
//! A thin command-line binary (`ddfv`) exposes the same capabilities as
//! subcommands (`mesh-info`, `verify`, `run`, `convergence`).

pub mod config;
pub mod fields;
pub mod geometry;
pub mod mesh;
pub mod operators;
pub mod output;
pub mod physics;
pub mod reference;
pub mod solver;
