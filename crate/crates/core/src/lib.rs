//! Shape optimization of convex, rotationally symmetric 3D bodies.
//!
//! A body of revolution is described by the generatrix of its half cross
//! section: a convex polyline in the `(r, z)` half-plane with both endpoints
//! on the rotation axis. All 3D integrals reduce to `r`-weighted 2D integrals
//! over the generatrix domain, so state equations (the Dirichlet Laplacian
//! eigenvalue and the nonlinear eigenvalue of optimal insulation) are solved
//! with `r`-weighted P1 finite elements on a triangulation of the generatrix.
//!
//! The outer loop deforms the boundary polyline along a descent field computed
//! from a Stokes-type saddle-point problem (Crouzeix-Raviart discretization,
//! weighted divergence constraint for volume preservation, linearized
//! convexity inequalities, Uzawa iteration), applies a line search, and
//! remeshes.
//!
//! Modules follow the pipeline:
//! [`geometry`] -> [`mesh`] -> [`fem`] -> [`eigensolve`] ->
//! [`shape_gradient`] / [`deformation`] -> [`optimizer`].

pub mod acceptance;
pub mod deformation;
pub mod eigensolve;
pub mod fem;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod objectives;
pub mod optimizer;
pub mod shape_gradient;

pub use geometry::GeneratrixBoundary;
pub use mesh::TriMesh;
