//! Difference-quotient approximation of the shape derivative in Hadamard
//! form `J'(w, V) = int_{Gamma_out} g (V . n) ds`.
//!
//! Each boundary node is displaced by `delta` along its outward bisector
//! normal (axis endpoints glide along the axis), the domain is re-meshed
//! with the frozen template, and the state equation re-solved:
//!
//! ```text
//! g_i * w_i = (J(X + delta n_i e_i) - J(X)) / delta,
//! ```
//!
//! where `w_i = (|e_{i-1}| + |e_i|) / 2` is the unweighted boundary mass of
//! node `i`, making `g` the density with respect to arclength (for the
//! weighted-volume objective `g -> 2 pi r`). If the outward perturbation is
//! not meshable (self-intersection, collapsed radius), the one-sided inward
//! quotient is used instead. Convexity violations of order `delta` are
//! evaluated anyway: the descent problem needs gradient information in
//! infeasible directions for the linearized constraints to bind.

use thiserror::Error;

use crate::geometry::GeneratrixBoundary;
use crate::mesh::MesherTemplate;
use crate::objectives::{Evaluation, ObjectiveError, ShapeObjective};

#[derive(Debug, Error)]
pub enum GradientError {
    #[error("objective failed at node {node} (both one-sided quotients): {source}")]
    NodeFailed {
        node: usize,
        source: ObjectiveError,
    },
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Mesh(#[from] crate::mesh::MeshError),
}

/// Per-node boundary density of the shape derivative.
#[derive(Debug, Clone)]
pub struct BoundaryGradient {
    /// Density values, one per boundary node.
    pub g: Vec<f64>,
    /// Outward unit node normals (axis endpoints: along the axis).
    pub normals: Vec<[f64; 2]>,
    /// Unweighted nodal boundary masses.
    pub weights: Vec<f64>,
}

/// Step size of the difference quotient.
#[derive(Debug, Clone, Copy)]
pub enum DeltaRule {
    Absolute(f64),
    /// Fraction of the local mean edge length at each node.
    RelativeLocal(f64),
}

impl DeltaRule {
    fn value(&self, node_mass: f64) -> f64 {
        match self {
            DeltaRule::Absolute(d) => *d,
            DeltaRule::RelativeLocal(f) => f * node_mass,
        }
    }
}

/// Unweighted nodal boundary masses `(|e_{i-1}| + |e_i|) / 2`.
pub fn node_masses(boundary: &GeneratrixBoundary) -> Vec<f64> {
    let seg = boundary.segment_lengths();
    let n = boundary.len();
    let mut w = Vec::with_capacity(n);
    w.push(0.5 * seg[0]);
    for i in 1..n - 1 {
        w.push(0.5 * (seg[i - 1] + seg[i]));
    }
    w.push(0.5 * seg[n - 2]);
    w
}

fn displaced(
    boundary: &GeneratrixBoundary,
    node: usize,
    dir: [f64; 2],
    delta: f64,
) -> Result<GeneratrixBoundary, crate::geometry::GeometryError> {
    let mut nodes = boundary.nodes().to_vec();
    nodes[node][0] += delta * dir[0];
    nodes[node][1] += delta * dir[1];
    if node == 0 || node == boundary.len() - 1 {
        nodes[node][0] = 0.0;
    }
    GeneratrixBoundary::new(nodes)
}

/// Forward difference quotients with the stated template and base value.
pub fn shape_gradient_fd_with(
    boundary: &GeneratrixBoundary,
    objective: &dyn ShapeObjective,
    delta: DeltaRule,
    template: &MesherTemplate,
    base: &Evaluation,
) -> Result<BoundaryGradient, GradientError> {
    let n = boundary.len();
    let normals = boundary.node_normals();
    let weights = node_masses(boundary);
    let mut g = Vec::with_capacity(n);

    for i in 0..n {
        let d = delta.value(weights[i]);
        let ni = normals[i];
        // outward trial; fall back to the inward one-sided quotient when the
        // perturbed boundary cannot be meshed at all
        let outward = displaced(boundary, i, ni, d)
            .map_err(crate::mesh::MeshError::from)
            .and_then(|b| if b.is_self_intersecting() {
                Err(crate::geometry::GeometryError::SelfIntersecting.into())
            } else {
                Ok(b)
            })
            .and_then(|b| template.remesh(&b));
        let quotient = match outward {
            Ok(mesh) => {
                let eval = objective
                    .evaluate_on_mesh(&mesh, Some(&base.state))
                    .map_err(|source| GradientError::NodeFailed { node: i, source })?;
                (eval.value - base.value) / d
            }
            Err(_) => {
                let inward = displaced(boundary, i, [-ni[0], -ni[1]], d)
                    .map_err(crate::mesh::MeshError::from)
                    .and_then(|b| template.remesh(&b))
                    .map_err(|e| GradientError::NodeFailed {
                        node: i,
                        source: ObjectiveError::Mesh(e),
                    })?;
                let eval = objective
                    .evaluate_on_mesh(&inward, Some(&base.state))
                    .map_err(|source| GradientError::NodeFailed { node: i, source })?;
                (base.value - eval.value) / d
            }
        };
        g.push(quotient / weights[i]);
    }
    Ok(BoundaryGradient {
        g,
        normals,
        weights,
    })
}

/// Convenience entry point: fit a template at mesh size `h`, evaluate the
/// base objective, then run the quotients.
pub fn shape_gradient_fd(
    boundary: &GeneratrixBoundary,
    objective: &dyn ShapeObjective,
    delta: DeltaRule,
    h: f64,
) -> Result<BoundaryGradient, GradientError> {
    let template = MesherTemplate::fit(boundary, h, &crate::mesh::MeshParams::default())?;
    let mesh = template.remesh(boundary)?;
    let base = objective.evaluate_on_mesh(&mesh, None)?;
    shape_gradient_fd_with(boundary, objective, delta, &template, &base)
}

/// `J'(w, V) = sum_i g_i w_i (V(x_i) . n_i)` for a deformation field given
/// by its values at the boundary nodes.
pub fn apply_functional(grad: &BoundaryGradient, vertex_values: &[[f64; 2]]) -> f64 {
    assert_eq!(grad.g.len(), vertex_values.len(), "field/gradient mismatch");
    grad.g
        .iter()
        .zip(&grad.weights)
        .zip(&grad.normals)
        .zip(vertex_values)
        .map(|(((g, w), n), v)| g * w * (v[0] * n[0] + v[1] * n[1]))
        .sum()
}
