//! Shape functionals driven by a state equation on the meshed domain.
//!
//! The optimizer and the difference-quotient gradient only see the
//! [`ShapeObjective`] trait: evaluate on a given triangulation, optionally
//! warm-started from a previous state. Objectives must be re-entrant; warm
//! starts are threaded through explicitly instead of cached internally.

use thiserror::Error;

use crate::eigensolve::{
    default_epsilon, dirichlet_eigen, insulation_eigen, FlowParams, SolverError,
};
use crate::geometry::GeometryError;
use crate::mesh::{MeshError, TriMesh};

#[derive(Debug, Error)]
pub enum ObjectiveError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Opaque state passed back in as a warm start for nearby domains.
#[derive(Debug, Clone, Default)]
pub enum ObjectiveState {
    #[default]
    None,
    /// P1 coefficient vector of the state solution.
    Field(Vec<f64>),
}

impl ObjectiveState {
    pub fn field(&self) -> Option<&[f64]> {
        match self {
            ObjectiveState::Field(u) => Some(u),
            ObjectiveState::None => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub value: f64,
    pub state: ObjectiveState,
}

pub trait ShapeObjective {
    fn name(&self) -> &'static str;

    /// Objective value on a freshly generated triangulation of the domain.
    fn evaluate_on_mesh(
        &self,
        mesh: &TriMesh,
        warm: Option<&ObjectiveState>,
    ) -> Result<Evaluation, ObjectiveError>;
}

/// Weighted volume `2 pi |w|_r` of the meshed domain. Mostly a test vehicle:
/// its shape derivative is known in closed form.
pub struct VolumeObjective;

impl ShapeObjective for VolumeObjective {
    fn name(&self) -> &'static str {
        "volume"
    }

    fn evaluate_on_mesh(
        &self,
        mesh: &TriMesh,
        _warm: Option<&ObjectiveState>,
    ) -> Result<Evaluation, ObjectiveError> {
        Ok(Evaluation {
            value: 2.0 * std::f64::consts::PI * mesh.weighted_area(),
            state: ObjectiveState::None,
        })
    }
}

/// First eigenvalue of the reduced Dirichlet Laplacian.
pub struct DirichletObjective;

impl ShapeObjective for DirichletObjective {
    fn name(&self) -> &'static str {
        "dirichlet"
    }

    fn evaluate_on_mesh(
        &self,
        mesh: &TriMesh,
        _warm: Option<&ObjectiveState>,
    ) -> Result<Evaluation, ObjectiveError> {
        let sol = dirichlet_eigen(mesh)?;
        Ok(Evaluation {
            value: sol.lambda,
            state: ObjectiveState::Field(sol.u),
        })
    }
}

/// How the regularization parameter is chosen per evaluation.
#[derive(Debug, Clone, Copy)]
pub enum EpsilonRule {
    /// `N^{-1/2}/10` from each mesh's own node count.
    PerMesh,
    /// Frozen value, so the objective is a smooth function of the boundary
    /// during one optimization run.
    Fixed(f64),
}

impl EpsilonRule {
    pub fn value_for(&self, mesh: &TriMesh) -> f64 {
        match self {
            EpsilonRule::PerMesh => default_epsilon(mesh),
            EpsilonRule::Fixed(e) => *e,
        }
    }
}

/// Regularized nonlinear eigenvalue of optimal insulation with mass `m`.
pub struct InsulationObjective {
    pub m: f64,
    pub epsilon: EpsilonRule,
    pub flow: FlowParams,
}

impl InsulationObjective {
    pub fn new(m: f64, epsilon: EpsilonRule) -> Self {
        Self {
            m,
            epsilon,
            flow: FlowParams::default(),
        }
    }
}

impl ShapeObjective for InsulationObjective {
    fn name(&self) -> &'static str {
        "insulation"
    }

    fn evaluate_on_mesh(
        &self,
        mesh: &TriMesh,
        warm: Option<&ObjectiveState>,
    ) -> Result<Evaluation, ObjectiveError> {
        let eps = self.epsilon.value_for(mesh);
        let warm_field = warm.and_then(|s| s.field());
        let sol = insulation_eigen(mesh, self.m, eps, &self.flow, warm_field)?;
        Ok(Evaluation {
            value: sol.eig.lambda,
            state: ObjectiveState::Field(sol.eig.u),
        })
    }
}
