//! Conforming finite elements for the transmission problem: Hermite cubics
//! on the beams, linear elements on the string, interface deflections
//! shared between neighbours.

mod assembly;
mod element;
mod mesh;
mod state;

use thiserror::Error;

use crate::model::{ModelError, StructureConfig};

pub use assembly::{
    assemble_pencil, clamped_free_beam_pencil, string_pencil, write_coordinate, SystemPencil,
};
pub use element::{element_matrix, hermite_basis, linear_basis, ElementKind};
pub use mesh::{build_dof_map, build_mesh, BeamNodeDofs, DofMap, Mesh, Segment, SegmentKind};
pub use state::{evaluate_on, evaluate_state, interpolate, StateVector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FemError {
    #[error("every interval needs at least one element")]
    ZeroElements,
    #[error("element length must be positive (got {0})")]
    NonpositiveLength(f64),
    #[error("initial data disagree at interface x = {at}: {left} vs {right}")]
    IncompatibleInterface { at: f64, left: f64, right: f64 },
    #[error("initial data component {component} does not satisfy the clamped condition at x = {at}")]
    ClampViolation { component: &'static str, at: f64 },
    #[error("{component}: expected {expected} nodal samples, got {got}")]
    SampleCountMismatch {
        component: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("x = {0} lies outside [l0, l3]")]
    OutOfDomain(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A validated configuration together with its mesh, DOF map and pencil.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub cfg: StructureConfig,
    pub mesh: Mesh,
    pub dofs: DofMap,
    pub pencil: SystemPencil,
}

impl Discretization {
    pub fn new(cfg: StructureConfig, n1: usize, n2: usize, n3: usize) -> Result<Self, FemError> {
        let cfg = cfg.validate()?;
        let mesh = build_mesh(&cfg, n1, n2, n3)?;
        let dofs = build_dof_map(&mesh);
        let pencil = assemble_pencil(&cfg, &mesh, &dofs)?;
        Ok(Discretization {
            cfg,
            mesh,
            dofs,
            pencil,
        })
    }

    pub fn interpolate(&self, data: &crate::model::InitialData) -> Result<StateVector, FemError> {
        interpolate(data, &self.mesh, &self.dofs)
    }

    pub fn evaluate(&self, y: &StateVector, x: f64) -> Result<(f64, f64), FemError> {
        evaluate_state(y, &self.mesh, &self.dofs, x)
    }
}
