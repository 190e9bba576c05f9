use thiserror::Error;

/// Errors raised by the kernels, the boundary solvers and the crack solver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("inadmissible Lamé parameters: lambda = {lambda}, mu = {mu} (need mu > 0 and lambda + mu > 0)")]
    InvalidMaterial { lambda: f64, mu: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("field has {found} nodes but the mesh has {expected}")]
    MeshMismatch { expected: usize, found: usize },

    #[error("boundary traction is not equilibrated (relative rigid-motion moment {moment:.3e})")]
    EquilibriumViolated { moment: f64 },

    #[error("linear solve failed: {0}")]
    SolveFailed(String),

    #[error("point at distance {distance:.3e} from the boundary, need at least {required:.3e}")]
    CrackTooCloseToBoundary { distance: f64, required: f64 },

    #[error("crack iteration did not converge after {iterations} iterations (last update {last_update:.3e})")]
    NotConverged { iterations: usize, last_update: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
