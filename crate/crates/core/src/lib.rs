//! Boundary-integral toolkit for small straight cracks in a two-dimensional
//! isotropic elastic body.
//!
//! * [`kernels`]: Kelvin matrix, traction operator and the layer kernels.
//! * [`hilbert`]: finite-part operator on `(-1, 1)` and its inverse on the
//!   weighted second-kind Chebyshev basis.
//! * [`bem`]: boundary discretization, the background Neumann solve, the
//!   Neumann function and the Dirichlet Green function conormal derivatives.
//! * [`crack`]: the coupled crack / boundary solve.
//! * [`asymptotics`]: leading-order boundary perturbation, energy change,
//!   stress intensity factors and topological derivative.

pub mod asymptotics;
pub mod bem;
pub mod crack;
pub mod error;
pub mod hilbert;
pub mod kernels;
pub mod material;
pub mod quadrature;

pub use error::{Error, Result};
pub use material::LameParams;
