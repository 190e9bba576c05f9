//! Boundary discretization and the boundary-integral solvers on the outer boundary.

pub mod field;
pub mod green;
pub mod mesh;
pub mod operators;
pub mod solver;

pub use field::{BoundaryField, BoundaryMatrixField};
pub use green::{DirichletBackground, DirichletEvaluator};
pub use mesh::{build_mesh, BoundaryMesh, Shape};
pub use solver::{
    AffineField, BackgroundSolution, BoundaryOperators, ElasticField, NeumannEvaluator,
};
