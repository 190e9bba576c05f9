use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Dyn, Matrix2, Vector2, LU};

use super::field::{BoundaryField, BoundaryMatrixField};
use super::mesh::BoundaryMesh;
use super::operators::{double_layer, double_layer_gradient, single_layer, single_layer_gradient};
use super::solver::{
    factorize, solve_checked, BoundaryOperators, ElasticField, DEFAULT_MIN_DISTANCE_SPACINGS,
};
use crate::error::{Error, Result};
use crate::kernels::{check_unit, column_tractions, dlp_gradient_raw, dlp_raw};
use crate::material::LameParams;

/// Dirichlet-to-Neumann map and the Dirichlet Green function `G`
/// (`L G = -δ`, `G = 0` on `∂Ω`).
///
/// For Dirichlet data `f` the traction `t` solves `S t = (-½I + K) f`. The
/// system is augmented with a constant unknown and `∫ t dσ = 0`, which keeps
/// it well posed at the degenerate scale of the single layer.
#[derive(Debug)]
pub struct DirichletEvaluator {
    ops: Arc<BoundaryOperators>,
    lu: LU<f64, Dyn, Dyn>,
    augmented: DMatrix<f64>,
    min_distance: f64,
}

impl DirichletEvaluator {
    pub fn new(mesh: BoundaryMesh, mat: LameParams) -> Result<Self> {
        Self::from_operators(Arc::new(BoundaryOperators::new(Arc::new(mesh), mat)))
    }

    pub fn from_operators(ops: Arc<BoundaryOperators>) -> Result<Self> {
        let mesh = ops.mesh();
        let n = mesh.len();
        let mut m = DMatrix::zeros(2 * n + 2, 2 * n + 2);
        m.view_mut((0, 0), (2 * n, 2 * n)).copy_from(ops.s());
        for (i, w) in mesh.weights().iter().enumerate() {
            for c in 0..2 {
                m[(2 * i + c, 2 * n + c)] = 1.0;
                m[(2 * n + c, 2 * i + c)] = *w;
            }
        }
        let (lu, augmented) = factorize(m)?;
        let min_distance = DEFAULT_MIN_DISTANCE_SPACINGS * mesh.max_spacing();
        Ok(Self {
            ops,
            lu,
            augmented,
            min_distance,
        })
    }

    pub fn with_min_distance(mut self, d0: f64) -> Self {
        self.min_distance = d0;
        self
    }

    pub fn mesh(&self) -> &BoundaryMesh {
        self.ops.mesh()
    }

    pub fn material(&self) -> &LameParams {
        self.ops.material()
    }

    pub fn operators(&self) -> &Arc<BoundaryOperators> {
        &self.ops
    }

    fn check_source(&self, z: &Vector2<f64>) -> Result<()> {
        let required = self.min_distance;
        if !self.mesh().contains(z) {
            return Err(Error::CrackTooCloseToBoundary {
                distance: 0.0,
                required,
            });
        }
        let distance = self.mesh().distance_to_boundary(z);
        if distance < required {
            return Err(Error::CrackTooCloseToBoundary { distance, required });
        }
        Ok(())
    }

    /// Traction `σ(u) n` on `∂Ω` of the elastic field with boundary values `f`.
    pub fn dirichlet_to_neumann(&self, f: &BoundaryField) -> Result<BoundaryField> {
        let rhs = self.ops.apply_k(f)?.sub(&f.scale(0.5));
        let n = self.mesh().len();
        let mut b = DVector::zeros(2 * n + 2);
        b.rows_mut(0, 2 * n).copy_from(&rhs.to_dvector());
        let x = solve_checked(&self.lu, &self.augmented, &b)?;
        Ok(BoundaryField::from_dvector(&x.rows(0, 2 * n).into_owned()))
    }

    /// Elastic field with boundary values `f`.
    pub fn solve_background(self: &Arc<Self>, f: &BoundaryField) -> Result<DirichletBackground> {
        let traction = self.dirichlet_to_neumann(f)?;
        Ok(DirichletBackground {
            eval: Arc::clone(self),
            trace: f.clone(),
            traction,
        })
    }

    /// `x ↦ ∂²G/∂ν_x∂ν_y(x, z)` on `∂Ω`, with normal `e_perp` at `z` and the
    /// outward normal at `x`.
    ///
    /// `∂G/∂ν_y(·, z) = -M(·, z) + h` where `h` is the elastic extension of
    /// `M(·, z)|∂Ω`; its traction is `-W(x, z) + Λ[h](x)`.
    pub fn green_conormal2_row(
        &self,
        z: &Vector2<f64>,
        e_perp: &Vector2<f64>,
    ) -> Result<BoundaryMatrixField> {
        check_unit(e_perp, "crack normal")?;
        self.check_source(z)?;
        let (mesh, mat) = (self.mesh(), self.material());
        let h = BoundaryMatrixField::new(
            mesh.points()
                .iter()
                .map(|x| dlp_raw(&(x - z), e_perp, mat))
                .collect(),
        );
        let t0 = self.dirichlet_to_neumann(&h.column(0))?;
        let t1 = self.dirichlet_to_neumann(&h.column(1))?;
        let values = mesh
            .points()
            .iter()
            .zip(mesh.normals())
            .enumerate()
            .map(|(i, (x, nx))| {
                let w = column_tractions(&dlp_gradient_raw(&(x - z), e_perp, mat), nx, mat);
                Matrix2::from_columns(&[t0.values()[i], t1.values()[i]]) - w
            })
            .collect();
        Ok(BoundaryMatrixField::new(values))
    }
}

/// Elastic field with prescribed boundary values, `u = D[f] - S[Λ f]`.
#[derive(Debug, Clone)]
pub struct DirichletBackground {
    eval: Arc<DirichletEvaluator>,
    trace: BoundaryField,
    traction: BoundaryField,
}

impl DirichletBackground {
    pub fn trace(&self) -> &BoundaryField {
        &self.trace
    }

    pub fn traction(&self) -> &BoundaryField {
        &self.traction
    }
}

impl ElasticField for DirichletBackground {
    fn displacement(&self, x: &Vector2<f64>) -> Result<Vector2<f64>> {
        let ops = &self.eval.ops;
        ops.check_interior(x)?;
        let (mesh, mat) = (ops.mesh(), ops.material());
        Ok(double_layer(mesh, mat, &self.trace, x) - single_layer(mesh, mat, &self.traction, x))
    }

    fn gradient(&self, x: &Vector2<f64>) -> Result<Matrix2<f64>> {
        let ops = &self.eval.ops;
        ops.check_interior(x)?;
        let (mesh, mat) = (ops.mesh(), ops.material());
        Ok(double_layer_gradient(mesh, mat, &self.trace, x)
            - single_layer_gradient(mesh, mat, &self.traction, x))
    }
}
