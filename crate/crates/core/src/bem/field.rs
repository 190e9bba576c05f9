use nalgebra::{DVector, Matrix2, Matrix3, Vector2, Vector3};

use super::mesh::BoundaryMesh;
use crate::error::{Error, Result};
use crate::kernels::rigid_motion_basis;

/// Vector field sampled at the nodes of a [`BoundaryMesh`].
///
/// The mesh is not stored; operations that integrate take it explicitly and
/// check the node count.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundaryField {
    values: Vec<Vector2<f64>>,
}

impl BoundaryField {
    pub fn new(values: Vec<Vector2<f64>>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![Vector2::zeros(); n],
        }
    }

    /// Samples `f` at the mesh nodes.
    pub fn from_fn(mesh: &BoundaryMesh, f: impl Fn(&Vector2<f64>) -> Vector2<f64>) -> Self {
        Self {
            values: mesh.points().iter().map(f).collect(),
        }
    }

    /// Samples `f(point, normal)`, e.g. a traction `σ n`.
    pub fn from_fn_normal(
        mesh: &BoundaryMesh,
        f: impl Fn(&Vector2<f64>, &Vector2<f64>) -> Vector2<f64>,
    ) -> Self {
        let values = mesh
            .points()
            .iter()
            .zip(mesh.normals())
            .map(|(p, n)| f(p, n))
            .collect();
        Self { values }
    }

    /// Interleaved layout `[u1(x_0), u2(x_0), u1(x_1), ...]`.
    pub fn from_dvector(v: &DVector<f64>) -> Self {
        Self {
            values: v
                .as_slice()
                .chunks_exact(2)
                .map(|c| Vector2::new(c[0], c[1]))
                .collect(),
        }
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_iterator(2 * self.len(), self.values.iter().flat_map(|v| [v.x, v.y]))
    }

    pub fn values(&self) -> &[Vector2<f64>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_mesh(&self, mesh: &BoundaryMesh) -> Result<()> {
        if self.len() != mesh.len() {
            return Err(Error::MeshMismatch {
                expected: mesh.len(),
                found: self.len(),
            });
        }
        Ok(())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `∫ f · g dσ` by the mesh quadrature.
    pub fn inner(&self, other: &Self, mesh: &BoundaryMesh) -> Result<f64> {
        self.check_mesh(mesh)?;
        other.check_mesh(mesh)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(mesh.weights())
            .map(|((a, b), w)| a.dot(b) * w)
            .sum())
    }

    /// `∫ f · ψ dσ` for the translations and the rotation.
    pub fn rigid_moments(&self, mesh: &BoundaryMesh) -> Result<Vector3<f64>> {
        self.check_mesh(mesh)?;
        let mut m = Vector3::zeros();
        for ((v, p), w) in self.values.iter().zip(mesh.points()).zip(mesh.weights()) {
            for (q, psi) in rigid_motion_basis().iter().enumerate() {
                m[q] += psi.eval(p).dot(v) * w;
            }
        }
        Ok(m)
    }

    /// Removes the `L²(∂Ω)` projection onto the rigid motions.
    pub fn project_onto_l2psi(&self, mesh: &BoundaryMesh) -> Result<Self> {
        let m = self.rigid_moments(mesh)?;
        let c = rigid_gram(mesh)
            .lu()
            .solve(&m)
            .ok_or_else(|| Error::SolveFailed("singular rigid-motion Gram matrix".into()))?;
        let basis = rigid_motion_basis();
        let values = self
            .values
            .iter()
            .zip(mesh.points())
            .map(|(v, p)| {
                v - basis
                    .iter()
                    .zip(c.iter())
                    .map(|(psi, c)| psi.eval(p) * *c)
                    .sum::<Vector2<f64>>()
            })
            .collect();
        Ok(Self { values })
    }

    /// Rigid moments scaled by `‖f‖_{L²} ‖ψ‖_{L²}`; zero for a field in `L²_Ψ`.
    pub fn relative_rigid_moment(&self, mesh: &BoundaryMesh) -> Result<f64> {
        let m = self.rigid_moments(mesh)?;
        let norm = self.inner(self, mesh)?.sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        let gram = rigid_gram(mesh);
        Ok((0..3)
            .map(|q| m[q].abs() / (norm * gram[(q, q)].sqrt()))
            .fold(0.0, f64::max))
    }

    /// Checks `∫ f · ψ dσ = 0` relative to the field size.
    pub fn check_equilibrated(&self, mesh: &BoundaryMesh, tol: f64) -> Result<()> {
        let moment = self.relative_rigid_moment(mesh)?;
        if moment > tol {
            return Err(Error::EquilibriumViolated { moment });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            values: self.values.iter().map(|a| a * s).collect(),
        }
    }

    pub fn max_difference(&self, other: &Self) -> f64 {
        self.sub(other).sup_norm()
    }
}

/// `∫ ψ_p · ψ_q dσ` over the three rigid-motion generators.
pub(crate) fn rigid_gram(mesh: &BoundaryMesh) -> Matrix3<f64> {
    let basis = rigid_motion_basis();
    let mut g = Matrix3::zeros();
    for (p, w) in mesh.points().iter().zip(mesh.weights()) {
        for a in 0..3 {
            for b in 0..3 {
                g[(a, b)] += basis[a].eval(p).dot(&basis[b].eval(p)) * w;
            }
        }
    }
    g
}

/// Matrix-valued boundary field, one `2×2` block per node.
///
/// Column `j` of every block forms a [`BoundaryField`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundaryMatrixField {
    values: Vec<Matrix2<f64>>,
}

impl BoundaryMatrixField {
    pub fn new(values: Vec<Matrix2<f64>>) -> Self {
        Self { values }
    }

    pub fn from_columns(c0: &BoundaryField, c1: &BoundaryField) -> Self {
        let values = c0
            .values()
            .iter()
            .zip(c1.values())
            .map(|(a, b)| Matrix2::from_columns(&[*a, *b]))
            .collect();
        Self { values }
    }

    pub fn values(&self) -> &[Matrix2<f64>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn column(&self, j: usize) -> BoundaryField {
        BoundaryField::new(
            self.values
                .iter()
                .map(|m| m.column(j).into_owned())
                .collect(),
        )
    }

    /// Node-wise product `M(x) v`.
    pub fn apply(&self, v: &Vector2<f64>) -> BoundaryField {
        BoundaryField::new(self.values.iter().map(|m| m * v).collect())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|m| m.norm()).fold(0.0, f64::max)
    }

    pub fn max_difference(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}
