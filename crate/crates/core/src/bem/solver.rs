use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Dyn, Matrix2, Vector2, LU};

use super::field::{BoundaryField, BoundaryMatrixField};
use super::mesh::BoundaryMesh;
use super::operators::{
    assemble_k, assemble_s, double_layer, double_layer_gradient, single_layer,
    single_layer_gradient,
};
use crate::error::{Error, Result};
use crate::kernels::{check_unit, dlp_raw, kelvin_gradient_raw, kelvin_raw, rigid_motion_basis};
use crate::material::LameParams;

/// Relative residual accepted from a factorized solve.
pub const SOLVE_TOL: f64 = 1e-10;

/// Relative rigid moment accepted for an equilibrated traction.
pub const EQUILIBRIUM_TOL: f64 = 1e-8;

/// Default minimum distance from the boundary, in units of the largest node spacing.
pub const DEFAULT_MIN_DISTANCE_SPACINGS: f64 = 4.0;

/// Displacement field that can be evaluated with its gradient at interior points.
pub trait ElasticField: Sync {
    fn displacement(&self, x: &Vector2<f64>) -> Result<Vector2<f64>>;

    /// `G[(p, k)] = ∂u_p/∂x_k`.
    fn gradient(&self, x: &Vector2<f64>) -> Result<Matrix2<f64>>;

    fn stress(&self, x: &Vector2<f64>, mat: &LameParams) -> Result<Matrix2<f64>> {
        Ok(crate::kernels::stress(&self.gradient(x)?, mat))
    }
}

/// `u(x) = offset + grad x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineField {
    pub offset: Vector2<f64>,
    pub grad: Matrix2<f64>,
}

impl AffineField {
    pub fn new(offset: Vector2<f64>, grad: Matrix2<f64>) -> Self {
        Self { offset, grad }
    }

    /// Symmetric displacement field whose stress is the constant tensor `sigma`.
    pub fn from_stress(sigma: &Matrix2<f64>, mat: &LameParams) -> Self {
        let sym = (sigma + sigma.transpose()) * 0.5;
        let tr_strain = sym.trace() / (2.0 * (mat.lambda() + mat.mu()));
        let strain = (sym - Matrix2::identity() * (mat.lambda() * tr_strain)) / (2.0 * mat.mu());
        Self {
            offset: Vector2::zeros(),
            grad: strain,
        }
    }
}

impl ElasticField for AffineField {
    fn displacement(&self, x: &Vector2<f64>) -> Result<Vector2<f64>> {
        Ok(self.offset + self.grad * x)
    }

    fn gradient(&self, _x: &Vector2<f64>) -> Result<Matrix2<f64>> {
        Ok(self.grad)
    }
}

/// Assembled `K` and `S` for one mesh and material.
#[derive(Debug)]
pub struct BoundaryOperators {
    mesh: Arc<BoundaryMesh>,
    mat: LameParams,
    k: DMatrix<f64>,
    s: DMatrix<f64>,
}

impl BoundaryOperators {
    pub fn new(mesh: Arc<BoundaryMesh>, mat: LameParams) -> Self {
        let k = assemble_k(&mesh, &mat);
        let s = assemble_s(&mesh, &mat);
        Self { mesh, mat, k, s }
    }

    pub fn mesh(&self) -> &BoundaryMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> Arc<BoundaryMesh> {
        Arc::clone(&self.mesh)
    }

    pub fn material(&self) -> &LameParams {
        &self.mat
    }

    pub fn k(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn s(&self) -> &DMatrix<f64> {
        &self.s
    }

    /// `-½ I + K`.
    pub fn neumann_operator(&self) -> DMatrix<f64> {
        let n = self.k.nrows();
        &self.k - DMatrix::identity(n, n) * 0.5
    }

    pub fn apply_k(&self, f: &BoundaryField) -> Result<BoundaryField> {
        f.check_mesh(&self.mesh)?;
        Ok(BoundaryField::from_dvector(&(&self.k * f.to_dvector())))
    }

    pub fn apply_s(&self, f: &BoundaryField) -> Result<BoundaryField> {
        f.check_mesh(&self.mesh)?;
        Ok(BoundaryField::from_dvector(&(&self.s * f.to_dvector())))
    }

    pub(crate) fn check_interior(&self, x: &Vector2<f64>) -> Result<()> {
        if !x.iter().all(|c| c.is_finite()) || !self.mesh.contains(x) {
            return Err(Error::Domain(format!(
                "point {x:?} is not inside the domain"
            )));
        }
        Ok(())
    }
}

pub(crate) fn factorize(m: DMatrix<f64>) -> Result<(LU<f64, Dyn, Dyn>, DMatrix<f64>)> {
    let lu = m.clone().lu();
    if !lu.is_invertible() {
        return Err(Error::SolveFailed("boundary system is singular".into()));
    }
    Ok((lu, m))
}

pub(crate) fn solve_checked(
    lu: &LU<f64, Dyn, Dyn>,
    m: &DMatrix<f64>,
    rhs: &DVector<f64>,
) -> Result<DVector<f64>> {
    let x = lu
        .solve(rhs)
        .ok_or_else(|| Error::SolveFailed("factorization failed".into()))?;
    let res = (m * &x - rhs).amax();
    let scale = rhs.amax().max(1.0);
    if !(res <= SOLVE_TOL * scale) {
        return Err(Error::SolveFailed(format!(
            "relative residual {:.3e}",
            res / scale
        )));
    }
    Ok(x)
}

/// Factorized Neumann boundary problem `(-½I + K) u = f` on the complement of
/// the rigid motions, and the Neumann function built from it.
///
/// The system is bordered with the quadrature-weighted rigid motions so that
/// one LU factorization enforces `∫ u · ψ dσ = 0` for every right-hand side.
#[derive(Debug)]
pub struct NeumannEvaluator {
    ops: Arc<BoundaryOperators>,
    lu: LU<f64, Dyn, Dyn>,
    bordered: DMatrix<f64>,
    /// rigid motions orthonormal in `L²(∂Ω)`, and their single layers on `∂Ω`
    psi_coeffs: Vec<[f64; 3]>,
    psi: Vec<BoundaryField>,
    s_psi: Vec<BoundaryField>,
    min_distance: f64,
}

impl NeumannEvaluator {
    pub fn new(mesh: BoundaryMesh, mat: LameParams) -> Result<Self> {
        Self::from_operators(Arc::new(BoundaryOperators::new(Arc::new(mesh), mat)))
    }

    pub fn from_operators(ops: Arc<BoundaryOperators>) -> Result<Self> {
        let mesh = ops.mesh();
        let n = mesh.len();
        let psi_coeffs = rigid_coefficients(mesh);
        let psi = orthonormal_rigid_motions(mesh, &psi_coeffs)?;
        let mut b = DMatrix::zeros(2 * n + 3, 2 * n + 3);
        b.view_mut((0, 0), (2 * n, 2 * n))
            .copy_from(&ops.neumann_operator());
        for (q, f) in psi.iter().enumerate() {
            for (i, (v, w)) in f.values().iter().zip(mesh.weights()).enumerate() {
                for c in 0..2 {
                    b[(2 * i + c, 2 * n + q)] = w * v[c];
                    b[(2 * n + q, 2 * i + c)] = w * v[c];
                }
            }
        }
        let (lu, bordered) = factorize(b)?;
        let s_psi = psi
            .iter()
            .map(|f| ops.apply_s(f))
            .collect::<Result<Vec<_>>>()?;
        let min_distance = DEFAULT_MIN_DISTANCE_SPACINGS * mesh.max_spacing();
        Ok(Self {
            ops,
            lu,
            bordered,
            psi_coeffs,
            psi,
            s_psi,
            min_distance,
        })
    }

    /// Overrides the minimum admissible distance of source points from `∂Ω`.
    pub fn with_min_distance(mut self, d0: f64) -> Self {
        self.min_distance = d0;
        self
    }

    pub fn min_distance(&self) -> f64 {
        self.min_distance
    }

    pub fn operators(&self) -> &Arc<BoundaryOperators> {
        &self.ops
    }

    pub fn mesh(&self) -> &BoundaryMesh {
        self.ops.mesh()
    }

    pub fn material(&self) -> &LameParams {
        self.ops.material()
    }

    /// Checks that `z` is inside and at least the minimum distance from the boundary.
    pub fn check_source(&self, z: &Vector2<f64>) -> Result<()> {
        self.ops
            .check_interior(z)
            .map_err(|_| Error::CrackTooCloseToBoundary {
                distance: 0.0,
                required: self.min_distance,
            })?;
        let distance = self.mesh().distance_to_boundary(z);
        if distance < self.min_distance {
            return Err(Error::CrackTooCloseToBoundary {
                distance,
                required: self.min_distance,
            });
        }
        Ok(())
    }

    /// Solves the bordered system; returns the density and the three multipliers.
    ///
    /// The multipliers vanish when `rhs` lies in the range of `-½I + K`.
    pub fn solve_with_multipliers(&self, rhs: &BoundaryField) -> Result<(BoundaryField, [f64; 3])> {
        rhs.check_mesh(self.mesh())?;
        let n = self.mesh().len();
        let mut b = DVector::zeros(2 * n + 3);
        b.rows_mut(0, 2 * n).copy_from(&rhs.to_dvector());
        let x = solve_checked(&self.lu, &self.bordered, &b)?;
        let u = BoundaryField::from_dvector(&x.rows(0, 2 * n).into_owned());
        Ok((u, [x[2 * n], x[2 * n + 1], x[2 * n + 2]]))
    }

    /// Ψ-orthogonal solution of `(-½I + K) u = rhs`.
    pub fn solve(&self, rhs: &BoundaryField) -> Result<BoundaryField> {
        Ok(self.solve_with_multipliers(rhs)?.0)
    }

    fn solve_matrix(&self, rhs: &BoundaryMatrixField) -> Result<BoundaryMatrixField> {
        let c0 = self.solve(&rhs.column(0))?;
        let c1 = self.solve(&rhs.column(1))?;
        Ok(BoundaryMatrixField::from_columns(&c0, &c1))
    }

    /// Background displacement for the equilibrated traction `g`.
    pub fn solve_background(self: &Arc<Self>, g: &BoundaryField) -> Result<BackgroundSolution> {
        g.check_mesh(self.mesh())?;
        g.check_equilibrated(self.mesh(), EQUILIBRIUM_TOL)?;
        let trace = self.solve(&self.ops.apply_s(g)?)?;
        Ok(BackgroundSolution {
            eval: Arc::clone(self),
            trace,
            traction: g.clone(),
        })
    }

    /// `x ↦ ∂N/∂ν_y(x, z)` on `∂Ω`, conormal taken with normal `e_perp` at `z`.
    ///
    /// Entry `(k, j)` is the `j`-th traction component, in `y`, of the `k`-th row of `N`,
    /// so that `∫ ∂N/∂ν_y φ dσ_y` is a matrix-vector product.
    pub fn neumann_conormal_row(
        &self,
        z: &Vector2<f64>,
        e_perp: &Vector2<f64>,
    ) -> Result<BoundaryMatrixField> {
        check_unit(e_perp, "crack normal")?;
        self.check_source(z)?;
        self.neumann_conormal_row_unchecked(z, e_perp)
    }

    /// As [`Self::neumann_conormal_row`] without the distance check; used for
    /// quadrature points on a crack whose center has been checked.
    pub(crate) fn neumann_conormal_row_unchecked(
        &self,
        z: &Vector2<f64>,
        e_perp: &Vector2<f64>,
    ) -> Result<BoundaryMatrixField> {
        let mat = self.material();
        let rhs = BoundaryMatrixField::new(
            self.mesh()
                .points()
                .iter()
                .map(|x| dlp_raw(&(x - z), e_perp, mat))
                .collect(),
        );
        self.solve_matrix(&rhs)
    }

    /// Orthonormal rigid motions evaluated at `y`.
    fn rigid_source_term(&self, y: &Vector2<f64>) -> [Vector2<f64>; 3] {
        let basis = rigid_motion_basis();
        let mut out = [Vector2::zeros(); 3];
        for (o, c) in out.iter_mut().zip(&self.psi_coeffs) {
            *o = basis
                .iter()
                .zip(c.iter())
                .map(|(b, c)| b.eval(y) * *c)
                .sum();
        }
        out
    }

    /// Boundary trace `x ↦ N(x, y)` for an interior source `y`.
    pub fn neumann_trace(&self, y: &Vector2<f64>) -> Result<BoundaryMatrixField> {
        self.check_source(y)?;
        let mat = self.material();
        let psi_y = self.rigid_source_term(y);
        let rhs = BoundaryMatrixField::new(
            self.mesh()
                .points()
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    let mut m = kelvin_raw(&(x - y), mat);
                    for (sp, py) in self.s_psi.iter().zip(&psi_y) {
                        m -= sp.values()[i] * py.transpose();
                    }
                    m
                })
                .collect(),
        );
        self.solve_matrix(&rhs)
    }

    /// Neumann function `N(x, y)` for interior `x ≠ y`.
    pub fn neumann_function(&self, x: &Vector2<f64>, y: &Vector2<f64>) -> Result<Matrix2<f64>> {
        self.ops.check_interior(x)?;
        let trace = self.neumann_trace(y)?;
        let (mesh, mat) = (self.mesh(), self.material());
        if x == y {
            return Err(Error::Domain(
                "Neumann function evaluated at its source".into(),
            ));
        }
        let mut out = -kelvin_raw(&(x - y), mat);
        for j in 0..2 {
            let d = double_layer(mesh, mat, &trace.column(j), x);
            out.set_column(j, &(out.column(j) + d));
        }
        for (f, py) in self.psi.iter().zip(self.rigid_source_term(y)) {
            out += single_layer(mesh, mat, f, x) * py.transpose();
        }
        Ok(out)
    }

    /// `x`-gradient of `N(x, y)`: entry `[k][(p, j)] = ∂_k N_pj`.
    pub fn neumann_function_gradient(
        &self,
        x: &Vector2<f64>,
        y: &Vector2<f64>,
    ) -> Result<[Matrix2<f64>; 2]> {
        self.ops.check_interior(x)?;
        if x == y {
            return Err(Error::Domain(
                "Neumann function evaluated at its source".into(),
            ));
        }
        let trace = self.neumann_trace(y)?;
        let (mesh, mat) = (self.mesh(), self.material());
        let dk = kelvin_gradient_raw(&(x - y), mat);
        let mut out = [-dk[0], -dk[1]];
        let psi_y = self.rigid_source_term(y);
        for j in 0..2 {
            let mut g = double_layer_gradient(mesh, mat, &trace.column(j), x);
            for (f, py) in self.psi.iter().zip(&psi_y) {
                g += single_layer_gradient(mesh, mat, f, x) * py[j];
            }
            for (k, o) in out.iter_mut().enumerate() {
                o.set_column(j, &(o.column(j) + g.column(k)));
            }
        }
        Ok(out)
    }
}

/// Coefficients of the `L²(∂Ω)`-orthonormalized rigid motions in the generator basis.
fn rigid_coefficients(mesh: &BoundaryMesh) -> Vec<[f64; 3]> {
    let gram = super::field::rigid_gram(mesh);
    // Gram-Schmidt in coefficient space with the Gram inner product
    let mut out: Vec<[f64; 3]> = Vec::with_capacity(3);
    for q in 0..3 {
        let mut c = [0.0; 3];
        c[q] = 1.0;
        for prev in &out {
            let ip: f64 = (0..3)
                .map(|a| (0..3).map(|b| c[a] * gram[(a, b)] * prev[b]).sum::<f64>())
                .sum();
            for a in 0..3 {
                c[a] -= ip * prev[a];
            }
        }
        let norm: f64 = (0..3)
            .map(|a| (0..3).map(|b| c[a] * gram[(a, b)] * c[b]).sum::<f64>())
            .sum::<f64>()
            .sqrt();
        for v in &mut c {
            *v /= norm;
        }
        out.push(c);
    }
    out
}

fn orthonormal_rigid_motions(
    mesh: &BoundaryMesh,
    coeffs: &[[f64; 3]],
) -> Result<Vec<BoundaryField>> {
    let basis = rigid_motion_basis();
    if coeffs.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::InvalidMesh(
            "degenerate rigid-motion Gram matrix".into(),
        ));
    }
    Ok(coeffs
        .iter()
        .map(|c| {
            BoundaryField::from_fn(mesh, |p| {
                basis
                    .iter()
                    .zip(c.iter())
                    .map(|(b, c)| b.eval(p) * *c)
                    .sum()
            })
        })
        .collect())
}

/// Background displacement `u₀`: boundary trace plus interior representation
/// `u₀ = D[u₀] - S[g]`.
#[derive(Debug, Clone)]
pub struct BackgroundSolution {
    eval: Arc<NeumannEvaluator>,
    trace: BoundaryField,
    traction: BoundaryField,
}

impl BackgroundSolution {
    pub fn trace(&self) -> &BoundaryField {
        &self.trace
    }

    pub fn traction(&self) -> &BoundaryField {
        &self.traction
    }

    pub fn evaluator(&self) -> &Arc<NeumannEvaluator> {
        &self.eval
    }
}

impl ElasticField for BackgroundSolution {
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
