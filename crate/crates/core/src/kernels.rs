//! Fundamental solution of the two-dimensional Lamé system and the layer
//! kernels built from it.
//!
//! Conventions used throughout the crate:
//!
//! * a displacement gradient is stored as `G[(p, k)] = ∂u_p/∂x_k`;
//! * the double-layer kernel `M(x, y)` acts as `D[u](x) = ∫ M(x, y) u(y) dσ(y)`,
//!   i.e. row `k` of `M` is the traction (normal `n_y`) of the field
//!   `y ↦ Φ(x - y) e_k`;
//! * gradients of kernels are returned as `[∂/∂x_1, ∂/∂x_2]`.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::material::LameParams;

const UNIT_TOL: f64 = 1e-10;

pub(crate) fn check_unit(v: &Vector2<f64>, what: &str) -> Result<()> {
    if !v.iter().all(|c| c.is_finite()) || (v.norm() - 1.0).abs() > UNIT_TOL {
        return Err(Error::Domain(format!(
            "{what} must be a unit vector, got {v:?}"
        )));
    }
    Ok(())
}

fn check_offset(dx: &Vector2<f64>) -> Result<()> {
    if dx.norm_squared() == 0.0 || !dx.iter().all(|c| c.is_finite()) {
        return Err(Error::Domain(
            "kernel evaluated at its singular point".into(),
        ));
    }
    Ok(())
}

/// Rotation by +90 degrees.
#[inline]
pub fn rot90(v: &Vector2<f64>) -> Vector2<f64> {
    Vector2::new(-v.y, v.x)
}

/// Kelvin matrix `Φ(dx)`.
pub fn kelvin_matrix(dx: &Vector2<f64>, mat: &LameParams) -> Result<Matrix2<f64>> {
    check_offset(dx)?;
    Ok(kelvin_raw(dx, mat))
}

#[inline]
pub(crate) fn kelvin_raw(dx: &Vector2<f64>, mat: &LameParams) -> Matrix2<f64> {
    let r2 = dx.norm_squared();
    let alpha = mat.kelvin_a() / (2.0 * PI);
    let beta = mat.kelvin_b() / (2.0 * PI);
    let log_r = 0.5 * r2.ln();
    Matrix2::identity() * (alpha * log_r) - dx * dx.transpose() * (beta / r2)
}

/// Partial derivatives of the Kelvin matrix with respect to the components of `dx`.
pub fn kelvin_gradient(dx: &Vector2<f64>, mat: &LameParams) -> Result<[Matrix2<f64>; 2]> {
    check_offset(dx)?;
    Ok(kelvin_gradient_raw(dx, mat))
}

#[inline]
pub(crate) fn kelvin_gradient_raw(dx: &Vector2<f64>, mat: &LameParams) -> [Matrix2<f64>; 2] {
    let r2 = dx.norm_squared();
    let alpha = mat.kelvin_a() / (2.0 * PI);
    let beta = mat.kelvin_b() / (2.0 * PI);
    let mut out = [Matrix2::zeros(); 2];
    for (k, g) in out.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                let dik = if i == k { 1.0 } else { 0.0 };
                let djk = if j == k { 1.0 } else { 0.0 };
                let dij = if i == j { 1.0 } else { 0.0 };
                g[(i, j)] = alpha * dij * dx[k] / r2 - beta * (dik * dx[j] + djk * dx[i]) / r2
                    + 2.0 * beta * dx[i] * dx[j] * dx[k] / (r2 * r2);
            }
        }
    }
    out
}

/// Symbol `T(ξ)` of the conormal derivative for the normal `normal`.
pub fn traction_operator(
    normal: &Vector2<f64>,
    xi: &Vector2<f64>,
    mat: &LameParams,
) -> Result<Matrix2<f64>> {
    check_unit(normal, "normal")?;
    let (l, m) = (mat.lambda(), mat.mu());
    let (n1, n2) = (normal.x, normal.y);
    let (x1, x2) = (xi.x, xi.y);
    Ok(Matrix2::new(
        (l + 2.0 * m) * n1 * x1 + m * n2 * x2,
        m * n2 * x1 + l * n1 * x2,
        l * n2 * x1 + m * n1 * x2,
        m * n1 * x1 + (l + 2.0 * m) * n2 * x2,
    ))
}

/// Stress tensor of a displacement gradient.
#[inline]
pub fn stress(grad_u: &Matrix2<f64>, mat: &LameParams) -> Matrix2<f64> {
    Matrix2::identity() * (mat.lambda() * grad_u.trace()) + (grad_u + grad_u.transpose()) * mat.mu()
}

/// Traction `λ (∇·u) n + μ (∇u + ∇uᵀ) n`.
#[inline]
pub fn conormal_derivative(
    grad_u: &Matrix2<f64>,
    normal: &Vector2<f64>,
    mat: &LameParams,
) -> Vector2<f64> {
    stress(grad_u, mat) * normal
}

/// Double-layer kernel `∂Φ/∂ν_y (x - y)` with normal `normal_y` at `y`.
pub fn dlp_traction_kernel(
    x: &Vector2<f64>,
    y: &Vector2<f64>,
    normal_y: &Vector2<f64>,
    mat: &LameParams,
) -> Result<Matrix2<f64>> {
    check_unit(normal_y, "normal")?;
    let r = x - y;
    check_offset(&r)?;
    Ok(dlp_raw(&r, normal_y, mat))
}

/// Same kernel split into its bounded part and the Cauchy-singular skew coefficient:
/// `M = regular + skew * [[0, 1], [-1, 0]]`.
#[inline]
pub(crate) fn dlp_split(
    r: &Vector2<f64>,
    n: &Vector2<f64>,
    mat: &LameParams,
) -> (Matrix2<f64>, f64) {
    let (a, b) = (mat.dlp_a(), mat.dlp_b());
    let r2 = r.norm_squared();
    let rn = r.dot(n) / r2;
    let regular = (Matrix2::identity() * a + r * r.transpose() * (b / r2)) * rn;
    let skew = -a * (n.y * r.x - n.x * r.y) / r2;
    (regular, skew)
}

#[inline]
pub(crate) fn dlp_raw(r: &Vector2<f64>, n: &Vector2<f64>, mat: &LameParams) -> Matrix2<f64> {
    let (regular, skew) = dlp_split(r, n, mat);
    regular + Matrix2::new(0.0, skew, -skew, 0.0)
}

/// Derivatives of the double-layer kernel with respect to the target point `x`.
pub fn dlp_kernel_gradient(
    x: &Vector2<f64>,
    y: &Vector2<f64>,
    normal_y: &Vector2<f64>,
    mat: &LameParams,
) -> Result<[Matrix2<f64>; 2]> {
    check_unit(normal_y, "normal")?;
    let r = x - y;
    check_offset(&r)?;
    Ok(dlp_gradient_raw(&r, normal_y, mat))
}

#[inline]
pub(crate) fn dlp_gradient_raw(
    r: &Vector2<f64>,
    n: &Vector2<f64>,
    mat: &LameParams,
) -> [Matrix2<f64>; 2] {
    let (a, b) = (mat.dlp_a(), mat.dlp_b());
    let r2 = r.norm_squared();
    let r4 = r2 * r2;
    let s = r.dot(n);
    let mut out = [Matrix2::zeros(); 2];
    for (k, g) in out.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                let dij = if i == j { 1.0 } else { 0.0 };
                let dik = if i == k { 1.0 } else { 0.0 };
                let djk = if j == k { 1.0 } else { 0.0 };
                let iso = a * dij * (n[k] / r2 - 2.0 * s * r[k] / r4);
                let dyad = b
                    * ((dik * r[j] + djk * r[i]) * s / r4 + r[i] * r[j] * n[k] / r4
                        - 4.0 * r[i] * r[j] * s * r[k] / (r4 * r2));
                let skew = -a
                    * ((n[j] * dik - n[i] * djk) / r2
                        - 2.0 * (n[j] * r[i] - n[i] * r[j]) * r[k] / r4);
                g[(i, j)] = iso + dyad + skew;
            }
        }
    }
    out
}

/// Traction of each column of a matrix-valued field, given the `x`-gradient of the field.
#[inline]
pub(crate) fn column_tractions(
    grad: &[Matrix2<f64>; 2],
    normal: &Vector2<f64>,
    mat: &LameParams,
) -> Matrix2<f64> {
    let mut out = Matrix2::zeros();
    for j in 0..2 {
        // G[(p, k)] = ∂_k F_pj
        let g = Matrix2::new(
            grad[0][(0, j)],
            grad[1][(0, j)],
            grad[0][(1, j)],
            grad[1][(1, j)],
        );
        out.set_column(j, &conormal_derivative(&g, normal, mat));
    }
    out
}

/// Hypersingular kernel `W(x, y) = ∂/∂ν_x (∂Φ/∂ν_y)(x - y)` for arbitrary normals at `x` and `y`.
pub fn hypersingular_kernel(
    x: &Vector2<f64>,
    y: &Vector2<f64>,
    normal_x: &Vector2<f64>,
    normal_y: &Vector2<f64>,
    mat: &LameParams,
) -> Result<Matrix2<f64>> {
    check_unit(normal_x, "normal")?;
    let grad = dlp_kernel_gradient(x, y, normal_y, mat)?;
    Ok(column_tractions(&grad, normal_x, mat))
}

/// `W` on a straight crack lying on the `x_1` axis with both normals `(0, 1)`.
pub fn hypersingular_kernel_canonical(x1: f64, y1: f64, mat: &LameParams) -> Result<Matrix2<f64>> {
    let d = x1 - y1;
    if d == 0.0 || !d.is_finite() {
        return Err(Error::Domain(
            "hypersingular kernel evaluated at x1 = y1".into(),
        ));
    }
    Ok(Matrix2::identity() * (-mat.young() / (4.0 * PI * d * d)))
}

/// Generators of the rigid motions `span{(1,0), (0,1), (y,-x)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RigidMotion {
    TranslateX,
    TranslateY,
    Rotate,
}

impl RigidMotion {
    pub fn eval(&self, p: &Vector2<f64>) -> Vector2<f64> {
        match self {
            RigidMotion::TranslateX => Vector2::new(1.0, 0.0),
            RigidMotion::TranslateY => Vector2::new(0.0, 1.0),
            RigidMotion::Rotate => Vector2::new(p.y, -p.x),
        }
    }

    pub fn gradient(&self) -> Matrix2<f64> {
        match self {
            RigidMotion::Rotate => Matrix2::new(0.0, 1.0, -1.0, 0.0),
            _ => Matrix2::zeros(),
        }
    }
}

pub fn rigid_motion_basis() -> [RigidMotion; 3] {
    [
        RigidMotion::TranslateX,
        RigidMotion::TranslateY,
        RigidMotion::Rotate,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(x: f64, y: f64) -> Vector2<f64> {
        Vector2::new(x, y)
    }

    #[test]
    fn kelvin_examples() {
        let m = LameParams::new(0.0, 1.0).unwrap();
        let k = kelvin_matrix(&v(1.0, 0.0), &m).unwrap();
        assert_relative_eq!(k[(0, 0)], -1.0 / (8.0 * PI), epsilon = 1e-16);
        assert_eq!(k[(0, 1)], 0.0);
        assert_eq!(k[(1, 1)], 0.0);

        let m = LameParams::new(1.0, 1.0).unwrap();
        let k = kelvin_matrix(&v(1.0, 1.0), &m).unwrap();
        assert_relative_eq!(k[(0, 1)], -1.0 / (12.0 * PI), epsilon = 1e-16);
        assert_relative_eq!(k, kelvin_matrix(&v(-1.0, -1.0), &m).unwrap());
        assert_relative_eq!(k, k.transpose());
        assert!(kelvin_matrix(&v(0.0, 0.0), &m).is_err());
    }

    #[test]
    fn traction_operator_examples() {
        let m = LameParams::new(1.0, 1.0).unwrap();
        let t = traction_operator(&v(0.0, 1.0), &v(0.0, 1.0), &m).unwrap();
        assert_eq!(t, Matrix2::new(1.0, 0.0, 0.0, 3.0));
        let t = traction_operator(&v(0.6, 0.8), &v(0.0, 0.0), &m).unwrap();
        assert_eq!(t, Matrix2::zeros());
        let m2 = LameParams::new(2.0, 1.0).unwrap();
        let t = traction_operator(&v(1.0, 0.0), &v(1.0, 0.0), &m2).unwrap();
        assert_eq!(t, Matrix2::new(4.0, 0.0, 0.0, 1.0));
        assert!(traction_operator(&v(1.0, 1.0), &v(1.0, 0.0), &m).is_err());
    }

    #[test]
    fn traction_operator_matches_conormal_derivative() {
        // T(∂)u for u = G x equals σ(G) n.
        let m = LameParams::new(1.3, 0.8).unwrap();
        let n = v(0.28, -0.96);
        let g = Matrix2::new(0.3, -1.2, 0.7, 2.1);
        let mut tu = Vector2::zeros();
        for k in 0..2 {
            let mut xi = Vector2::zeros();
            xi[k] = 1.0;
            tu += traction_operator(&n, &xi, &m).unwrap() * g.column(k);
        }
        assert_relative_eq!(tu, conormal_derivative(&g, &n, &m), epsilon = 1e-14);
    }

    #[test]
    fn conormal_examples() {
        let m = LameParams::new(1.0, 1.0).unwrap();
        let rot = Matrix2::new(0.0, 2.5, -2.5, 0.0);
        assert_eq!(
            conormal_derivative(&rot, &v(0.6, 0.8), &m),
            Vector2::zeros()
        );
        assert_eq!(
            conormal_derivative(&Matrix2::identity(), &v(1.0, 0.0), &m),
            v(4.0, 0.0)
        );
        let shear = Matrix2::new(0.0, 1.0, 1.0, 0.0);
        assert_eq!(conormal_derivative(&shear, &v(0.0, 1.0), &m), v(2.0, 0.0));
    }

    #[test]
    fn dlp_examples() {
        let m = LameParams::new(1.0, 1.0).unwrap();
        let k = dlp_traction_kernel(&v(0.0, 1.0), &v(0.0, 0.0), &v(0.0, 1.0), &m).unwrap();
        assert_relative_eq!(k[(0, 0)], -1.0 / (6.0 * PI), epsilon = 1e-15);
        assert_relative_eq!(k[(1, 1)], -5.0 / (6.0 * PI), epsilon = 1e-15);
        assert_relative_eq!(k[(0, 1)], 0.0, epsilon = 1e-15);

        // normal orthogonal to x - y: only the skew part survives
        let k = dlp_traction_kernel(&v(2.0, 0.0), &v(0.0, 0.0), &v(0.0, 1.0), &m).unwrap();
        assert_eq!(k[(0, 0)], 0.0);
        assert_eq!(k[(1, 1)], 0.0);
        assert_relative_eq!(k[(0, 1)], -k[(1, 0)]);
        assert!(dlp_traction_kernel(&v(1.0, 1.0), &v(1.0, 1.0), &v(0.0, 1.0), &m).is_err());
    }

    #[test]
    fn canonical_hypersingular_examples() {
        let m = LameParams::new(1.0, 1.0).unwrap();
        let w = hypersingular_kernel_canonical(1.5, 0.5, &m).unwrap();
        assert_relative_eq!(
            w,
            Matrix2::identity() * (-2.0 / (3.0 * PI)),
            epsilon = 1e-15
        );
        assert_eq!(w, hypersingular_kernel_canonical(0.5, 1.5, &m).unwrap());
        assert!(hypersingular_kernel_canonical(0.2, 0.2, &m).is_err());
        // the general kernel reduces to the canonical one on the x1 axis
        let e2 = v(0.0, 1.0);
        let wg = hypersingular_kernel(&v(0.3, 0.0), &v(-0.4, 0.0), &e2, &e2, &m).unwrap();
        let wc = hypersingular_kernel_canonical(0.3, -0.4, &m).unwrap();
        assert_relative_eq!(wg, wc, max_relative = 1e-13, epsilon = 1e-15);
    }

    #[test]
    fn rigid_motions() {
        let m = LameParams::new(1.0, 1.0).unwrap();
        let basis = rigid_motion_basis();
        assert_eq!(basis[2].eval(&v(2.0, 3.0)), v(3.0, -2.0));
        for g in basis {
            assert_eq!(
                conormal_derivative(&g.gradient(), &v(0.6, 0.8), &m),
                Vector2::zeros()
            );
        }
        // gradient matches the field: (y, -x) has ∂u1/∂y = 1, ∂u2/∂x = -1
        let p = v(0.4, -0.9);
        let h = 1e-6;
        let g = RigidMotion::Rotate.gradient();
        for k in 0..2 {
            let mut dp = Vector2::zeros();
            dp[k] = h;
            let d = (RigidMotion::Rotate.eval(&(p + dp)) - RigidMotion::Rotate.eval(&(p - dp)))
                / (2.0 * h);
            assert_relative_eq!(d, g.column(k).into_owned(), epsilon = 1e-9);
        }
    }
}
