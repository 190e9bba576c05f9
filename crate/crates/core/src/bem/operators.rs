//! Nyström discretizations of the boundary operators on a smooth closed curve.
//!
//! Unknowns are interleaved, `[u1(x_0), u2(x_0), u1(x_1), ...]`.
//!
//! * `K`: the double-layer kernel splits into a continuous part and a skew
//!   Cauchy part `a (x'·r)/ρ² J`. The Cauchy part is replaced by
//!   `(a/2) cot((t_i - t)/2) J`, whose periodic principal value has an exact
//!   trigonometric quadrature, plus a smooth remainder.
//! * `S`: the logarithmic part uses Kress' product weights for
//!   `log(4 sin²((t_i - t)/2))`, the rest is smooth.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2, Vector2};
use rayon::prelude::*;

use super::field::BoundaryField;
use super::mesh::BoundaryMesh;
use crate::kernels::{dlp_gradient_raw, dlp_raw, dlp_split, kelvin_gradient_raw, kelvin_raw};
use crate::material::LameParams;

const J: Matrix2<f64> = Matrix2::new(0.0, 1.0, -1.0, 0.0);

fn assemble_rows(
    n: usize,
    row_block: impl Fn(usize) -> Vec<Matrix2<f64>> + Sync + Send,
) -> DMatrix<f64> {
    let rows: Vec<Vec<Matrix2<f64>>> = (0..n).into_par_iter().map(&row_block).collect();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for (i, row) in rows.iter().enumerate() {
        for (j, b) in row.iter().enumerate() {
            m.fixed_view_mut::<2, 2>(2 * i, 2 * j).copy_from(b);
        }
    }
    m
}

/// Weights `Q(d)` with `Σ_j Q(t_i - t_j) f(t_j) ≈ p.v.∫ cot((t_i - t)/2) f(t) dt`.
fn cot_weights(n: usize) -> Vec<f64> {
    let h = 2.0 * PI / n as f64;
    (0..n)
        .map(|k| {
            let d = h * k as f64;
            (1..n / 2).map(|m| (m as f64 * d).sin()).sum::<f64>() * 4.0 * PI / n as f64
        })
        .collect()
}

/// Kress weights `R(d)` for `∫ log(4 sin²((t_i - t)/2)) f(t) dt`.
fn log_weights(n: usize) -> Vec<f64> {
    let h = 2.0 * PI / n as f64;
    let nf = n as f64;
    (0..n)
        .map(|k| {
            let d = h * k as f64;
            let s: f64 = (1..n / 2).map(|m| (m as f64 * d).cos() / m as f64).sum();
            -4.0 * PI / nf * s - 4.0 * PI / (nf * nf) * (0.5 * nf * d).cos()
        })
        .collect()
}

/// Principal-value double-layer operator `K` on the mesh.
pub fn assemble_k(mesh: &BoundaryMesh, mat: &LameParams) -> DMatrix<f64> {
    let n = mesh.len();
    let h = 2.0 * PI / n as f64;
    let (a, b) = (mat.dlp_a(), mat.dlp_b());
    let q = cot_weights(n);
    let (pts, nrm, d1, d2, sp) = (
        mesh.points(),
        mesh.normals(),
        mesh.derivatives(),
        mesh.second_derivatives(),
        mesh.speeds(),
    );
    assemble_rows(n, |i| {
        (0..n)
            .map(|j| {
                let k = (i + n - j) % n;
                let cauchy = J * (0.5 * a * q[k]);
                if i == j {
                    let tau = d1[i] / sp[i];
                    let curv = d2[i].dot(&nrm[i]) / (2.0 * sp[i]);
                    let reg = (Matrix2::identity() * a + tau * tau.transpose() * b) * (curv * h);
                    let skew = -a * d1[i].dot(&d2[i]) / (2.0 * sp[i] * sp[i]);
                    reg + J * (skew * h) + cauchy
                } else {
                    let r = pts[i] - pts[j];
                    let (reg, skew) = dlp_split(&r, &nrm[j], mat);
                    let d = h * k as f64;
                    let smooth_skew = skew * sp[j] - 0.5 * a / (0.5 * d).tan();
                    reg * (sp[j] * h) + J * (smooth_skew * h) + cauchy
                }
            })
            .collect()
    })
}

/// Single-layer operator `S` on the mesh.
pub fn assemble_s(mesh: &BoundaryMesh, mat: &LameParams) -> DMatrix<f64> {
    let n = mesh.len();
    let h = 2.0 * PI / n as f64;
    let alpha = mat.kelvin_a() / (2.0 * PI);
    let beta = mat.kelvin_b() / (2.0 * PI);
    let rw = log_weights(n);
    let (pts, d1, sp) = (mesh.points(), mesh.derivatives(), mesh.speeds());
    assemble_rows(n, |i| {
        (0..n)
            .map(|j| {
                let k = (i + n - j) % n;
                let (log_smooth, dyad) = if i == j {
                    let tau = d1[i] / sp[i];
                    (2.0 * sp[i].ln(), tau * tau.transpose())
                } else {
                    let r = pts[i] - pts[j];
                    let rho2 = r.norm_squared();
                    let d = h * k as f64;
                    let s = (0.5 * d).sin();
                    ((rho2 / (4.0 * s * s)).ln(), r * r.transpose() / rho2)
                };
                let iso = alpha * (0.5 * rw[k] + 0.5 * h * log_smooth);
                (Matrix2::identity() * iso - dyad * (beta * h)) * sp[j]
            })
            .collect()
    })
}

/// Double-layer potential `D[φ](x)` at an interior point.
pub fn double_layer(
    mesh: &BoundaryMesh,
    mat: &LameParams,
    phi: &BoundaryField,
    x: &Vector2<f64>,
) -> Vector2<f64> {
    mesh.points()
        .iter()
        .zip(mesh.normals())
        .zip(mesh.weights())
        .zip(phi.values())
        .map(|(((y, n), w), f)| dlp_raw(&(x - y), n, mat) * f * *w)
        .sum()
}

/// Gradient `G[(p, k)] = ∂_k D[φ]_p` at an interior point.
pub fn double_layer_gradient(
    mesh: &BoundaryMesh,
    mat: &LameParams,
    phi: &BoundaryField,
    x: &Vector2<f64>,
) -> Matrix2<f64> {
    let mut g = Matrix2::zeros();
    for (((y, n), w), f) in mesh
        .points()
        .iter()
        .zip(mesh.normals())
        .zip(mesh.weights())
        .zip(phi.values())
    {
        let dm = dlp_gradient_raw(&(x - y), n, mat);
        for k in 0..2 {
            g.set_column(k, &(g.column(k) + dm[k] * f * *w));
        }
    }
    g
}

/// Single-layer potential `S[g](x)` at an interior point.
pub fn single_layer(
    mesh: &BoundaryMesh,
    mat: &LameParams,
    g: &BoundaryField,
    x: &Vector2<f64>,
) -> Vector2<f64> {
    mesh.points()
        .iter()
        .zip(mesh.weights())
        .zip(g.values())
        .map(|((y, w), f)| kelvin_raw(&(x - y), mat) * f * *w)
        .sum()
}

/// Gradient of the single-layer potential at an interior point.
pub fn single_layer_gradient(
    mesh: &BoundaryMesh,
    mat: &LameParams,
    g: &BoundaryField,
    x: &Vector2<f64>,
) -> Matrix2<f64> {
    let mut out = Matrix2::zeros();
    for ((y, w), f) in mesh.points().iter().zip(mesh.weights()).zip(g.values()) {
        let dk = kelvin_gradient_raw(&(x - y), mat);
        for k in 0..2 {
            out.set_column(k, &(out.column(k) + dk[k] * f * *w));
        }
    }
    out
}
