//! Straight crack `γ_ε = {z + s e : |s| ≤ ε/2}` inside the body, coupled to the
//! outer boundary through the Neumann boundary equation.
//!
//! The opening `φ(s)` is stored through the scaled density
//! `ψ(x) = (2/ε) φ(εx/2)` expanded per component on `√(1-x²) U_n(x)`.
//! On the crack the density solves `A[ψ] = -(4/E) f` where `f` is the
//! traction of `u₀ + D_Ω[w]`, and `w` solves `(-½I + K) w = D_ε[φ]` on `∂Ω`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::bem::operators::double_layer_gradient;
use crate::bem::{BackgroundSolution, BoundaryField, ElasticField, NeumannEvaluator};
use crate::error::{Error, Result};
use crate::hilbert::{chebyshev_nodes, invert_a_samples, ChebyshevUExpansion, DEFAULT_MODES};
use crate::kernels::{check_unit, dlp_raw, rot90, stress};
use crate::quadrature::gauss_chebyshev_second;

/// Segment with center `z`, unit tangent `e`, normal `e_perp = rot90(e)` and length `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrackSegment {
    z: Vector2<f64>,
    e: Vector2<f64>,
    e_perp: Vector2<f64>,
    eps: f64,
}

impl CrackSegment {
    pub fn new(z: Vector2<f64>, e: Vector2<f64>, eps: f64) -> Result<Self> {
        check_unit(&e, "crack tangent")?;
        if !(eps.is_finite() && eps > 0.0) || !z.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "crack length must be positive, got {eps}"
            )));
        }
        Ok(Self {
            z,
            e,
            e_perp: rot90(&e),
            eps,
        })
    }

    /// Crack whose normal `e_perp` makes the angle `theta` (radians) with the `x_1` axis.
    pub fn from_normal_angle(z: Vector2<f64>, theta: f64, eps: f64) -> Result<Self> {
        Self::new(z, Vector2::new(theta.sin(), -theta.cos()), eps)
    }

    pub fn center(&self) -> Vector2<f64> {
        self.z
    }

    pub fn tangent(&self) -> Vector2<f64> {
        self.e
    }

    pub fn normal(&self) -> Vector2<f64> {
        self.e_perp
    }

    pub fn length(&self) -> f64 {
        self.eps
    }

    pub fn with_length(&self, eps: f64) -> Result<Self> {
        Self::new(self.z, self.e, eps)
    }

    /// Same segment with the orientation reversed.
    pub fn flipped(&self) -> Self {
        Self {
            z: self.z,
            e: -self.e,
            e_perp: -self.e_perp,
            eps: self.eps,
        }
    }

    /// Rotation taking global components to the crack frame `(e, e_perp)`.
    pub fn frame(&self) -> Matrix2<f64> {
        Matrix2::new(self.e.x, self.e.y, self.e_perp.x, self.e_perp.y)
    }

    pub fn map_to_canonical(&self, p: &Vector2<f64>) -> Vector2<f64> {
        self.frame() * (p - self.z)
    }

    pub fn map_from_canonical(&self, q: &Vector2<f64>) -> Vector2<f64> {
        self.z + self.frame().transpose() * q
    }

    /// Point `z + (ε/2) x e` for the scaled coordinate `x ∈ [-1, 1]`.
    pub fn point(&self, x: f64) -> Vector2<f64> {
        self.z + self.e * (0.5 * self.eps * x)
    }
}

/// Discretization and stopping parameters of the coupled solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrackOptions {
    pub n_modes: usize,
    pub n_quad: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CrackOptions {
    fn default() -> Self {
        Self {
            n_modes: DEFAULT_MODES,
            n_quad: 32,
            tol: 1e-11,
            max_iter: 50,
        }
    }
}

/// Traction `σ(u₀ + D_Ω[w]) e_perp` at the crack point with scaled coordinate `x`.
pub fn crack_rhs(
    u0: &dyn ElasticField,
    eval: &NeumannEvaluator,
    w: &BoundaryField,
    crack: &CrackSegment,
    x: f64,
) -> Result<Vector2<f64>> {
    let mat = eval.material();
    let y = crack.point(x);
    let mut grad = u0.gradient(&y)?;
    if w.sup_norm() > 0.0 {
        w.check_mesh(eval.mesh())?;
        grad += double_layer_gradient(eval.mesh(), mat, w, &y);
    }
    Ok(stress(&grad, mat) * crack.normal())
}

fn solve_density(
    u0: &dyn ElasticField,
    eval: &NeumannEvaluator,
    w: &BoundaryField,
    crack: &CrackSegment,
    n_modes: usize,
) -> Result<[ChebyshevUExpansion; 2]> {
    let scale = -4.0 / eval.material().young();
    let f = chebyshev_nodes(n_modes)
        .into_iter()
        .map(|x| crack_rhs(u0, eval, w, crack, x))
        .collect::<Result<Vec<_>>>()?;
    let c0: Vec<f64> = f.iter().map(|v| scale * v.x).collect();
    let c1: Vec<f64> = f.iter().map(|v| scale * v.y).collect();
    Ok([invert_a_samples(&c0)?, invert_a_samples(&c1)?])
}

/// `D_ε[φ]` on the mesh nodes, by Gauss–Chebyshev quadrature of the weighted density.
pub fn crack_double_layer(
    eval: &NeumannEvaluator,
    crack: &CrackSegment,
    psi: &[ChebyshevUExpansion; 2],
    n_quad: usize,
) -> BoundaryField {
    let (nodes, weights) = gauss_chebyshev_second(n_quad);
    let factor = 0.25 * crack.eps * crack.eps;
    let samples: Vec<(Vector2<f64>, Vector2<f64>)> = nodes
        .iter()
        .zip(&weights)
        .map(|(&t, &w)| {
            (
                crack.point(t),
                Vector2::new(psi[0].series(t), psi[1].series(t)) * (w * factor),
            )
        })
        .collect();
    let mat = eval.material();
    let ep = crack.normal();
    BoundaryField::from_fn(eval.mesh(), |x| {
        samples
            .iter()
            .map(|(y, s)| dlp_raw(&(x - y), &ep, mat) * s)
            .sum()
    })
}

/// Result of the coupled crack / boundary solve.
#[derive(Debug, Clone)]
pub struct CrackedSolution {
    crack: CrackSegment,
    background: BackgroundSolution,
    w: BoundaryField,
    psi: [ChebyshevUExpansion; 2],
    n_quad: usize,
    iterations: usize,
    updates: Vec<f64>,
    crack_residual: f64,
    boundary_residual: f64,
    monolithic: bool,
}

impl CrackedSolution {
    pub fn crack(&self) -> &CrackSegment {
        &self.crack
    }

    pub fn background(&self) -> &BackgroundSolution {
        &self.background
    }

    pub fn u0_trace(&self) -> &BoundaryField {
        self.background.trace()
    }

    /// `w_ε = u_ε - u₀` on `∂Ω`.
    pub fn perturbation(&self) -> &BoundaryField {
        &self.w
    }

    /// `u_ε` on `∂Ω`.
    pub fn trace(&self) -> BoundaryField {
        self.background.trace().add(&self.w)
    }

    /// Scaled density components in the global frame.
    pub fn density(&self) -> &[ChebyshevUExpansion; 2] {
        &self.psi
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Sup-norm change of `w` at each fixed-point step.
    pub fn updates(&self) -> &[f64] {
        &self.updates
    }

    /// Largest coefficient mismatch of the crack equation at the final `w`.
    pub fn crack_residual(&self) -> f64 {
        self.crack_residual
    }

    /// Sup-norm residual of `(-½I + K) w = D_ε[φ]`.
    pub fn boundary_residual(&self) -> f64 {
        self.boundary_residual
    }

    /// Whether the dense coupled system was used after the iteration stalled.
    pub fn used_monolithic(&self) -> bool {
        self.monolithic
    }

    pub fn quadrature_points(&self) -> usize {
        self.n_quad
    }
}

fn check_crack(eval: &NeumannEvaluator, crack: &CrackSegment) -> Result<()> {
    eval.check_source(&crack.z)?;
    let distance = eval.mesh().distance_to_boundary(&crack.z);
    if crack.eps >= distance {
        return Err(Error::CrackTooCloseToBoundary {
            distance,
            required: crack.eps,
        });
    }
    Ok(())
}

/// Solves the cracked Neumann problem with boundary traction `g`.
///
/// Picard iteration on `w`; if it has not converged after `max_iter` steps the
/// affine map `w ↦ w'` is assembled densely and solved directly.
pub fn solve_cracked(
    eval: &Arc<NeumannEvaluator>,
    g: &BoundaryField,
    crack: &CrackSegment,
    options: &CrackOptions,
) -> Result<CrackedSolution> {
    check_crack(eval, crack)?;
    if options.n_modes == 0 || options.n_quad == 0 {
        return Err(Error::InvalidInput(
            "crack discretization needs at least one mode".into(),
        ));
    }
    let background = eval.solve_background(g)?;
    solve_cracked_with(eval, background, crack, options)
}

/// As [`solve_cracked`] with a precomputed background solution.
pub fn solve_cracked_with(
    eval: &Arc<NeumannEvaluator>,
    background: BackgroundSolution,
    crack: &CrackSegment,
    options: &CrackOptions,
) -> Result<CrackedSolution> {
    check_crack(eval, crack)?;
    let n = eval.mesh().len();
    let step = |w: &BoundaryField| -> Result<(BoundaryField, [ChebyshevUExpansion; 2])> {
        let psi = solve_density(&background, eval, w, crack, options.n_modes)?;
        let rhs = crack_double_layer(eval, crack, &psi, options.n_quad);
        Ok((eval.solve(&rhs)?, psi))
    };

    let mut w = BoundaryField::zeros(n);
    let mut updates = Vec::new();
    let mut converged = false;
    for _ in 0..options.max_iter {
        let (next, _) = step(&w)?;
        let update = next.max_difference(&w);
        updates.push(update);
        w = next;
        if update < options.tol {
            converged = true;
            break;
        }
    }

    let mut monolithic = false;
    if !converged {
        log::warn!(
            "crack iteration stalled after {} steps (last update {:.3e}); solving the coupled system directly",
            updates.len(),
            updates.last().copied().unwrap_or(f64::NAN)
        );
        w = solve_monolithic(n, &step).map_err(|_| Error::NotConverged {
            iterations: updates.len(),
            last_update: updates.last().copied().unwrap_or(f64::NAN),
        })?;
        monolithic = true;
    }

    let psi = solve_density(&background, eval, &w, crack, options.n_modes)?;
    let rhs = crack_double_layer(eval, crack, &psi, options.n_quad);
    let w_final = eval.solve(&rhs)?;
    let boundary_residual = eval
        .operators()
        .apply_k(&w_final)?
        .sub(&w_final.scale(0.5))
        .sub(&rhs)
        .sup_norm();
    let psi_check = solve_density(&background, eval, &w_final, crack, options.n_modes)?;
    let crack_residual = psi[0]
        .max_coeff_difference(&psi_check[0])
        .max(psi[1].max_coeff_difference(&psi_check[1]));

    Ok(CrackedSolution {
        crack: *crack,
        background,
        w: w_final,
        psi,
        n_quad: options.n_quad,
        iterations: updates.len(),
        updates,
        crack_residual,
        boundary_residual,
        monolithic,
    })
}

type Step<'a> = dyn Fn(&BoundaryField) -> Result<(BoundaryField, [ChebyshevUExpansion; 2])> + 'a;

fn solve_monolithic(n: usize, step: &Step<'_>) -> Result<BoundaryField> {
    // w' = L w + w0 is affine in w; assemble L column by column and solve (I - L) w = w0
    let w0 = step(&BoundaryField::zeros(n))?.0.to_dvector();
    let dim = 2 * n;
    let mut m = DMatrix::<f64>::identity(dim, dim);
    for k in 0..dim {
        let mut e = DVector::zeros(dim);
        e[k] = 1.0;
        let col = step(&BoundaryField::from_dvector(&e))?.0.to_dvector() - &w0;
        let mut target = m.column_mut(k);
        target -= col;
    }
    let w = m
        .lu()
        .solve(&w0)
        .ok_or_else(|| Error::SolveFailed("coupled crack system is singular".into()))?;
    Ok(BoundaryField::from_dvector(&w))
}

/// Opening `φ_ε(x1) = u|₊ - u|₋` at the crack coordinate `x1 ∈ [-ε/2, ε/2]`.
pub fn crack_opening(sol: &CrackedSolution, x1: f64) -> Result<Vector2<f64>> {
    let half = 0.5 * sol.crack.eps;
    if !(x1.abs() <= half) {
        return Err(Error::Domain(format!(
            "crack coordinate {x1} outside [-{half}, {half}]"
        )));
    }
    let x = (x1 / half).clamp(-1.0, 1.0);
    Ok(Vector2::new(sol.psi[0].eval(x), sol.psi[1].eval(x)) * half)
}

/// `u_ε = u₀ + ∫ ∂N/∂ν_y(·, y) φ_ε(y) dσ_y` at the mesh nodes, quadratured
/// over the crack with one Neumann-function solve per quadrature point.
pub fn evaluate_cracked_trace(sol: &CrackedSolution) -> Result<BoundaryField> {
    let eval = sol.background.evaluator();
    let crack = &sol.crack;
    let (nodes, weights) = gauss_chebyshev_second(sol.n_quad);
    let factor = 0.25 * crack.eps * crack.eps;
    let mut out = sol.background.trace().clone();
    for (&t, &w) in nodes.iter().zip(&weights) {
        let s = Vector2::new(sol.psi[0].series(t), sol.psi[1].series(t)) * (w * factor);
        if s == Vector2::zeros() {
            continue;
        }
        let row = eval.neumann_conormal_row_unchecked(&crack.point(t), &crack.normal())?;
        out = out.add(&row.apply(&s));
    }
    Ok(out)
}
