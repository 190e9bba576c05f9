//! Hadamard finite-part operator on `(-1, 1)` and its spectral inverse.
//!
//! The operator
//!
//! ```text
//! A[ψ](x) = (1/π) f.p.∫_{-1}^{1} ψ(y) / (x - y)² dy
//! ```
//!
//! is diagonal on the weighted basis `√(1-x²) U_n(x)`:
//! `A[√(1-x²) U_n] = -(n+1) U_n`. Densities are stored in that basis
//! ([`ChebyshevUExpansion`]) so that inversion is a coefficient division.
//!
//! [`hadamard_finite_part`] and [`finite_hilbert`] evaluate the singular
//! integrals by direct quadrature with singularity subtraction. They are slow
//! and exist to cross-check the spectral path.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_chebyshev_second, CompositeRule};

/// Default number of Chebyshev modes for crack densities.
pub const DEFAULT_MODES: usize = 32;

/// Panels per sub-interval used by the direct finite-part quadrature.
pub const DEFAULT_PANELS: usize = 4096;

const PANEL_ORDER: usize = 8;

/// Chebyshev polynomials of the second kind `U_0..U_{n-1}` at `x`.
pub fn chebyshev_u_values(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let (mut u0, mut u1) = (1.0, 2.0 * x);
    for k in 0..n {
        match k {
            0 => out.push(u0),
            1 => out.push(u1),
            _ => {
                let u2 = 2.0 * x * u1 - u0;
                u0 = u1;
                u1 = u2;
                out.push(u2);
            }
        }
    }
    out
}

fn clenshaw_u(coeffs: &[f64], x: f64) -> f64 {
    // Σ c_n U_n(x) via the Clenshaw recurrence
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().rev() {
        let b0 = c + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    b1
}

/// `ψ(x) = √(1-x²) Σ c_n U_n(x)` on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChebyshevUExpansion {
    coeffs: Vec<f64>,
}

impl ChebyshevUExpansion {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            coeffs: vec![0.0; n],
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Polynomial factor `Σ c_n U_n(x)`.
    pub fn series(&self, x: f64) -> f64 {
        clenshaw_u(&self.coeffs, x)
    }

    /// Weighted density `ψ(x)`; zero at `x = ±1`.
    pub fn eval(&self, x: f64) -> f64 {
        let w = (1.0 - x * x).max(0.0).sqrt();
        w * self.series(x)
    }

    /// `A[ψ](x) = -Σ (n+1) c_n U_n(x)`.
    pub fn apply_a(&self, x: f64) -> f64 {
        let scaled: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| -(n as f64 + 1.0) * c)
            .collect();
        clenshaw_u(&scaled, x)
    }

    /// `‖ψ'‖` in the norm `(∫ √(1-x²) |·|² dx)^{1/2}`.
    ///
    /// Uses `d/dx[√(1-x²) U_n] = -(n+1) T_{n+1} / √(1-x²)` and orthogonality of `T_n`.
    pub fn derivative_weighted_norm(&self) -> f64 {
        let s: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| (c * (n as f64 + 1.0)).powi(2))
            .sum();
        (0.5 * PI * s).sqrt()
    }

    /// `sup |ψ|` sampled on a fine grid.
    pub fn sup_norm(&self) -> f64 {
        (0..=512)
            .map(|k| self.eval((PI * k as f64 / 512.0).cos()).abs())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn max_coeff_difference(&self, other: &Self) -> f64 {
        let n = self.len().max(other.len());
        (0..n)
            .map(|k| {
                let a = self.coeffs.get(k).copied().unwrap_or(0.0);
                let b = other.coeffs.get(k).copied().unwrap_or(0.0);
                (a - b).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Free-function form of [`ChebyshevUExpansion::apply_a`].
pub fn apply_a(expansion: &ChebyshevUExpansion, x: f64) -> f64 {
    expansion.apply_a(x)
}

/// Interpolation nodes for [`invert_a_samples`]: the `m` Gauss–Chebyshev nodes of the second kind.
pub fn chebyshev_nodes(m: usize) -> Vec<f64> {
    gauss_chebyshev_second(m).0
}

/// Solves `A[ψ] = rhs` given `rhs` at `chebyshev_nodes(samples.len())`.
pub fn invert_a_samples(samples: &[f64]) -> Result<ChebyshevUExpansion> {
    let m = samples.len();
    if m == 0 {
        return Err(Error::InvalidInput(
            "invert_a needs at least one mode".into(),
        ));
    }
    let (nodes, weights) = gauss_chebyshev_second(m);
    let mut coeffs = vec![0.0; m];
    for ((&x, &w), &f) in nodes.iter().zip(&weights).zip(samples) {
        for (n, u) in chebyshev_u_values(m, x).into_iter().enumerate() {
            coeffs[n] += w * f * u;
        }
    }
    for (n, c) in coeffs.iter_mut().enumerate() {
        *c *= -2.0 / (PI * (n as f64 + 1.0));
    }
    Ok(ChebyshevUExpansion { coeffs })
}

/// Solves `A[ψ] = rhs` with `n_modes` weighted Chebyshev modes.
pub fn invert_a(rhs: impl Fn(f64) -> f64, n_modes: usize) -> Result<ChebyshevUExpansion> {
    if n_modes == 0 {
        return Err(Error::InvalidInput(
            "invert_a needs at least one mode".into(),
        ));
    }
    let samples: Vec<f64> = chebyshev_nodes(n_modes).into_iter().map(rhs).collect();
    invert_a_samples(&samples)
}

fn check_open_interval(x: f64) -> Result<()> {
    if !(x.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "evaluation point {x} outside (-1, 1)"
        )));
    }
    Ok(())
}

/// `∫_p^1 f(y) dy` with the substitution `y = 1 - (1-p)(1-u)²`, which absorbs
/// square-root behaviour at `y = 1`.
fn integrate_to_right_end(rule: &CompositeRule, p: f64, f: impl Fn(f64) -> f64) -> f64 {
    let len = 1.0 - p;
    rule.integrate_unit(|u| {
        let v = 1.0 - u;
        let y = 1.0 - len * v * v;
        f(y) * 2.0 * len * v
    })
}

fn integrate_to_left_end(rule: &CompositeRule, q: f64, f: impl Fn(f64) -> f64) -> f64 {
    integrate_to_right_end(rule, -q, |y| f(-y))
}

/// Raw Hadamard finite part `f.p.∫_{-1}^{1} ψ(y)/(x-y)² dy` with the default panel count.
pub fn hadamard_finite_part(psi: impl Fn(f64) -> f64, x: f64) -> Result<f64> {
    hadamard_finite_part_with(psi, x, DEFAULT_PANELS)
}

/// Finite part by symmetric singularity subtraction around `x`:
/// on `[x-d, x+d]` the integrand `(ψ(x+s) + ψ(x-s) - 2ψ(x))/s²` is bounded and the
/// subtracted part contributes `-2ψ(x)/d` exactly.
pub fn hadamard_finite_part_with(psi: impl Fn(f64) -> f64, x: f64, panels: usize) -> Result<f64> {
    check_open_interval(x)?;
    let rule = CompositeRule::new(panels.max(1), PANEL_ORDER);
    let d = 0.5 * (1.0 - x.abs());
    let px = psi(x);
    let inner = d * rule.integrate_unit(|u| {
        let s = d * u;
        (psi(x + s) + psi(x - s) - 2.0 * px) / (s * s)
    });
    let right = integrate_to_right_end(&rule, x + d, |y| psi(y) / ((x - y) * (x - y)));
    let left = integrate_to_left_end(&rule, x - d, |y| psi(y) / ((x - y) * (x - y)));
    Ok(inner - 2.0 * px / d + right + left)
}

/// Finite Hilbert transform `(1/π) p.v.∫_{-1}^{1} ψ(y)/(x-y) dy`.
pub fn finite_hilbert(psi: impl Fn(f64) -> f64, x: f64) -> Result<f64> {
    finite_hilbert_with(psi, x, DEFAULT_PANELS)
}

pub fn finite_hilbert_with(psi: impl Fn(f64) -> f64, x: f64, panels: usize) -> Result<f64> {
    check_open_interval(x)?;
    let rule = CompositeRule::new(panels.max(1), PANEL_ORDER);
    let d = 0.5 * (1.0 - x.abs());
    let inner = d * rule.integrate_unit(|u| {
        let s = d * u;
        (psi(x - s) - psi(x + s)) / s
    });
    let right = integrate_to_right_end(&rule, x + d, |y| psi(y) / (x - y));
    let left = integrate_to_left_end(&rule, x - d, |y| psi(y) / (x - y));
    Ok((inner + right + left) / PI)
}
