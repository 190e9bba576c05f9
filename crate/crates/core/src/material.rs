use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Isotropic Lamé parameters together with every constant derived from them.
///
/// The derived constants are computed once in [`LameParams::new`] and only
/// read afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LameParams {
    lambda: f64,
    mu: f64,
    kelvin_a: f64,
    kelvin_b: f64,
    lambda_prime: f64,
    mu_prime: f64,
    dlp_a: f64,
    dlp_b: f64,
    young: f64,
}

impl LameParams {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda.is_finite() && mu.is_finite()) || mu <= 0.0 || lambda + mu <= 0.0 {
            return Err(Error::InvalidMaterial { lambda, mu });
        }
        let l2m = lambda + 2.0 * mu;
        Ok(Self {
            lambda,
            mu,
            kelvin_a: (lambda + 3.0 * mu) / (2.0 * mu * l2m),
            kelvin_b: (lambda + mu) / (2.0 * mu * l2m),
            lambda_prime: (lambda + 3.0 * mu) / (4.0 * PI * mu * l2m),
            mu_prime: (lambda + mu) / (4.0 * PI * mu * l2m),
            dlp_a: -mu / (2.0 * PI * l2m),
            dlp_b: -(lambda + mu) / (PI * l2m),
            young: 4.0 * mu * (lambda + mu) / l2m,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Coefficient of the logarithmic term of the Kelvin matrix.
    pub fn kelvin_a(&self) -> f64 {
        self.kelvin_a
    }

    /// Coefficient of the dyadic term of the Kelvin matrix.
    pub fn kelvin_b(&self) -> f64 {
        self.kelvin_b
    }

    /// `(λ+3μ)/(4πμ(λ+2μ))`, the log coefficient of the Kelvin matrix written
    /// with `log|x-y|` and its `y`-gradient.
    pub fn lambda_prime(&self) -> f64 {
        self.lambda_prime
    }

    /// `(λ+μ)/(4πμ(λ+2μ))`.
    pub fn mu_prime(&self) -> f64 {
        self.mu_prime
    }

    /// Isotropic coefficient of the double-layer traction kernel.
    pub fn dlp_a(&self) -> f64 {
        self.dlp_a
    }

    /// Dyadic coefficient of the double-layer traction kernel.
    pub fn dlp_b(&self) -> f64 {
        self.dlp_b
    }

    /// Two-dimensional Young's modulus `4μ(λ+μ)/(λ+2μ)`.
    pub fn young(&self) -> f64 {
        self.young
    }
}
