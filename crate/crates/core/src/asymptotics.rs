//! Leading-order small-crack formulas.
//!
//! A crack of length `ε` with background traction `t = σ(u₀)(z) e_perp` opens
//! as `φ(s) ≈ (2/E) t √(ε² - 4s²)`, so `∫ φ ds ≈ π ε² t / (2E)`. Every formula
//! below is that total opening fed through a conormal derivative of the
//! Neumann function or the Dirichlet Green function.

use std::f64::consts::PI;

use nalgebra::Vector2;

use crate::bem::{BoundaryField, DirichletEvaluator, ElasticField, NeumannEvaluator};
use crate::crack::CrackSegment;
use crate::error::{Error, Result};
use crate::material::LameParams;

/// Normalized stress intensity factors `K_I = σe⊥·e⊥`, `K_II = σe⊥·e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressIntensity {
    pub k1: f64,
    pub k2: f64,
}

impl StressIntensity {
    pub fn from_traction(t: &Vector2<f64>, crack: &CrackSegment) -> Self {
        Self {
            k1: t.dot(&crack.normal()),
            k2: t.dot(&crack.tangent()),
        }
    }

    /// `K_I e⊥ + K_II e`.
    pub fn traction(&self, crack: &CrackSegment) -> Vector2<f64> {
        crack.normal() * self.k1 + crack.tangent() * self.k2
    }

    pub fn squared_norm(&self) -> f64 {
        self.k1 * self.k1 + self.k2 * self.k2
    }
}

/// `∫ φ_ε dσ` per unit background traction: `π ε² / (2E)`.
pub fn opening_coefficient(eps: f64, mat: &LameParams) -> f64 {
    PI * eps * eps / (2.0 * mat.young())
}

/// Background traction `σ(u₀)(z) e⊥` on the crack line.
pub fn traction_at_crack(
    u0: &dyn ElasticField,
    crack: &CrackSegment,
    mat: &LameParams,
) -> Result<Vector2<f64>> {
    Ok(u0.stress(&crack.center(), mat)? * crack.normal())
}

pub fn stress_intensity(
    u0: &dyn ElasticField,
    crack: &CrackSegment,
    mat: &LameParams,
) -> Result<StressIntensity> {
    Ok(StressIntensity::from_traction(
        &traction_at_crack(u0, crack, mat)?,
        crack,
    ))
}

/// Leading term of `u_ε - u₀` on `∂Ω` for the traction problem.
pub fn neumann_perturbation(
    eval: &NeumannEvaluator,
    crack: &CrackSegment,
    traction: &Vector2<f64>,
) -> Result<BoundaryField> {
    let c = opening_coefficient(crack.length(), eval.material());
    if *traction == Vector2::zeros() {
        return Ok(BoundaryField::zeros(eval.mesh().len()));
    }
    let row = eval.neumann_conormal_row(&crack.center(), &crack.normal())?;
    Ok(row.apply(&(traction * c)))
}

/// Leading term of the traction change `∂(u_ε - u₀)/∂ν` on `∂Ω` for the
/// displacement problem; `traction` is taken from the Dirichlet background.
pub fn dirichlet_perturbation(
    eval: &DirichletEvaluator,
    crack: &CrackSegment,
    traction: &Vector2<f64>,
) -> Result<BoundaryField> {
    let c = opening_coefficient(crack.length(), eval.material());
    if *traction == Vector2::zeros() {
        return Ok(BoundaryField::zeros(eval.mesh().len()));
    }
    let row = eval.green_conormal2_row(&crack.center(), &crack.normal())?;
    Ok(row.apply(&(traction * c)))
}

/// `J_ε[u_ε] - J[u₀] = -½ ∫ (u_ε - u₀) · g dσ`.
pub fn potential_energy_difference(
    mesh: &crate::bem::BoundaryMesh,
    g: &BoundaryField,
    u_eps: &BoundaryField,
    u0: &BoundaryField,
) -> Result<f64> {
    u_eps.check_mesh(mesh)?;
    u0.check_mesh(mesh)?;
    Ok(-0.5 * u_eps.sub(u0).inner(g, mesh)?)
}

/// Leading energy change `-(π ε² / 4E)(K_I² + K_II²)`.
pub fn energy_asymptotic(crack: &CrackSegment, sif: &StressIntensity, mat: &LameParams) -> f64 {
    -0.5 * opening_coefficient(crack.length(), mat) * sif.squared_norm()
}

/// Topological derivative of the energy with respect to `ρ(ε) = π ε²`:
/// `-(K_I² + K_II²) / (4E)`.
pub fn topological_derivative(sif: &StressIntensity, mat: &LameParams) -> f64 {
    -sif.squared_norm() / (4.0 * mat.young())
}

/// One crack length of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub eps: f64,
    /// `sup |u_ε - u₀|` on the boundary.
    pub sup_w: f64,
    /// `sup |u_ε - u₀ - leading term|` on the boundary.
    pub sup_mismatch: f64,
    pub energy_diff: f64,
    pub energy_formula: f64,
    pub energy_mismatch: f64,
    pub iterations: usize,
}

/// Solves the cracked problem for every length in `lengths` and compares with
/// the leading-order boundary perturbation and energy change.
pub fn convergence_study(
    eval: &std::sync::Arc<NeumannEvaluator>,
    g: &BoundaryField,
    crack: &CrackSegment,
    lengths: &[f64],
    options: &crate::crack::CrackOptions,
) -> Result<Vec<ConvergenceRow>> {
    let background = eval.solve_background(g)?;
    let mat = *eval.material();
    let u0 = background.trace().clone();
    let t = traction_at_crack(&background, crack, &mat)?;
    let sif = StressIntensity::from_traction(&t, crack);
    lengths
        .iter()
        .map(|&eps| {
            let c = crack.with_length(eps)?;
            let sol = crate::crack::solve_cracked_with(eval, background.clone(), &c, options)?;
            let w = sol.perturbation();
            let lead = neumann_perturbation(eval, &c, &t)?;
            let energy_diff = potential_energy_difference(eval.mesh(), g, &sol.trace(), &u0)?;
            let energy_formula = energy_asymptotic(&c, &sif, &mat);
            Ok(ConvergenceRow {
                eps,
                sup_w: w.sup_norm(),
                sup_mismatch: w.max_difference(&lead),
                energy_diff,
                energy_formula,
                energy_mismatch: (energy_diff - energy_formula).abs(),
                iterations: sol.iterations(),
            })
        })
        .collect()
}

/// One row of an orientation scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopologicalSample {
    pub point: Vector2<f64>,
    /// Angle of `e⊥` with the `x_1` axis, radians.
    pub angle: f64,
    pub sif: StressIntensity,
    pub td: f64,
}

/// Topological derivative at `point` for `n_angles` normal directions in `[0, π)`.
pub fn topological_scan(
    u0: &dyn ElasticField,
    point: &Vector2<f64>,
    n_angles: usize,
    mat: &LameParams,
) -> Result<Vec<TopologicalSample>> {
    if n_angles == 0 {
        return Err(Error::InvalidInput(
            "orientation scan needs at least one angle".into(),
        ));
    }
    let sigma = u0.stress(point, mat)?;
    (0..n_angles)
        .map(|k| {
            let angle = PI * k as f64 / n_angles as f64;
            let crack = CrackSegment::from_normal_angle(*point, angle, 1.0)?;
            let sif = StressIntensity::from_traction(&(sigma * crack.normal()), &crack);
            Ok(TopologicalSample {
                point: *point,
                angle,
                sif,
                td: topological_derivative(&sif, mat),
            })
        })
        .collect()
}

/// Sample with the most negative topological derivative (first on ties).
pub fn most_negative(samples: &[TopologicalSample]) -> Option<&TopologicalSample> {
    samples
        .iter()
        .reduce(|best, s| if s.td < best.td { s } else { best })
}

/// Least-squares slope of `log y` against `log x`.
///
/// Points with `y ≤ floor` are dropped (noise-floor guard). Returns `None`
/// when fewer than two points remain.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64], floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > floor && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bem::AffineField;
    use nalgebra::Matrix2;

    fn unit() -> LameParams {
        LameParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn slope_fit() {
        let xs = [0.2, 0.1, 0.05, 0.025];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(4)).collect();
        assert!((fit_loglog_slope(&xs, &ys, 0.0).unwrap() - 4.0).abs() < 1e-12);
        let noisy = [1e-3, 6.25e-5, 1e-14, 1e-15];
        assert!((fit_loglog_slope(&xs, &noisy, 1e-10).unwrap() - 4.0).abs() < 1e-12);
        assert!(fit_loglog_slope(&xs, &[1e-16; 4], 1e-10).is_none());
    }

    #[test]
    fn energy_and_topological_derivative() {
        let mat = unit();
        let crack = CrackSegment::from_normal_angle(Vector2::zeros(), 0.5, 0.1).unwrap();
        let sif = StressIntensity { k1: 1.0, k2: 0.0 };
        // E = 8/3: -π 0.01 / (4 · 8/3)
        assert!((energy_asymptotic(&crack, &sif, &mat) + 3.0 * PI / 3200.0).abs() < 1e-16);
        let big = crack.with_length(0.2).unwrap();
        let ratio = energy_asymptotic(&big, &sif, &mat) / energy_asymptotic(&crack, &sif, &mat);
        assert!((ratio - 4.0).abs() < 1e-13);
        let zero = StressIntensity { k1: 0.0, k2: 0.0 };
        assert_eq!(energy_asymptotic(&crack, &zero, &mat), 0.0);
        assert_eq!(topological_derivative(&zero, &mat), 0.0);
        let tau = 0.7;
        let shear = StressIntensity { k1: 0.0, k2: tau };
        assert!((topological_derivative(&shear, &mat) + 3.0 * tau * tau / 32.0).abs() < 1e-15);
        let e = energy_asymptotic(&crack, &shear, &mat) / (PI * 0.01);
        assert!((e - topological_derivative(&shear, &mat)).abs() < 1e-15);
    }

    #[test]
    fn stress_intensity_examples() {
        let mat = unit();
        let z = Vector2::new(0.1, 0.2);
        let p = 1.3;
        let hydro = AffineField::from_stress(&(Matrix2::identity() * p), &mat);
        for k in 0..8 {
            let crack = CrackSegment::from_normal_angle(z, 0.4 * k as f64, 0.1).unwrap();
            let s = stress_intensity(&hydro, &crack, &mat).unwrap();
            assert!((s.k1 - p).abs() < 1e-14 && s.k2.abs() < 1e-14);
        }
        let tau = 0.6;
        let shear = AffineField::from_stress(&Matrix2::new(0.0, tau, tau, 0.0), &mat);
        let crack = CrackSegment::new(z, Vector2::new(1.0, 0.0), 0.1).unwrap();
        let s = stress_intensity(&shear, &crack, &mat).unwrap();
        assert!(s.k1.abs() < 1e-14 && (s.k2 - tau).abs() < 1e-14);

        let uni = AffineField::from_stress(&Matrix2::new(2.0, 0.0, 0.0, 0.0), &mat);
        assert!(traction_at_crack(&uni, &crack, &mat).unwrap().norm() < 1e-15);
        let rigid = AffineField::new(Vector2::new(1.0, 2.0), Matrix2::new(0.0, 0.3, -0.3, 0.0));
        assert!(traction_at_crack(&rigid, &crack, &mat).unwrap().norm() < 1e-15);
    }

    #[test]
    fn scan_prefers_normal_along_load() {
        let mat = unit();
        let uni = AffineField::from_stress(&Matrix2::new(1.0, 0.0, 0.0, 0.0), &mat);
        let scan = topological_scan(&uni, &Vector2::zeros(), 16, &mat).unwrap();
        let best = most_negative(&scan).unwrap();
        assert_eq!(best.angle, 0.0);
        assert!(scan.iter().all(|s| s.td <= 0.0));
        assert!(scan[8].td.abs() < 1e-15);
    }
}
