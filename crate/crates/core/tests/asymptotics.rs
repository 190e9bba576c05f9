use std::f64::consts::PI;
use std::sync::Arc;

use crackbem_core::asymptotics::{
    convergence_study, dirichlet_perturbation, fit_loglog_slope, most_negative,
    neumann_perturbation, opening_coefficient, stress_intensity, topological_derivative,
    topological_scan, StressIntensity,
};
use crackbem_core::bem::{
    build_mesh, AffineField, BoundaryField, BoundaryMatrixField, BoundaryMesh, DirichletEvaluator,
    NeumannEvaluator, Shape,
};
use crackbem_core::crack::{CrackOptions, CrackSegment};
use crackbem_core::kernels::stress;
use crackbem_core::LameParams;
use nalgebra::{Matrix2, Vector2};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn unit() -> LameParams {
    LameParams::new(1.0, 1.0).unwrap()
}

fn rot(theta: f64) -> Matrix2<f64> {
    Matrix2::new(theta.cos(), -theta.sin(), theta.sin(), theta.cos())
}

/// `∫ row(x)ᵀ f(x) dσ_x`.
fn pair(row: &BoundaryMatrixField, f: &BoundaryField, mesh: &BoundaryMesh) -> Vector2<f64> {
    (0..mesh.len())
        .map(|i| row.values()[i].transpose() * f.values()[i] * mesh.weights()[i])
        .sum()
}

#[test]
fn conormal_rows_reproduce_interior_traction() {
    // representation formulas differentiated in the source point
    let mat = LameParams::new(0.8, 1.2).unwrap();
    let mesh = build_mesh(Shape::Ellipse { a: 1.2, b: 0.9 }, 256).unwrap();
    let ne = NeumannEvaluator::new(mesh.clone(), mat).unwrap();
    let de = DirichletEvaluator::new(mesh.clone(), mat).unwrap();
    let grad = Matrix2::new(0.3, -0.2, 0.5, 0.1);
    let sigma = stress(&grad, &mat);
    let u = BoundaryField::from_fn(&mesh, |p| grad * p);
    let g = BoundaryField::from_fn_normal(&mesh, |_, n| sigma * n);
    for (z, th) in [
        (Vector2::new(0.2, -0.1), 0.9),
        (Vector2::new(-0.5, 0.3), 2.4),
    ] {
        let ep = Vector2::new(f64::cos(th), f64::sin(th));
        let t = sigma * ep;
        let n_row = ne.neumann_conormal_row(&z, &ep).unwrap();
        assert!((pair(&n_row, &g, &mesh) - t).norm() < 1e-10);
        let d_row = de.green_conormal2_row(&z, &ep).unwrap();
        assert!((pair(&d_row, &u, &mesh) + t).norm() < 1e-9);
    }
}

#[test]
fn leading_terms_scale_with_crack_area() {
    let mat = unit();
    let mesh = build_mesh(Shape::Disk { radius: 1.0 }, 128).unwrap();
    let ne = NeumannEvaluator::new(mesh.clone(), mat).unwrap();
    let de = DirichletEvaluator::new(mesh, mat).unwrap();
    let crack = CrackSegment::from_normal_angle(Vector2::new(0.1, 0.2), 0.6, 0.05).unwrap();
    let big = crack.with_length(0.1).unwrap();
    let t = Vector2::new(0.7, -0.3);
    let a = neumann_perturbation(&ne, &crack, &t).unwrap();
    let b = neumann_perturbation(&ne, &big, &t).unwrap();
    assert!(b.max_difference(&a.scale(4.0)) < 1e-14 * b.sup_norm().max(1.0));
    let a = dirichlet_perturbation(&de, &crack, &t).unwrap();
    let b = dirichlet_perturbation(&de, &big, &t).unwrap();
    assert!(b.max_difference(&a.scale(4.0)) < 1e-14 * b.sup_norm().max(1.0));
    assert_eq!(
        neumann_perturbation(&ne, &crack, &Vector2::zeros())
            .unwrap()
            .sup_norm(),
        0.0
    );
    assert!((opening_coefficient(0.1, &mat) - PI * 0.01 * 3.0 / 16.0).abs() < 1e-16);
}

#[test]
fn dirichlet_perturbation_rotates_with_the_problem() {
    let mat = LameParams::new(0.5, 1.5).unwrap();
    let n = 128;
    let de =
        DirichletEvaluator::new(build_mesh(Shape::Disk { radius: 1.0 }, n).unwrap(), mat).unwrap();
    let shift = 32;
    let r = rot(2.0 * PI * shift as f64 / n as f64);
    let crack = CrackSegment::from_normal_angle(Vector2::new(0.3, -0.2), 1.0, 0.08).unwrap();
    let crack_r = CrackSegment::new(r * crack.center(), r * crack.tangent(), 0.08).unwrap();
    let t = Vector2::new(0.4, 1.1);
    let a = dirichlet_perturbation(&de, &crack, &t).unwrap();
    let b = dirichlet_perturbation(&de, &crack_r, &(r * t)).unwrap();
    let err = (0..n)
        .map(|i| (b.values()[(i + shift) % n] - r * a.values()[i]).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-9 * a.sup_norm(), "{err:e}");
}

#[test]
fn green_conormal_row_is_homogeneous_of_degree_minus_two() {
    let mat = unit();
    let small = DirichletEvaluator::new(build_mesh(Shape::Disk { radius: 1.0 }, 128).unwrap(), mat)
        .unwrap();
    let large = DirichletEvaluator::new(build_mesh(Shape::Disk { radius: 2.0 }, 128).unwrap(), mat)
        .unwrap();
    let z = Vector2::new(0.25, 0.4);
    let ep = Vector2::new(0.8, -0.6);
    let a = small.green_conormal2_row(&z, &ep).unwrap();
    let b = large.green_conormal2_row(&(z * 2.0), &ep).unwrap();
    let err = (0..128)
        .map(|i| (b.values()[i] * 4.0 - a.values()[i]).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-9 * a.sup_norm(), "{err:e}");
}

#[test]
fn stress_intensity_decomposes_the_traction() {
    let mut rng = StdRng::seed_from_u64(99);
    let mat = LameParams::new(1.3, 0.7).unwrap();
    for _ in 0..100 {
        let (a, b, c): (f64, f64, f64) = (
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
        );
        let sigma = Matrix2::new(a, c, c, b);
        let theta = rng.random_range(0.0..2.0 * PI);
        let crack = CrackSegment::from_normal_angle(Vector2::new(0.0, 0.1), theta, 0.1).unwrap();
        let sif = stress_intensity(&AffineField::from_stress(&sigma, &mat), &crack, &mat).unwrap();
        let t = sigma * crack.normal();
        assert!((sif.traction(&crack) - t).norm() < 1e-14 * (1.0 + t.norm()));
        assert!((sif.squared_norm() - t.norm_squared()).abs() < 1e-13 * (1.0 + t.norm_squared()));
    }
}

#[test]
fn orientation_scan_finds_the_principal_direction() {
    let mat = unit();
    let (s1, s2) = (2.0, 0.5);
    let phi: f64 = 0.6;
    let r = rot(phi);
    let sigma = r * Matrix2::new(s1, 0.0, 0.0, s2) * r.transpose();
    let field = AffineField::from_stress(&sigma, &mat);
    let n_angles = 180;
    let scan = topological_scan(&field, &Vector2::new(0.1, 0.0), n_angles, &mat).unwrap();
    let best = most_negative(&scan).unwrap();
    let step = PI / n_angles as f64;
    assert!(
        (best.angle - phi).abs() <= 0.5 * step + 1e-12,
        "{}",
        best.angle
    );
    assert!((best.td + s1 * s1 / (4.0 * mat.young())).abs() < 1e-3);
    for s in &scan {
        let n = Vector2::new(s.angle.cos(), s.angle.sin());
        assert!((s.td + (sigma * n).norm_squared() / (4.0 * mat.young())).abs() < 1e-14);
    }
    assert!(topological_scan(&field, &Vector2::zeros(), 0, &mat).is_err());
}

#[test]
fn boundary_and_energy_asymptotics_converge() {
    let mat = unit();
    let ev = Arc::new(
        NeumannEvaluator::new(build_mesh(Shape::Disk { radius: 1.0 }, 256).unwrap(), mat).unwrap(),
    );
    let theta = PI / 4.0;
    let ep = Vector2::new(theta.cos(), theta.sin());
    let sigma = ep * ep.transpose();
    let g = BoundaryField::from_fn_normal(ev.mesh(), |_, n| sigma * n);
    let crack = CrackSegment::from_normal_angle(Vector2::new(0.3, 0.0), theta, 0.2).unwrap();
    let lengths = [0.2, 0.1, 0.05, 0.025];
    let opts = CrackOptions::default();
    let rows = convergence_study(&ev, &g, &crack, &lengths, &opts).unwrap();
    let floor = 10.0 * opts.tol;
    let mism: Vec<f64> = rows.iter().map(|r| r.sup_mismatch).collect();
    let slope = fit_loglog_slope(&lengths, &mism, floor).unwrap();
    assert!(slope >= 3.7, "boundary slope {slope}");
    let sup: Vec<f64> = rows.iter().map(|r| r.sup_w).collect();
    let slope_w = fit_loglog_slope(&lengths, &sup, floor).unwrap();
    assert!((slope_w - 2.0).abs() < 0.05, "{slope_w}");
    let en: Vec<f64> = rows.iter().map(|r| r.energy_mismatch).collect();
    let slope_e = fit_loglog_slope(&lengths, &en, floor).unwrap();
    assert!(slope_e >= 3.7, "energy slope {slope_e}");
    // (J_ε - J₀) / (π ε²) tends to the topological derivative
    let sif = StressIntensity { k1: 1.0, k2: 0.0 };
    let td = topological_derivative(&sif, &mat);
    let last = rows.last().unwrap();
    let ratio = last.energy_diff / (PI * last.eps * last.eps) / td;
    assert!((ratio - 1.0).abs() < 1e-3, "{ratio}");
    assert!(rows.iter().all(|r| r.energy_diff < 0.0));
}
