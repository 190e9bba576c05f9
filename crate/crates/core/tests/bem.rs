use std::f64::consts::PI;
use std::sync::Arc;

use crackbem_core::bem::operators::double_layer;
use crackbem_core::bem::{
    build_mesh, AffineField, BoundaryField, DirichletEvaluator, ElasticField, NeumannEvaluator,
    Shape,
};
use crackbem_core::kernels::{rigid_motion_basis, stress};
use crackbem_core::{Error, LameParams};
use nalgebra::{Matrix2, Vector2};

fn unit() -> LameParams {
    LameParams::new(1.0, 1.0).unwrap()
}

fn neumann(shape: Shape, n: usize, mat: LameParams) -> Arc<NeumannEvaluator> {
    Arc::new(NeumannEvaluator::new(build_mesh(shape, n).unwrap(), mat).unwrap())
}

fn rot(theta: f64) -> Matrix2<f64> {
    Matrix2::new(theta.cos(), -theta.sin(), theta.sin(), theta.cos())
}

#[test]
fn rigid_motions_are_annihilated() {
    for shape in [
        Shape::Disk { radius: 1.0 },
        Shape::Ellipse { a: 1.6, b: 0.9 },
    ] {
        let ev = neumann(shape, 128, LameParams::new(0.7, 1.3).unwrap());
        let ops = ev.operators();
        for psi in rigid_motion_basis() {
            let f = BoundaryField::from_fn(ev.mesh(), |p| psi.eval(p));
            let kf = ops.apply_k(&f).unwrap();
            let err = kf.sub(&f.scale(0.5)).sup_norm();
            assert!(err < 1e-10, "rigid motion {psi:?}: {err:e}");
        }
        let zero = BoundaryField::zeros(ev.mesh().len());
        assert_eq!(ops.apply_k(&zero).unwrap().sup_norm(), 0.0);
    }
}

#[test]
fn neumann_operator_has_three_dimensional_null_space() {
    let ev = neumann(Shape::Disk { radius: 1.0 }, 128, unit());
    let svd = ev.operators().neumann_operator().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(f64::total_cmp);
    assert!(s[2] < 1e-6, "{:?}", &s[..4]);
    assert!(s[3] > 1e-3, "{:?}", &s[..4]);
}

#[test]
fn interior_limit_of_double_layer() {
    let mat = unit();
    let shape = Shape::Ellipse { a: 1.3, b: 0.8 };
    let coarse = neumann(shape.clone(), 128, mat);
    // the fine mesh contains the coarse nodes and resolves the potential close to the curve
    let fine = build_mesh(shape, 2048).unwrap();
    let f = |p: &Vector2<f64>| Vector2::new(p.x * p.y + 0.5, (2.0 * p.x).sin());
    let phi = BoundaryField::from_fn(coarse.mesh(), f);
    let phi_fine = BoundaryField::from_fn(&fine, f);
    let lhs = coarse
        .operators()
        .apply_k(&phi)
        .unwrap()
        .add(&phi.scale(0.5));
    let ds = [0.02, 0.03, 0.04, 0.05];
    for &i in &[0, 17, 64, 101] {
        let x = coarse.mesh().points()[i];
        let n = coarse.mesh().normals()[i];
        let vals: Vec<Vector2<f64>> = ds
            .iter()
            .map(|d| double_layer(&fine, &mat, &phi_fine, &(x - n * *d)))
            .collect();
        // cubic Lagrange extrapolation to d = 0
        let mut limit = Vector2::zeros();
        for (a, va) in ds.iter().zip(&vals) {
            let w: f64 = ds.iter().filter(|b| *b != a).map(|b| b / (b - a)).product();
            limit += va * w;
        }
        let err = (limit - lhs.values()[i]).norm();
        assert!(err < 1e-4, "node {i}: {err:e}");
    }
}

#[test]
fn neumann_function_traction_flux() {
    // ∮ σ(N(·, z)) n over a circle around z equals -I
    let ev = neumann(
        Shape::Disk { radius: 1.0 },
        256,
        LameParams::new(0.4, 0.9).unwrap(),
    );
    let mat = *ev.material();
    let z = Vector2::new(0.2, -0.1);
    let (rad, m) = (0.3, 96);
    let mut flux = Matrix2::zeros();
    for k in 0..m {
        let t = 2.0 * PI * k as f64 / m as f64;
        let n = Vector2::new(t.cos(), t.sin());
        let g = ev.neumann_function_gradient(&(z + n * rad), &z).unwrap();
        for j in 0..2 {
            let gj = Matrix2::new(g[0][(0, j)], g[1][(0, j)], g[0][(1, j)], g[1][(1, j)]);
            let t = stress(&gj, &mat) * n * (2.0 * PI * rad / m as f64);
            flux.set_column(j, &(flux.column(j) + t));
        }
    }
    assert!((flux + Matrix2::identity()).norm() < 1e-8, "{flux}");
    let nz = ev.neumann_function(&Vector2::new(0.5, 0.3), &z).unwrap();
    assert!(nz.norm() > 1e-2);
}

#[test]
fn background_recovers_linear_fields() {
    let mat = unit();
    let ev = neumann(Shape::Disk { radius: 1.0 }, 256, mat);
    let e1 = 0.7;
    let s = 0.4;
    for grad in [
        Matrix2::new(e1, 0.0, 0.0, 0.0),
        Matrix2::new(0.0, s, s, 0.0),
    ] {
        let sigma = stress(&grad, &mat);
        let g = BoundaryField::from_fn_normal(ev.mesh(), |_, n| sigma * n);
        let sol = ev.solve_background(&g).unwrap();
        let exact = BoundaryField::from_fn(ev.mesh(), |p| grad * p)
            .project_onto_l2psi(ev.mesh())
            .unwrap();
        let err = sol.trace().max_difference(&exact);
        assert!(err < 1e-8, "trace error {err:e}");
        let gz = sol.gradient(&Vector2::zeros()).unwrap();
        assert!((gz - grad).norm() < 1e-8, "{gz}");
        // interior values carry the rigid shift of the trace: c + ω (x2, -x1),
        // read off at the nodes (1, 0) and (0, 1)
        let r0 = sol.trace().values()[0] - grad * ev.mesh().points()[0];
        let r1 = sol.trace().values()[64] - grad * ev.mesh().points()[64];
        let (c, omega) = (Vector2::new(r0.x, r1.y), r1.y - r0.y);
        let p = Vector2::new(0.3, -0.2);
        let expect = grad * p + c + Vector2::new(p.y, -p.x) * omega;
        assert!((sol.displacement(&p).unwrap() - expect).norm() < 1e-8);
    }
}

#[test]
fn background_rejects_unbalanced_traction() {
    let ev = neumann(Shape::Disk { radius: 1.0 }, 64, unit());
    let g = BoundaryField::from_fn(ev.mesh(), |_| Vector2::new(1.0, 0.0));
    assert!(matches!(
        ev.solve_background(&g),
        Err(Error::EquilibriumViolated { .. })
    ));
    let zero = ev.solve_background(&BoundaryField::zeros(64)).unwrap();
    assert_eq!(zero.trace().sup_norm(), 0.0);
}

#[test]
fn neumann_reciprocity() {
    let ev = neumann(
        Shape::Ellipse { a: 1.4, b: 1.0 },
        256,
        LameParams::new(0.5, 1.2).unwrap(),
    );
    let pairs = [
        (Vector2::new(0.2, 0.1), Vector2::new(-0.3, 0.4)),
        (Vector2::new(0.6, -0.2), Vector2::new(0.0, 0.0)),
        (Vector2::new(-0.5, -0.3), Vector2::new(0.4, 0.5)),
    ];
    for (x, y) in pairs {
        let a = ev.neumann_function(&x, &y).unwrap();
        let b = ev.neumann_function(&y, &x).unwrap();
        let err = (a - b.transpose()).norm();
        println!("reciprocity {err:e}");
        assert!(err < 1e-7, "{err:e}");
    }
}

#[test]
fn conormal_row_equivariance() {
    let ev = neumann(Shape::Disk { radius: 1.0 }, 128, unit());
    let n = ev.mesh().len();
    let z = Vector2::new(0.3, 0.1);
    let ep = Vector2::new(0.6, 0.8);
    let base = ev.neumann_conormal_row(&z, &ep).unwrap();
    // rotation by a multiple of the node spacing permutes nodes
    let shift = 16;
    let th = 2.0 * PI * shift as f64 / n as f64;
    let r = rot(th);
    let rotated = ev.neumann_conormal_row(&(r * z), &(r * ep)).unwrap();
    let mut err: f64 = 0.0;
    for i in 0..n {
        let expect = r * base.values()[i] * r.transpose();
        err = err.max((rotated.values()[(i + shift) % n] - expect).norm());
    }
    assert!(err < 1e-8, "{err:e}");
    for j in 0..2 {
        let m = base.column(j).rigid_moments(ev.mesh()).unwrap();
        assert!(m.norm() < 1e-10);
    }
}

#[test]
fn dirichlet_to_neumann_on_linear_fields() {
    let mat = LameParams::new(2.0, 0.5).unwrap();
    let ev = DirichletEvaluator::new(
        build_mesh(Shape::Ellipse { a: 1.2, b: 0.7 }, 128).unwrap(),
        mat,
    )
    .unwrap();
    let grad = Matrix2::new(0.3, -0.2, 0.5, 0.1);
    let sigma = stress(&grad, &mat);
    let f = BoundaryField::from_fn(ev.mesh(), |p| grad * p + Vector2::new(0.2, -1.0));
    let t = ev.dirichlet_to_neumann(&f).unwrap();
    let exact = BoundaryField::from_fn_normal(ev.mesh(), |_, n| sigma * n);
    let err = t.max_difference(&exact);
    assert!(err < 1e-9, "{err:e}");
    let ev = Arc::new(ev);
    let bg = ev.solve_background(&f).unwrap();
    let p = Vector2::new(0.2, 0.1);
    assert!((bg.displacement(&p).unwrap() - (grad * p + Vector2::new(0.2, -1.0))).norm() < 1e-9);
    let _ = AffineField::from_stress(&sigma, &mat);
}
