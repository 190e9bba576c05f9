//! Small quadrature helpers shared by the solvers and the finite-part routines.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` equal panels.
pub(crate) struct CompositeRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl CompositeRule {
    pub(crate) fn new(panels: usize, order: usize) -> Self {
        let (gx, gw) = gauss_legendre(order);
        let h = 1.0 / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(mid + 0.5 * h * x);
                weights.push(0.5 * h * w);
            }
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over the unit interval `[0, 1]`.
    pub(crate) fn integrate_unit(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&u, &w)| w * f(u))
            .sum()
    }
}

/// Gauss–Chebyshev rule of the second kind: `∫ √(1-x²) f(x) dx ≈ Σ w_k f(x_k)`.
///
/// Exact for polynomials of degree `≤ 2m - 1`.
pub fn gauss_chebyshev_second(m: usize) -> (Vec<f64>, Vec<f64>) {
    let h = PI / (m as f64 + 1.0);
    (1..=m)
        .map(|k| {
            let th = k as f64 * h;
            (th.cos(), h * th.sin().powi(2))
        })
        .unzip()
}
