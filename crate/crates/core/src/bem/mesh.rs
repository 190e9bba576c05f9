use std::f64::consts::PI;

use nalgebra::Vector2;

use crate::error::{Error, Result};

/// Smooth closed curves parametrized counterclockwise on `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Disk {
        radius: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    /// Star-shaped curve `r(t) (cos t, sin t)` with
    /// `r(t) = r0 + Σ_k (cos[k-1] cos kt + sin[k-1] sin kt)`.
    Fourier {
        r0: f64,
        cos: Vec<f64>,
        sin: Vec<f64>,
    },
}

impl Shape {
    /// Position, first and second parameter derivatives at `t`.
    pub fn eval(&self, t: f64) -> (Vector2<f64>, Vector2<f64>, Vector2<f64>) {
        let (c, s) = (t.cos(), t.sin());
        match self {
            Shape::Disk { radius: r } => (
                Vector2::new(r * c, r * s),
                Vector2::new(-r * s, r * c),
                Vector2::new(-r * c, -r * s),
            ),
            Shape::Ellipse { a, b } => (
                Vector2::new(a * c, b * s),
                Vector2::new(-a * s, b * c),
                Vector2::new(-a * c, -b * s),
            ),
            Shape::Fourier { .. } => {
                let (r, dr, ddr) = self.radius_function(t);
                let e = Vector2::new(c, s);
                let ep = Vector2::new(-s, c);
                (e * r, e * dr + ep * r, e * (ddr - r) + ep * (2.0 * dr))
            }
        }
    }

    fn radius_function(&self, t: f64) -> (f64, f64, f64) {
        match self {
            Shape::Fourier { r0, cos, sin } => {
                let (mut r, mut dr, mut ddr) = (*r0, 0.0, 0.0);
                for (k, a) in cos.iter().enumerate() {
                    let m = (k + 1) as f64;
                    r += a * (m * t).cos();
                    dr -= a * m * (m * t).sin();
                    ddr -= a * m * m * (m * t).cos();
                }
                for (k, b) in sin.iter().enumerate() {
                    let m = (k + 1) as f64;
                    r += b * (m * t).sin();
                    dr += b * m * (m * t).cos();
                    ddr -= b * m * m * (m * t).sin();
                }
                (r, dr, ddr)
            }
            _ => (0.0, 0.0, 0.0),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        match self {
            Shape::Disk { radius } if !ok(*radius) => Err(Error::InvalidMesh(format!(
                "disk radius must be positive, got {radius}"
            ))),
            Shape::Ellipse { a, b } if !(ok(*a) && ok(*b)) => Err(Error::InvalidMesh(format!(
                "ellipse semi-axes must be positive, got {a}, {b}"
            ))),
            Shape::Fourier { .. } => {
                // a star-shaped curve is simple iff r > 0 everywhere; the winding
                // number about the origin then equals one
                let samples = 4096;
                let mut winding = 0.0;
                let mut prev = self.eval(0.0).0;
                for k in 1..=samples {
                    let t = 2.0 * PI * k as f64 / samples as f64;
                    let (r, _, _) = self.radius_function(t);
                    if !(r.is_finite() && r > 0.0) {
                        return Err(Error::InvalidMesh(format!(
                            "Fourier curve self-intersects (r = {r:.3e} at t = {t:.4})"
                        )));
                    }
                    let p = self.eval(t).0;
                    winding += prev.perp(&p).atan2(prev.dot(&p));
                    prev = p;
                }
                let turns = winding / (2.0 * PI);
                if (turns - 1.0).abs() > 1e-6 {
                    return Err(Error::InvalidMesh(format!(
                        "Fourier curve winding number {turns:.3} != 1"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Nodes, normals and trapezoidal weights of a parametrized boundary curve.
#[derive(Debug, Clone)]
pub struct BoundaryMesh {
    shape: Shape,
    params: Vec<f64>,
    points: Vec<Vector2<f64>>,
    d1: Vec<Vector2<f64>>,
    d2: Vec<Vector2<f64>>,
    speeds: Vec<f64>,
    normals: Vec<Vector2<f64>>,
    weights: Vec<f64>,
    perimeter: f64,
}

/// Builds a mesh with `n_nodes` equispaced parameter samples.
pub fn build_mesh(shape: Shape, n_nodes: usize) -> Result<BoundaryMesh> {
    BoundaryMesh::new(shape, n_nodes)
}

impl BoundaryMesh {
    pub fn new(shape: Shape, n_nodes: usize) -> Result<Self> {
        if n_nodes < 16 || !n_nodes.is_multiple_of(2) {
            return Err(Error::InvalidMesh(format!(
                "node count must be even and at least 16, got {n_nodes}"
            )));
        }
        shape.validate()?;
        let h = 2.0 * PI / n_nodes as f64;
        let mut mesh = BoundaryMesh {
            shape,
            params: Vec::with_capacity(n_nodes),
            points: Vec::with_capacity(n_nodes),
            d1: Vec::with_capacity(n_nodes),
            d2: Vec::with_capacity(n_nodes),
            speeds: Vec::with_capacity(n_nodes),
            normals: Vec::with_capacity(n_nodes),
            weights: Vec::with_capacity(n_nodes),
            perimeter: 0.0,
        };
        for k in 0..n_nodes {
            let t = h * k as f64;
            let (p, d1, d2) = mesh.shape.eval(t);
            let speed = d1.norm();
            mesh.params.push(t);
            mesh.points.push(p);
            mesh.d1.push(d1);
            mesh.d2.push(d2);
            mesh.speeds.push(speed);
            mesh.normals.push(Vector2::new(d1.y, -d1.x) / speed);
            mesh.weights.push(speed * h);
        }
        mesh.perimeter = mesh.weights.iter().sum();

        let centroid = mesh.points.iter().sum::<Vector2<f64>>() / n_nodes as f64;
        let center = match mesh.shape {
            Shape::Fourier { .. } => Vector2::zeros(),
            _ => centroid,
        };
        if let Some(k) =
            (0..n_nodes).find(|&k| mesh.normals[k].dot(&(mesh.points[k] - center)) <= 0.0)
        {
            return Err(Error::InvalidMesh(format!(
                "normal at node {k} is not outward"
            )));
        }
        Ok(mesh)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn points(&self) -> &[Vector2<f64>] {
        &self.points
    }

    /// `dx/dt` at the nodes.
    pub fn derivatives(&self) -> &[Vector2<f64>] {
        &self.d1
    }

    /// `d²x/dt²` at the nodes.
    pub fn second_derivatives(&self) -> &[Vector2<f64>] {
        &self.d2
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn normals(&self) -> &[Vector2<f64>] {
        &self.normals
    }

    /// Trapezoidal arc-length weights `|x'(t_j)| 2π/N`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    /// Largest arc length between consecutive nodes.
    pub fn max_spacing(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// Distance from `p` to the continuous curve.
    pub fn distance_to_boundary(&self, p: &Vector2<f64>) -> f64 {
        let n = self.len();
        let k = (0..n)
            .min_by(|&a, &b| {
                let da = (self.points[a] - p).norm_squared();
                let db = (self.points[b] - p).norm_squared();
                da.total_cmp(&db)
            })
            .unwrap_or(0);
        // refine by golden-section search on the two neighbouring parameter intervals
        let h = 2.0 * PI / n as f64;
        let f = |t: f64| (self.shape.eval(t).0 - p).norm();
        let (mut a, mut b) = (self.params[k] - h, self.params[k] + h);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..80 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        fc.min(fd).min((self.points[k] - p).norm())
    }

    /// Winding-number test against the node polygon.
    pub fn contains(&self, p: &Vector2<f64>) -> bool {
        let n = self.len();
        let mut winding = 0.0;
        for k in 0..n {
            let a = self.points[k] - p;
            let b = self.points[(k + 1) % n] - p;
            winding += a.perp(&b).atan2(a.dot(&b));
        }
        winding.abs() > PI
    }
}
