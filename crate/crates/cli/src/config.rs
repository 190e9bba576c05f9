//! Experiment configuration: a single JSON document, unknown keys rejected.
//!
//! Angles are given in degrees here and converted to radians when the crack is built.
//! `crack.angle_deg` is the angle of the crack normal with the `x_1` axis.

use std::path::{Path, PathBuf};

use crackbem_core::bem::solver::DEFAULT_MIN_DISTANCE_SPACINGS;
use crackbem_core::bem::{BoundaryField, BoundaryMesh, Shape};
use crackbem_core::crack::{CrackOptions, CrackSegment};
use crackbem_core::LameParams;
use nalgebra::{Matrix2, Vector2};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub material: MaterialConfig,
    pub geometry: GeometryConfig,
    pub load: LoadConfig,
    pub crack: CrackConfig,
    #[serde(default)]
    pub discretization: DiscretizationConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub td_map: Option<TdMapConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub lambda: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometryConfig {
    Disk {
        radius: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    /// `r(t) = r0 + Σ_m cos[m-1] cos(mt) + sin[m-1] sin(mt)`.
    Fourier {
        r0: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LoadConfig {
    /// Traction `σ n` of a constant stress tensor, given row by row.
    ConstantStress { sigma: [[f64; 2]; 2] },
    /// `g(t) = Σ_m cos[m] cos(mt) + Σ_m sin[m-1] sin(mt)`, each entry a vector `[g1, g2]`.
    FourierTraction {
        #[serde(default)]
        cos: Vec<[f64; 2]>,
        #[serde(default)]
        sin: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrackConfig {
    pub center: [f64; 2],
    pub angle_deg: f64,
    pub lengths: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscretizationConfig {
    pub n_boundary: usize,
    pub n_cheb_modes: usize,
    pub tol: f64,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        Self {
            n_boundary: 256,
            n_cheb_modes: 32,
            tol: 1e-11,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Significant digits of every floating-point value written.
    pub precision: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            precision: 17,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TdMapConfig {
    /// Lattice points per axis over the bounding box of the domain.
    pub grid: usize,
    pub n_angles: usize,
    /// Minimum distance to the boundary; defaults to the solver's source margin.
    pub margin: Option<f64>,
}

impl Default for TdMapConfig {
    fn default() -> Self {
        Self {
            grid: 9,
            n_angles: 36,
            margin: None,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| invalid(format!("malformed config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that does not need the boundary mesh.
    fn validate(&self) -> Result<(), CliError> {
        self.material()?;
        let d = &self.discretization;
        if d.n_boundary < 16 || !d.n_boundary.is_multiple_of(2) {
            return Err(invalid(format!(
                "discretization.n_boundary must be even and >= 16, got {}",
                d.n_boundary
            )));
        }
        if d.n_cheb_modes == 0 {
            return Err(invalid("discretization.n_cheb_modes must be positive"));
        }
        if !(d.tol.is_finite() && d.tol > 0.0) {
            return Err(invalid(format!(
                "discretization.tol must be positive, got {}",
                d.tol
            )));
        }
        if !(1..=17).contains(&self.output.precision) {
            return Err(invalid(format!(
                "output.precision must lie in 1..=17, got {}",
                self.output.precision
            )));
        }
        if self.crack.lengths.is_empty() {
            return Err(invalid("crack.lengths must not be empty"));
        }
        if let Some(bad) = self
            .crack
            .lengths
            .iter()
            .find(|l| !(l.is_finite() && **l > 0.0))
        {
            return Err(invalid(format!("crack length {bad} is not positive")));
        }
        if !self.crack.angle_deg.is_finite() || !self.crack.center.iter().all(|c| c.is_finite()) {
            return Err(invalid("crack.center and crack.angle_deg must be finite"));
        }
        if let Some(td) = &self.td_map {
            if td.grid == 0 || td.n_angles == 0 {
                return Err(invalid("td_map.grid and td_map.n_angles must be positive"));
            }
            if td.margin.is_some_and(|m| !(m.is_finite() && m >= 0.0)) {
                return Err(invalid("td_map.margin must be non-negative"));
            }
        }
        Ok(())
    }

    pub fn material(&self) -> Result<LameParams, CliError> {
        LameParams::new(self.material.lambda, self.material.mu)
            .map_err(|e| invalid(format!("material not admissible: {e}")))
    }

    pub fn shape(&self) -> Shape {
        match &self.geometry {
            GeometryConfig::Disk { radius } => Shape::Disk { radius: *radius },
            GeometryConfig::Ellipse { a, b } => Shape::Ellipse { a: *a, b: *b },
            GeometryConfig::Fourier { r0, cos, sin } => Shape::Fourier {
                r0: *r0,
                cos: cos.clone(),
                sin: sin.clone(),
            },
        }
    }

    pub fn mesh(&self) -> Result<BoundaryMesh, CliError> {
        BoundaryMesh::new(self.shape(), self.discretization.n_boundary)
            .map_err(|e| invalid(format!("geometry rejected: {e}")))
    }

    pub fn crack_options(&self) -> CrackOptions {
        CrackOptions {
            n_modes: self.discretization.n_cheb_modes,
            n_quad: self
                .discretization
                .n_cheb_modes
                .max(CrackOptions::default().n_quad),
            tol: self.discretization.tol,
            ..CrackOptions::default()
        }
    }

    /// Crack with the first configured length.
    pub fn crack(&self) -> Result<CrackSegment, CliError> {
        let [x, y] = self.crack.center;
        CrackSegment::from_normal_angle(
            Vector2::new(x, y),
            self.crack.angle_deg.to_radians(),
            self.crack.lengths[0],
        )
        .map_err(|e| invalid(format!("crack rejected: {e}")))
    }

    /// Every crack length must stay below the distance from the center to the boundary.
    pub fn check_crack_fits(&self, mesh: &BoundaryMesh) -> Result<(), CliError> {
        let [x, y] = self.crack.center;
        let z = Vector2::new(x, y);
        if !mesh.contains(&z) {
            return Err(invalid(format!(
                "crack center ({x}, {y}) lies outside the domain"
            )));
        }
        let dist = mesh.distance_to_boundary(&z);
        let margin = DEFAULT_MIN_DISTANCE_SPACINGS * mesh.max_spacing();
        if dist < margin {
            return Err(invalid(format!(
                "crack center is {dist:.6} from the boundary, below the resolvable margin {margin:.6}; raise n_boundary"
            )));
        }
        if let Some(l) = self.crack.lengths.iter().find(|l| **l >= dist) {
            return Err(invalid(format!("crack length {l} is not below the distance {dist:.6} from the center to the boundary")));
        }
        Ok(())
    }

    /// Boundary traction at the mesh nodes. Fourier tractions are projected
    /// onto equilibrated data, with a warning when that changes them.
    pub fn traction(&self, mesh: &BoundaryMesh) -> Result<BoundaryField, CliError> {
        match &self.load {
            LoadConfig::ConstantStress { sigma } => {
                let s = Matrix2::new(sigma[0][0], sigma[0][1], sigma[1][0], sigma[1][1]);
                if (s - s.transpose()).norm() > 1e-12 * s.norm().max(1.0) {
                    return Err(invalid("load.sigma must be symmetric"));
                }
                Ok(BoundaryField::from_fn_normal(mesh, |_, n| s * n))
            }
            LoadConfig::FourierTraction { cos, sin } => {
                let values = mesh
                    .params()
                    .iter()
                    .map(|&t| {
                        let c: Vector2<f64> = cos
                            .iter()
                            .enumerate()
                            .map(|(m, a)| Vector2::new(a[0], a[1]) * (m as f64 * t).cos())
                            .sum();
                        let s: Vector2<f64> = sin
                            .iter()
                            .enumerate()
                            .map(|(m, b)| Vector2::new(b[0], b[1]) * ((m + 1) as f64 * t).sin())
                            .sum();
                        c + s
                    })
                    .collect();
                let raw = BoundaryField::new(values);
                let projected = raw.project_onto_l2psi(mesh).map_err(CliError::Solver)?;
                let change = projected.max_difference(&raw);
                if change > 1e-12 * raw.sup_norm().max(1.0) {
                    log::warn!("fourier traction is not equilibrated; removed its rigid-motion component (sup change {change:.3e})");
                }
                Ok(projected)
            }
        }
    }
}
