use std::f64::consts::PI;
use std::sync::Arc;

use crackbem_core::asymptotics::{
    convergence_study, fit_loglog_slope, most_negative, stress_intensity, topological_derivative,
    topological_scan, TopologicalSample,
};
use crackbem_core::bem::{BackgroundSolution, BoundaryField, BoundaryMesh, NeumannEvaluator};
use crackbem_core::crack::{crack_opening, solve_cracked_with};
use nalgebra::Vector2;
use rayon::prelude::*;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::Output;

/// Samples written per crack-opening profile.
const OPENING_SAMPLES: usize = 65;

struct Problem {
    eval: Arc<NeumannEvaluator>,
    g: BoundaryField,
    background: BackgroundSolution,
}

fn setup(cfg: &ExperimentConfig, check_crack: bool) -> Result<Problem, CliError> {
    let mat = cfg.material()?;
    let mesh = cfg.mesh()?;
    if check_crack {
        cfg.check_crack_fits(&mesh)?;
    }
    let g = cfg.traction(&mesh)?;
    let eval = Arc::new(NeumannEvaluator::new(mesh, mat)?);
    let background = eval.solve_background(&g)?;
    Ok(Problem {
        eval,
        g,
        background,
    })
}

fn trace_rows(mesh: &BoundaryMesh, u: &BoundaryField) -> Vec<Vec<f64>> {
    (0..mesh.len())
        .map(|i| {
            let (p, v) = (mesh.points()[i], u.values()[i]);
            vec![mesh.params()[i], p.x, p.y, v.x, v.y]
        })
        .collect()
}

const TRACE_HEADER: [&str; 5] = ["node_param", "x", "y", "u1", "u2"];

pub fn solve(cfg: &ExperimentConfig, out: &Output) -> Result<(), CliError> {
    let pb = setup(cfg, true)?;
    let mesh = pb.eval.mesh();
    out.write_csv(
        "trace_u0.csv",
        &TRACE_HEADER,
        &trace_rows(mesh, pb.background.trace()),
    )?;
    let base = cfg.crack()?;
    let opts = cfg.crack_options();
    let mut diagnostics = Vec::new();
    for &len in &cfg.crack.lengths {
        let crack = base.with_length(len)?;
        let sol = solve_cracked_with(&pb.eval, pb.background.clone(), &crack, &opts)?;
        let tag = Output::length_tag(len);
        out.write_csv(
            &format!("trace_ueps_{tag}.csv"),
            &TRACE_HEADER,
            &trace_rows(mesh, &sol.trace()),
        )?;
        let half = 0.5 * len;
        let rows = (0..OPENING_SAMPLES)
            .map(|k| {
                let x1 = (-half + len * k as f64 / (OPENING_SAMPLES - 1) as f64).clamp(-half, half);
                let phi = crack_opening(&sol, x1)?;
                Ok(vec![x1, phi.x, phi.y])
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        out.write_csv(
            &format!("crack_opening_{tag}.csv"),
            &["x1", "phi1", "phi2"],
            &rows,
        )?;
        diagnostics.push(json!({
            "eps": len,
            "iterations": sol.iterations(),
            "updates": sol.updates(),
            "crack_residual": sol.crack_residual(),
            "boundary_residual": sol.boundary_residual(),
            "monolithic": sol.used_monolithic(),
            "sup_w": sol.perturbation().sup_norm(),
        }));
        log::info!("eps = {len}: {} iterations", sol.iterations());
    }
    out.write_json(
        "diagnostics.json",
        &json!({ "n_boundary": mesh.len(), "n_cheb_modes": opts.n_modes, "tol": opts.tol, "cracks": diagnostics }),
    )?;
    Ok(())
}

fn study(
    cfg: &ExperimentConfig,
) -> Result<(Problem, Vec<crackbem_core::asymptotics::ConvergenceRow>), CliError> {
    let pb = setup(cfg, true)?;
    let rows = convergence_study(
        &pb.eval,
        &pb.g,
        &cfg.crack()?,
        &cfg.crack.lengths,
        &cfg.crack_options(),
    )?;
    Ok((pb, rows))
}

pub fn convergence(cfg: &ExperimentConfig, out: &Output) -> Result<(), CliError> {
    if cfg.crack.lengths.len() < 3 {
        return Err(CliError::Config(format!(
            "convergence needs at least 3 crack lengths, got {}",
            cfg.crack.lengths.len()
        )));
    }
    let (_, rows) = study(cfg)?;
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            vec![
                r.eps,
                r.sup_w,
                r.sup_mismatch,
                r.energy_diff,
                r.energy_formula,
                r.energy_mismatch,
            ]
        })
        .collect();
    out.write_csv(
        "convergence.csv",
        &[
            "eps",
            "sup_w",
            "sup_mismatch",
            "energy_diff",
            "energy_formula",
            "energy_mismatch",
        ],
        &table,
    )?;
    let floor = 10.0 * cfg.discretization.tol;
    let xs: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let slope = |f: fn(&crackbem_core::asymptotics::ConvergenceRow) -> f64| {
        let ys: Vec<f64> = rows.iter().map(f).collect();
        fit_loglog_slope(&xs, &ys, floor)
    };
    out.write_json(
        "slopes.json",
        // a slope is null when every sample sits below the noise floor
        &json!({
            "sup_w": slope(|r| r.sup_w),
            "sup_mismatch": slope(|r| r.sup_mismatch),
            "energy_mismatch": slope(|r| r.energy_mismatch),
            "noise_floor": floor,
            "sup_w_max": rows.iter().map(|r| r.sup_w).fold(0.0, f64::max),
        }),
    )?;
    Ok(())
}

pub fn energy(cfg: &ExperimentConfig, out: &Output) -> Result<(), CliError> {
    let (pb, rows) = study(cfg)?;
    let mat = *pb.eval.material();
    let sif = stress_intensity(&pb.background, &cfg.crack()?, &mat)?;
    let td = topological_derivative(&sif, &mat);
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let limit = r.energy_diff / (PI * r.eps * r.eps);
            vec![
                r.eps,
                r.energy_diff,
                r.energy_formula,
                r.energy_mismatch,
                limit,
                td,
            ]
        })
        .collect();
    out.write_csv(
        "energy.csv",
        &[
            "eps",
            "energy_diff",
            "energy_formula",
            "energy_mismatch",
            "energy_over_area",
            "td",
        ],
        &table,
    )?;
    out.write_json(
        "stress_intensity.json",
        &json!({ "K1": sif.k1, "K2": sif.k2, "td": td }),
    )?;
    Ok(())
}

pub fn td_map(cfg: &ExperimentConfig, out: &Output) -> Result<(), CliError> {
    let map = cfg.td_map.unwrap_or_default();
    let pb = setup(cfg, false)?;
    let mesh = pb.eval.mesh();
    let mat = *pb.eval.material();
    let margin = map.margin.unwrap_or_else(|| pb.eval.min_distance());
    let (lo, hi) = mesh.points().iter().fold(
        (
            Vector2::repeat(f64::INFINITY),
            Vector2::repeat(f64::NEG_INFINITY),
        ),
        |(lo, hi), p| (lo.inf(p), hi.sup(p)),
    );
    let coord = |k: usize, a: f64, b: f64| {
        if map.grid == 1 {
            0.5 * (a + b)
        } else {
            a + (b - a) * k as f64 / (map.grid - 1) as f64
        }
    };
    let lattice: Vec<Vector2<f64>> = (0..map.grid)
        .flat_map(|j| (0..map.grid).map(move |i| (i, j)))
        .map(|(i, j)| Vector2::new(coord(i, lo.x, hi.x), coord(j, lo.y, hi.y)))
        .collect();
    let scans: Vec<Option<Vec<TopologicalSample>>> = lattice
        .par_iter()
        .map(|p| {
            if !mesh.contains(p) || mesh.distance_to_boundary(p) < margin {
                return Ok(None);
            }
            topological_scan(&pb.background, p, map.n_angles, &mat).map(Some)
        })
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::new();
    let mut best_rows = Vec::new();
    for (p, scan) in lattice.iter().zip(&scans) {
        let Some(scan) = scan else {
            log::info!(
                "skipping lattice point ({:.4}, {:.4}): closer than {margin:.4} to the boundary",
                p.x,
                p.y
            );
            continue;
        };
        for s in scan {
            rows.push(vec![
                s.point.x,
                s.point.y,
                s.angle.to_degrees(),
                s.sif.k1,
                s.sif.k2,
                s.td,
            ]);
        }
        if let Some(b) = most_negative(scan) {
            best_rows.push(vec![
                b.point.x,
                b.point.y,
                b.angle.to_degrees(),
                b.sif.k1,
                b.sif.k2,
                b.td,
            ]);
        }
    }
    let header = ["x", "y", "angle_deg", "K1", "K2", "td"];
    out.write_csv("td_map.csv", &header, &rows)?;
    out.write_csv("td_map_min.csv", &header, &best_rows)?;
    Ok(())
}
