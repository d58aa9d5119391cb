use kkqed::permittivity::{kk_real_from_imag, log_grid};
use kkqed::PermittivityModel;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::Context;
use crate::config::{sweep, EpsConfig};
use crate::error::{CliError, Result, Status};
use crate::output::{num, Csv};

/// Default bound on the normalized KK residual.
pub const DEFAULT_TOLERANCE: f64 = 0.01;

/// Decades added on each side of the sweep for the internal KK grid.
const KK_EXTENSION: f64 = 1e3;

#[derive(Serialize)]
struct Summary {
    material: &'static str,
    points: usize,
    kk_points: usize,
    kk_grid_min_rad_s: f64,
    kk_grid_max_rad_s: f64,
    /// max |ε − 1| over the KK grid; residuals are divided by it.
    scale: f64,
    max_kk_residual: f64,
    tolerance: f64,
    causal_consistent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail_truncation_bound: Option<f64>,
}

fn material_name(m: &PermittivityModel) -> &'static str {
    match m {
        PermittivityModel::Lorentz(_) => "lorentz",
        PermittivityModel::Tabulated(_) => "tabulated",
        PermittivityModel::Constant { .. } => "constant",
    }
}

pub fn run(cfg: &EpsConfig, ctx: &Context) -> Result<Status> {
    let model = ctx.resolver.material(&cfg.material)?;
    let omegas = sweep(cfg.omega_min_rad_s, cfg.omega_max_rad_s, cfg.points, cfg.spacing)?;
    if cfg.kk_points < 3 {
        return Err(CliError::Invalid(format!("kk_points must be at least 3, got {}", cfg.kk_points)));
    }
    let tolerance = ctx.tolerance.unwrap_or(DEFAULT_TOLERANCE);

    // Tabulated data defines its own support; it is always a truncated grid.
    let (grid, truncated) = match &model {
        PermittivityModel::Tabulated(t) => (t.grid().to_vec(), true),
        _ if cfg.truncated_grid => (sweep(cfg.omega_min_rad_s, cfg.omega_max_rad_s, cfg.kk_points, cfg.spacing)?, true),
        _ => (log_grid(cfg.omega_min_rad_s / KK_EXTENSION, cfg.omega_max_rad_s * KK_EXTENSION, cfg.kk_points), false),
    };
    let grid_eps: Vec<Complex64> = grid.iter().map(|&w| model.eval_eps(w)).collect::<std::result::Result<_, _>>()?;
    let imag: Vec<f64> = grid_eps.iter().map(|e| e.im).collect();
    let scale = grid_eps.iter().map(|e| (e - 1.0).norm()).fold(0.0, f64::max);
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);

    let rows: Vec<(Complex64, Option<(f64, f64)>)> = omegas
        .par_iter()
        .map(|&w| {
            let e = model.eval_eps(w)?;
            if !(w > lo && w < hi) {
                return Ok((e, None));
            }
            let est = kk_real_from_imag(&grid, &imag, w)?;
            let (res, tail) = if scale > 0.0 {
                ((est.value - (e.re - 1.0)).abs() / scale, est.tail_bound / scale)
            } else {
                (0.0, 0.0)
            };
            Ok((e, Some((res, tail))))
        })
        .collect::<Result<_>>()?;

    let mut csv = Csv::new(&["omega_rad_s", "eps_re", "eps_im", "kk_residual"]);
    for (w, (e, r)) in omegas.iter().zip(&rows) {
        let res = r.map(|(res, _)| num(res)).unwrap_or_default();
        csv.row([num(*w), num(e.re), num(e.im), res]);
    }
    let max_res = rows.iter().filter_map(|(_, r)| r.map(|r| r.0)).fold(0.0, f64::max);
    let tail = rows.iter().filter_map(|(_, r)| r.map(|r| r.1)).fold(0.0, f64::max);
    let summary = Summary {
        material: material_name(&model),
        points: omegas.len(),
        kk_points: grid.len(),
        kk_grid_min_rad_s: lo,
        kk_grid_max_rad_s: hi,
        scale,
        max_kk_residual: max_res,
        tolerance,
        causal_consistent: max_res <= tolerance,
        tail_truncation_bound: truncated.then_some(tail),
    };
    ctx.out.write("eps.csv", &csv.into_string())?;
    ctx.out.write_json("eps_summary.json", &summary)?;
    Ok(if summary.causal_consistent { Status::Success } else { Status::Threshold })
}
