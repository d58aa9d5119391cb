use kkqed::decay::{gamma_free_space, gamma_near_surface, gamma_rate, im_green_halfspace_eps, DEFAULT_QUADRATURE_TOL};
use kkqed::{Dipole, PhysicalConstants};
use rayon::prelude::*;
use serde::Serialize;

use super::Context;
use crate::config::{sweep, DecayConfig, Spacing};
use crate::error::{CliError, Result, Status};
use crate::output::{num, pair, Csv};

/// Default relative mismatch accepted as "matching" the near-surface formula.
pub const DEFAULT_MATCH_TOLERANCE: f64 = 0.05;

#[derive(Serialize)]
struct MatchingRegion {
    z_min_m: f64,
    z_max_m: f64,
    k0z_min: f64,
    k0z_max: f64,
    points: usize,
    max_mismatch: f64,
}

#[derive(Serialize)]
struct Summary {
    epsilon: [f64; 2],
    omega_rad_s: f64,
    gamma0_per_s: f64,
    points: usize,
    match_tolerance: f64,
    /// Contiguous run of the smallest heights where full and asymptotic rates agree.
    matching_region: Option<MatchingRegion>,
    /// Γ/Γ₀ at the largest height.
    far_field_ratio: f64,
}

struct Row {
    z: f64,
    k0z: f64,
    full: f64,
    asym: f64,
    perp: f64,
    par: f64,
    perp_asym: f64,
    par_asym: f64,
}

pub fn run(cfg: &DecayConfig, ctx: &Context) -> Result<Status> {
    let eps = ctx.resolver.material(&cfg.material)?.eval_eps(cfg.omega_rad_s)?;
    let heights = sweep(cfg.z_min_m, cfg.z_max_m, cfg.points, Spacing::Log)?;
    let rel_tol = cfg.rel_tol.unwrap_or(DEFAULT_QUADRATURE_TOL);
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(CliError::Invalid(format!("rel_tol must lie in (0, 1), got {rel_tol}")));
    }
    let tolerance = ctx.tolerance.unwrap_or(DEFAULT_MATCH_TOLERANCE);
    let mu = cfg.moment_c_m.iter().map(|m| m * m).sum::<f64>().sqrt();
    let k0 = PhysicalConstants::SI.wavenumber(cfg.omega_rad_s);
    // checks the surface-mode pole before any quadrature
    gamma_near_surface(eps, &Dipole::new(cfg.moment_c_m, cfg.omega_rad_s, heights[0])?)?;

    let rows: Vec<Row> = heights
        .par_iter()
        .map(|&z| {
            let g = im_green_halfspace_eps(eps, z, cfg.omega_rad_s, rel_tol)?;
            let ratios = |moment: [f64; 3]| -> Result<(f64, f64)> {
                let d = Dipole::new(moment, cfg.omega_rad_s, z)?;
                let g0 = gamma_free_space(&d);
                Ok((gamma_rate(&g, &d)? / g0, gamma_near_surface(eps, &d)? / g0))
            };
            let (full, asym) = ratios(cfg.moment_c_m)?;
            let (perp, perp_asym) = ratios([0.0, 0.0, mu])?;
            let (par, par_asym) = ratios([mu, 0.0, 0.0])?;
            Ok(Row { z, k0z: k0 * z, full, asym, perp, par, perp_asym, par_asym })
        })
        .collect::<Result<_>>()?;

    let mut csv = Csv::new(&[
        "z_m",
        "k0z",
        "gamma_over_gamma0",
        "asymptote_over_gamma0",
        "perp_over_gamma0",
        "par_over_gamma0",
        "perp_asymptote_over_gamma0",
        "par_asymptote_over_gamma0",
    ]);
    for r in &rows {
        csv.row([r.z, r.k0z, r.full, r.asym, r.perp, r.par, r.perp_asym, r.par_asym].map(num));
    }

    let mismatch = |r: &Row| if r.asym > 0.0 { (r.full / r.asym - 1.0).abs() } else { f64::INFINITY };
    let run_len = rows.iter().take_while(|r| mismatch(r) <= tolerance).count();
    let matching_region = (run_len > 0).then(|| MatchingRegion {
        z_min_m: rows[0].z,
        z_max_m: rows[run_len - 1].z,
        k0z_min: rows[0].k0z,
        k0z_max: rows[run_len - 1].k0z,
        points: run_len,
        max_mismatch: rows[..run_len].iter().map(mismatch).fold(0.0, f64::max),
    });
    let d0 = Dipole::new(cfg.moment_c_m, cfg.omega_rad_s, heights[0])?;
    let summary = Summary {
        epsilon: pair(eps),
        omega_rad_s: cfg.omega_rad_s,
        gamma0_per_s: gamma_free_space(&d0),
        points: rows.len(),
        match_tolerance: tolerance,
        matching_region,
        far_field_ratio: rows[rows.len() - 1].full,
    };
    ctx.out.write("decay.csv", &csv.into_string())?;
    ctx.out.write_json("decay_summary.json", &summary)?;
    Ok(Status::Success)
}
