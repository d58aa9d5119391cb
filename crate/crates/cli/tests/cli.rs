use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const OMEGA: f64 = 2.0e15;
const C: f64 = 299_792_458.0;

struct Run {
    out: Output,
    dir: PathBuf,
}

impl Run {
    fn code(&self) -> i32 {
        self.out.status.code().expect("exit code")
    }

    fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.out.stderr).into_owned()
    }

    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
    }

    fn json(&self, name: &str) -> serde_json::Value {
        serde_json::from_str(&self.read(name)).unwrap()
    }

    /// Data rows of a CSV as floats (empty cells become NaN).
    fn csv(&self, name: &str) -> Vec<Vec<f64>> {
        self.read(name)
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect())
            .collect()
    }
}

fn kkqed(dir: &Path, sub: &str, config: &str, extra: &[&str], env: &[(&str, &Path)]) -> Run {
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, config).unwrap();
    let out_dir = dir.join("out");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kkqed"));
    cmd.arg(sub).arg("--config").arg(&cfg).arg("--out").arg(&out_dir).args(extra);
    cmd.env_remove("KKQED_MATERIAL_PATH");
    for (k, v) in env {
        cmd.env(k, v);
    }
    Run { out: cmd.output().unwrap(), dir: out_dir }
}

fn run(sub: &str, config: &str) -> (TempDir, Run) {
    let tmp = TempDir::new().unwrap();
    let r = kkqed(tmp.path(), sub, config, &[], &[]);
    (tmp, r)
}

const LORENTZ_EPS: &str = r#"
[eps]
material = { type = "lorentz", terms = [[2.0e15, 2.0e15, 2.0e14]] }
omega_min_rad_s = 1.0e14
omega_max_rad_s = 1.0e16
points = 200
"#;

#[test]
fn eps_lorentz_sweep_is_causal() {
    let (_t, r) = run("eps", LORENTZ_EPS);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let rows = r.csv("eps.csv");
    assert_eq!(rows.len(), 200);
    assert!(r.read("eps.csv").starts_with("omega_rad_s,eps_re,eps_im,kk_residual\n"));
    assert!(rows.iter().all(|row| row[3] < 0.01));
    let s = r.json("eps_summary.json");
    assert!(s["max_kk_residual"].as_f64().unwrap() < 0.01);
    assert!(s.get("tail_truncation_bound").is_none());
}

#[test]
fn eps_vacuum_has_zero_residuals() {
    let cfg = "[eps]\nmaterial = \"vacuum\"\nomega_min_rad_s = 1e14\nomega_max_rad_s = 1e15\npoints = 20\n";
    let (_t, r) = run("eps", cfg);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    assert!(r.csv("eps.csv").iter().all(|row| row[3] == 0.0));
}

#[test]
fn eps_truncated_grid_reports_tail_bound() {
    let cfg = format!("{LORENTZ_EPS}truncated_grid = true\n");
    let (_t, r) = run("eps", &cfg);
    let s = r.json("eps_summary.json");
    assert!(s["tail_truncation_bound"].as_f64().unwrap() > 0.0);
    // endpoints lie on the grid boundary and carry no residual
    let rows = r.csv("eps.csv");
    assert!(rows[0][3].is_nan() && rows[199][3].is_nan());
}

#[test]
fn eps_flags_corrupted_table() {
    // sampled Lorentz data with the real part's deviation from 1 sign-flipped
    let (wp, wt, g) = (1.0f64, 1.0f64, 0.2f64);
    let grid: Vec<f64> = (0..4000).map(|i| 1e-2 * (1e4f64).powf(i as f64 / 3999.0)).collect();
    let (mut re, mut im) = (Vec::new(), Vec::new());
    for &w in &grid {
        let d = (wt * wt - w * w).powi(2) + (g * w).powi(2);
        re.push(1.0 - wp * wp * (wt * wt - w * w) / d);
        im.push(wp * wp * g * w / d);
    }
    let list = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(", ");
    let tmp = TempDir::new().unwrap();
    let table = format!("type = \"tabulated\"\ngrid = [{}]\nre = [{}]\nim = [{}]\n", list(&grid), list(&re), list(&im));
    std::fs::write(tmp.path().join("flipped.toml"), table).unwrap();
    let cfg = "[eps]\nmaterial = \"flipped.toml\"\nomega_min_rad_s = 0.1\nomega_max_rad_s = 10.0\npoints = 50\n";
    let r = kkqed(tmp.path(), "eps", cfg, &[], &[]);
    assert_eq!(r.code(), 2);
    assert!(r.json("eps_summary.json")["max_kk_residual"].as_f64().unwrap() > 0.1);
}

#[test]
fn malformed_material_reports_line() {
    let tmp = TempDir::new().unwrap();
    std::fs::write(tmp.path().join("bad.toml"), "type = \"lorentz\"\n\nterms = [[1.0, 2.0,]\n").unwrap();
    let cfg = "[eps]\nmaterial = \"bad.toml\"\nomega_min_rad_s = 1.0\nomega_max_rad_s = 2.0\npoints = 5\n";
    let r = kkqed(tmp.path(), "eps", cfg, &[], &[]);
    assert_eq!(r.code(), 3);
    let err: serde_json::Value = serde_json::from_str(r.stderr().trim()).unwrap();
    assert_eq!(err["error"], "parse");
    assert!(err["message"].as_str().unwrap().contains("bad.toml:3"), "{err}");
}

#[test]
fn material_search_path_is_used() {
    let tmp = TempDir::new().unwrap();
    let lib = tmp.path().join("materials");
    std::fs::create_dir(&lib).unwrap();
    std::fs::write(lib.join("glass.toml"), "type = \"lorentz\"\nterms = [[1.0, 1.0, 0.1]]\n").unwrap();
    let cfg = "[eps]\nmaterial = \"glass.toml\"\nomega_min_rad_s = 0.1\nomega_max_rad_s = 0.5\npoints = 5\n";
    let r = kkqed(tmp.path(), "eps", cfg, &[], &[]);
    assert_eq!(r.code(), 3);
    let r = kkqed(tmp.path(), "eps", cfg, &[], &[("KKQED_MATERIAL_PATH", &lib)]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    // ε(0.1) = 1 + 1/(0.99 − 0.01i)
    let expect = 1.0 + 0.99 / (0.99f64.powi(2) + 1e-4);
    assert!((r.csv("eps.csv")[0][1] - expect).abs() < 1e-14);
}

fn channel(r: &Run, ch: usize) -> Vec<f64> {
    r.json("device.json")["channels"][ch]["probabilities"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect()
}

#[test]
fn device_balanced_quarter_wave_slab() {
    // n² = (1 + √2)² gives |r|² = 1/2 at quarter-wave thickness
    let eps = (1.0 + 2f64.sqrt()).powi(2);
    let d = std::f64::consts::TAU * C / OMEGA / (4.0 * eps.sqrt());
    let cfg = format!(
        "[device]\nomega_rad_s = {OMEGA:e}\nstack = {{ layers = [{{ thickness_m = {d:e}, material = {{ type = \"constant\", re = {eps:e}, im = 0.0 }} }}] }}\ninput = {{ fock = [1, 1] }}\n"
    );
    let (_t, r) = run("device", &cfg);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    for ch in 0..2 {
        let p = channel(&r, ch);
        assert!((p[0] - 0.5).abs() < 1e-9 && p[1].abs() < 1e-9 && (p[2] - 0.5).abs() < 1e-9, "{p:?}");
    }
    let iso = r.json("device.json")["group_residual"]["isometry"].as_f64().unwrap();
    assert!(iso < 1e-10);
}

#[test]
fn device_two_photon_binomial() {
    let s = 0.5f64.sqrt();
    let cfg = format!(
        "[device]\nmatrices = {{ kind = \"absorbing\", t = [[[{s}, 0.0], [0.0, 0.0]], [[0.0, 0.0], [{s}, 0.0]]] }}\ninput = {{ fock = [2, 0] }}\n"
    );
    let (_t, r) = run("device", &cfg);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let p = channel(&r, 0);
    for (got, want) in p.iter().zip([0.25, 0.5, 0.25]) {
        assert!((got - want).abs() < 1e-12);
    }
    let rows = r.csv("device_channels.csv");
    assert_eq!(rows[1], vec![1.0, 1.0, p[1]]);
}

#[test]
fn device_amplifier_vacuum_gain() {
    let (_t, r) = run("device", "[device]\nsqueeze_r = 0.2\ncutoff = 20\n");
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let s = r.json("device.json");
    let mean = s["channels"][0]["mean_photons"].as_f64().unwrap();
    assert!((mean - 0.2f64.sinh().powi(2)).abs() < 1e-6);
    assert!(s["trace_deficit"].as_f64().is_some());
    assert_eq!(s["kind"], "amplifying");
}

#[test]
fn device_large_gain_warns() {
    let (_t, r) = run("device", "[device]\nsqueeze_r = 2.0\ncutoff = 6\n");
    assert_eq!(r.code(), 2);
    assert_eq!(r.json("device.json")["truncation_warning"], true);
}

#[test]
fn device_refuses_small_cutoff() {
    let cfg = "[device]\nmatrices = { kind = \"absorbing\", t = [[[0.6, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.6, 0.0]]] }\ncutoff = 2\ninput = { fock = [2, 1] }\n";
    let (_t, r) = run("device", cfg);
    assert_eq!(r.code(), 1);
    let err: serde_json::Value = serde_json::from_str(r.stderr().trim()).unwrap();
    assert_eq!(err["error"], "cutoff_too_small");
    assert!(err["message"].as_str().unwrap().contains('3'), "{err}");
}

fn decay_config(re: f64, im: f64, z_min_k0: f64, z_max_k0: f64, points: usize) -> String {
    let omega = 2.5e15;
    let to_z = |a: f64| a * C / omega;
    format!(
        "[decay]\nmaterial = {{ type = \"constant\", re = {re:e}, im = {im:e} }}\nomega_rad_s = {omega:e}\nmoment_c_m = [1.0e-29, 0.0, 0.0]\nz_min_m = {:e}\nz_max_m = {:e}\npoints = {points}\n",
        to_z(z_min_k0),
        to_z(z_max_k0)
    )
}

#[test]
fn decay_sweep_limits() {
    let (_t, r) = run("decay", &decay_config(2.0, 0.5, 1e-3, 1e3, 13));
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let rows = r.csv("decay.csv");
    let far = rows.last().unwrap();
    assert!((far[1] - 1e3).abs() < 1e-6 && (far[2] - 1.0).abs() < 0.01);
    for row in rows.iter().filter(|row| row[1] <= 1.01e-2) {
        assert!((row[2] / row[3] - 1.0).abs() < 0.05);
        assert!((row[4] / row[6] - 1.0).abs() < 0.05);
    }
    let deep = &rows[0];
    assert!((deep[4] / deep[5] - 2.0).abs() < 0.01);
    let region = &r.json("decay_summary.json")["matching_region"];
    assert!(region["k0z_max"].as_f64().unwrap() >= 1e-2);
}

#[test]
fn decay_surface_mode_is_structured_error() {
    let (_t, r) = run("decay", &decay_config(-1.0, 0.0, 1e-3, 1.0, 4));
    assert_eq!(r.code(), 1);
    let err: serde_json::Value = serde_json::from_str(r.stderr().trim()).unwrap();
    assert_eq!(err["error"], "surface_mode_divergence");
}

const ABSORBER: &str = "{ type = \"constant\", re = 2.0, im = 0.5 }";

#[test]
fn verify_uniform_absorber() {
    let cfg = format!("[verify]\nstack = {{ left = {ABSORBER}, right = {ABSORBER} }}\nomega_rad_s = {OMEGA:e}\npoints_m = [[1e-7, 1e-7], [0.0, 2e-7]]\n");
    let (_t, r) = run("verify", &cfg);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    assert!(r.json("verify_summary.json")["max_residual"].as_f64().unwrap() < 1e-3);
}

#[test]
fn verify_refinement_reduces_residual() {
    let cfg = format!(
        "[verify]\nstack = {{ left = {{ type = \"constant\", re = 1.0, im = 0.02 }}, right = {{ type = \"constant\", re = 1.0, im = 0.02 }}, layers = [{{ thickness_m = 4e-7, material = {{ type = \"constant\", re = 2.5, im = 0.8 }} }}] }}\nomega_rad_s = {OMEGA:e}\npoints_m = [[2e-7, 2e-7]]\nnodes_per_wavelength = 8\n"
    );
    let (_t, r) = run("verify", &cfg);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let row = &r.csv("verify.csv")[0];
    assert!(row[6] < row[5], "{row:?}");
}

#[test]
fn verify_lossless_stack_is_flagged() {
    let cfg = format!(
        "[verify]\nstack = {{ layers = [{{ thickness_m = 1e-7, material = {{ type = \"constant\", re = 4.0, im = 0.0 }} }}] }}\nomega_rad_s = {OMEGA:e}\npoints_m = [[5e-8, 5e-8]]\n"
    );
    let (_t, r) = run("verify", &cfg);
    assert_eq!(r.code(), 4);
    let s = r.json("verify_summary.json");
    assert_eq!(s["flag"], "boundary-flux regime");
}

#[test]
fn verify_tolerance_flag_overrides_threshold() {
    let cfg = format!(
        "[verify]\nstack = {{ left = {{ type = \"constant\", re = 1.0, im = 0.02 }}, right = {{ type = \"constant\", re = 1.0, im = 0.02 }}, layers = [{{ thickness_m = 4e-7, material = {{ type = \"constant\", re = 2.5, im = 0.8 }} }}] }}\nomega_rad_s = {OMEGA:e}\npoints_m = [[2e-7, 2e-7]]\nnodes_per_wavelength = 4\n"
    );
    let tmp = TempDir::new().unwrap();
    let r = kkqed(tmp.path(), "verify", &cfg, &["--tolerance", "1e-30"], &[]);
    assert_eq!(r.code(), 2);
}

#[test]
fn outputs_are_deterministic() {
    let tmp = TempDir::new().unwrap();
    let cfg = decay_config(2.0, 0.5, 1e-2, 10.0, 9);
    let a = kkqed(tmp.path(), "decay", &cfg, &["--threads", "1"], &[]).read("decay.csv");
    let b = kkqed(tmp.path(), "decay", &cfg, &["--threads", "3"], &[]).read("decay.csv");
    assert_eq!(a, b);
    let first = a.lines().nth(1).unwrap().split(',').next().unwrap();
    // 17 significant digits in scientific notation
    assert_eq!(first.split('e').next().unwrap().len(), 18);
}

#[test]
fn missing_config_and_section() {
    let out = Command::new(env!("CARGO_BIN_EXE_kkqed")).arg("eps").output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let (_t, r) = run("decay", LORENTZ_EPS);
    assert_eq!(r.code(), 3);
    assert!(r.stderr().contains("missing [decay] section"));
}
