use kkqed::decay::{
    gamma_free_space, gamma_near_surface, gamma_rate, im_green_halfspace, im_green_halfspace_eps, vacuum_im_green,
    DEFAULT_QUADRATURE_TOL,
};
use kkqed::{Dipole, HalfspaceGreenSample, PermittivityModel, PhysicalConstants};
use num_complex::Complex64;

const OMEGA: f64 = 2.5e15;
const MU: f64 = 1e-29;

fn height(a: f64) -> f64 {
    a * PhysicalConstants::SI.c / OMEGA
}

fn perpendicular(a: f64) -> Dipole {
    Dipole::new([0.0, 0.0, MU], OMEGA, height(a)).unwrap()
}

fn parallel(a: f64) -> Dipole {
    Dipole::new([MU, 0.0, 0.0], OMEGA, height(a)).unwrap()
}

fn relative_rate(eps: Complex64, d: &Dipole) -> f64 {
    let g = im_green_halfspace_eps(eps, d.z, d.omega, DEFAULT_QUADRATURE_TOL).unwrap();
    gamma_rate(&g, d).unwrap() / gamma_free_space(d)
}

#[test]
fn free_space_rate_two_ways() {
    let d = Dipole::new([MU, 0.0, 0.0], OMEGA, 1.0).unwrap();
    let closed = gamma_free_space(&d);
    let via_green = gamma_rate(&HalfspaceGreenSample::vacuum(OMEGA, 1.0), &d).unwrap();
    assert!((closed - via_green).abs() <= 1e-12 * closed);
    let k = PhysicalConstants::SI;
    let by_hand = OMEGA.powi(3) * MU * MU / (3.0 * std::f64::consts::PI * k.hbar * k.epsilon0 * k.c.powi(3));
    assert!((closed - by_hand).abs() <= 1e-12 * closed);
}

#[test]
fn near_surface_asymptote_matches_quadrature() {
    let eps = Complex64::new(2.0, 0.5);
    for a in [1e-2, 3e-3, 1e-3] {
        for d in [perpendicular(a), parallel(a)] {
            let full = relative_rate(eps, &d);
            let asym = gamma_near_surface(eps, &d).unwrap() / gamma_free_space(&d);
            let ratio = full / asym;
            assert!((ratio - 1.0).abs() < 0.05, "a={a} ratio={ratio}");
        }
    }
}

#[test]
fn far_field_recovers_vacuum() {
    let eps = Complex64::new(2.0, 0.5);
    let a = 1e3;
    for d in [perpendicular(a), parallel(a)] {
        assert!((relative_rate(eps, &d) - 1.0).abs() < 0.01);
    }
    let g = im_green_halfspace_eps(eps, height(a), OMEGA, DEFAULT_QUADRATURE_TOL).unwrap();
    let vac = vacuum_im_green(OMEGA);
    assert!((g.im_zz() - vac).abs() < 1e-3 * vac);
    assert!((g.im_xx() - vac).abs() < 1e-3 * vac);
}

/// Perfect-conductor image dipole: `1 + 3[sin x/x³ − cos x/x²]` with `x = 2k₀z`.
fn image_dipole_perpendicular(a: f64) -> f64 {
    let x = 2.0 * a;
    1.0 + 3.0 * (x.sin() / x.powi(3) - x.cos() / (x * x))
}

#[test]
fn good_conductor_approaches_image_dipole() {
    let eps = Complex64::new(1e6, 1.0);
    for a in [0.3, 1.0, 3.0] {
        let full = relative_rate(eps, &perpendicular(a));
        let image = image_dipole_perpendicular(a);
        assert!((full / image - 1.0).abs() < 0.01, "a={a}: {full} vs {image}");
    }
    // closer in, the dense but finite medium picks up transmitted waves
    // at a rate ≈ 0.75/(√ε a²), so the doubling shows up only where that is small
    let near = relative_rate(eps, &perpendicular(0.3));
    assert!((near - 2.0).abs() < 0.05, "{near}");
    let denser = relative_rate(Complex64::new(1e12, 1.0), &perpendicular(0.01));
    assert!((denser - 2.0).abs() < 0.02, "{denser}");
    let leaky = relative_rate(eps, &perpendicular(0.01));
    let excess = 0.75 / (1e3 * 0.01f64.powi(2));
    assert!(((leaky - 2.0) / excess - 1.0).abs() < 0.05, "{leaky}");
}

/// Independent Sommerfeld quadrature for the parallel component, written in
/// the normal wavevector: `s_z ∈ [0, 1]` on the propagating branch and
/// `s_z = iκ`, `κ ∈ [0, ∞)` on the evanescent one. Both are smooth, so a
/// composite Simpson rule on a fine grid suffices.
fn parallel_oracle(eps: Complex64, a: f64) -> f64 {
    let i = Complex64::new(0.0, 1.0);
    let integrand = |sz: Complex64| {
        let sz1 = (eps - Complex64::new(1.0, 0.0) + sz * sz).sqrt();
        let rs = (sz - sz1) / (sz + sz1);
        let rp = (eps * sz - sz1) / (eps * sz + sz1);
        (rs - sz * sz * rp) * (2.0 * i * a * sz).exp()
    };
    let simpson = |f: &dyn Fn(f64) -> Complex64, lo: f64, hi: f64, n: usize| {
        let h = (hi - lo) / n as f64;
        let mut acc = f(lo) + f(hi);
        for j in 1..n {
            acc += f(lo + j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * (h / 3.0)
    };
    let prop = simpson(&|t| integrand(Complex64::new(t, 0.0)), 0.0, 1.0, 20_000);
    let kappa_max = 40.0 / a;
    let evan = simpson(&|k| integrand(Complex64::new(0.0, k)), 0.0, kappa_max, 400_000) * (-i);
    1.0 + 0.75 * (prop + evan).re
}

#[test]
fn parallel_rate_matches_fine_grid_oracle() {
    let eps = Complex64::new(2.0, 0.5);
    let a = 0.1;
    let full = relative_rate(eps, &parallel(a));
    let oracle = parallel_oracle(eps, a);
    assert!((full / oracle - 1.0).abs() < 5e-3, "{full} vs {oracle}");
}

#[test]
fn halving_tolerance_is_stable() {
    let eps = Complex64::new(2.0, 0.5);
    for a in [1e-3, 0.1, 1.0, 30.0] {
        let z = height(a);
        let g1 = im_green_halfspace_eps(eps, z, OMEGA, DEFAULT_QUADRATURE_TOL).unwrap();
        let g2 = im_green_halfspace_eps(eps, z, OMEGA, 0.5 * DEFAULT_QUADRATURE_TOL).unwrap();
        assert!((g1.im_xx() - g2.im_xx()).abs() < 1e-4 * g2.im_xx());
        assert!((g1.im_zz() - g2.im_zz()).abs() < 1e-4 * g2.im_zz());
    }
}

#[test]
fn rates_are_positive() {
    let media = [
        Complex64::new(2.0, 0.5),
        Complex64::new(1.0, 0.0),
        Complex64::new(12.0, 0.01),
        Complex64::new(-3.0, 0.3),
        Complex64::new(-1.2, 0.05),
        Complex64::new(0.3, 2.0),
    ];
    for eps in media {
        for a in [1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0] {
            for d in [perpendicular(a), parallel(a)] {
                let r = relative_rate(eps, &d);
                assert!(r >= 0.0, "eps={eps} a={a}: {r}");
            }
        }
    }
}

#[test]
fn model_and_constant_paths_agree() {
    let model = PermittivityModel::constant(2.0, 0.5);
    let z = height(0.05);
    let a = im_green_halfspace(&model, z, OMEGA).unwrap();
    let b = im_green_halfspace_eps(Complex64::new(2.0, 0.5), z, OMEGA, DEFAULT_QUADRATURE_TOL).unwrap();
    assert_eq!(a, b);
}

#[test]
fn perpendicular_to_parallel_ratio_is_two_in_deep_near_field() {
    let eps = Complex64::new(2.0, 0.5);
    let a = 1e-3;
    let ratio = relative_rate(eps, &perpendicular(a)) / relative_rate(eps, &parallel(a));
    assert!((ratio - 2.0).abs() < 0.05, "{ratio}");
}
