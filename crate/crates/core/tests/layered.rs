use kkqed::layered1d::{
    scattering_amplitudes, stack_smatrix, verify_fundamental_relation, GreenFunction1d, QuadratureSettings,
};
use kkqed::{DeviceKind, DielectricStack, Layer, PermittivityModel, PhysicalConstants, C64};
use num_complex::Complex64;
use proptest::prelude::*;

const OMEGA: f64 = 2.0e15;

fn k0() -> f64 {
    PhysicalConstants::SI.wavenumber(OMEGA)
}

fn lambda0() -> f64 {
    std::f64::consts::TAU / k0()
}

fn eps(re: f64, im: f64) -> PermittivityModel {
    PermittivityModel::constant(re, im)
}

/// Dense second-order finite-difference solve of `u'' + k₀² ε(x) u = −δ(x − x_s)`
/// on `[x_lo, x_hi]` with exact outgoing conditions for vacuum claddings.
/// Interfaces must fall on grid nodes; ε there is the average of both sides.
fn finite_difference_green(eps_at: impl Fn(f64) -> Complex64, x_lo: f64, x_hi: f64, n: usize, source: usize) -> Vec<Complex64> {
    let h = (x_hi - x_lo) / n as f64;
    let k = k0();
    let i = Complex64::new(0.0, 1.0);
    let m = n + 1;
    let mut lower = vec![Complex64::new(1.0, 0.0); m];
    let mut upper = vec![Complex64::new(1.0, 0.0); m];
    let mut diag: Vec<Complex64> = (0..m).map(|j| -2.0 + h * h * k * k * eps_at(x_lo + j as f64 * h)).collect();
    let mut rhs = vec![Complex64::new(0.0, 0.0); m];
    rhs[source] = Complex64::new(-h, 0.0);
    // ghost points: u₋₁ = u₁ + 2ikh u₀ and u_{n+1} = u_{n−1} + 2ikh u_n
    upper[0] = Complex64::new(2.0, 0.0);
    diag[0] += 2.0 * i * k * h;
    lower[m - 1] = Complex64::new(2.0, 0.0);
    diag[m - 1] += 2.0 * i * k * h;
    // Thomas algorithm
    for j in 1..m {
        let w = lower[j] / diag[j - 1];
        diag[j] = diag[j] - w * upper[j - 1];
        rhs[j] = rhs[j] - w * rhs[j - 1];
    }
    let mut u = vec![Complex64::new(0.0, 0.0); m];
    u[m - 1] = rhs[m - 1] / diag[m - 1];
    for j in (0..m - 1).rev() {
        u[j] = (rhs[j] - upper[j] * u[j + 1]) / diag[j];
    }
    u
}

#[test]
fn slab_green_function_matches_finite_differences() {
    let lam = lambda0();
    let d = 0.3 * lam;
    let slab = Complex64::new(2.0, 0.5);
    let stack = DielectricStack::in_vacuum(vec![Layer::new(d, PermittivityModel::Constant { value: slab }).unwrap()]);
    let g = GreenFunction1d::new(&stack, OMEGA).unwrap();

    // domain [−d, 2d] with 30000 cells: interfaces at cells 10000 and 20000
    let n = 30_000;
    let (x_lo, x_hi) = (-d, 2.0 * d);
    let h = (x_hi - x_lo) / n as f64;
    let eps_at = |x: f64| {
        let tol = 1e-3 * h;
        if (x - 0.0).abs() < tol || (x - d).abs() < tol {
            (slab + 1.0) * 0.5
        } else if x > 0.0 && x < d {
            slab
        } else {
            Complex64::new(1.0, 0.0)
        }
    };
    for source in [15_000, 12_000, 4_000] {
        let xs = x_lo + source as f64 * h;
        let u = finite_difference_green(eps_at, x_lo, x_hi, n, source);
        let exact = g.eval(xs, xs);
        let rel = (u[source] - exact).norm() / exact.norm();
        assert!(rel < 1e-3, "source {source}: rel {rel:e}");
        let far = 25_000;
        let xf = x_lo + far as f64 * h;
        let rel = (u[far] - g.eval(xf, xs)).norm() / g.eval(xf, xs).norm();
        assert!(rel < 1e-3, "off-diagonal rel {rel:e}");
    }
}

#[test]
fn uniform_absorber_sum_rule() {
    let e = Complex64::new(2.0, 0.5);
    let stack = DielectricStack::uniform(PermittivityModel::Constant { value: e });
    let r = verify_fundamental_relation(&stack, 0.1e-6, 0.1e-6, OMEGA, QuadratureSettings::default()).unwrap();
    let k = e.sqrt() * k0();
    let closed = (1.0 / (2.0 * k)).re;
    assert!((r.im_green - closed).abs() < 1e-12 * closed);
    assert!(r.residual < 1e-3, "{}", r.residual);
}

fn absorbing_slab_in_window() -> DielectricStack {
    DielectricStack::new(eps(1.0, 0.02), eps(1.0, 0.02), vec![Layer::new(0.4 * lambda0(), eps(2.5, 0.8)).unwrap()])
}

#[test]
fn absorbing_slab_sum_rule() {
    let stack = absorbing_slab_in_window();
    let centre = 0.2 * lambda0();
    let r = verify_fundamental_relation(&stack, centre, centre, OMEGA, QuadratureSettings::default()).unwrap();
    assert!(r.residual < 1e-2, "{}", r.residual);
    assert!(!r.boundary_flux_regime);
    let (x, xp) = (-0.2 * lambda0(), 0.6 * lambda0());
    let r = verify_fundamental_relation(&stack, x, xp, OMEGA, QuadratureSettings::default()).unwrap();
    assert!(r.residual < 1e-2, "{}", r.residual);
}

#[test]
fn sum_rule_converges_under_refinement() {
    let stack = absorbing_slab_in_window();
    let centre = 0.2 * lambda0();
    let residuals: Vec<f64> = [8usize, 16, 32]
        .iter()
        .map(|&n| {
            verify_fundamental_relation(&stack, centre, centre, OMEGA, QuadratureSettings { nodes_per_wavelength: n })
                .unwrap()
                .residual
        })
        .collect();
    for w in residuals.windows(2) {
        // observed order ≥ 1 in the step size
        assert!(w[1] <= 0.5 * w[0], "{residuals:?}");
    }
}

fn layer_strategy(absorbing: bool) -> impl Strategy<Value = Layer> {
    let loss = if absorbing { 1.0 } else { 0.0 };
    (0.05f64..1.0, 1.0f64..6.0, 0.0f64..1.0)
        .prop_map(move |(d, re, im)| Layer::new(d * lambda0(), eps(re, im * loss)).unwrap())
}

fn stack_strategy() -> impl Strategy<Value = DielectricStack> {
    (1.0f64..3.0, 1.0f64..3.0, prop::collection::vec(layer_strategy(true), 1..5))
        .prop_map(|(l, r, layers)| DielectricStack::new(eps(l, 0.0), eps(r, 0.0), layers))
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reciprocity_and_passivity(stack in stack_strategy()) {
        let p = scattering_amplitudes(&stack, OMEGA).unwrap();
        prop_assert!(close(p.t[(0, 1)], p.t[(1, 0)], 1e-10));
        prop_assert_eq!(p.kind, DeviceKind::Absorbing);
        let sv = p.t.singular_values();
        prop_assert!(sv.max() <= 1.0 + 1e-10);
        prop_assert!(p.completeness_residual() < 1e-10);
    }

    #[test]
    fn green_reciprocity(stack in stack_strategy(), u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let g = GreenFunction1d::new(&stack, OMEGA).unwrap();
        let span = stack.total_thickness() + 2.0 * lambda0();
        let (x, xp) = (u * span - lambda0(), v * span - lambda0());
        prop_assert!(close(g.eval(x, xp), g.eval(xp, x), 1e-10));
    }

    #[test]
    fn star_product_composition(
        a in prop::collection::vec(layer_strategy(true), 1..4),
        b in prop::collection::vec(layer_strategy(true), 1..4),
        mid in 1.0f64..3.0,
    ) {
        let left = DielectricStack::new(eps(1.0, 0.0), eps(mid, 0.0), a);
        let right = DielectricStack::new(eps(mid, 0.0), eps(1.5, 0.0), b);
        let whole = stack_smatrix(&left.concat(&right), OMEGA).unwrap();
        let composed = stack_smatrix(&left, OMEGA).unwrap().star(&stack_smatrix(&right, OMEGA).unwrap());
        prop_assert!(close(whole.r_left, composed.r_left, 1e-10));
        prop_assert!(close(whole.t_forward, composed.t_forward, 1e-10));
        prop_assert!(close(whole.t_backward, composed.t_backward, 1e-10));
        prop_assert!(close(whole.r_right, composed.r_right, 1e-10));
    }

    #[test]
    fn lossless_stacks_are_unitary(layers in prop::collection::vec(layer_strategy(false), 1..5)) {
        let p = scattering_amplitudes(&DielectricStack::in_vacuum(layers), OMEGA).unwrap();
        let u = p.t * p.t.adjoint();
        prop_assert!((u - kkqed::CMat2::identity()).iter().all(|z| z.norm() < 1e-10));
    }
}

#[test]
fn thick_absorber_does_not_overflow() {
    // optical thickness far beyond the single-pass limit of a transfer-matrix product
    let stack = DielectricStack::in_vacuum(vec![Layer::new(200.0 * lambda0(), eps(2.0, 1.0)).unwrap()]);
    let p = scattering_amplitudes(&stack, OMEGA).unwrap();
    assert!(p.t[(1, 0)].norm() < 1e-100);
    assert!(p.t.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    let g = GreenFunction1d::new(&stack, OMEGA).unwrap();
    let mid = 100.0 * lambda0();
    let v = g.eval(mid, mid);
    let k = Complex64::new(2.0, 1.0).sqrt() * k0();
    // deep inside, the slab looks like a uniform absorber
    assert!(close(v, Complex64::new(0.0, 0.5) / k, 1e-8));
}

