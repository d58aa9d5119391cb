//! Criterion benchmarks for the numerical kernels of `kkqed`.

use std::hint::black_box;

use criterion::Criterion;
use kkqed::decay::{im_green_halfspace_eps, DEFAULT_QUADRATURE_TOL};
use kkqed::fockspace::{amplifier_transform, passive_transform, ChannelPrep, DEFAULT_TRACE_DEFICIT_BOUND};
use kkqed::fourport::build_lambda;
use kkqed::layered1d::{scattering_amplitudes, verify_fundamental_relation, QuadratureSettings};
use kkqed::linalg::c;
use kkqed::permittivity::{causality_report, log_grid};
use kkqed::{
    CMat2, DeviceMatrices, DielectricStack, InputSpec, Layer, LorentzModel, LorentzTerm, PermittivityModel,
};
use num_complex::Complex64;

const OMEGA: f64 = 2.0e15;

fn lorentz() -> PermittivityModel {
    PermittivityModel::Lorentz(
        LorentzModel::new(vec![LorentzTerm::new(1.0, 1.0, 0.1), LorentzTerm::new(0.5, 3.0, 0.4)]).unwrap(),
    )
}

fn multilayer(n: usize) -> DielectricStack {
    let layers = (0..n)
        .map(|i| {
            let eps = if i % 2 == 0 { PermittivityModel::constant(2.1, 0.05) } else { PermittivityModel::constant(5.8, 0.2) };
            Layer::new(1.0e-7 * (1.0 + 0.1 * i as f64), eps).unwrap()
        })
        .collect();
    DielectricStack::in_vacuum(layers)
}

fn lossy_device() -> DeviceMatrices {
    let t = CMat2::new(c(0.6, 0.1), c(0.3, -0.2), c(-0.25, 0.1), c(0.55, 0.2));
    DeviceMatrices::absorbing(t).unwrap()
}

fn permittivity(c: &mut Criterion) {
    let model = lorentz();
    let grid = log_grid(1e-3, 1e3, 2000);
    c.bench_function("causality_report_2000", |b| b.iter(|| causality_report(black_box(&model), &grid).unwrap()));
}

fn layered(c: &mut Criterion) {
    let stack = multilayer(40);
    c.bench_function("scattering_40_layers", |b| b.iter(|| scattering_amplitudes(black_box(&stack), OMEGA).unwrap()));
    let slab = DielectricStack::new(
        PermittivityModel::constant(1.0, 0.02),
        PermittivityModel::constant(1.0, 0.02),
        vec![Layer::new(4.0e-7, PermittivityModel::constant(2.5, 0.8)).unwrap()],
    );
    c.bench_function("fundamental_relation_slab", |b| {
        b.iter(|| verify_fundamental_relation(black_box(&slab), 2e-7, 2e-7, OMEGA, QuadratureSettings::default()).unwrap())
    });
}

fn fock(c: &mut Criterion) {
    let lambda = build_lambda(&lossy_device()).unwrap();
    let rho = InputSpec::fields(ChannelPrep::Fock(2), ChannelPrep::Fock(2)).unwrap().to_density(4).unwrap();
    c.bench_function("passive_transform_2_2", |b| b.iter(|| passive_transform(black_box(&rho), &lambda).unwrap()));

    let amp = build_lambda(&DeviceMatrices::squeezer(0.3)).unwrap();
    let input = InputSpec::fields(ChannelPrep::Fock(1), ChannelPrep::Vacuum).unwrap().to_ensemble(1).unwrap();
    c.bench_function("amplifier_transform_cutoff_12", |b| {
        b.iter(|| amplifier_transform(black_box(&input), &amp, 12, DEFAULT_TRACE_DEFICIT_BOUND).unwrap())
    });
}

fn decay(c: &mut Criterion) {
    let eps = Complex64::new(2.0, 0.5);
    let mut group = c.benchmark_group("halfspace_green");
    for a in [1e-3, 1.0, 1e3] {
        let z = a * 299_792_458.0 / 2.5e15;
        group.bench_function(format!("k0z_{a:e}"), |b| {
            b.iter(|| im_green_halfspace_eps(eps, black_box(z), 2.5e15, DEFAULT_QUADRATURE_TOL).unwrap())
        });
    }
    group.finish();
}

pub fn benchmarks(c: &mut Criterion) {
    permittivity(c);
    layered(c);
    fock(c);
    decay(c);
}
