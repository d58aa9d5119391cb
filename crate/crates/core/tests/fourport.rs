use kkqed::fourport::{build_lambda, check_group};
use kkqed::linalg::c;
use kkqed::{CMat2, DeviceKind, DeviceMatrices};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_unitary(rng: &mut ChaCha8Rng) -> CMat2 {
    let theta: f64 = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
    let [phi, chi, psi]: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..std::f64::consts::TAU));
    let a = c(theta.cos(), 0.0) * c(0.0, phi).exp();
    let b = c(theta.sin(), 0.0) * c(0.0, chi).exp();
    CMat2::new(a, b, -b.conj(), a.conj()) * c(0.0, psi).exp()
}

fn diag(x: f64, y: f64) -> CMat2 {
    CMat2::new(c(x, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(y, 0.0))
}

#[test]
fn random_absorbers_are_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let t = random_unitary(&mut rng) * diag(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)) * random_unitary(&mut rng);
        let dev = DeviceMatrices::absorbing(t).unwrap();
        let lambda = build_lambda(&dev).unwrap();
        assert_eq!(lambda.block(0, 0), t);
        worst = worst.max(check_group(&lambda).isometry);
    }
    assert!(worst < 1e-10, "worst {worst:e}");
}

#[test]
fn random_amplifiers_are_pseudo_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (r1, r2): (f64, f64) = (rng.random_range(0.0..1.5), rng.random_range(0.0..1.5));
        let (u, v, w) = (random_unitary(&mut rng), random_unitary(&mut rng), random_unitary(&mut rng));
        let t = u * diag(r1.cosh(), r2.cosh()) * v;
        let a = u * diag(r1.sinh(), r2.sinh()) * w;
        let dev = DeviceMatrices::new(t, a, DeviceKind::Amplifying).unwrap();
        let lambda = build_lambda(&dev).unwrap();
        assert_eq!(lambda.block(0, 0), t);
        worst = worst.max(check_group(&lambda).isometry);
    }
    assert!(worst < 1e-10, "worst {worst:e}");
}

#[test]
fn gauge_change_keeps_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let t = random_unitary(&mut rng) * diag(0.6, 0.3);
        let dev = DeviceMatrices::absorbing(t).unwrap();
        let v = random_unitary(&mut rng);
        let moved = dev.with_gauge(&v).unwrap();
        let diff = moved.a() * moved.a().adjoint() - dev.a() * dev.a().adjoint();
        assert!(diff.iter().all(|z| z.norm() < 1e-14));
        let l1 = build_lambda(&dev).unwrap();
        let l2 = build_lambda(&moved).unwrap();
        assert!(check_group(&l2).isometry < 1e-12);
        assert_ne!(l1.matrix(), l2.matrix());
    }
}

#[test]
fn lossless_device_is_block_diagonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let t = random_unitary(&mut rng);
    let dev = DeviceMatrices::new(t, CMat2::zeros(), DeviceKind::Absorbing).unwrap();
    let lambda = build_lambda(&dev).unwrap();
    assert_eq!(lambda.block(0, 1), CMat2::zeros());
    assert_eq!(lambda.block(1, 0), CMat2::zeros());
    assert!((lambda.block(1, 1) - CMat2::identity()).iter().all(|z| z.norm() < 1e-15));
}
