//! Independent checks of the analytic kernels: central finite differences for
//! the gradient, brute-force grid search for phase alignment and a dense
//! eigensolve for the power method.

use gsi_core::linalg::hermitian_top_eigenpair;
use gsi_core::scalar::{inner, norm};
use gsi_core::spectral::random_unit_vector;
use gsi_core::{
    build_m, build_y, gradient, measure, objective, phase_align, power_method, rho_from_intensities,
    sample_measurements, Complex64, Ensemble, EntryKind, FieldTag, PowerOptions, Scalar,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gaussian_vec<S: Scalar<Real = f64>>(rng: &mut ChaCha8Rng, d: usize) -> Vec<S> {
    (0..d)
        .map(|_| {
            S::from_parts(
                rng.sample(rand_distr::StandardNormal),
                rng.sample(rand_distr::StandardNormal),
            )
        })
        .collect()
}

fn finite_difference_check<S: Scalar<Real = f64>>(field: FieldTag) {
    let (d, n, t) = (16, 64, 1e-6);
    let e = Ensemble::builtin(field, EntryKind::Gaussian);
    let set = sample_measurements::<S>(&e, n, d, 21).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x: Vec<S> = gaussian_vec(&mut rng, d);
    let y = measure(&set, &x).unwrap();
    let z: Vec<S> = gaussian_vec(&mut rng, d);
    let g = gradient(&z, &set, &y).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let u: Vec<S> = gaussian_vec(&mut rng, d);
        let step = |sign: f64| -> Vec<S> { z.iter().zip(&u).map(|(&a, &b)| a + b.scale(sign * t)).collect() };
        let fd = (objective(&step(1.0), &set, &y).unwrap() - objective(&step(-1.0), &set, &y).unwrap()) / (2.0 * t);
        let analytic = 2.0 * inner(&u, &g).re();
        worst = worst.max((fd - analytic).abs() / analytic.abs().max(1e-12));
    }
    assert!(worst < 1e-5, "{field}: worst relative error {worst:e}");
}

#[test]
fn gradient_matches_finite_differences_real() {
    finite_difference_check::<f64>(FieldTag::Real);
}

#[test]
fn gradient_matches_finite_differences_complex() {
    finite_difference_check::<Complex64>(FieldTag::Complex);
}

fn grid_minimum<S: Scalar<Real = f64>>(z: &[S], x: &[S]) -> (f64, f64) {
    (0..4096)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / 4096.0;
            let phase = Complex64::from_polar(1.0, theta);
            let v: f64 = z
                .iter()
                .zip(x)
                .map(|(&a, &b)| {
                    let a = Complex64::new(a.re(), a.im());
                    let b = Complex64::new(b.re(), b.im());
                    (a - b * phase).norm_sqr()
                })
                .sum::<f64>()
                .sqrt();
            (theta, v)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}

fn angular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

#[test]
fn phase_align_matches_grid_search_complex() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let z: Vec<Complex64> = gaussian_vec(&mut rng, 8);
        let x: Vec<Complex64> = gaussian_vec(&mut rng, 8);
        let a = phase_align(&z, &x).unwrap();
        let (theta, value) = grid_minimum(&z, &x);
        assert!(angular_gap(a.theta, theta) < 1e-3, "{} vs {theta}", a.theta);
        assert!(a.value <= value + 1e-12);
        assert!(value - a.value < 1e-3);
        assert!((0.0..std::f64::consts::TAU).contains(&a.theta));
    }
}

// The real minimizer is restricted to {0, π}; the grid oracle is searched over
// the same two points plus the full circle for the value bound.
#[test]
fn phase_align_matches_grid_search_real() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for _ in 0..100 {
        let z: Vec<f64> = gaussian_vec(&mut rng, 8);
        let x: Vec<f64> = gaussian_vec(&mut rng, 8);
        let a = phase_align(&z, &x).unwrap();
        let (theta, value) = grid_minimum(&z, &x);
        assert!(angular_gap(a.theta, theta) < 1e-3, "{} vs {theta}", a.theta);
        assert!((a.value - value).abs() < 1e-3);
    }
}

#[test]
fn power_method_matches_dense_eigensolver_on_m() {
    // M from a real ternary instance with a clear spectral gap.
    let e = Ensemble::builtin(FieldTag::Real, EntryKind::Ternary);
    let profile = gsi_core::moment_profile(&e).unwrap();
    let d = 20;
    let set = sample_measurements::<f64>(&e, 40 * d, d, 3).unwrap();
    let x = random_unit_vector::<f64>(d, 4);
    let y = measure(&set, &x).unwrap();
    let rho = rho_from_intensities(&y, profile.tau1).unwrap();
    let m = build_m(&build_y(&set, &y).unwrap(), rho, &profile).unwrap();
    let (lambda, v) = hermitian_top_eigenpair(&m);
    let p = power_method(&m, PowerOptions::iters(500), 9).unwrap();
    assert!((p.lambda - lambda).abs() < 1e-6 * lambda);
    let overlap: f64 = v.iter().zip(&p.vector).map(|(a, &b)| a.re * b).sum::<f64>().abs();
    assert!((overlap - 1.0).abs() < 1e-6);
    assert!((norm(&p.vector) - 1.0).abs() < 1e-14);
}
