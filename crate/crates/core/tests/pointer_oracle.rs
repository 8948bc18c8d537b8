mod common;

use common::*;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weakval::pointer::*;
use weakval::qstate::*;
use weakval::Error;

/// Moments of `sum_k c_k Psi(Q - d_k)` from Gaussian overlap integrals.
struct Closed {
    norm: f64,
    mean_q: f64,
    var_q: f64,
    mean_p: f64,
    var_p: f64,
}

fn closed_form(terms: &[(C64, f64)], sigma: f64) -> Closed {
    let s2 = sigma * sigma;
    let (mut n, mut q1, mut q2, mut p1, mut p2) =
        (C64::default(), C64::default(), C64::default(), C64::default(), C64::default());
    for &(cj, a) in terms {
        for &(ck, b) in terms {
            let w = cj.conj() * ck * (-(a - b).powi(2) / (4.0 * s2)).exp();
            let m = (a + b) / 2.0;
            n += w;
            q1 += w * m;
            q2 += w * (m * m + s2 / 2.0);
            p1 += w * C64::new(0.0, (a - b) / (2.0 * s2));
            p2 += w * ((s2 / 2.0 - (a - b).powi(2) / 4.0) / (s2 * s2));
        }
    }
    let norm = n.re;
    let mean_q = q1.re / norm;
    let mean_p = p1.re / norm;
    Closed {
        norm,
        mean_q,
        var_q: q2.re / norm - mean_q * mean_q,
        mean_p,
        var_p: p2.re / norm - mean_p * mean_p,
    }
}

fn terms(pre: &StateVector, post: &StateVector, obs: &SpectralObservable, g: f64) -> Vec<(C64, f64)> {
    obs.eigenpairs()
        .map(|(o, v)| (inner(post, v).unwrap() * inner(v, pre).unwrap(), g * o))
        .collect()
}

fn plus() -> StateVector {
    StateVector::from_real(&[1.0, 1.0]).unwrap()
}

/// Real weak value -1 for `|1><1|`.
fn real_instance() -> (StateVector, StateVector) {
    (plus(), StateVector::from_real(&[2.0, -1.0]).unwrap())
}

/// Weak value 0.5 - 0.5i for `|1><1|`.
fn imaginary_instance() -> (StateVector, StateVector) {
    let post = StateVector::new(vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)]).unwrap();
    (plus(), post)
}

#[test]
fn grid_moments_match_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let pointer = GaussianPointer::with_headroom(1.0, DEFAULT_GRID_POINTS, 3.0).unwrap();
    let mut checked = 0;
    while checked < 25 {
        let dim = rng.random_range(2..=4);
        let pre = random_state(&mut rng, dim);
        let post = random_state(&mut rng, dim);
        if inner(&post, &pre).unwrap().norm() < 0.1 {
            continue;
        }
        let obs = random_observable(&mut rng, dim);
        let g = rng.random_range(-1.0..1.0);
        let (_, r) = evolve_and_postselect(&pre, &post, &obs, g, &pointer).unwrap();
        let exact = closed_form(&terms(&pre, &post, &obs, g), 1.0);
        assert!((r.postselect_prob - exact.norm).abs() < 1e-9);
        assert!((r.mean_q - exact.mean_q).abs() < 1e-9, "{} vs {}", r.mean_q, exact.mean_q);
        assert!((r.var_q - exact.var_q).abs() < 1e-9);
        assert!((r.mean_p - exact.mean_p).abs() < 1e-9, "{} vs {}", r.mean_p, exact.mean_p);
        assert!((r.var_p - exact.var_p).abs() < 1e-9);
        checked += 1;
    }
}

#[test]
fn momentum_shift_constant() {
    // Im w = -0.5: the grid follows g Im w / sigma^2, half the quoted form.
    let (pre, post) = imaginary_instance();
    let obs = SpectralObservable::projector(2, 1).unwrap();
    for sigma in [0.5, 1.0, 2.0] {
        let pointer = GaussianPointer::with_headroom(sigma, DEFAULT_GRID_POINTS, 0.0).unwrap();
        let g = 1e-3 * sigma;
        let (_, r) = evolve_and_postselect(&pre, &post, &obs, g, &pointer).unwrap();
        let wv = weak_value(&pre, &post, &obs).unwrap();
        let shifts = predicted_shifts(&wv, g, &pointer);
        assert!((shifts.dp - g * wv.im / (sigma * sigma)).abs() < 1e-9);
        assert!((shifts.dp_quoted - 2.0 * shifts.dp).abs() < 1e-12);
        assert!(((r.mean_p - shifts.dp) / shifts.dp).abs() < 1e-2);
        assert!(((r.mean_p - shifts.dp_quoted) / shifts.dp_quoted).abs() > 0.4);
    }
}

#[test]
fn weak_shifts_converge_linearly() {
    let pointer = make_gaussian(1.0, DEFAULT_HALF_WIDTH_SIGMAS, DEFAULT_GRID_POINTS).unwrap();
    let obs = SpectralObservable::projector(2, 1).unwrap();
    let rel_err = |(pre, post): &(StateVector, StateVector), g: f64, momentum: bool| {
        let wv = weak_value(pre, post, &obs).unwrap();
        let (_, r) = evolve_and_postselect(pre, post, &obs, g, &pointer).unwrap();
        let s = predicted_shifts(&wv, g, &pointer);
        assert!(s.weak_regime);
        if momentum {
            ((r.mean_p - s.dp) / s.dp).abs()
        } else {
            ((r.mean_q - s.dq) / s.dq).abs()
        }
    };
    for (instance, momentum) in [(real_instance(), false), (imaginary_instance(), true)] {
        let coarse = rel_err(&instance, 0.01, momentum);
        let fine = rel_err(&instance, 0.005, momentum);
        assert!(coarse < 0.05, "relative error {coarse}");
        assert!(fine <= 0.6 * coarse, "{fine} vs {coarse}");
    }
}

#[test]
fn ensemble_mean_is_expectation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let dim = rng.random_range(2..=5);
        let pre = random_state(&mut rng, dim);
        let obs = random_observable(&mut rng, dim);
        let g = rng.random_range(0.0..2.0);
        let pointer = GaussianPointer::with_headroom(1.0, DEFAULT_GRID_POINTS, 3.0 * g).unwrap();
        let d = ensemble_distribution(&pre, &obs, g, &pointer).unwrap();
        assert!((d.integral() - 1.0).abs() < 1e-12);
        assert!((d.mean() - g * expectation(&pre, &obs).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn strong_coupling_resolves_eigenvalues() {
    let pre = StateVector::from_real(&[1.0, 2.0]).unwrap();
    let obs = SpectralObservable::diagonal(vec![-1.0, 1.0]).unwrap();
    let g = 20.0;
    let pointer = GaussianPointer::with_headroom(1.0, 8192, g).unwrap();
    assert!(pointer.grid_max() + pointer.dx() >= 30.0);
    let d = ensemble_distribution(&pre, &obs, g, &pointer).unwrap();
    let peaks = d.peaks(1e-3);
    assert_eq!(peaks.len(), 2);
    assert!((peaks[0] + g).abs() < 2.0 * pointer.dx());
    assert!((peaks[1] - g).abs() < 2.0 * pointer.dx());
    assert!((d.mass_between(-40.0, 0.0) - 0.2).abs() < 1e-6);
    assert!((d.mass_between(0.0, 40.0) - 0.8).abs() < 1e-6);
    assert!((d.mean() - g * expectation(&pre, &obs).unwrap()).abs() < 1e-9);
}

#[test]
fn postselection_probabilities_sum_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pointer = GaussianPointer::with_headroom(1.0, DEFAULT_GRID_POINTS, 3.0).unwrap();
    for _ in 0..5 {
        let dim = rng.random_range(2..=4);
        let pre = random_state(&mut rng, dim);
        let obs = random_observable(&mut rng, dim);
        let g = rng.random_range(-1.0..1.0);
        let total: f64 = random_basis(&mut rng, dim)
            .iter()
            .filter_map(|post| evolve_and_postselect(&pre, post, &obs, g, &pointer).ok())
            .map(|(_, r)| r.postselect_prob)
            .sum();
        assert!((total - 1.0).abs() < 1e-9, "total {total}");
    }
}

#[test]
fn undersized_grid_is_rejected() {
    let pointer = make_gaussian(1.0, 9.0, 1024).unwrap();
    let obs = SpectralObservable::diagonal(vec![-1.0, 1.0]).unwrap();
    let (pre, post) = real_instance();
    let err = evolve_and_postselect(&pre, &post, &obs, 5.0, &pointer).unwrap_err();
    assert!(matches!(err, Error::GridOverflow(_)));
    assert!(ensemble_distribution(&pre, &obs, 5.0, &pointer).is_err());
}
