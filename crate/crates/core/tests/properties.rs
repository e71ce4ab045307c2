use fieldsaddle::finder::{random_configuration, start_rng};
use fieldsaddle::model::{gradient, hessian, potential_energy};
use fieldsaddle::stability::{analyze, DEFAULT_ZERO_TOL};
use fieldsaddle::symmetry::{canonicalize, classify, equivalent};
use fieldsaddle::{ring, Configuration, ModelParams, SearchParams};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn random_config(n: usize, seed: u64, index: u64) -> Configuration {
    random_configuration(n, &SearchParams::default(), &mut start_rng(seed, index)).unwrap()
}

fn shift(c: &Configuration, k: usize, h: f64) -> Configuration {
    let mut x = c.to_flat();
    x[k] += h;
    Configuration::from_flat(x.as_slice())
}

fn fd_gradient(c: &Configuration, p: &ModelParams, h: f64) -> DVector<f64> {
    DVector::from_iterator(
        3 * c.len(),
        (0..3 * c.len()).map(|k| {
            let plus = potential_energy(&shift(c, k, h), p).unwrap();
            let minus = potential_energy(&shift(c, k, -h), p).unwrap();
            (plus - minus) / (2.0 * h)
        }),
    )
}

fn fd_hessian(c: &Configuration, p: &ModelParams, h: f64) -> DMatrix<f64> {
    let m = 3 * c.len();
    let mut out = DMatrix::zeros(m, m);
    for k in 0..m {
        let col = (gradient(&shift(c, k, h), p).unwrap() - gradient(&shift(c, k, -h), p).unwrap()) / (2.0 * h);
        out.set_column(k, &col);
    }
    out
}

fn rel_err_vec(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1.0)
}

#[test]
fn three_electron_gradient_matches_finite_differences() {
    let p = ModelParams::neutral(3);
    let c = random_config(3, 11, 0);
    let err = rel_err_vec(&fd_gradient(&c, &p, 1e-5), &gradient(&c, &p).unwrap());
    assert!(err < 1e-6, "{err}");
}

#[test]
fn two_electron_hessian_matches_finite_differences() {
    let p = ModelParams::neutral(2);
    let c = random_config(2, 12, 0);
    let h = hessian(&c, &p).unwrap();
    let err = (fd_hessian(&c, &p, 1e-5) - &h).amax() / h.amax().max(1.0);
    assert!(err < 1e-5, "{err}");
}

/// 100 random configurations for every N in 2..=8.
#[test]
fn derivatives_agree_with_finite_differences_for_all_n() {
    for n in 2..=8 {
        let p = ModelParams::neutral(n);
        for i in 0..100 {
            let c = random_config(n, 2024, i);
            let g = gradient(&c, &p).unwrap();
            let h = hessian(&c, &p).unwrap();
            // smallest relative error over the admissible step sizes
            let g_err = [1e-4, 1e-5, 1e-6]
                .iter()
                .map(|&s| rel_err_vec(&fd_gradient(&c, &p, s), &g))
                .fold(f64::INFINITY, f64::min);
            let h_err = [1e-4, 1e-5, 1e-6]
                .iter()
                .map(|&s| (fd_hessian(&c, &p, s) - &h).amax() / h.amax().max(1.0))
                .fold(f64::INFINITY, f64::min);
            assert!(g_err <= 1e-5, "n={n} i={i} gradient err {g_err}");
            assert!(h_err <= 1e-5, "n={n} i={i} hessian err {h_err}");
        }
    }
}

#[test]
fn hessian_is_exactly_symmetric() {
    for n in 2..=8 {
        let c = random_config(n, 5, n as u64);
        let h = hessian(&c, &ModelParams::neutral(n)).unwrap();
        assert_eq!(h, h.transpose());
    }
}

#[test]
fn off_axis_saddles_have_one_zero_mode() {
    for n in 2..=8 {
        let c = ring::ring_saddle(n).unwrap().unwrap().configuration();
        let s = analyze(&c, &ModelParams::neutral(n), DEFAULT_ZERO_TOL).unwrap();
        let small = s.eigenvalues.iter().filter(|h| h.abs() < DEFAULT_ZERO_TOL).count();
        assert_eq!(small, 1, "n={n}");
    }
}

/// A random element of the symmetry group applied to `c`.
fn transform(c: &Configuration, seed: u64) -> Configuration {
    let mut rng = start_rng(seed, 99);
    let mut perm: Vec<usize> = (0..c.len()).collect();
    perm.shuffle(&mut rng);
    let mut out = c.rotated(rng.random_range(0.0..std::f64::consts::TAU)).permuted(&perm);
    if rng.random_bool(0.5) {
        out = out.reflected(rng.random_range(0.0..std::f64::consts::PI));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_is_group_invariant(n in 2usize..=8, seed in any::<u64>(), g in any::<u64>()) {
        let p = ModelParams::neutral(n);
        let c = random_config(n, seed, 0);
        let e = potential_energy(&c, &p).unwrap();
        let e2 = potential_energy(&transform(&c, g), &p).unwrap();
        prop_assert!((e - e2).abs() <= 1e-12 * e.abs().max(1.0));
    }

    #[test]
    fn transformed_configurations_are_equivalent(n in 2usize..=8, seed in any::<u64>(), g in any::<u64>()) {
        let c = random_config(n, seed, 1);
        let d = transform(&c, g);
        prop_assert!(equivalent(&c, &d, 1e-5));
        prop_assert!(equivalent(&d, &c, 1e-5));
        prop_assert!(canonicalize(&c, 1e-5).key_distance(&canonicalize(&d, 1e-5)) < 1e-12);
        prop_assert_eq!(classify(&c, 1e-6), classify(&d, 1e-6));
    }

    #[test]
    fn rescale_is_a_group_action(n in 2usize..=8, seed in any::<u64>(), f1 in 0.1f64..10.0, f2 in 0.1f64..10.0, f3 in 0.1f64..10.0) {
        let c = random_config(n, seed, 2);
        let a = c.rescaled(f1, f2).unwrap().rescaled(f2, f3).unwrap();
        let b = c.rescaled(f1, f3).unwrap();
        for (x, y) in a.positions.iter().flatten().zip(b.positions.iter().flatten()) {
            prop_assert!((x - y).abs() <= 1e-13 * y.abs().max(1.0));
        }
    }

    #[test]
    fn rescaled_energy_scales_with_root_field(n in 2usize..=8, seed in any::<u64>(), f in 0.1f64..10.0) {
        let c = random_config(n, seed, 3);
        let e1 = potential_energy(&c, &ModelParams::neutral(n)).unwrap();
        let p = ModelParams::new(n, n as f64, f).unwrap();
        let e2 = potential_energy(&c.rescaled(1.0, f).unwrap(), &p).unwrap();
        prop_assert!((e2 - e1 * f.sqrt()).abs() <= 1e-12 * e2.abs().max(1.0));
    }
}

#[test]
fn spectrum_is_group_invariant_at_saddles() {
    let saddles: Vec<Configuration> = (2..=8)
        .map(|n| ring::ring_saddle(n).unwrap().unwrap().configuration())
        .chain((4..=8).map(|n| ring::ring_plus_center_saddle(n).unwrap().configuration()))
        .collect();
    for (k, c) in saddles.iter().enumerate() {
        let p = ModelParams::neutral(c.len());
        let base = analyze(c, &p, DEFAULT_ZERO_TOL).unwrap();
        for g in 0..5 {
            let moved = transform(c, 1000 * k as u64 + g);
            let s = analyze(&moved, &p, DEFAULT_ZERO_TOL).unwrap();
            for (a, b) in base.eigenvalues.iter().zip(&s.eigenvalues) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
            assert_eq!(s.exponents().n_u, base.exponents().n_u);
        }
    }
}

#[test]
fn rescaled_spectrum_keeps_mu() {
    let c = ring::ring_saddle(3).unwrap().unwrap().configuration();
    let base = analyze(&c, &ModelParams::neutral(3), DEFAULT_ZERO_TOL).unwrap().exponents();
    assert!((base.mu - 2.6226).abs() < 1e-3);
    let s = 5.0;
    let p = ModelParams::new(3, 3.0, s).unwrap();
    let moved = analyze(&c.rescaled(1.0, s).unwrap(), &p, DEFAULT_ZERO_TOL).unwrap().exponents();
    assert!((moved.mu - base.mu).abs() < 1e-10);
    assert_eq!(moved.n_u, base.n_u);
    assert!((moved.lambda_r - base.lambda_r * s.powf(0.75)).abs() < 1e-9);
}
