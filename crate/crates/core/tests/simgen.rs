mod common;

use common::{chi2_critical, chi2_uniform, mean, rng};
use lvhsgp::io::{read_simulated, write_simulated};
use lvhsgp::linalg::cholesky;
use lvhsgp::simgen::{self, draw_truncated_normal, lkj_draw, ScenarioKind, ScenarioSpec};
use lvhsgp::{Matrix, TruncatedNormal};
use proptest::prelude::*;

#[test]
fn narrow_truncated_normal_rarely_leaves_the_four_sigma_band() {
    let mut r = rng(1);
    let n = 100_000;
    let inside = (0..n)
        .filter(|_| {
            let v = draw_truncated_normal(1.0, 0.05, &mut r).unwrap();
            v > 0.8 && v < 1.2
        })
        .count();
    // P = 0.999937 (two-sided 4 SD); SD of the fraction at n = 1e5 is 2.5e-5
    let frac = inside as f64 / n as f64;
    assert!(frac > 0.99985, "{frac}");
}

#[test]
fn truncation_is_negligible_far_from_zero() {
    let mut r = rng(2);
    let v: Vec<f64> = (0..100_000).map(|_| draw_truncated_normal(3.0, 0.25, &mut r).unwrap()).collect();
    assert!((mean(&v) - 3.0).abs() < 0.01, "{}", mean(&v));
    assert!(v.iter().all(|&x| x > 0.0));
}

#[test]
fn vanishing_sd_returns_the_mean() {
    let mut r = rng(3);
    for _ in 0..100 {
        assert!((draw_truncated_normal(0.7, 1e-12, &mut r).unwrap() - 0.7).abs() < 1e-9);
    }
}

#[test]
fn single_output_variance_is_signal_plus_noise() {
    // Var(y) = E[alpha^2] + E[sigma^2] with alpha ~ N+(3, .25^2), sigma ~ N+(1, .25^2)
    let want = (9.0 + 0.0625) + (1.0 + 0.0625);
    let trials = 4000;
    let ys: Vec<f64> = (0..trials)
        .map(|t| {
            let spec = ScenarioSpec::new(ScenarioKind::GpSe, 2, 1, 10_000 + t).unwrap();
            let ds = simgen::generate(&spec).unwrap();
            assert_eq!(ds.c_true.as_slice(), &[1.0]);
            ds.y[(0, 0)]
        })
        .collect();
    let m = mean(&ys);
    let var = ys.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (trials as f64 - 1.0);
    let m4 = ys.iter().map(|y| (y - m).powi(4)).sum::<f64>() / trials as f64;
    let se = ((m4 - var * var) / trials as f64).sqrt();
    assert!((var - want).abs() < 3.0 * se, "var {var} vs {want} (se {se})");
}

#[test]
fn lkj_two_by_two_is_uniform() {
    let mut r = rng(4);
    let bins = 20;
    let mut counts = vec![0usize; bins];
    let mut sum = 0.0;
    let n = 20_000;
    for _ in 0..n {
        let (c, _) = lkj_draw(2, 1.0, &mut r).unwrap();
        let v = c[(1, 0)];
        sum += v;
        counts[(((v + 1.0) / 2.0 * bins as f64) as usize).min(bins - 1)] += 1;
    }
    assert!((sum / n as f64).abs() < 0.02);
    assert!(chi2_uniform(&counts) < chi2_critical(bins - 1, 0.01));
}

#[test]
fn mixed_functions_follow_the_output_correlation() {
    // A long input range gives many independent stretches of each GP, and a
    // near-constant alpha makes the mixed covariance proportional to C.
    let mut spec = ScenarioSpec::new(ScenarioKind::GpSe, 2000, 3, 5).unwrap();
    spec.x_range = (0.0, 2000.0);
    spec.alpha = TruncatedNormal::new(3.0, 1e-6).unwrap();
    let ds = simgen::generate(&spec).unwrap();
    let d = spec.d;
    let cols: Vec<Vec<f64>> = (0..d).map(|e| ds.f_true.column(e)).collect();
    let corr = Matrix::from_fn(d, d, |a, b| {
        let (ma, mb) = (mean(&cols[a]), mean(&cols[b]));
        let cov: f64 = cols[a].iter().zip(&cols[b]).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = cols[a].iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = cols[b].iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    });
    let mut diff = corr.clone();
    for (x, y) in diff.as_mut_slice().iter_mut().zip(ds.c_true.as_slice()) {
        *x -= y;
    }
    assert!(diff.frobenius_norm() < 0.1, "Frobenius distance {}", diff.frobenius_norm());
}

#[test]
fn periodic_functions_are_bounded_by_their_amplitude() {
    for kind in [ScenarioKind::PeriodicLow, ScenarioKind::PeriodicHigh] {
        let spec = ScenarioSpec::new(kind, 200, 4, 9).unwrap();
        let ds = simgen::generate(&spec).unwrap();
        for e in 0..4 {
            for &x in &ds.x_true {
                let f = simgen::periodic_function(x, ds.rho[e], ds.alpha[e]);
                assert!(f.abs() <= ds.alpha[e] + 1e-12);
            }
            let peak = simgen::periodic_function(ds.rho[e] * std::f64::consts::FRAC_PI_2, ds.rho[e], ds.alpha[e]);
            assert!((peak - ds.alpha[e]).abs() < 1e-12);
        }
    }
}

fn kinds() -> impl Strategy<Value = ScenarioKind> {
    prop_oneof![
        Just(ScenarioKind::GpSe),
        Just(ScenarioKind::GpMatern32),
        Just(ScenarioKind::GpMatern52),
        Just(ScenarioKind::GpSeWideRho),
        Just(ScenarioKind::PeriodicLow),
        Just(ScenarioKind::PeriodicHigh),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lkj_draws_are_valid_correlations(seed in 0u64..100_000, d in 1usize..8, eta in 0.5f64..4.0) {
        let (c, l) = lkj_draw(d, eta, &mut rng(seed)).unwrap();
        for i in 0..d {
            prop_assert!((c[(i, i)] - 1.0).abs() < 1e-12);
            for j in 0..d {
                prop_assert!((c[(i, j)] - c[(j, i)]).abs() < 1e-12);
            }
        }
        prop_assert!(cholesky(&c).is_some());
        prop_assert!(l.matmul(&l.transpose()).unwrap().max_abs_diff(&c) < 1e-12);
    }

    #[test]
    fn datasets_round_trip_through_files(kind in kinds(), seed in 0u64..10_000, n in 2usize..30, d in 1usize..5) {
        let spec = ScenarioSpec::new(kind, n, d, seed).unwrap();
        let ds = simgen::generate(&spec).unwrap();
        prop_assert_eq!(&ds, &simgen::generate(&spec).unwrap());
        let dir = tempfile::tempdir().unwrap();
        write_simulated(dir.path(), &ds).unwrap();
        prop_assert_eq!(read_simulated(dir.path()).unwrap(), ds);
    }

    #[test]
    fn noisy_inputs_track_the_truth(seed in 0u64..10_000) {
        let mut spec = ScenarioSpec::new(ScenarioKind::GpSe, 50, 2, seed).unwrap();
        spec.s = 0.0;
        let ds = simgen::generate(&spec).unwrap();
        prop_assert_eq!(&ds.x_tilde, &ds.x_true);
        prop_assert!(ds.x_true.iter().all(|&x| (0.0..=10.0).contains(&x)));
    }
}
