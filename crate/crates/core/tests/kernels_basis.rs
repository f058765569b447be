mod common;

use lvhsgp::basis::{self, approx_covariance, build_basis, eigenfunction, min_basis, BasisConfig};
use lvhsgp::kernels::{kernel_eval, spectral_density};
use lvhsgp::{KernelFamily, KernelHyper, Matrix};

fn gram(x: &[f64], family: KernelFamily, hyper: KernelHyper) -> Matrix {
    Matrix::from_fn(x.len(), x.len(), |i, j| kernel_eval(family, (x[i] - x[j]).abs(), hyper).unwrap())
}

fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn spectral_density_matches_fourier_transform_table() {
    let cases = common::fourier_cases();
    assert_eq!(cases.len(), 300);
    for c in cases {
        let s = spectral_density(c.family, c.omega, KernelHyper::new(c.rho, c.alpha).unwrap()).unwrap();
        let rel = (s - c.value).abs() / c.value;
        assert!(rel < 1e-5, "{:?}: {s} vs {} (rel {rel:e})", c, c.value);
    }
}

#[test]
fn matern_values_from_independent_evaluation() {
    let h = KernelHyper::new(1.0, 1.0).unwrap();
    let k = kernel_eval(KernelFamily::Matern32, 1.0, h).unwrap();
    assert!((k - 0.483_357_724_596_507_7).abs() < 1e-15);
    let s = spectral_density(KernelFamily::Matern52, 1.0, KernelHyper::new(1.0, 2.0).unwrap()).unwrap();
    assert!((s - 5.521_155_499_999_48).abs() / s < 1e-6);
    let s0 = spectral_density(KernelFamily::Matern32, 0.0, h).unwrap();
    assert!((s0 - 4.0 * 3f64.powf(1.5) / 9.0).abs() < 1e-12);
}

#[test]
fn orthonormal_on_dense_grid() {
    let l = 2.0;
    let m = 6;
    let n = 20_001;
    let delta = 2.0 * l / (n - 1) as f64;
    let x: Vec<f64> = (1..n - 1).map(|i| -l + i as f64 * delta).collect();
    let cfg = BasisConfig::new(l, m, 1.25, 0.0).unwrap();
    let b = build_basis(&x, &cfg).unwrap();
    for j in 0..m {
        for k in 0..m {
            let ip: f64 = (0..x.len()).map(|i| b.values[(i, j)] * b.values[(i, k)]).sum::<f64>() * delta;
            let want = if j == k { 1.0 } else { 0.0 };
            assert!((ip - want).abs() < 1e-3, "({j},{k}) inner product {ip}");
        }
    }
}

#[test]
fn eigenfunction_direct_value() {
    let v = eigenfunction(2, 10.0, 3.7).unwrap();
    let want = 0.1f64.sqrt() * (std::f64::consts::PI / 10.0 * 13.7).sin();
    assert!((v - want).abs() < 1e-14);
}

#[test]
fn approximation_error_shrinks_with_basis_size() {
    let x = grid(40, -4.0, 4.0);
    let h = KernelHyper::new(1.0, 1.0).unwrap();
    let exact = gram(&x, KernelFamily::SquaredExponential, h);
    // Entries at least 1.5 length-scales away from the boundary at 5.
    let inner: Vec<usize> = (0..x.len()).filter(|&i| x[i].abs() <= 3.5 + 1e-12).collect();
    let mut prev_max = f64::INFINITY;
    for m in [5, 10, 20, 30, 40] {
        let cfg = BasisConfig::new(5.0, m, 1.25, 0.0).unwrap();
        let approx = approx_covariance(&build_basis(&x, &cfg).unwrap(), KernelFamily::SquaredExponential, h);
        let max = approx.max_abs_diff(&exact);
        assert!(max <= prev_max + 1e-12, "M={m}: {max} > {prev_max}");
        prev_max = max;
        if m == 30 {
            let off_boundary = inner
                .iter()
                .flat_map(|&i| inner.iter().map(move |&j| (i, j)))
                .map(|(i, j)| (approx[(i, j)] - exact[(i, j)]).abs())
                .fold(0.0, f64::max);
            assert!(off_boundary < 1e-2, "M=30 off-boundary error {off_boundary}");
        }
    }
}

#[test]
fn boundary_term_dominates_at_the_edges() {
    // With points on the closed interval the Dirichlet condition pulls the
    // corner variance down by exp(-2), whatever the basis size.
    let x = grid(40, -4.0, 4.0);
    let h = KernelHyper::new(1.0, 1.0).unwrap();
    let cfg = BasisConfig::new(5.0, 60, 1.25, 0.0).unwrap();
    let approx = approx_covariance(&build_basis(&x, &cfg).unwrap(), KernelFamily::SquaredExponential, h);
    let corner = 1.0 - approx[(0, 0)];
    assert!((corner - (-2.0f64).exp()).abs() < 1e-6, "{corner}");
}

#[test]
fn truncation_error_is_monotone_for_matern() {
    let x = grid(30, -3.0, 3.0);
    for family in [KernelFamily::Matern32, KernelFamily::Matern52] {
        let h = KernelHyper::new(1.2, 1.5).unwrap();
        let exact = gram(&x, family, h);
        let mut prev = f64::INFINITY;
        for m in [5, 10, 20, 40, 80] {
            let cfg = BasisConfig::new(4.5, m, 1.25, 0.0).unwrap();
            let err = approx_covariance(&build_basis(&x, &cfg).unwrap(), family, h).max_abs_diff(&exact);
            assert!(err <= prev + 1e-12, "{family} M={m}");
            prev = err;
        }
    }
}

#[test]
fn spectral_weights_decay() {
    let cfg = BasisConfig::new(5.0, 50, 1.25, 0.0).unwrap();
    for family in KernelFamily::ALL {
        let w = basis::spectral_weights(&cfg.eigenvalues(), family, KernelHyper::new(0.7, 2.0).unwrap());
        assert!(w.windows(2).all(|p| p[1] <= p[0]), "{family}");
    }
}

#[test]
fn approximate_covariance_is_symmetric() {
    let x = grid(17, -2.0, 2.5);
    let cfg = BasisConfig::new(4.0, 12, 1.25, 0.0).unwrap();
    let k = approx_covariance(&build_basis(&x, &cfg).unwrap(), KernelFamily::Matern52, KernelHyper::new(1.0, 1.0).unwrap());
    assert_eq!(k, k.transpose());
}

#[test]
fn minimum_basis_sizes() {
    assert_eq!(min_basis(KernelFamily::SquaredExponential, 1.25, 10.0, 1.0).unwrap(), 22);
    assert_eq!(min_basis(KernelFamily::SquaredExponential, 1.25, 1.0, 0.4).unwrap(), 6);
    assert_eq!(min_basis(KernelFamily::Matern52, 1.25, 10.0, 1.0).unwrap(), 34);
    assert_eq!(min_basis(KernelFamily::Matern32, 1.25, 10.0, 1.0).unwrap(), 43);
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn family() -> impl Strategy<Value = KernelFamily> {
        prop_oneof![
            Just(KernelFamily::SquaredExponential),
            Just(KernelFamily::Matern32),
            Just(KernelFamily::Matern52)
        ]
    }

    proptest! {
        #[test]
        fn kernel_is_bounded_and_decreasing(f in family(), rho in 0.2f64..5.0, alpha in 0.5f64..5.0, r in 0.0f64..20.0, dr in 0.0f64..5.0) {
            let h = KernelHyper::new(rho, alpha).unwrap();
            let a = kernel_eval(f, r, h).unwrap();
            let b = kernel_eval(f, r + dr, h).unwrap();
            prop_assert!(a <= alpha * alpha * (1.0 + 1e-15));
            prop_assert!(b <= a);
            prop_assert!(a > 0.0 || r > 0.0);
        }

        #[test]
        fn spectral_scaling_is_exact(f in family(), rho in 0.2f64..5.0, alpha in 0.5f64..5.0, w in -10.0f64..10.0) {
            let s = spectral_density(f, w, KernelHyper::new(rho, alpha).unwrap()).unwrap();
            let s1 = spectral_density(f, w, KernelHyper::new(rho, 1.0).unwrap()).unwrap();
            prop_assert!((s - alpha * alpha * s1).abs() <= 1e-14 * s.abs().max(1e-300));
            let neg = spectral_density(f, -w, KernelHyper::new(rho, alpha).unwrap()).unwrap();
            prop_assert_eq!(s, neg);
        }

        #[test]
        fn eigenfunctions_vanish_at_boundary(j in 1usize..200, l in 0.1f64..50.0) {
            prop_assert!(eigenfunction(j, l, -l).unwrap().abs() < 1e-12);
            prop_assert!(eigenfunction(j, l, l).unwrap().abs() < 1e-12);
        }

        #[test]
        fn eigenfunctions_are_bounded(j in 1usize..100, l in 0.1f64..50.0, t in -1.0f64..1.0) {
            prop_assert!(eigenfunction(j, l, t * l).unwrap().abs() <= (1.0 / l).sqrt() * (1.0 + 1e-15));
        }

        #[test]
        fn eigenvalues_increase(j in 1usize..1000, l in 0.1f64..50.0) {
            prop_assert!(basis::eigenvalue(j + 1, l).unwrap() > basis::eigenvalue(j, l).unwrap());
        }
    }
}
