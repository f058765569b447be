//! Kernel spectral densities and the quality of the basis approximation.
//!
//! Run with `cargo run --release --example kernels_basis`.

use lvhsgp::basis::{approx_covariance, build_basis, min_basis, BasisConfig};
use lvhsgp::kernels::{kernel_eval, spectral_density};
use lvhsgp::{KernelFamily, KernelHyper, Matrix};

fn main() -> lvhsgp::Result<()> {
    let hyper = KernelHyper::new(1.0, 1.0)?;
    println!("spectral density at rho = 1, alpha = 1");
    println!("{:>6} {:>12} {:>12} {:>12}", "omega", "se", "matern32", "matern52");
    for omega in [0.0, 0.5, 1.0, 2.0, 5.0] {
        let s: Vec<f64> = KernelFamily::ALL
            .iter()
            .map(|&f| spectral_density(f, omega, hyper))
            .collect::<lvhsgp::Result<_>>()?;
        println!("{omega:>6.1} {:>12.4e} {:>12.4e} {:>12.4e}", s[0], s[1], s[2]);
    }

    // 40 points strictly inside [-4, 4] on a basis with L = 5.
    let x: Vec<f64> = (1..=40).map(|k| -4.0 + 8.0 * k as f64 / 41.0).collect();
    println!("\nrelative Frobenius error of the approximate Gram matrix");
    for family in KernelFamily::ALL {
        let exact = Matrix::from_fn(x.len(), x.len(), |i, j| {
            kernel_eval(family, (x[i] - x[j]).abs(), hyper).expect("valid hyperparameters")
        });
        let errors: Vec<String> = [5, 10, 20, 30, 60]
            .iter()
            .map(|&m| {
                let basis = build_basis(&x, &BasisConfig::new(5.0, m, 1.25, 0.0)?)?;
                let mut diff = approx_covariance(&basis, family, hyper);
                for (a, b) in diff.as_mut_slice().iter_mut().zip(exact.as_slice()) {
                    *a -= b;
                }
                Ok(format!("M={m}: {:.3}%", 100.0 * diff.frobenius_norm() / exact.frobenius_norm()))
            })
            .collect::<lvhsgp::Result<_>>()?;
        println!("  {:<9} {}", family.tag(), errors.join("  "));
    }

    println!("\nminimum basis size with c = 1.25");
    for (range, rho) in [(10.0, 1.0), (1.0, 0.4), (10.0, 0.3)] {
        let m: Vec<String> = KernelFamily::ALL
            .iter()
            .map(|&f| Ok(format!("{}={}", f.tag(), min_basis(f, 1.25, range, rho)?)))
            .collect::<lvhsgp::Result<_>>()?;
        println!("  range {range:>4}, mean rho {rho}: {}", m.join(" "));
    }
    Ok(())
}
