//! Built-in consistency suites: gamma-matrix identities, witness certificates and
//! spinor residuals on seeded random draws.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twosheet_core::cone::{
    charpoly_certificate, min_eigenvalue, solve_spinor_system, spinor_residual, witness_coefficients, witness_matrix,
    witness_matrix_2d,
};
use twosheet_core::io::fmt_num;
use twosheet_core::{make_representation, verify_representation};

const DRAWS: usize = 1000;

pub struct Suite {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn random_timelike(rng: &mut ChaCha8Rng, dim: usize, vertical: bool) -> Vec<f64> {
    let mut w = vec![0.0; dim];
    let mut r2 = 0.0;
    for (i, wi) in w.iter_mut().enumerate().skip(1) {
        if vertical && i == 1 {
            continue;
        }
        *wi = rng.gen_range(-2.0..2.0);
        r2 += *wi * *wi;
    }
    w[0] = (r2 + rng.gen_range(1e-2..3.0_f64)).sqrt();
    w
}

fn representation_suite(dim: usize) -> Suite {
    let name = format!("representation {dim}d");
    match make_representation(dim) {
        Ok(rep) => {
            let report = verify_representation(&rep);
            Suite {
                name,
                passed: report.passed,
                detail: format!("max residual {}", fmt_num(report.max_residual)),
            }
        }
        Err(e) => Suite {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

/// Characteristic coefficients of the witness matrix against the closed forms.
fn certificate_suite(dim: usize, seed: u64) -> Suite {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rep = make_representation(dim).expect("supported dimension");
    let mut worst = 0.0_f64;
    let mut min_eig = f64::INFINITY;
    let mut error = None;
    for _ in 0..DRAWS {
        let theta = rng.gen_range(0.05..std::f64::consts::FRAC_PI_2 - 0.05);
        let mass = Complex64::from_polar(rng.gen_range(0.2..2.0), rng.gen_range(0.0..std::f64::consts::TAU));
        let w = if dim == 2 {
            // light-cone components
            let (l1, l2) = (rng.gen_range(0.2..3.0), rng.gen_range(0.2..3.0));
            vec![l1 + l2, l1 - l2]
        } else {
            random_timelike(&mut rng, 4, false)
        };
        let matrix = witness_matrix(&rep, &w, theta, mass);
        if dim == 2 {
            let entrywise = witness_matrix_2d(0.5 * (w[0] + w[1]), 0.5 * (w[0] - w[1]), theta, mass);
            worst = worst.max((&matrix - &entrywise).norm() / matrix.norm());
        }
        let closed = witness_coefficients(&w, theta, mass.norm());
        match charpoly_certificate(&matrix, 1e-10) {
            Ok(cert) => {
                for (k, (c, f)) in cert.coefficients.iter().zip(&closed).enumerate() {
                    worst = worst.max((c - f).abs() / cert.scale.powi(k as i32 + 1));
                }
                if !cert.passed {
                    error.get_or_insert_with(|| "sign test failed".to_string());
                }
            }
            Err(e) => {
                error.get_or_insert(e.to_string());
            }
        }
        min_eig = min_eig.min(min_eigenvalue(&matrix));
    }
    let passed = error.is_none() && worst <= 1e-10 && min_eig >= -1e-10;
    Suite {
        name: format!("witness certificate {dim}d"),
        passed,
        detail: error.unwrap_or_else(|| {
            format!(
                "{DRAWS} draws, max relative deviation {}, min eigenvalue {}",
                fmt_num(worst),
                fmt_num(min_eig)
            )
        }),
    }
}

fn spinor_suite(dim: usize, seed: u64) -> Suite {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rep = make_representation(dim).expect("supported dimension");
    let mut worst = 0.0_f64;
    let mut error = None;
    for k in 0..DRAWS {
        let w = random_timelike(&mut rng, dim, dim == 4 && k % 10 == 0);
        match solve_spinor_system(&w, &rep) {
            Ok(sol) => {
                let scale = w.iter().fold(1.0_f64, |a, x| a.max(x.abs()));
                worst = worst.max(spinor_residual(&sol, &rep) / scale);
            }
            Err(e) => {
                error.get_or_insert(e.to_string());
            }
        }
    }
    Suite {
        name: format!("spinor residuals {dim}d"),
        passed: error.is_none() && worst <= 1e-10,
        detail: error.unwrap_or_else(|| format!("{DRAWS} draws, max scaled residual {}", fmt_num(worst))),
    }
}

pub fn run(seed: u64) -> Vec<Suite> {
    vec![
        representation_suite(2),
        representation_suite(4),
        certificate_suite(2, seed),
        certificate_suite(4, seed.wrapping_add(1)),
        spinor_suite(2, seed.wrapping_add(2)),
        spinor_suite(4, seed.wrapping_add(3)),
    ]
}
