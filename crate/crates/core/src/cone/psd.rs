use num_complex::Complex64;

use crate::clifford::CMatrix;
use crate::error::{Error, Result};

/// Largest tolerated `|M − M*|` entry, relative to the largest entry when that exceeds 1.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdCheck {
    pub passed: bool,
    pub min_eigenvalue: f64,
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    let mut scale = 1.0_f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            scale = scale.max(m[(i, j)].norm());
        }
    }
    worst / scale
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Precondition(format!(
            "matrix is {}x{}, not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let dev = hermitian_deviation(m);
    if !(dev <= HERMITIAN_TOLERANCE) {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Smallest eigenvalue of a Hermitian matrix.
///
/// 2×2 matrices use the closed form; larger ones the Hermitian eigensolver.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    if m.nrows() == 2 {
        return super::block_min_eigenvalue(m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)].norm());
    }
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |acc, &e| acc.min(e))
}

/// PSD up to `tol` on the smallest eigenvalue.
pub fn is_psd(m: &CMatrix, tol: f64) -> Result<PsdCheck> {
    check_hermitian(m)?;
    let min = min_eigenvalue(m);
    Ok(PsdCheck {
        passed: min >= -tol,
        min_eigenvalue: min,
    })
}

/// Sylvester-type test: every principal minor of `M/‖M‖_F` is at least `−tol`.
pub fn principal_minors_psd(m: &CMatrix, tol: f64) -> Result<bool> {
    check_hermitian(m)?;
    let n = m.nrows();
    let norm = m.norm();
    if norm == 0.0 {
        return Ok(true);
    }
    let a = m / Complex64::from(norm);
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let k = idx.len();
        let sub = CMatrix::from_fn(k, k, |i, j| a[(idx[i], idx[j])]);
        if sub.determinant().re < -tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharpolyCertificate {
    /// `c_k` in `det(A − λI) = λⁿ − c₁λⁿ⁻¹ + c₂λⁿ⁻² − …`: the elementary symmetric
    /// polynomials of the eigenvalues.
    pub coefficients: Vec<f64>,
    /// The same coefficients for `A/‖A‖_F`, on which the sign test is made.
    pub normalized: Vec<f64>,
    pub scale: f64,
    pub passed: bool,
}

/// Characteristic-polynomial coefficients by Newton's identities on trace powers.
///
/// The sign test runs on the Frobenius-normalized matrix, so `tol` is relative.
pub fn charpoly_certificate(m: &CMatrix, tol: f64) -> Result<CharpolyCertificate> {
    let n = m.nrows();
    if n != 4 && n != 8 {
        return Err(Error::UnsupportedMatrixSize(n));
    }
    check_hermitian(m)?;
    let scale = m.norm();
    if scale == 0.0 {
        return Ok(CharpolyCertificate {
            coefficients: vec![0.0; n],
            normalized: vec![0.0; n],
            scale,
            passed: true,
        });
    }
    let a = m / Complex64::from(scale);
    let mut power = a.clone();
    let mut traces = Vec::with_capacity(n);
    for k in 0..n {
        if k > 0 {
            power = &power * &a;
        }
        traces.push(power.trace().re);
    }
    // e_k = (1/k) Σ_{i=1..k} (−1)^{i−1} e_{k−i} p_i
    let mut e = vec![1.0];
    for k in 1..=n {
        let mut acc = 0.0;
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * e[k - i] * traces[i - 1];
        }
        e.push(acc / k as f64);
    }
    let normalized: Vec<f64> = e[1..].to_vec();
    let coefficients = normalized
        .iter()
        .enumerate()
        .map(|(k, c)| c * scale.powi(k as i32 + 1))
        .collect();
    let passed = normalized.iter().all(|&c| c >= -tol);
    Ok(CharpolyCertificate {
        coefficients,
        normalized,
        scale,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            v.len(),
            v.iter().map(|&x| Complex64::from(x)),
        ))
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        let b = CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        (&b + b.adjoint()) * Complex64::from(0.5)
    }

    #[test]
    fn diagonal_examples() {
        let r = is_psd(&diag(&[1.0; 4]), 1e-9).unwrap();
        assert!(r.passed);
        assert_abs_diff_eq!(r.min_eigenvalue, 1.0, epsilon = 1e-14);
        let r = is_psd(&diag(&[1.0, 1.0, 1.0, -0.1]), 1e-9).unwrap();
        assert!(!r.passed);
        assert_abs_diff_eq!(r.min_eigenvalue, -0.1, epsilon = 1e-14);
    }

    #[test]
    fn identity_gives_binomials() {
        let c = charpoly_certificate(&diag(&[1.0; 4]), 1e-9).unwrap();
        for (got, want) in c.coefficients.iter().zip([4.0, 6.0, 4.0, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        assert!(c.passed);
        let c = charpoly_certificate(&diag(&[1.0; 8]), 1e-9).unwrap();
        for (got, want) in c.coefficients.iter().zip([8.0, 28.0, 56.0, 70.0, 56.0, 28.0, 8.0, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-10);
        }
    }

    #[test]
    fn coefficients_match_eigenvalue_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [4, 8] {
            let m = random_hermitian(&mut rng, n);
            let eig: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
            let c = charpoly_certificate(&m, 1e-9).unwrap();
            let prod: f64 = eig.iter().product();
            let sum: f64 = eig.iter().sum();
            assert_abs_diff_eq!(c.coefficients[0], sum, epsilon = 1e-10);
            assert_abs_diff_eq!(c.coefficients[n - 1], prod, epsilon = 1e-9);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let mut m = diag(&[1.0; 4]);
        m[(0, 1)] = Complex64::new(0.0, 1e-6);
        assert!(matches!(is_psd(&m, 1e-9), Err(Error::NotHermitian(_))));
        assert!(matches!(
            charpoly_certificate(&diag(&[1.0; 3]), 1e-9),
            Err(Error::UnsupportedMatrixSize(3))
        ));
    }

    #[test]
    fn routes_agree_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tol = 1e-9;
        let mut tested = [0usize; 2];
        for trial in 0..10_000 {
            let n = if trial % 2 == 0 { 4 } else { 8 };
            let m = if trial % 3 == 0 {
                // PSD with a margin: B B* + δ I
                let b = CMatrix::from_fn(n, n, |_, _| {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                });
                &b * b.adjoint() + CMatrix::identity(n, n) * Complex64::from(1e-3)
            } else {
                random_hermitian(&mut rng, n)
            };
            let eig = is_psd(&m, tol).unwrap();
            // skip matrices whose smallest eigenvalue sits within rounding of the threshold
            if eig.min_eigenvalue.abs() < 1e-6 {
                continue;
            }
            let minors = principal_minors_psd(&m, tol).unwrap();
            let cert = charpoly_certificate(&m, tol).unwrap();
            assert_eq!(eig.passed, minors, "trial {trial}");
            assert_eq!(eig.passed, cert.passed, "trial {trial}");
            tested[eig.passed as usize] += 1;
        }
        assert!(tested[0] > 1000 && tested[1] > 1000, "{tested:?}");
    }
}
