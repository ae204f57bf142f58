//! Flat gamma matrices and the operators derived from them.
//!
//! Signature is `(-, +, +, +)`, `{γ^a, γ^b} = 2η^{ab}`, with `γ⁰` anti-Hermitian and
//! the spatial gammas Hermitian. Only the chiral representation in dimension 2 and
//! the Weyl representation in dimension 4 are provided.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Global sign in `γ_M = s · i^{n/2+1} γ⁰⋯γ^{n−1}`.
///
/// With `s = −1` the chirality is `γ⁰γ¹` in dimension 2 and `iγ⁰γ¹γ²γ³` in
/// dimension 4, which is the branch reproducing `iV = −γ¹γ²γ³` in the Weyl basis.
pub const CHIRALITY_SIGN: f64 = -1.0;

/// Entries are exact `±1, ±i`, so identities hold to rounding of a handful of products.
pub const IDENTITY_TOLERANCE: f64 = 1e-14;

const I: Complex64 = Complex64::new(0.0, 1.0);
const O: Complex64 = Complex64::new(0.0, 0.0);
const P: Complex64 = Complex64::new(1.0, 0.0);
const N: Complex64 = Complex64::new(-1.0, 0.0);
const NI: Complex64 = Complex64::new(0.0, -1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct SpinRepresentation {
    pub dimension: usize,
    /// `γ⁰ … γ^{n−1}`, each of size `2^{n/2}`.
    pub gammas: Vec<CMatrix>,
    pub chirality: CMatrix,
    /// `𝒥_M = iγ⁰`.
    pub fundamental_symmetry: CMatrix,
    /// Flat `V^a = −γ⁰γ^a`.
    pub v_ops: Vec<CMatrix>,
    /// `V = −γ⁰γ_M`.
    pub v: CMatrix,
}

fn from_rows(n: usize, rows: &[Complex64]) -> CMatrix {
    DMatrix::from_row_slice(n, n, rows)
}

pub fn make_representation(dimension: usize) -> Result<SpinRepresentation> {
    let gammas = match dimension {
        2 => vec![
            from_rows(2, &[O, I, I, O]),
            from_rows(2, &[O, NI, I, O]),
        ],
        4 => vec![
            from_rows(
                4,
                &[O, O, I, O, O, O, O, I, I, O, O, O, O, I, O, O],
            ),
            from_rows(
                4,
                &[O, O, O, I, O, O, I, O, O, NI, O, O, NI, O, O, O],
            ),
            from_rows(
                4,
                &[O, O, O, P, O, O, N, O, O, N, O, O, P, O, O, O],
            ),
            from_rows(
                4,
                &[O, O, I, O, O, O, O, NI, NI, O, O, O, O, I, O, O],
            ),
        ],
        other => return Err(Error::UnsupportedDimension(other)),
    };
    let chirality = chirality_from_gammas(&gammas);
    let g0 = &gammas[0];
    let fundamental_symmetry = g0 * I;
    let v_ops = gammas.iter().map(|g| -(g0 * g)).collect();
    let v = -(g0 * &chirality);
    Ok(SpinRepresentation {
        dimension,
        gammas,
        chirality,
        fundamental_symmetry,
        v_ops,
        v,
    })
}

/// `CHIRALITY_SIGN · i^{n/2+1} γ⁰⋯γ^{n−1}`.
pub fn chirality_from_gammas(gammas: &[CMatrix]) -> CMatrix {
    let n = gammas.len();
    let size = gammas[0].nrows();
    let product = gammas
        .iter()
        .fold(CMatrix::identity(size, size), |acc, g| acc * g);
    product * (I.powu((n / 2 + 1) as u32) * CHIRALITY_SIGN)
}

/// Minkowski metric entry `η^{ab}` (equal to `η_{ab}` in an orthonormal frame).
pub fn eta(a: usize, b: usize) -> f64 {
    match (a, b) {
        (0, 0) => -1.0,
        _ if a == b => 1.0,
        _ => 0.0,
    }
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: String,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationReport {
    pub checks: Vec<IdentityCheck>,
    pub max_residual: f64,
    pub passed: bool,
}

impl RepresentationReport {
    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Evaluates every algebraic identity the representation is supposed to satisfy.
pub fn verify_representation(rep: &SpinRepresentation) -> RepresentationReport {
    let mut checks = Vec::new();
    let mut push = |name: String, residual: f64| {
        checks.push(IdentityCheck {
            passed: residual <= IDENTITY_TOLERANCE,
            name,
            residual,
        });
    };

    let n = rep.gammas.len();
    let size = rep.gammas[0].nrows();
    let id = CMatrix::identity(size, size);
    let g = &rep.gammas;

    if n != rep.dimension {
        push(format!("gamma count equals dimension {}", rep.dimension), f64::INFINITY);
    }

    for a in 0..n {
        for b in a..n {
            let anti = &g[a] * &g[b] + &g[b] * &g[a] - &id * Complex64::from(2.0 * eta(a, b));
            push(format!("{{gamma{a}, gamma{b}}} = 2 eta"), max_abs(&anti));
        }
    }
    push("gamma0 anti-Hermitian".into(), max_abs(&(&g[0] + g[0].adjoint())));
    for (a, ga) in g.iter().enumerate().skip(1) {
        push(format!("gamma{a} Hermitian"), max_abs(&(ga - ga.adjoint())));
    }

    let chi = &rep.chirality;
    push("chirality Hermitian".into(), max_abs(&(chi - chi.adjoint())));
    push("chirality squared = 1".into(), max_abs(&(chi * chi - &id)));
    for (a, ga) in g.iter().enumerate() {
        push(
            format!("chirality anticommutes with gamma{a}"),
            max_abs(&(chi * ga + ga * chi)),
        );
    }
    push(
        "chirality = sign * i^(n/2+1) * gamma product".into(),
        max_abs(&(chi - chirality_from_gammas(g))),
    );

    let j = &rep.fundamental_symmetry;
    push("J = i gamma0".into(), max_abs(&(j - &g[0] * I)));
    push("J squared = 1".into(), max_abs(&(j * j - &id)));
    push("J Hermitian".into(), max_abs(&(j - j.adjoint())));
    push("J anticommutes with chirality".into(), max_abs(&(j * chi + chi * j)));
    for (a, ga) in g.iter().enumerate() {
        let symbol = ga * NI;
        push(
            format!("J (-i gamma{a}) J = (-i gamma{a})^*"),
            max_abs(&(j * &symbol * j - symbol.adjoint())),
        );
    }

    let v = &rep.v_ops;
    for (a, va) in v.iter().enumerate() {
        push(
            format!("V{a} = -gamma0 gamma{a}"),
            max_abs(&(va + &g[0] * &g[a])),
        );
        push(format!("V{a} Hermitian"), max_abs(&(va - va.adjoint())));
    }
    push("V0 = 1".into(), max_abs(&(&v[0] - &id)));
    for a in 1..n {
        for b in a..n {
            let anti = &v[a] * &v[b] + &v[b] * &v[a] - &id * Complex64::from(2.0 * eta(a, b));
            push(format!("{{V{a}, V{b}}} = 2 delta"), max_abs(&anti));
        }
    }
    let vv = &rep.v;
    push("V = -gamma0 chirality".into(), max_abs(&(vv + &g[0] * chi)));
    push("V Hermitian".into(), max_abs(&(vv - vv.adjoint())));
    push("V squared = 1".into(), max_abs(&(vv * vv - &id)));
    push("V commutes with V0".into(), max_abs(&(vv * &v[0] - &v[0] * vv)));
    for (a, va) in v.iter().enumerate().skip(1) {
        push(format!("V anticommutes with V{a}"), max_abs(&(vv * va + va * vv)));
    }

    let max_residual = checks.iter().fold(0.0_f64, |acc, c| acc.max(c.residual));
    let passed = checks.iter().all(|c| c.passed);
    RepresentationReport {
        checks,
        max_residual,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_dimensional_chirality_is_diag_minus_one_one() {
        let rep = make_representation(2).unwrap();
        assert_eq!(rep.chirality, from_rows(2, &[c(-1.0, 0.0), O, O, c(1.0, 0.0)]));
        assert_eq!(rep.chirality, &rep.gammas[0] * &rep.gammas[1]);
    }

    #[test]
    fn weyl_v0_is_identity_and_iv_matches_table() {
        let rep = make_representation(4).unwrap();
        assert_eq!(rep.v_ops[0], CMatrix::identity(4, 4));
        let iv = &rep.v * I;
        assert_eq!(iv[(0, 2)], c(1.0, 0.0));
        assert_eq!(iv[(2, 0)], c(-1.0, 0.0));
        assert_eq!(iv, -(&rep.gammas[1] * &rep.gammas[2] * &rep.gammas[3]));
        // V^3 = diag(-1, 1, 1, -1)
        let v3 = &rep.v_ops[3];
        assert_eq!(v3[(0, 0)], c(-1.0, 0.0));
        assert_eq!(v3[(3, 3)], c(-1.0, 0.0));
    }

    #[test]
    fn both_representations_verify_exactly() {
        for dim in [2, 4] {
            let report = verify_representation(&make_representation(dim).unwrap());
            assert!(report.passed, "{:?}", report.failures().collect::<Vec<_>>());
            assert_eq!(report.max_residual, 0.0);
        }
    }

    #[test]
    fn rotating_gamma0_breaks_anticommutation() {
        let mut rep = make_representation(2).unwrap();
        rep.gammas[0] = &rep.gammas[0] * NI;
        let report = verify_representation(&rep);
        assert!(!report.passed);
        assert!(report
            .failures()
            .any(|f| f.name.starts_with("{gamma0, gamma0}")));
    }

    #[test]
    fn odd_or_large_dimensions_are_rejected() {
        assert_eq!(make_representation(3), Err(Error::UnsupportedDimension(3)));
        assert_eq!(make_representation(6), Err(Error::UnsupportedDimension(6)));
    }
}
