//! Spinors with prescribed expectation values `ψ*V^aψ = w^a`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::clifford::{CMatrix, SpinRepresentation};
use crate::error::{Error, Result};
use crate::geometry::minkowski_norm;

#[derive(Debug, Clone, PartialEq)]
pub struct SpinorSolution {
    pub psi: Vec<Complex64>,
    /// `(β₁, β₂)`; zero in two dimensions.
    pub beta: (f64, f64),
    /// Relative phase of the second pair of components, `atan2(w², w¹)`.
    pub theta: f64,
    /// Free phase between the chiral halves, fixed to `π/2`.
    pub alpha: f64,
    /// Global phase.
    pub delta: f64,
    pub target: Vec<f64>,
}

/// Solves `ψ*V^aψ = w^a` for a future-directed timelike flat vector `w`.
pub fn solve_spinor_system(w: &[f64], rep: &SpinRepresentation) -> Result<SpinorSolution> {
    if w.len() != rep.dimension {
        return Err(Error::DimensionMismatch {
            expected: rep.dimension,
            found: w.len(),
        });
    }
    if !(w[0] > 0.0 && minkowski_norm(w) < 0.0) {
        return Err(Error::Precondition(format!(
            "flat vector {w:?} is not future-directed timelike"
        )));
    }
    let i = Complex64::new(0.0, 1.0);
    let solution = match rep.dimension {
        2 => SpinorSolution {
            psi: vec![
                Complex64::from((0.5 * (w[0] + w[1])).sqrt()),
                i * (0.5 * (w[0] - w[1])).sqrt(),
            ],
            beta: (0.0, 0.0),
            theta: 0.0,
            alpha: FRAC_PI_2,
            delta: 0.0,
            target: w.to_vec(),
        },
        _ => {
            let (w0, w1, w2, w3) = (w[0], w[1], w[2], w[3]);
            let ratio = ((w1 * w1 + w2 * w2) / (w0 * w0 - w3 * w3)).sqrt().min(1.0);
            // β₁ + β₂ = arccos(ratio), split evenly so both stay in [0, π/4]
            let beta = 0.5 * ratio.acos();
            let theta = if w1 == 0.0 {
                if w2 >= 0.0 {
                    FRAC_PI_2
                } else {
                    -FRAC_PI_2
                }
            } else {
                w2.atan2(w1)
            };
            let alpha = FRAC_PI_2;
            let minus = (0.5 * (w0 - w3)).sqrt();
            let plus = (0.5 * (w0 + w3)).sqrt();
            let r = [minus * beta.sin(), plus * beta.sin(), plus * beta.cos(), minus * beta.cos()];
            let phases = [0.0, theta, alpha, theta + alpha];
            SpinorSolution {
                psi: r.iter().zip(phases).map(|(&ri, ph)| Complex64::from_polar(ri, ph)).collect(),
                beta: (beta, beta),
                theta,
                alpha,
                delta: 0.0,
                target: w.to_vec(),
            }
        }
    };
    Ok(solution)
}

fn expectation(psi: &[Complex64], op: &CMatrix) -> Complex64 {
    let n = psi.len();
    let mut acc = Complex64::from(0.0);
    for i in 0..n {
        for j in 0..n {
            acc += psi[i].conj() * op[(i, j)] * psi[j];
        }
    }
    acc
}

/// `max_a |ψ*V^aψ − w^a|`.
pub fn spinor_residual(solution: &SpinorSolution, rep: &SpinRepresentation) -> f64 {
    rep.v_ops
        .iter()
        .zip(&solution.target)
        .map(|(v, w)| (expectation(&solution.psi, v) - w).norm())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Saturation {
    /// `(√χ ψ, √(1−χ) e^{iδ} ψ)`.
    pub vector: Vec<Complex64>,
    pub delta: f64,
    /// `2√(χ(1−χ)) |m(a−b)| N`, subtracted from the gradient terms of the quadratic form.
    pub bound: f64,
}

/// Sheet-mixing vector that makes the mass coupling as negative as possible.
///
/// For any element with `a − b = gap` at the point, `φ*Mφ` equals
/// `χ ψ*(V^a a_{,a})ψ + (1−χ) ψ*(V^a b_{,a})ψ − bound`.
pub fn saturation_vector(
    chi: f64,
    solution: &SpinorSolution,
    rep: &SpinRepresentation,
    mass: Complex64,
    gap: f64,
) -> Result<Saturation> {
    if !(0.0..=1.0).contains(&chi) {
        return Err(Error::Precondition(format!("mixing weight {chi} outside [0, 1]")));
    }
    let psi = &solution.psi;
    // cross term: 2 Re{e^{iδ} ψ*(−iV)ψ m g}
    let minus_iv = &rep.v * Complex64::new(0.0, -1.0);
    let cross = expectation(psi, &minus_iv) * mass * gap;
    let delta = if cross.norm() == 0.0 {
        0.0
    } else {
        std::f64::consts::PI - cross.arg()
    };
    let phase = Complex64::from_polar(1.0, delta);
    let (s, c) = (chi.sqrt(), (1.0 - chi).sqrt());
    let mut vector: Vec<Complex64> = psi.iter().map(|z| z * s).collect();
    vector.extend(psi.iter().map(|z| z * c * phase));
    Ok(Saturation {
        vector,
        delta,
        bound: 2.0 * s * c * cross.norm(),
    })
}
