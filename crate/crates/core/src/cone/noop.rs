//! Vector fluctuations `A_μ`, `B_μ` enter the Dirac operator as sheet-diagonal
//! multiples of the curved gammas, so they commute with every diagonal element and
//! drop out of the obstruction matrix.

use num_complex::Complex64;
use rayon::prelude::*;

use super::CausalElementPair;
use crate::clifford::{CMatrix, SpinRepresentation};
use crate::error::{Error, Result};
use crate::geometry::{Grid, SpacetimeModel};

/// Where the potential term is inserted in the two-sheet block structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insertion {
    /// `diag(A_μ γ̃^μ, B_μ γ̃^μ)`, the physical vector fluctuation.
    Diagonal,
    /// `[[0, A_μ γ̃^μ], [B_μ γ̃^μ, 0]]`; not of the required form, used as a control.
    OffDiagonal,
}

/// Max entry of `[X, diag(a, b) ⊗ 1]` over the grid, where `X` is the potential term.
pub fn vector_commutator_deviation<P: CausalElementPair + ?Sized>(
    model: &SpacetimeModel,
    pair: &P,
    rep: &SpinRepresentation,
    grid: &Grid,
    insertion: Insertion,
) -> Result<f64> {
    let potentials = model
        .vector_potentials
        .as_ref()
        .ok_or_else(|| Error::Precondition("model carries no vector potentials".into()))?;
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let n = model.dimension;
    let s = rep.v.nrows();
    let deviation = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let x = grid.point(idx);
            let frame = model.frame(&x);
            // γ̃^μ = e_a^μ γ^a
            let mut sum_a = CMatrix::zeros(s, s);
            let mut sum_b = CMatrix::zeros(s, s);
            for mu in 0..n {
                let (pa, pb) = (potentials.a[mu].eval(&x), potentials.b[mu].eval(&x));
                for (a, g) in rep.gammas.iter().enumerate() {
                    let e = frame.e[a][mu];
                    if e != 0.0 {
                        sum_a += g * Complex64::from(e * pa);
                        sum_b += g * Complex64::from(e * pb);
                    }
                }
            }
            let mut term = CMatrix::zeros(2 * s, 2 * s);
            match insertion {
                Insertion::Diagonal => {
                    term.view_mut((0, 0), (s, s)).copy_from(&sum_a);
                    term.view_mut((s, s), (s, s)).copy_from(&sum_b);
                }
                Insertion::OffDiagonal => {
                    term.view_mut((0, s), (s, s)).copy_from(&sum_a);
                    term.view_mut((s, 0), (s, s)).copy_from(&sum_b);
                }
            }
            let sample = pair.sample(&x);
            let element = CMatrix::from_fn(2 * s, 2 * s, |i, j| {
                if i != j {
                    Complex64::from(0.0)
                } else if i < s {
                    Complex64::from(sample.a)
                } else {
                    Complex64::from(sample.b)
                }
            });
            let comm = &term * &element - &element * &term;
            comm.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
        })
        .reduce(|| 0.0, f64::max);
    Ok(deviation)
}

/// [`vector_commutator_deviation`] for the physical, sheet-diagonal insertion.
pub fn verify_vector_noop<P: CausalElementPair + ?Sized>(
    model: &SpacetimeModel,
    pair: &P,
    rep: &SpinRepresentation,
    grid: &Grid,
) -> Result<f64> {
    vector_commutator_deviation(model, pair, rep, grid, Insertion::Diagonal)
}
