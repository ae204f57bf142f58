//! Pointwise obstruction matrices and causal-cone membership.
//!
//! An element is a pair of real functions `(a, b)`, one per sheet. It is causal when
//! the Hermitian matrix built from its flat-frame gradients, the mass and `a − b` is
//! positive semidefinite at every point.

mod noop;
mod psd;
mod spinor;
mod witness;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::clifford::{CMatrix, SpinRepresentation};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{Grid, MixedState, SpacetimeModel};

pub use noop::{vector_commutator_deviation, verify_vector_noop, Insertion};
pub use psd::{
    charpoly_certificate, hermitian_deviation, is_psd, min_eigenvalue, principal_minors_psd,
    CharpolyCertificate, PsdCheck, HERMITIAN_TOLERANCE,
};
pub use spinor::{saturation_vector, solve_spinor_system, spinor_residual, Saturation, SpinorSolution};
pub use witness::{
    witness_coefficients, witness_element, witness_flat_gradients, witness_matrix,
    witness_matrix_2d, WitnessElement, WitnessRow,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Sampled,
    Witness,
    User,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Sampled => "sampled",
            Provenance::Witness => "witness",
            Provenance::User => "user",
        }
    }
}

/// Values and coordinate gradients `∂_μ` of both functions at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSample {
    pub a: f64,
    pub b: f64,
    pub grad_a: [f64; 4],
    pub grad_b: [f64; 4],
}

/// A diagonal algebra element `diag(a, b)` given by two smooth real functions.
pub trait CausalElementPair: Sync {
    fn dimension(&self) -> usize;
    fn sample(&self, x: &[f64]) -> PairSample;
    fn provenance(&self) -> Provenance;
}

/// Pair defined by closed-form expressions, differentiated symbolically.
#[derive(Debug, Clone)]
pub struct ExprPair {
    dimension: usize,
    a: Expr,
    b: Expr,
    da: Vec<Expr>,
    db: Vec<Expr>,
}

impl ExprPair {
    pub fn new(a: Expr, b: Expr, dimension: usize) -> Result<ExprPair> {
        if dimension != 2 && dimension != 4 {
            return Err(Error::UnsupportedDimension(dimension));
        }
        for e in [&a, &b] {
            if e.arity() > dimension {
                return Err(Error::Precondition(format!(
                    "expression `{}` uses coordinates beyond dimension {dimension}",
                    e.source()
                )));
            }
        }
        let da = (0..dimension).map(|mu| a.derivative(mu)).collect();
        let db = (0..dimension).map(|mu| b.derivative(mu)).collect();
        Ok(ExprPair { dimension, a, b, da, db })
    }

    pub fn parse(a: &str, b: &str, dimension: usize) -> Result<ExprPair> {
        ExprPair::new(Expr::parse(a)?, Expr::parse(b)?, dimension)
    }
}

impl CausalElementPair for ExprPair {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn sample(&self, x: &[f64]) -> PairSample {
        let mut grad_a = [0.0; 4];
        let mut grad_b = [0.0; 4];
        for mu in 0..self.dimension {
            grad_a[mu] = self.da[mu].eval(x);
            grad_b[mu] = self.db[mu].eval(x);
        }
        PairSample {
            a: self.a.eval(x),
            b: self.b.eval(x),
            grad_a,
            grad_b,
        }
    }

    fn provenance(&self) -> Provenance {
        Provenance::User
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObstructionMatrix {
    pub point: Vec<f64>,
    pub matrix: CMatrix,
}

/// `[[Σ V^a a_{,a}, −iV m g], [iV m* g, Σ V^a b_{,a}]]` with flat gradients and `g = a − b`.
///
/// The lower-left block is written as the adjoint of the upper-right one, so the
/// result is Hermitian by construction.
pub fn assemble_obstruction(
    rep: &SpinRepresentation,
    flat_grad_a: &[f64],
    flat_grad_b: &[f64],
    mass: Complex64,
    gap: f64,
) -> CMatrix {
    let s = rep.v.nrows();
    let mut out = CMatrix::zeros(2 * s, 2 * s);
    for (k, v) in rep.v_ops.iter().enumerate() {
        let (ga, gb) = (flat_grad_a[k], flat_grad_b[k]);
        for i in 0..s {
            for j in 0..s {
                out[(i, j)] += v[(i, j)] * ga;
                out[(s + i, s + j)] += v[(i, j)] * gb;
            }
        }
    }
    let coupling = Complex64::new(0.0, -1.0) * mass * gap;
    for i in 0..s {
        for j in 0..s {
            let c = rep.v[(i, j)] * coupling;
            out[(i, s + j)] = c;
            out[(s + j, i)] = c.conj();
        }
    }
    out
}

fn check_dimensions(pair_dimension: usize, model: &SpacetimeModel, rep: &SpinRepresentation) -> Result<()> {
    if rep.dimension != model.dimension {
        return Err(Error::DimensionMismatch {
            expected: model.dimension,
            found: rep.dimension,
        });
    }
    if pair_dimension != model.dimension {
        return Err(Error::DimensionMismatch {
            expected: model.dimension,
            found: pair_dimension,
        });
    }
    Ok(())
}

/// Flat-frame gradients, mass and gap at a point; the common input of both matrix routes.
struct LocalData {
    ga: [f64; 4],
    gb: [f64; 4],
    mass: Complex64,
    gap: f64,
}

fn local_data<P: CausalElementPair + ?Sized>(pair: &P, x: &[f64], model: &SpacetimeModel) -> Result<LocalData> {
    let s = pair.sample(x);
    let n = model.dimension;
    let finite = s.a.is_finite()
        && s.b.is_finite()
        && s.grad_a[..n].iter().chain(&s.grad_b[..n]).all(|g| g.is_finite());
    if !finite {
        return Err(Error::NonFiniteGradient { point: x.to_vec() });
    }
    let frame = model.frame(x);
    Ok(LocalData {
        ga: frame.flat_gradient(&s.grad_a),
        gb: frame.flat_gradient(&s.grad_b),
        mass: model.mass_at(x),
        gap: s.a - s.b,
    })
}

pub fn obstruction_matrix<P: CausalElementPair + ?Sized>(
    pair: &P,
    point: &[f64],
    model: &SpacetimeModel,
    rep: &SpinRepresentation,
) -> Result<ObstructionMatrix> {
    check_dimensions(pair.dimension(), model, rep)?;
    if point.len() != model.dimension {
        return Err(Error::DimensionMismatch {
            expected: model.dimension,
            found: point.len(),
        });
    }
    let d = local_data(pair, point, model)?;
    Ok(ObstructionMatrix {
        point: point.to_vec(),
        matrix: assemble_obstruction(rep, &d.ga, &d.gb, d.mass, d.gap),
    })
}

/// Smallest eigenvalue of `[[p, c], [c*, r]]`.
#[inline]
pub(crate) fn block_min_eigenvalue(p: f64, r: f64, c: f64) -> f64 {
    let mean = 0.5 * (p + r);
    let half = 0.5 * (p - r);
    mean - half.hypot(c)
}

/// In two dimensions the matrix splits into two 2×2 blocks, solved in closed form.
fn min_eigenvalue_2d(d: &LocalData) -> f64 {
    let c = (d.mass * d.gap).norm();
    let a_plus = d.ga[0] + d.ga[1];
    let a_minus = d.ga[0] - d.ga[1];
    let b_plus = d.gb[0] + d.gb[1];
    let b_minus = d.gb[0] - d.gb[1];
    block_min_eigenvalue(a_plus, b_minus, c).min(block_min_eigenvalue(a_minus, b_plus, c))
}

/// Smallest eigenvalue of the obstruction matrix at `x`.
pub fn min_eigenvalue_at<P: CausalElementPair + ?Sized>(
    pair: &P,
    x: &[f64],
    model: &SpacetimeModel,
    rep: &SpinRepresentation,
) -> Result<f64> {
    let d = local_data(pair, x, model)?;
    if model.dimension == 2 {
        return Ok(min_eigenvalue_2d(&d));
    }
    Ok(min_eigenvalue(&assemble_obstruction(rep, &d.ga, &d.gb, d.mass, d.gap)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementCheck {
    pub passed: bool,
    pub min_eigenvalue: f64,
    pub worst_point: Vec<f64>,
    pub points: usize,
}

/// PSD at every listed point, with the most negative eigenvalue reported.
pub fn check_points<P: CausalElementPair + ?Sized>(
    pair: &P,
    model: &SpacetimeModel,
    rep: &SpinRepresentation,
    points: &[Vec<f64>],
) -> Result<ElementCheck> {
    check_dimensions(pair.dimension(), model, rep)?;
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let worst = points
        .par_iter()
        .map(|x| min_eigenvalue_at(pair, x, model, rep).map(|e| (e, x)))
        .try_reduce_with(|u, v| Ok(if v.0 < u.0 { v } else { u }))
        .expect("non-empty")?;
    Ok(ElementCheck {
        passed: worst.0 >= -model.settings.psd_tolerance,
        min_eigenvalue: worst.0,
        worst_point: worst.1.clone(),
        points: points.len(),
    })
}

/// [`check_points`] over every node of a grid.
pub fn is_causal_element<P: CausalElementPair + ?Sized>(
    pair: &P,
    model: &SpacetimeModel,
    rep: &SpinRepresentation,
    grid: &Grid,
) -> Result<ElementCheck> {
    check_dimensions(pair.dimension(), model, rep)?;
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.dimension() != model.dimension {
        return Err(Error::DimensionMismatch {
            expected: model.dimension,
            found: grid.dimension(),
        });
    }
    let worst = (0..grid.len())
        .into_par_iter()
        .map_init(
            || vec![0.0; grid.dimension()],
            |buf, i| {
                grid.point_into(i, buf);
                min_eigenvalue_at(pair, buf, model, rep).map(|e| (e, i))
            },
        )
        .try_reduce_with(|u, v| Ok(if v.0 < u.0 || (v.0 == u.0 && v.1 < u.1) { v } else { u }))
        .expect("non-empty")?;
    Ok(ElementCheck {
        passed: worst.0 >= -model.settings.psd_tolerance,
        min_eigenvalue: worst.0,
        worst_point: grid.point(worst.1),
        points: grid.len(),
    })
}

/// `φ a(q) − ξ a(p) + (1−φ) b(q) − (1−ξ) b(p)`: non-negative for every causal
/// element exactly when the first state precedes the second.
pub fn state_difference<P: CausalElementPair + ?Sized>(pair: &P, from: &MixedState, to: &MixedState) -> f64 {
    let p = pair.sample(&from.point);
    let q = pair.sample(&to.point);
    let (xi, phi) = (from.xi, to.xi);
    phi * q.a - xi * p.a + (1.0 - phi) * q.b - (1.0 - xi) * p.b
}
