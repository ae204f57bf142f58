//! Separating elements for state pairs whose internal motion outruns the available
//! proper time.
//!
//! Along a curve with weighted length `l(t)` the pair is `a = −½cot θ`, `b = ½tan θ`
//! with `θ(t) = l(t) + σ·arcsin√ξ + ε`. Its flat gradients are chosen so that the
//! obstruction matrix is PSD and exactly singular on the curve.

use num_complex::Complex64;

use super::{
    assemble_obstruction, charpoly_certificate, min_eigenvalue, CausalElementPair, PairSample,
    Provenance,
};
use crate::clifford::{CMatrix, SpinRepresentation};
use crate::error::{Error, Result};
use crate::geometry::{
    cumulative_weighted_length, minkowski_norm, CausalCurve, SpacetimeModel, CAUSAL_TANGENT_TOLERANCE,
};

/// Flat gradients `(a_{,a}, b_{,a})` of the witness for flat tangent `w`, angle `θ`
/// and local weight `|m|`.
///
/// `a_{,a} = |m| csc²θ / (2N) · (w⁰, −w¹, …)` with `N = √(−η(w, w))`, so that the
/// derivative along `w` is `½ csc²θ · |m| N`; `b` is the same with `sec²θ`.
pub fn witness_flat_gradients(w: &[f64], theta: f64, weight: f64) -> ([f64; 4], [f64; 4]) {
    let norm = (-minkowski_norm(w)).sqrt();
    let (s, c) = theta.sin_cos();
    let ka = weight / (2.0 * norm * s * s);
    let kb = weight / (2.0 * norm * c * c);
    let mut ga = [0.0; 4];
    let mut gb = [0.0; 4];
    for (i, wi) in w.iter().enumerate() {
        let lowered = if i == 0 { *wi } else { -wi };
        ga[i] = ka * lowered;
        gb[i] = kb * lowered;
    }
    (ga, gb)
}

/// Obstruction matrix of the witness at a point with flat tangent `w`.
pub fn witness_matrix(rep: &SpinRepresentation, w: &[f64], theta: f64, mass: Complex64) -> CMatrix {
    let (ga, gb) = witness_flat_gradients(w, theta, mass.norm());
    assemble_obstruction(rep, &ga, &gb, mass, -1.0 / (2.0 * theta).sin())
}

/// Two-dimensional witness matrix in light-cone components `λ₁ = (w⁰+w¹)/2`,
/// `λ₂ = (w⁰−w¹)/2`, written entry by entry.
pub fn witness_matrix_2d(l1: f64, l2: f64, theta: f64, mass: Complex64) -> CMatrix {
    let m = mass.norm();
    let (s, c) = theta.sin_cos();
    let r21 = (l2 / l1).sqrt();
    let r12 = (l1 / l2).sqrt();
    let csc2 = 1.0 / (2.0 * theta).sin();
    let z = Complex64::from(0.0);
    let re = Complex64::from;
    let x = mass * csc2;
    let xc = mass.conj() * csc2;
    #[rustfmt::skip]
    let rows = [
        re(0.5 * r21 * m / (s * s)), z, z, x,
        z, re(0.5 * r12 * m / (s * s)), -x, z,
        z, -xc, re(0.5 * r21 * m / (c * c)), z,
        xc, z, z, re(0.5 * r12 * m / (c * c)),
    ];
    CMatrix::from_row_slice(4, 4, &rows)
}

/// Closed-form characteristic coefficients `c₁…c_k` of [`witness_matrix`].
///
/// In two dimensions `c₃ = c₄ = 0`; in four dimensions `c₅ = … = c₈ = 0`.
pub fn witness_coefficients(w: &[f64], theta: f64, weight: f64) -> Vec<f64> {
    let m = weight;
    let csc2 = 1.0 / (2.0 * theta).sin();
    let csc2sq = csc2 * csc2;
    match w.len() {
        2 => {
            let l1 = 0.5 * (w[0] + w[1]);
            let l2 = 0.5 * (w[0] - w[1]);
            let c1 = 2.0 * m * ((l2 / l1).sqrt() + (l1 / l2).sqrt()) * csc2sq;
            let c2 = m * m * ((l1 - l2).powi(2) + 4.0 * l1 * l2 * csc2sq) * csc2sq / (l1 * l2);
            vec![c1, c2, 0.0, 0.0]
        }
        _ => {
            let n2 = -minkowski_norm(w);
            let n = n2.sqrt();
            let r2 = w[1] * w[1] + w[2] * w[2] + w[3] * w[3];
            let w0 = w[0];
            let cos4 = (4.0 * theta).cos();
            let q = 2.0 * w0 * w0 - r2 - r2 * cos4;
            let c1 = 8.0 * m * w0 * csc2sq / n;
            let c2 = 4.0 * m * m * (6.0 * w0 * w0 - r2 - r2 * cos4) * csc2sq * csc2sq / n2;
            let c3 = 16.0 * m.powi(3) * w0 * q * csc2sq.powi(3) / (n2 * n);
            let c4 = 4.0 * m.powi(4) * q * q * csc2sq.powi(4) / (n2 * n2);
            vec![c1, c2, c3, c4, 0.0, 0.0, 0.0, 0.0]
        }
    }
}

#[derive(Debug, Clone)]
struct Node {
    t: f64,
    point: Vec<f64>,
    theta: f64,
    flat_tangent: [f64; 4],
    sample: PairSample,
}

/// Witness pair sampled along a curve and continued as a constant off it.
///
/// Evaluation at an arbitrary point uses the nearest curve sample, so the pair is
/// only meaningful on a thin tube around the curve.
#[derive(Debug, Clone)]
pub struct WitnessElement {
    dimension: usize,
    sigma: f64,
    epsilon: f64,
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessRow {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub min_eigenvalue: f64,
    pub coefficients: Vec<f64>,
    /// Largest `|c_k − closed_k| / ‖M‖_F^k` against [`witness_coefficients`].
    pub closed_form_discrepancy: f64,
    pub passed: bool,
}

/// Builds the separating pair for `ω_{γ(0),ξ}` and `ω_{γ(T),φ}`.
///
/// Fails with [`Error::NoWitnessNeeded`] when `ξ = φ` and with a precondition error
/// when the weighted length already covers the internal gap or the curve is not
/// timelike at some sample.
pub fn witness_element(curve: &CausalCurve, xi: f64, phi: f64, model: &SpacetimeModel) -> Result<WitnessElement> {
    for v in [xi, phi] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Precondition(format!("internal weight {v} outside [0, 1]")));
        }
    }
    if curve.dimension() != model.dimension {
        return Err(Error::DimensionMismatch {
            expected: model.dimension,
            found: curve.dimension(),
        });
    }
    if xi == phi {
        return Err(Error::NoWitnessNeeded);
    }
    let (start_angle, end_angle) = (xi.sqrt().asin(), phi.sqrt().asin());
    let gap = end_angle - start_angle;
    let sigma = gap.signum();
    let lengths = cumulative_weighted_length(curve, model)?;
    let total = *lengths.last().expect("curves are non-empty");
    let slack = gap.abs() - total;
    if !(slack > 0.0) {
        return Err(Error::Precondition(format!(
            "weighted length {total} does not fall short of the internal gap {}",
            gap.abs()
        )));
    }
    let interior = |v: f64| v > 0.0 && v < 1.0;
    let epsilon = if interior(xi) && interior(phi) { 0.0 } else { 0.5 * slack };

    let mut nodes = Vec::with_capacity(curve.len());
    for (i, (x, v)) in curve.points().iter().zip(curve.tangents()).enumerate() {
        let wv = model.flat_vector(x, v);
        let w = &wv[..model.dimension];
        let e2: f64 = w.iter().map(|c| c * c).sum();
        if !(w[0] > 0.0 && -minkowski_norm(w) > CAUSAL_TANGENT_TOLERANCE * e2) {
            return Err(Error::Precondition(format!(
                "curve is not future-directed timelike at sample {i}"
            )));
        }
        let theta = lengths[i] + sigma * start_angle + epsilon;
        let (fa, fb) = witness_flat_gradients(w, theta, model.weight(x));
        let frame = model.frame(x);
        nodes.push(Node {
            t: curve.params()[i],
            point: x.clone(),
            theta,
            flat_tangent: wv,
            sample: PairSample {
                a: -0.5 / theta.tan(),
                b: 0.5 * theta.tan(),
                grad_a: frame.coordinate_gradient(&fa),
                grad_b: frame.coordinate_gradient(&fb),
            },
        });
    }
    Ok(WitnessElement {
        dimension: model.dimension,
        sigma,
        epsilon,
        nodes,
    })
}

impl WitnessElement {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(|n| n.theta)
    }

    fn nearest(&self, x: &[f64]) -> &Node {
        self.nodes
            .iter()
            .min_by(|u, v| dist2(&u.point, x).total_cmp(&dist2(&v.point, x)))
            .expect("witness has samples")
    }

    /// Curve samples plus points displaced by `±radius` along every coordinate axis.
    pub fn tube_points(&self, radius: f64) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.nodes.len() * (2 * self.dimension + 1));
        for n in &self.nodes {
            out.push(n.point.clone());
            if radius > 0.0 {
                for axis in 0..self.dimension {
                    for s in [-1.0, 1.0] {
                        let mut p = n.point.clone();
                        p[axis] += s * radius;
                        out.push(p);
                    }
                }
            }
        }
        out
    }

    /// Per-sample audit: PSD margin, Newton-identity coefficients and their
    /// agreement with the closed forms.
    pub fn audit(&self, model: &SpacetimeModel, rep: &SpinRepresentation) -> Result<Vec<WitnessRow>> {
        let tol = model.settings.psd_tolerance;
        self.nodes
            .iter()
            .map(|n| {
                let m = super::obstruction_matrix(self, &n.point, model, rep)?.matrix;
                let cert = charpoly_certificate(&m, tol)?;
                let closed = witness_coefficients(&n.flat_tangent[..self.dimension], n.theta, model.weight(&n.point));
                let discrepancy = cert
                    .coefficients
                    .iter()
                    .zip(&closed)
                    .enumerate()
                    .map(|(k, (c, f))| (c - f).abs() / cert.scale.powi(k as i32 + 1))
                    .fold(0.0, f64::max);
                let min = min_eigenvalue(&m);
                Ok(WitnessRow {
                    t: n.t,
                    a: n.sample.a,
                    b: n.sample.b,
                    min_eigenvalue: min,
                    coefficients: cert.coefficients,
                    closed_form_discrepancy: discrepancy,
                    passed: cert.passed && min >= -tol,
                })
            })
            .collect()
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl CausalElementPair for WitnessElement {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn sample(&self, x: &[f64]) -> PairSample {
        self.nearest(x).sample
    }

    fn provenance(&self) -> Provenance {
        Provenance::Witness
    }
}
