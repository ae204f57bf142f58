//! Space-time models, causal curves and weighted proper time.
//!
//! Every metric is handled through its frame `e_a^μ`: the flat components of a
//! tangent vector are `w = E^{-T} v`, the interval is `g(v, v) = η(w, w)`, and the
//! flat gradient of a function is `(E ∂f)_a = e_a^μ ∂_μ f`. A two-dimensional
//! conformal metric `g^{μν} = Ω²η^{μν}` has frame `Ω·1`.

pub mod curve;
pub mod paths;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::Expr;

pub use curve::{
    cumulative_weighted_length, validate_curve, weighted_length, CausalCurve, CurveReport,
    SampleCheck, MIN_CURVE_SAMPLES,
};
pub use paths::{max_weighted_length, max_weighted_length_with, Method, PathOptimum, Strategy};

/// Inclusive tolerance on the light-cone boundary.
pub const CONE_TIE_TOLERANCE: f64 = 1e-12;

/// Tolerance on `η(ŵ, ŵ)` for a tangent normalized to unit Euclidean length.
pub const CAUSAL_TANGENT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    Minkowski,
    /// `g^{μν} = Ω² η^{μν}` in two dimensions.
    Conformal2D { omega: Expr },
    /// Rows are flat indices `a`, columns curved indices `μ`: `frame[a][μ] = e_a^μ`.
    Vielbein4D { frame: Box<[[Expr; 4]; 4]> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mass {
    Constant(Complex64),
    /// Scalar fluctuation `Φ = re + i·im`.
    Field { re: Expr, im: Expr },
    /// Diagonal finite Dirac operator: no coupling between the sheets.
    Diagonal,
}

impl Mass {
    /// The constant value when the mass does not vary over space-time.
    pub fn constant_value(&self) -> Option<Complex64> {
        match self {
            Mass::Constant(m) => Some(*m),
            Mass::Field { re, im } => Some(Complex64::new(re.constant_value()?, im.constant_value()?)),
            Mass::Diagonal => Some(Complex64::new(0.0, 0.0)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorPotentials {
    /// `A_μ`, one expression per coordinate.
    pub a: Vec<Expr>,
    /// `B_μ`.
    pub b: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl DomainBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<DomainBox> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(Error::Precondition(
                "domain box needs lower < upper on every axis".into(),
            ));
        }
        Ok(DomainBox { lower, upper })
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.lower.len()
            && point
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (l, u))| {
                    let slack = 1e-12 * (u - l);
                    *x >= l - slack && *x <= u + slack
                })
    }

    pub fn check(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: point.len(),
            });
        }
        if self.contains(point) {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                point: point.to_vec(),
            })
        }
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }
}

/// Numerical resolutions and tolerances carried by a model.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    /// Time layers (nodes) of the path grid.
    pub dp_time_steps: usize,
    /// Transverse nodes per layer of the path grid.
    pub dp_space_steps: usize,
    /// Points per axis of the cone-certification grid.
    pub certification_points: usize,
    /// Smallest eigenvalue accepted as non-negative.
    pub psd_tolerance: f64,
    /// Decision band for grid-optimized lengths.
    pub dp_tolerance: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            dp_time_steps: 401,
            dp_space_steps: 401,
            certification_points: 101,
            psd_tolerance: 1e-9,
            dp_tolerance: 2e-3,
        }
    }
}

/// Local orthonormal frame at a point: `e[a][μ] = e_a^μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub dim: usize,
    pub e: [[f64; 4]; 4],
}

impl Frame {
    fn scaled_identity(dim: usize, s: f64) -> Frame {
        let mut e = [[0.0; 4]; 4];
        for (a, row) in e.iter_mut().enumerate().take(dim) {
            row[a] = s;
        }
        Frame { dim, e }
    }

    /// `w = E^{-T} v`, i.e. solves `Σ_a e_a^μ w^a = v^μ`.
    pub fn flat_vector(&self, v: &[f64]) -> [f64; 4] {
        let n = self.dim;
        let mut m = [[0.0; 5]; 4];
        for mu in 0..n {
            for a in 0..n {
                m[mu][a] = self.e[a][mu];
            }
            m[mu][n] = v[mu];
        }
        solve_augmented(&mut m, n)
    }

    /// `(E ∂f)_a = Σ_μ e_a^μ ∂_μ f`.
    pub fn flat_gradient(&self, grad: &[f64]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (a, o) in out.iter_mut().enumerate().take(self.dim) {
            *o = (0..self.dim).map(|mu| self.e[a][mu] * grad[mu]).sum();
        }
        out
    }

    /// Inverse of [`Frame::flat_gradient`].
    pub fn coordinate_gradient(&self, flat: &[f64]) -> [f64; 4] {
        let n = self.dim;
        let mut m = [[0.0; 5]; 4];
        for a in 0..n {
            m[a][..n].copy_from_slice(&self.e[a][..n]);
            m[a][n] = flat[a];
        }
        solve_augmented(&mut m, n)
    }

    pub fn determinant(&self) -> f64 {
        let n = self.dim;
        let mut m = [[0.0; 4]; 4];
        for a in 0..n {
            m[a][..n].copy_from_slice(&self.e[a][..n]);
        }
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
                .unwrap();
            if m[pivot][col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                m.swap(pivot, col);
                det = -det;
            }
            det *= m[col][col];
            for row in col + 1..n {
                let f = m[row][col] / m[col][col];
                for k in col..n {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
        det
    }
}

fn solve_augmented(m: &mut [[f64; 5]; 4], n: usize) -> [f64; 4] {
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(pivot, col);
        let d = m[col][col];
        for row in 0..n {
            if row != col {
                let f = m[row][col] / d;
                if f != 0.0 {
                    for k in col..=n {
                        m[row][k] -= f * m[col][k];
                    }
                }
            }
        }
    }
    let mut out = [0.0; 4];
    for i in 0..n {
        out[i] = m[i][n] / m[i][i];
    }
    out
}

/// `η(w, w)` with signature `(-, +, …, +)`.
#[inline]
pub fn minkowski_norm(w: &[f64]) -> f64 {
    -w[0] * w[0] + w[1..].iter().map(|x| x * x).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeModel {
    pub dimension: usize,
    pub metric: Metric,
    pub mass: Mass,
    pub vector_potentials: Option<VectorPotentials>,
    pub domain: DomainBox,
    pub settings: Settings,
}

impl SpacetimeModel {
    pub fn new(
        dimension: usize,
        metric: Metric,
        mass: Mass,
        domain: DomainBox,
    ) -> Result<SpacetimeModel> {
        if dimension != 2 && dimension != 4 {
            return Err(Error::UnsupportedDimension(dimension));
        }
        if domain.dimension() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                found: domain.dimension(),
            });
        }
        match &metric {
            Metric::Conformal2D { omega } => {
                if dimension != 2 {
                    return Err(Error::Precondition(
                        "a conformal factor metric is only available in dimension 2".into(),
                    ));
                }
                check_arity(omega, dimension)?;
            }
            Metric::Vielbein4D { frame } => {
                if dimension != 4 {
                    return Err(Error::Precondition(
                        "a vielbein metric is only available in dimension 4".into(),
                    ));
                }
                for e in frame.iter().flatten() {
                    check_arity(e, dimension)?;
                }
            }
            Metric::Minkowski => {}
        }
        if let Mass::Field { re, im } = &mass {
            check_arity(re, dimension)?;
            check_arity(im, dimension)?;
        }
        Ok(SpacetimeModel {
            dimension,
            metric,
            mass,
            vector_potentials: None,
            domain,
            settings: Settings::default(),
        })
    }

    /// Flat space-time with constant mass parameter.
    pub fn minkowski(dimension: usize, mass: Complex64, domain: DomainBox) -> Result<SpacetimeModel> {
        SpacetimeModel::new(dimension, Metric::Minkowski, Mass::Constant(mass), domain)
    }

    pub fn conformal(omega: Expr, mass: Complex64, domain: DomainBox) -> Result<SpacetimeModel> {
        SpacetimeModel::new(2, Metric::Conformal2D { omega }, Mass::Constant(mass), domain)
    }

    pub fn with_settings(mut self, settings: Settings) -> Self {
        self.settings = settings;
        self
    }

    pub fn with_vector_potentials(mut self, potentials: VectorPotentials) -> Result<Self> {
        if potentials.a.len() != self.dimension || potentials.b.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: potentials.a.len().min(potentials.b.len()),
            });
        }
        for e in potentials.a.iter().chain(&potentials.b) {
            check_arity(e, self.dimension)?;
        }
        self.vector_potentials = Some(potentials);
        Ok(self)
    }

    pub fn frame(&self, x: &[f64]) -> Frame {
        match &self.metric {
            Metric::Minkowski => Frame::scaled_identity(self.dimension, 1.0),
            Metric::Conformal2D { omega } => Frame::scaled_identity(2, omega.eval(x)),
            Metric::Vielbein4D { frame } => {
                let mut e = [[0.0; 4]; 4];
                for (a, row) in frame.iter().enumerate() {
                    for (mu, expr) in row.iter().enumerate() {
                        e[a][mu] = expr.eval(x);
                    }
                }
                Frame { dim: 4, e }
            }
        }
    }

    /// `Some(s)` when the metric is `s⁻²·η` at `x`; then proper time of a
    /// coordinate displacement `Δ` is `√(−η(Δ,Δ)) / s`.
    #[inline]
    pub fn conformal_scale(&self, x: &[f64]) -> Option<f64> {
        match &self.metric {
            Metric::Minkowski => Some(1.0),
            Metric::Conformal2D { omega } => Some(omega.eval(x)),
            Metric::Vielbein4D { .. } => None,
        }
    }

    /// `|m|` or `|Φ(x)|`; zero for a diagonal finite part.
    #[inline]
    pub fn weight(&self, x: &[f64]) -> f64 {
        self.mass_at(x).norm()
    }

    #[inline]
    pub fn mass_at(&self, x: &[f64]) -> Complex64 {
        match &self.mass {
            Mass::Constant(m) => *m,
            Mass::Field { re, im } => Complex64::new(re.eval(x), im.eval(x)),
            Mass::Diagonal => Complex64::new(0.0, 0.0),
        }
    }

    /// Weight that multiplies proper time in the decision criterion.
    ///
    /// For a constant mass the criterion is stated on plain proper time, so the
    /// decision weight is 1 and the threshold is divided by `|m|` instead.
    #[inline]
    pub(crate) fn decision_weight(&self, x: &[f64]) -> f64 {
        if self.is_fluctuated() {
            self.weight(x)
        } else {
            1.0
        }
    }

    /// True when the mass is a non-constant scalar field.
    pub fn is_fluctuated(&self) -> bool {
        matches!(self.mass, Mass::Field { .. }) && self.mass.constant_value().is_none()
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.mass, Mass::Diagonal)
    }

    /// Flat metric up to a constant conformal factor: maximal proper time is the
    /// straight-line interval, available in closed form.
    pub fn flat_scale(&self) -> Option<f64> {
        match &self.metric {
            Metric::Minkowski => Some(1.0),
            Metric::Conformal2D { omega } => omega.constant_value(),
            Metric::Vielbein4D { .. } => None,
        }
    }

    /// Closed-form decisions are exact for flat metrics with a constant mass.
    pub fn closed_form_eligible(&self) -> bool {
        self.flat_scale().is_some() && self.mass.constant_value().is_some()
    }

    pub fn flat_vector(&self, x: &[f64], v: &[f64]) -> [f64; 4] {
        match self.conformal_scale(x) {
            Some(s) => {
                let mut w = [0.0; 4];
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi = vi / s;
                }
                w
            }
            None => self.frame(x).flat_vector(v),
        }
    }

    /// `g_x(v, v)`.
    pub fn interval(&self, x: &[f64], v: &[f64]) -> f64 {
        let w = self.flat_vector(x, v);
        minkowski_norm(&w[..self.dimension])
    }

    /// Coordinate speed of light along a spatial unit direction (largest root of
    /// `g((1, s·dir), (1, s·dir)) = 0`).
    pub fn light_speed(&self, x: &[f64], dir: &[f64]) -> f64 {
        let n = self.dimension;
        let mut e0 = [0.0; 4];
        e0[0] = 1.0;
        let mut ed = [0.0; 4];
        ed[1..n].copy_from_slice(&dir[..n - 1]);
        let w0 = self.flat_vector(x, &e0[..n]);
        let wd = self.flat_vector(x, &ed[..n]);
        let dot = |u: &[f64; 4], v: &[f64; 4]| -> f64 {
            -u[0] * v[0] + (1..n).map(|i| u[i] * v[i]).sum::<f64>()
        };
        let a = dot(&wd, &wd);
        let b = 2.0 * dot(&w0, &wd);
        let c = dot(&w0, &w0);
        if a <= 0.0 {
            return f64::INFINITY;
        }
        let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
        ((-b + disc) / (2.0 * a)).abs().max(((-b - disc) / (2.0 * a)).abs())
    }

    pub fn check_point(&self, point: &[f64]) -> Result<()> {
        self.domain.check(point)
    }

    /// Sanity checks on the sampled fields: positive conformal factor, invertible
    /// frame, future-pointing `e_0`, finite mass.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let mut x = vec![0.0; self.dimension];
        for i in 0..grid.len() {
            grid.point_into(i, &mut x);
            if let Metric::Conformal2D { omega } = &self.metric {
                let o = omega.eval(&x);
                if !(o > 0.0 && o.is_finite()) {
                    return Err(Error::FieldEvaluation {
                        field: "omega".into(),
                        point: x.clone(),
                    });
                }
            }
            let frame = self.frame(&x);
            let det = frame.determinant();
            if !det.is_finite() || det.abs() < 1e-12 || !(frame.e[0][0] > 0.0) {
                return Err(Error::FieldEvaluation {
                    field: "frame".into(),
                    point: x.clone(),
                });
            }
            if !self.mass_at(&x).norm().is_finite() {
                return Err(Error::FieldEvaluation {
                    field: "mass".into(),
                    point: x.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn certification_grid(&self) -> Grid {
        Grid::uniform(&self.domain, self.settings.certification_points)
    }
}

fn check_arity(e: &Expr, dimension: usize) -> Result<()> {
    if e.arity() > dimension {
        return Err(Error::Precondition(format!(
            "expression `{}` uses coordinates beyond dimension {dimension}",
            e.source()
        )));
    }
    Ok(())
}

/// A state `ω_{p,ξ}`: point `p` and weight `ξ` of the first sheet.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedState {
    pub point: Vec<f64>,
    pub xi: f64,
}

impl MixedState {
    pub fn new(point: Vec<f64>, xi: f64) -> Result<MixedState> {
        if !(0.0..=1.0).contains(&xi) {
            return Err(Error::Precondition(format!("internal weight {xi} outside [0, 1]")));
        }
        Ok(MixedState { point, xi })
    }
}

/// Regular tensor-product grid over a box, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Grid {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, counts: Vec<usize>) -> Result<Grid> {
        if lower.len() != upper.len() || lower.len() != counts.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: counts.len(),
            });
        }
        if counts.contains(&0) {
            return Err(Error::EmptyGrid);
        }
        Ok(Grid {
            lower,
            upper,
            counts,
        })
    }

    pub fn uniform(domain: &DomainBox, points_per_axis: usize) -> Grid {
        Grid {
            lower: domain.lower.clone(),
            upper: domain.upper.clone(),
            counts: vec![points_per_axis.max(1); domain.dimension()],
        }
    }

    /// Same box with `factor` times as many intervals per axis.
    pub fn refined(&self, factor: usize) -> Grid {
        Grid {
            lower: self.lower.clone(),
            upper: self.upper.clone(),
            counts: self
                .counts
                .iter()
                .map(|&c| if c <= 1 { c } else { (c - 1) * factor + 1 })
                .collect(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.counts.len()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axis_value(&self, axis: usize, i: usize) -> f64 {
        let n = self.counts[axis];
        if n == 1 {
            self.lower[axis]
        } else {
            self.lower[axis] + (self.upper[axis] - self.lower[axis]) * i as f64 / (n - 1) as f64
        }
    }

    pub fn point_into(&self, index: usize, out: &mut [f64]) {
        let mut rem = index;
        for axis in (0..self.dimension()).rev() {
            let n = self.counts[axis];
            out[axis] = self.axis_value(axis, rem % n);
            rem /= n;
        }
    }

    pub fn point(&self, index: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension()];
        self.point_into(index, &mut out);
        out
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }
}

/// `p ⪯ q` on the base manifold.
///
/// Conformal factors do not change light cones, so every two-dimensional model and
/// flat four-dimensional model uses the closed-form cone test. General vielbein
/// models fall back to reachability on the path grid.
pub fn is_causally_related(p: &[f64], q: &[f64], model: &SpacetimeModel) -> Result<bool> {
    model.check_point(p)?;
    model.check_point(q)?;
    match model.metric {
        Metric::Minkowski | Metric::Conformal2D { .. } => Ok(flat_cone_order(p, q)),
        Metric::Vielbein4D { .. } => paths::reachable(p, q, model),
    }
}

/// Closed-form Minkowski cone order, inclusive on the null boundary.
pub fn flat_cone_order(p: &[f64], q: &[f64]) -> bool {
    let dt = q[0] - p[0];
    let dx = p[1..]
        .iter()
        .zip(&q[1..])
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt();
    let scale = 1.0 + dt.abs().max(dx);
    dt - dx >= -CONE_TIE_TOLERANCE * scale
}

/// Flat proper time `√(−η(q−p, q−p))`, zero outside the cone.
pub fn flat_proper_time(p: &[f64], q: &[f64]) -> f64 {
    let d: Vec<f64> = p.iter().zip(q).map(|(a, b)| b - a).collect();
    (-minkowski_norm(&d)).max(0.0).sqrt()
}
