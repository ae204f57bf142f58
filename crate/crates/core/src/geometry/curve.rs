//! Sampled causal curves and the weighted proper-time functional.

use crate::error::{Error, Result};

use super::{minkowski_norm, SpacetimeModel, CAUSAL_TANGENT_TOLERANCE};

/// Fewest samples accepted for a curve. With the piecewise-quadratic rule the
/// quadrature error is `O(h⁴)` per unit parameter for smooth integrands, so 16
/// samples already resolve a single-bump weight to about `1e-5`.
pub const MIN_CURVE_SAMPLES: usize = 16;

/// A future-directed path `γ(t_i)` with tangents `γ̇(t_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalCurve {
    params: Vec<f64>,
    points: Vec<Vec<f64>>,
    tangents: Vec<Vec<f64>>,
}

impl CausalCurve {
    /// Tangents from second-order finite differences on the (possibly
    /// non-uniform) parameter grid.
    pub fn new(params: Vec<f64>, points: Vec<Vec<f64>>) -> Result<CausalCurve> {
        check_shape(&params, &points)?;
        let tangents = finite_difference_tangents(&params, &points);
        Ok(CausalCurve {
            params,
            points,
            tangents,
        })
    }

    pub fn with_tangents(
        params: Vec<f64>,
        points: Vec<Vec<f64>>,
        tangents: Vec<Vec<f64>>,
    ) -> Result<CausalCurve> {
        check_shape(&params, &points)?;
        if tangents.len() != points.len() {
            return Err(Error::InvalidCurve(format!(
                "{} tangents for {} samples",
                tangents.len(),
                points.len()
            )));
        }
        let dim = points[0].len();
        if tangents.iter().any(|v| v.len() != dim || v.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidCurve("malformed tangent vector".into()));
        }
        Ok(CausalCurve {
            params,
            points,
            tangents,
        })
    }

    /// `γ(t) = p + t (q − p)` on `[0, 1]` with `samples` points.
    pub fn straight(p: &[f64], q: &[f64], samples: usize) -> Result<CausalCurve> {
        let n = samples.max(MIN_CURVE_SAMPLES);
        let v: Vec<f64> = p.iter().zip(q).map(|(a, b)| b - a).collect();
        let params: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let points = params
            .iter()
            .map(|t| p.iter().zip(&v).map(|(a, d)| a + t * d).collect())
            .collect();
        CausalCurve::with_tangents(params, points, vec![v; n])
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn tangents(&self) -> &[Vec<f64>] {
        &self.tangents
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.points[0].len()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.params[0], *self.params.last().unwrap())
    }

    pub fn start(&self) -> &[f64] {
        &self.points[0]
    }

    pub fn end(&self) -> &[f64] {
        self.points.last().unwrap()
    }
}

fn check_shape(params: &[f64], points: &[Vec<f64>]) -> Result<()> {
    if params.len() != points.len() {
        return Err(Error::InvalidCurve(format!(
            "{} parameters for {} samples",
            params.len(),
            points.len()
        )));
    }
    if params.len() < MIN_CURVE_SAMPLES {
        return Err(Error::InvalidCurve(format!(
            "{} samples, at least {MIN_CURVE_SAMPLES} required",
            params.len()
        )));
    }
    let dim = points[0].len();
    if points.iter().any(|x| x.len() != dim || x.iter().any(|c| !c.is_finite())) {
        return Err(Error::InvalidCurve("malformed sample point".into()));
    }
    if params.iter().any(|t| !t.is_finite()) || params.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidCurve(
            "parameter grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn finite_difference_tangents(t: &[f64], x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = t.len();
    let dim = x[0].len();
    // derivative at t[c] of the quadratic through samples i, j, k
    let three_point = |i: usize, j: usize, k: usize, c: usize| -> Vec<f64> {
        let (ti, tj, tk, tc) = (t[i], t[j], t[k], t[c]);
        let wi = ((tc - tj) + (tc - tk)) / ((ti - tj) * (ti - tk));
        let wj = ((tc - ti) + (tc - tk)) / ((tj - ti) * (tj - tk));
        let wk = ((tc - ti) + (tc - tj)) / ((tk - ti) * (tk - tj));
        (0..dim)
            .map(|d| wi * x[i][d] + wj * x[j][d] + wk * x[k][d])
            .collect()
    };
    (0..n)
        .map(|c| match c {
            0 => three_point(0, 1, 2, 0),
            _ if c == n - 1 => three_point(n - 3, n - 2, n - 1, c),
            _ => three_point(c - 1, c, c + 1, c),
        })
        .collect()
}

/// Per-sample causal character of the tangent.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCheck {
    pub index: usize,
    /// `η(ŵ, ŵ)` for the flat tangent normalized to unit Euclidean length.
    pub normalized_interval: f64,
    pub future_directed: bool,
    pub causal: bool,
}

impl SampleCheck {
    pub fn passed(&self) -> bool {
        self.future_directed && self.causal
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveReport {
    pub samples: Vec<SampleCheck>,
    /// Largest positive `η(ŵ, ŵ)` or zero.
    pub worst_violation: f64,
    /// First failing sample, if any.
    pub first_failure: Option<usize>,
    pub passed: bool,
}

pub fn validate_curve(curve: &CausalCurve, model: &SpacetimeModel) -> CurveReport {
    let n = model.dimension;
    let mut samples = Vec::with_capacity(curve.len());
    let mut worst_violation = 0.0_f64;
    for (index, (x, v)) in curve.points.iter().zip(&curve.tangents).enumerate() {
        let (normalized_interval, future_directed) = if x.len() == n && v.len() == n {
            let w = model.flat_vector(x, v);
            let norm = w[..n].iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm > 0.0 && norm.is_finite() {
                let wh: Vec<f64> = w[..n].iter().map(|c| c / norm).collect();
                (minkowski_norm(&wh), wh[0] > 0.0)
            } else {
                (f64::NAN, false)
            }
        } else {
            (f64::NAN, false)
        };
        let causal = normalized_interval <= CAUSAL_TANGENT_TOLERANCE;
        if normalized_interval > 0.0 {
            worst_violation = worst_violation.max(normalized_interval);
        }
        samples.push(SampleCheck {
            index,
            normalized_interval,
            future_directed,
            causal,
        });
    }
    let first_failure = samples.iter().find(|s| !s.passed()).map(|s| s.index);
    CurveReport {
        passed: first_failure.is_none(),
        samples,
        worst_violation,
        first_failure,
    }
}

/// Running integral of the piecewise-quadratic interpolant of `f` over `t`,
/// one value per node. Pairs of intervals share a parabola; an odd trailing
/// interval uses the last three nodes.
pub(crate) fn cumulative_quadratic(t: &[f64], f: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * (f[0] + f[1]) * (t[1] - t[0]);
        return out;
    }
    for k in 0..n - 1 {
        let base = parabola_base(k, n);
        out[k + 1] = out[k] + quadratic_integral(t, f, base, t[k], t[k + 1]);
    }
    out
}

/// First node of the parabola used on interval `[k, k + 1]`.
fn parabola_base(k: usize, n: usize) -> usize {
    let b = k - k % 2;
    if b + 2 < n {
        b
    } else {
        n - 3
    }
}

/// `∫_a^b` of the quadratic through nodes `i, i+1, i+2` (Newton form).
fn quadratic_integral(t: &[f64], f: &[f64], i: usize, a: f64, b: f64) -> f64 {
    let (t0, t1, t2) = (t[i], t[i + 1], t[i + 2]);
    let d1 = (f[i + 1] - f[i]) / (t1 - t0);
    let d12 = (f[i + 2] - f[i + 1]) / (t2 - t1);
    let d2 = (d12 - d1) / (t2 - t0);
    let h1 = t1 - t0;
    let prim = |u: f64| f[i] * u + d1 * u * u / 2.0 + d2 * (u * u * u / 3.0 - h1 * u * u / 2.0);
    prim(b - t0) - prim(a - t0)
}

fn length_density(curve: &CausalCurve, model: &SpacetimeModel, weight: impl Fn(&[f64]) -> f64) -> Result<Vec<f64>> {
    let report = validate_curve(curve, model);
    if let Some(index) = report.first_failure {
        return Err(Error::NotCausal {
            index,
            violation: report.samples[index].normalized_interval,
        });
    }
    Ok(curve
        .points
        .iter()
        .zip(&curve.tangents)
        .map(|(x, v)| weight(x) * (-model.interval(x, v)).max(0.0).sqrt())
        .collect())
}

/// `∫ w(γ) √(−g(γ̇, γ̇))` from the start of the curve to every sample, with
/// `w = |m|` or `|Φ|`.
pub fn cumulative_weighted_length(curve: &CausalCurve, model: &SpacetimeModel) -> Result<Vec<f64>> {
    let f = length_density(curve, model, |x| model.weight(x))?;
    Ok(cumulative_quadratic(&curve.params, &f))
}

/// Weighted proper time of the curve up to parameter `upto`.
pub fn weighted_length(curve: &CausalCurve, model: &SpacetimeModel, upto: f64) -> Result<f64> {
    let (start, end) = curve.range();
    if !(upto >= start && upto <= end) {
        return Err(Error::ParameterOutOfRange {
            value: upto,
            start,
            end,
        });
    }
    let f = length_density(curve, model, |x| model.weight(x))?;
    let cum = cumulative_quadratic(&curve.params, &f);
    let t = &curve.params;
    let k = match t.partition_point(|s| *s <= upto) {
        0 => 0,
        i => (i - 1).min(t.len() - 2),
    };
    if upto == t[k] {
        return Ok(cum[k]);
    }
    let base = parabola_base(k, t.len());
    Ok(cum[k] + quadratic_integral(t, &f, base, t[k], upto))
}
