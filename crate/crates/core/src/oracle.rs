//! Monte-Carlo cross-check of decisions against randomly sampled causal elements.
//!
//! An element is `a = T + s·Σ cᵢ uᵢ`, `b = T + s·Σ dᵢ uᵢ` with `T` a boosted linear
//! time function and `uᵢ` Gaussian-windowed cosines. The obstruction matrix is
//! affine in the shrink factor `s`, so the largest admissible `s` is found on the
//! precomputed pencil and the element is then certified on the grid directly.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::causality::{decide, CausalDecision};
use crate::clifford::{CMatrix, SpinRepresentation};
use crate::cone::{
    assemble_obstruction, is_causal_element, min_eigenvalue, state_difference,
    witness_element, CausalElementPair, PairSample, Provenance,
};
use crate::error::{Error, Result};
use crate::geometry::{is_causally_related, CausalCurve, Grid, MixedState, SpacetimeModel};

/// Values below this count as a violation of the ordering inequality.
pub const NEGATIVE_TOLERANCE: f64 = 1e-9;

/// Certified shrink is this fraction of the largest admissible one.
pub const SHRINK_MARGIN: f64 = 0.9;

const SHRINK_UNDERFLOW: f64 = 1e-12;
const BISECTION_STEPS: usize = 40;
const WITNESS_SAMPLES: usize = 201;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub count: usize,
    pub seed: u64,
    pub bumps: usize,
    /// Scale of the random perturbation coefficients before shrinking.
    pub amplitude: f64,
    /// Certification grid; defaults to the model's (9 points per axis in 4D).
    pub grid: Option<Grid>,
}

impl OracleConfig {
    pub fn new(count: usize, seed: u64) -> OracleConfig {
        OracleConfig {
            count,
            seed,
            bumps: 4,
            amplitude: 1.0,
            grid: None,
        }
    }
}

/// `exp(−½ Σ ((xᵢ−cᵢ)/wᵢ)²) · cos(k·(x−c) + ψ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bump {
    pub center: [f64; 4],
    pub width: [f64; 4],
    pub wave: [f64; 4],
    pub phase: f64,
}

impl Bump {
    fn eval(&self, x: &[f64], grad: &mut [f64; 4]) -> f64 {
        let n = x.len();
        let mut r2 = 0.0;
        let mut arg = self.phase;
        for i in 0..n {
            let d = (x[i] - self.center[i]) / self.width[i];
            r2 += d * d;
            arg += self.wave[i] * (x[i] - self.center[i]);
        }
        let g = (-0.5 * r2).exp();
        let (s, c) = arg.sin_cos();
        for i in 0..n {
            let d = (x[i] - self.center[i]) / (self.width[i] * self.width[i]);
            grad[i] = g * (-d * c - self.wave[i] * s);
        }
        g * c
    }
}

/// The sampled pair with its construction data.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpPair {
    pub dimension: usize,
    /// Coordinate gradient of the linear time function `T`.
    pub time: [f64; 4],
    pub bumps: Vec<Bump>,
    pub a_coefficients: Vec<f64>,
    pub b_coefficients: Vec<f64>,
    pub shrink: f64,
}

impl BumpPair {
    /// `(T, ∇T)` and the unshrunk perturbations `(Σcᵢuᵢ, Σdᵢuᵢ)` with gradients.
    fn parts(&self, x: &[f64]) -> (f64, PairSample) {
        let n = self.dimension;
        let t: f64 = (0..n).map(|i| self.time[i] * x[i]).sum();
        let mut pert = PairSample {
            a: 0.0,
            b: 0.0,
            grad_a: [0.0; 4],
            grad_b: [0.0; 4],
        };
        let mut g = [0.0; 4];
        for (k, bump) in self.bumps.iter().enumerate() {
            let v = bump.eval(&x[..n], &mut g);
            let (ca, cb) = (self.a_coefficients[k], self.b_coefficients[k]);
            pert.a += ca * v;
            pert.b += cb * v;
            for i in 0..n {
                pert.grad_a[i] += ca * g[i];
                pert.grad_b[i] += cb * g[i];
            }
        }
        (t, pert)
    }
}

impl CausalElementPair for BumpPair {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn sample(&self, x: &[f64]) -> PairSample {
        let (t, p) = self.parts(x);
        let s = self.shrink;
        let mut out = PairSample {
            a: t + s * p.a,
            b: t + s * p.b,
            grad_a: self.time,
            grad_b: self.time,
        };
        for i in 0..self.dimension {
            out.grad_a[i] += s * p.grad_a[i];
            out.grad_b[i] += s * p.grad_b[i];
        }
        out
    }

    fn provenance(&self) -> Provenance {
        Provenance::Sampled
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledElement {
    pub index: usize,
    pub seed: u64,
    pub pair: BumpPair,
    /// Largest admissible shrink on the grid before the safety margin.
    pub max_shrink: f64,
    pub certified_grid: Grid,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discarded {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleReport {
    pub elements: Vec<SampledElement>,
    pub discarded: Vec<Discarded>,
}

/// SplitMix64 finalizer, used to derive independent per-element seeds.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn element_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64))
}

fn default_grid(model: &SpacetimeModel) -> Grid {
    if model.dimension == 2 {
        model.certification_grid()
    } else {
        Grid::uniform(&model.domain, 9)
    }
}

fn draw_pair(model: &SpacetimeModel, config: &OracleConfig, rng: &mut ChaCha8Rng) -> BumpPair {
    let n = model.dimension;
    let scale = rng.gen_range(0.5..2.0);
    let rapidity: f64 = rng.gen_range(-0.8..0.8);
    let mut dir = [0.0; 4];
    let mut norm = 0.0_f64;
    for d in dir.iter_mut().take(n).skip(1) {
        *d = rng.gen_range(-1.0..1.0);
        norm += *d * *d;
    }
    let norm = norm.sqrt().max(1e-12);
    let mut time = [0.0; 4];
    time[0] = scale * rapidity.cosh();
    for i in 1..n {
        time[i] = -scale * rapidity.sinh() * dir[i] / norm;
    }
    let domain = &model.domain;
    let bumps = (0..config.bumps)
        .map(|_| {
            let mut b = Bump {
                center: [0.0; 4],
                width: [1.0; 4],
                wave: [0.0; 4],
                phase: rng.gen_range(0.0..std::f64::consts::TAU),
            };
            for i in 0..n {
                let ext = domain.extent(i);
                b.center[i] = rng.gen_range(domain.lower[i]..=domain.upper[i]);
                b.width[i] = rng.gen_range(0.1..0.5) * ext;
                b.wave[i] = rng.gen_range(-1.0..1.0) / b.width[i];
            }
            b
        })
        .collect();
    let amp = config.amplitude;
    let mut coeffs = || -> Vec<f64> { (0..config.bumps).map(|_| amp * rng.gen_range(-1.0..1.0)).collect() };
    let a_coefficients = coeffs();
    let b_coefficients = coeffs();
    BumpPair {
        dimension: n,
        time,
        bumps,
        a_coefficients,
        b_coefficients,
        shrink: 1.0,
    }
}

/// Smallest positive root of `α s² + β s + γ` with `γ > 0`, or `∞`.
fn first_positive_root(alpha: f64, beta: f64, gamma: f64) -> f64 {
    if alpha == 0.0 {
        return if beta < 0.0 { -gamma / beta } else { f64::INFINITY };
    }
    let disc = beta * beta - 4.0 * alpha * gamma;
    if disc < 0.0 {
        return f64::INFINITY;
    }
    let sq = disc.sqrt();
    // numerically stable pair of roots
    let q = -0.5 * (beta + beta.signum() * sq);
    let roots = [q / alpha, if q != 0.0 { gamma / q } else { f64::INFINITY }];
    roots
        .into_iter()
        .filter(|r| *r > 0.0)
        .fold(f64::INFINITY, f64::min)
}

/// Largest `s ∈ [0, 1]` with the obstruction matrix of `T + s·(perturbation)`
/// PSD at every grid point; `None` if `T` alone fails.
fn max_shrink(pair: &BumpPair, model: &SpacetimeModel, rep: &SpinRepresentation, grid: &Grid) -> Option<f64> {
    let n = model.dimension;
    let tol = model.settings.psd_tolerance;
    let pencil = |x: &[f64]| {
        let (_, p) = pair.parts(x);
        let frame = model.frame(x);
        let mass = model.mass_at(x);
        (
            frame.flat_gradient(&pair.time[..n]),
            frame.flat_gradient(&p.grad_a[..n]),
            frame.flat_gradient(&p.grad_b[..n]),
            mass,
            p.a - p.b,
        )
    };
    if n == 2 {
        let limits: Option<Vec<f64>> = (0..grid.len())
            .map(|i| {
                let x = grid.point(i);
                let (t, ga, gb, mass, gap) = pencil(&x);
                let c1 = (mass * gap).norm();
                let blocks = [
                    (t[0] + t[1], ga[0] + ga[1], t[0] - t[1], gb[0] - gb[1]),
                    (t[0] - t[1], ga[0] - ga[1], t[0] + t[1], gb[0] + gb[1]),
                ];
                let mut limit = f64::INFINITY;
                for (p0, p1, r0, r1) in blocks {
                    if !(p0 > tol && r0 > tol) {
                        return None;
                    }
                    // det(s) = (p0 + s p1)(r0 + s r1) − s²|c1|²
                    let det = first_positive_root(p1 * r1 - c1 * c1, p0 * r1 + p1 * r0, p0 * r0);
                    limit = limit.min(det);
                }
                Some(limit)
            })
            .collect();
        return limits.map(|l| l.into_iter().fold(1.0, f64::min));
    }
    let pencils: Vec<(CMatrix, CMatrix)> = (0..grid.len())
        .map(|i| {
            let x = grid.point(i);
            let (t, ga, gb, mass, gap) = pencil(&x);
            (
                assemble_obstruction(rep, &t, &t, mass, 0.0),
                assemble_obstruction(rep, &ga, &gb, mass, gap),
            )
        })
        .collect();
    let feasible = |s: f64| {
        pencils
            .iter()
            .all(|(m0, m1)| min_eigenvalue(&(m0 + m1 * Complex64::from(s))) >= -tol)
    };
    if !feasible(0.0) {
        return None;
    }
    if feasible(1.0) {
        return Some(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

fn certify_one(
    index: usize,
    model: &SpacetimeModel,
    rep: &SpinRepresentation,
    config: &OracleConfig,
    grid: &Grid,
) -> std::result::Result<SampledElement, Discarded> {
    let seed = element_seed(config.seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pair = draw_pair(model, config, &mut rng);
    let discard = |reason: String| Discarded { index, reason };
    let limit = max_shrink(&pair, model, rep, grid)
        .ok_or_else(|| discard("time function is not causal on the grid".into()))?;
    let shrink = SHRINK_MARGIN * limit;
    if shrink < SHRINK_UNDERFLOW {
        return Err(discard(format!("shrink underflow ({limit:e})")));
    }
    pair.shrink = shrink;
    let check = is_causal_element(&pair, model, rep, grid).map_err(|e| discard(e.to_string()))?;
    if !check.passed {
        return Err(discard(format!(
            "certification failed at {:?} (min eigenvalue {:e})",
            check.worst_point, check.min_eigenvalue
        )));
    }
    Ok(SampledElement {
        index,
        seed,
        pair,
        max_shrink: limit,
        certified_grid: grid.clone(),
        min_eigenvalue: check.min_eigenvalue,
    })
}

/// Draws `config.count` certified causal elements; deterministic in the seed.
///
/// Elements that cannot be certified are listed in `discarded`; more than half
/// discarded is an error.
pub fn sample_causal_elements(
    model: &SpacetimeModel,
    rep: &SpinRepresentation,
    config: &OracleConfig,
) -> Result<SampleReport> {
    if config.count == 0 {
        return Err(Error::Precondition("element count must be at least 1".into()));
    }
    let grid = config.grid.clone().unwrap_or_else(|| default_grid(model));
    if grid.dimension() != model.dimension {
        return Err(Error::DimensionMismatch {
            expected: model.dimension,
            found: grid.dimension(),
        });
    }
    let results: Vec<_> = (0..config.count)
        .into_par_iter()
        .map(|i| certify_one(i, model, rep, config, &grid))
        .collect();
    let mut elements = Vec::with_capacity(config.count);
    let mut discarded = Vec::new();
    for r in results {
        match r {
            Ok(e) => elements.push(e),
            Err(d) => discarded.push(d),
        }
    }
    if 2 * discarded.len() > config.count {
        return Err(Error::Certification {
            discarded: discarded.len(),
            requested: config.count,
        });
    }
    Ok(SampleReport { elements, discarded })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    /// Related, and no element violates the ordering inequality.
    Consistent,
    /// Related, but an element yields a negative value.
    Contradiction,
    /// Not related, and an element (witness or sampled) proves it.
    Separated,
    /// Not related, and nothing at hand separates the states.
    Inconclusive,
}

impl VerdictKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictKind::Consistent => "consistent",
            VerdictKind::Contradiction => "contradiction",
            VerdictKind::Separated => "separated",
            VerdictKind::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub kind: VerdictKind,
    /// Smallest value of the ordering inequality over the sampled elements.
    pub min_value: f64,
    /// Index of the element attaining `min_value`.
    pub worst_element: Option<usize>,
    /// Value of the witness along the straight curve, when one could be built.
    pub witness_value: Option<f64>,
    pub note: Option<String>,
}

/// Evaluates `φ a(q) − ξ a(p) + (1−φ) b(q) − (1−ξ) b(p)` on every element and
/// compares with the decision.
pub fn mc_check(
    from: &MixedState,
    to: &MixedState,
    elements: &[SampledElement],
    decision: &CausalDecision,
    model: &SpacetimeModel,
) -> Verdict {
    let (min_value, worst_element) = elements
        .iter()
        .map(|e| (state_difference(&e.pair, from, to), e.index))
        .fold((f64::INFINITY, None), |acc, (v, i)| if v < acc.0 { (v, Some(i)) } else { acc });
    let violated = min_value < -NEGATIVE_TOLERANCE;
    if decision.related {
        return Verdict {
            kind: if violated {
                VerdictKind::Contradiction
            } else {
                VerdictKind::Consistent
            },
            min_value,
            worst_element: if violated { worst_element } else { None },
            witness_value: None,
            note: None,
        };
    }
    let mut note = None;
    let mut witness_value = None;
    if decision.base_related {
        match witness_separation(from, to, model) {
            Ok(v) => witness_value = Some(v),
            Err(e) => note = Some(format!("no witness: {e}")),
        }
    } else {
        note = Some("points are not causally related".into());
    }
    let separated = witness_value.is_some_and(|v| v < 0.0) || violated;
    Verdict {
        kind: if separated {
            VerdictKind::Separated
        } else {
            VerdictKind::Inconclusive
        },
        min_value,
        worst_element: if violated { worst_element } else { None },
        witness_value,
        note,
    }
}

/// Ordering-inequality value of the witness built on the straight curve `p → q`.
pub fn witness_separation(from: &MixedState, to: &MixedState, model: &SpacetimeModel) -> Result<f64> {
    let curve = CausalCurve::straight(&from.point, &to.point, WITNESS_SAMPLES)?;
    let w = witness_element(&curve, from.xi, to.xi, model)?;
    Ok(state_difference(&w, from, to))
}

/// Random pair with `p ⪯ q` inside the domain and random internal weights.
///
/// A quarter of the weights are drawn as pure states.
pub fn random_pair(model: &SpacetimeModel, rng: &mut ChaCha8Rng) -> Result<(MixedState, MixedState)> {
    let n = model.dimension;
    let d = &model.domain;
    let weight = |rng: &mut ChaCha8Rng| -> f64 {
        match rng.gen_range(0..8) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.gen_range(0.0..1.0),
        }
    };
    for _ in 0..10_000 {
        let p: Vec<f64> = (0..n).map(|i| rng.gen_range(d.lower[i]..=d.upper[i])).collect();
        let mut q = p.clone();
        q[0] = rng.gen_range(p[0]..=d.upper[0]);
        let dt = q[0] - p[0];
        let mut dir: Vec<f64> = (1..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        let reach = dt * rng.gen_range(0.0..1.0_f64).sqrt();
        for (k, v) in dir.iter_mut().enumerate() {
            q[k + 1] += reach * *v / norm;
        }
        if !d.contains(&q) || !is_causally_related(&p, &q, model)? {
            continue;
        }
        let xi = weight(rng);
        let phi = weight(rng);
        return Ok((MixedState::new(p, xi)?, MixedState::new(q, phi)?));
    }
    Err(Error::Precondition("could not draw a causally related pair in the domain".into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairOutcome {
    pub from: MixedState,
    pub to: MixedState,
    pub decision: CausalDecision,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSummary {
    pub elements: usize,
    pub discarded: usize,
    pub outcomes: Vec<PairOutcome>,
}

impl OracleSummary {
    pub fn count(&self, kind: VerdictKind) -> usize {
        self.outcomes.iter().filter(|o| o.verdict.kind == kind).count()
    }

    pub fn contradictions(&self) -> impl Iterator<Item = &PairOutcome> {
        self.outcomes.iter().filter(|o| o.verdict.kind == VerdictKind::Contradiction)
    }
}

/// Samples elements, draws `pairs` random state pairs and checks every decision.
pub fn run_oracle(
    model: &SpacetimeModel,
    rep: &SpinRepresentation,
    pairs: usize,
    config: &OracleConfig,
) -> Result<(OracleSummary, SampleReport)> {
    let report = sample_causal_elements(model, rep, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(config.seed ^ 0x005E_ED0F_5A1D));
    let mut outcomes = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let (from, to) = random_pair(model, &mut rng)?;
        let decision = decide(&from, &to, model)?;
        let verdict = mc_check(&from, &to, &report.elements, &decision, model);
        outcomes.push(PairOutcome {
            from,
            to,
            decision,
            verdict,
        });
    }
    Ok((
        OracleSummary {
            elements: report.elements.len(),
            discarded: report.discarded.len(),
            outcomes,
        },
        report,
    ))
}
