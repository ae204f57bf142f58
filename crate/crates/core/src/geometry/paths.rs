//! Maximal weighted proper time between two points.
//!
//! Flat metrics with a constant mass use the straight line. Everything else runs a
//! longest-path dynamic program on a lattice spanned by the segment `p → q` and one
//! transverse spatial direction, followed by a coordinate-wise polish of the best
//! lattice path in all spatial directions. The result is always the length of an
//! explicit causal curve, hence a lower bound on the supremum.

use rayon::prelude::*;

use crate::error::{Error, Result};

use super::{flat_cone_order, flat_proper_time, minkowski_norm, Frame, SpacetimeModel, CAUSAL_TANGENT_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Closed form when the model admits one, lattice otherwise.
    #[default]
    Auto,
    ClosedForm,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Grid,
    GridRefined,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::Grid => "DP",
            Method::GridRefined => "DP+refinement",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathOptimum {
    pub value: f64,
    pub method: Method,
    /// Vertices of a causal polygon realizing `value`.
    pub path: Vec<Vec<f64>>,
}

/// Which weight multiplies proper time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Weighting {
    /// `|m|` or `|Φ|`.
    Mass,
    /// See [`SpacetimeModel::decision_weight`].
    Decision,
    /// Plain proper time.
    Unit,
}

/// Sup of the weighted length over causal curves from `p` to `q`.
pub fn max_weighted_length(p: &[f64], q: &[f64], model: &SpacetimeModel) -> Result<f64> {
    Ok(max_weighted_length_with(p, q, model, Strategy::Auto)?.value)
}

pub fn max_weighted_length_with(
    p: &[f64],
    q: &[f64],
    model: &SpacetimeModel,
    strategy: Strategy,
) -> Result<PathOptimum> {
    optimize(p, q, model, strategy, Weighting::Mass)
}

pub(crate) fn optimize(
    p: &[f64],
    q: &[f64],
    model: &SpacetimeModel,
    strategy: Strategy,
    weighting: Weighting,
) -> Result<PathOptimum> {
    model.check_point(p)?;
    model.check_point(q)?;
    let density = Density { model, weighting };
    let closed = model.closed_form_eligible();
    if strategy == Strategy::ClosedForm && !closed {
        return Err(Error::Precondition(
            "no closed form for a curved metric or a varying mass".into(),
        ));
    }
    let flat_cones = model.conformal_scale(p).is_some();
    if flat_cones && !flat_cone_order(p, q) {
        return Err(Error::NotCausallyRelated);
    }
    if closed && strategy != Strategy::Grid {
        let scale = model.flat_scale().unwrap_or(1.0);
        let value = density.weight(p) * flat_proper_time(p, q) / scale;
        return Ok(PathOptimum {
            value,
            method: Method::ClosedForm,
            path: vec![p.to_vec(), q.to_vec()],
        });
    }
    if p == q {
        return Ok(PathOptimum {
            value: 0.0,
            method: Method::Grid,
            path: vec![p.to_vec()],
        });
    }
    let lattice = Lattice::new(p, q, density);
    let (value, path) = lattice.solve().ok_or(Error::NotCausallyRelated)?;
    let (refined, polished) = refine(&density, &path);
    if refined > value {
        Ok(PathOptimum {
            value: refined,
            method: Method::GridRefined,
            path: polished,
        })
    } else {
        Ok(PathOptimum {
            value,
            method: Method::Grid,
            path,
        })
    }
}

/// Whether the lattice connects `p` to `q` by a causal path.
pub(crate) fn reachable(p: &[f64], q: &[f64], model: &SpacetimeModel) -> Result<bool> {
    model.check_point(p)?;
    model.check_point(q)?;
    if p == q {
        return Ok(true);
    }
    let density = Density {
        model,
        weighting: Weighting::Unit,
    };
    Ok(Lattice::new(p, q, density).solve().is_some())
}

#[derive(Clone, Copy)]
pub(crate) struct Density<'a> {
    pub model: &'a SpacetimeModel,
    pub weighting: Weighting,
}

impl Density<'_> {
    #[inline]
    fn weight(&self, x: &[f64]) -> f64 {
        match self.weighting {
            Weighting::Mass => self.model.weight(x),
            Weighting::Decision => self.model.decision_weight(x),
            Weighting::Unit => 1.0,
        }
    }

    /// `w(x)/Ω(x)` for metrics conformal to Minkowski; NaN where undefined.
    #[inline]
    fn scale_ratio(&self, x: &[f64]) -> f64 {
        if !self.model.domain.contains(x) {
            return f64::NAN;
        }
        match self.model.conformal_scale(x) {
            Some(o) if o > 0.0 && o.is_finite() => {
                let w = self.weight(x);
                if w.is_finite() {
                    w / o
                } else {
                    f64::NAN
                }
            }
            _ => f64::NAN,
        }
    }

    /// Length density of the constant velocity `v` at `x`, `None` if `v` is not
    /// future causal there or `x` is outside the domain.
    fn at(&self, x: &[f64], v: &[f64], tol: f64) -> Option<f64> {
        if !self.model.domain.contains(x) {
            return None;
        }
        let w = self.model.flat_vector(x, v);
        let w = &w[..self.model.dimension];
        let s = self.weight(x);
        causal_density_tol(w, tol).map(|t| t * s).filter(|d| d.is_finite())
    }

    /// Weighted length of the straight segment `a → b` by composite Simpson with
    /// `2·half` subintervals.
    fn segment(&self, a: &[f64], b: &[f64], half: usize) -> Option<f64> {
        self.segment_tol(a, b, half, CAUSAL_TANGENT_TOLERANCE)
    }

    /// As [`Density::segment`] with an explicit tolerance on `η(ŵ, ŵ)`.
    fn segment_tol(&self, a: &[f64], b: &[f64], half: usize, tol: f64) -> Option<f64> {
        let n = a.len();
        let v: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
        if v.iter().all(|c| *c == 0.0) {
            return Some(0.0);
        }
        let m = 2 * half;
        let mut x = vec![0.0; n];
        let flat = self.model.conformal_scale(a).is_some();
        let tau = if flat { Some(causal_density_tol(&v, tol)?) } else { None };
        let mut acc = 0.0;
        for i in 0..=m {
            let u = i as f64 / m as f64;
            for d in 0..n {
                x[d] = a[d] + u * v[d];
            }
            let f = match tau {
                Some(_) => {
                    let s = self.scale_ratio(&x);
                    if s.is_nan() {
                        return None;
                    }
                    s
                }
                None => self.at(&x, &v, tol)?,
            };
            let c = if i == 0 || i == m {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += c * f;
        }
        Some(acc / (3.0 * m as f64) * tau.unwrap_or(1.0))
    }
}

/// `√(−η(w, w))` if `w` is future-directed causal up to the normalized tolerance.
#[inline]
fn causal_density(w: &[f64]) -> Option<f64> {
    causal_density_tol(w, CAUSAL_TANGENT_TOLERANCE)
}

#[inline]
fn causal_density_tol(w: &[f64], tol: f64) -> Option<f64> {
    let norm2: f64 = w.iter().map(|c| c * c).sum();
    let eta = minkowski_norm(w);
    if w[0] > 0.0 && eta <= tol * norm2 {
        Some((-eta).max(0.0).sqrt())
    } else {
        None
    }
}

enum NodeData {
    /// `w/Ω` per point of the doubled lattice.
    Scale(Vec<f64>),
    /// Frame and weight per point of the doubled lattice (weight NaN if invalid).
    Frames(Vec<(Frame, f64)>),
}

/// Longest edges of the lattice, in layers. Edges spanning `s` layers add the
/// slopes `d/s`, which a single-layer stencil cannot represent when the node
/// spacing is comparable to the layer spacing.
const MAX_EDGE_LAYERS: usize = 4;

/// Sheared lattice `node(i, j) = p + (q − p)·i/nt + (j − J)·δ·ê`.
///
/// Midpoints of all edges fall on the doubled lattice
/// `p + (q − p)·a/(2nt) + (b − 2J)·(δ/2)·ê`, where the fields are cached.
struct Lattice<'a> {
    density: Density<'a>,
    p: Vec<f64>,
    step: Vec<f64>,
    dir: Vec<f64>,
    delta: f64,
    nt: usize,
    half: usize,
    /// Per edge length `s = 1..=MAX_EDGE_LAYERS`: admissible transverse offsets.
    offsets: Vec<(isize, isize)>,
    data: NodeData,
}

/// Edge displacement and, for conformally flat metrics, its flat proper time.
struct Stencil {
    disp: Vec<f64>,
    tau: Option<f64>,
}

impl<'a> Lattice<'a> {
    fn new(p: &[f64], q: &[f64], density: Density<'a>) -> Lattice<'a> {
        let model = density.model;
        let n = model.dimension;
        let settings = &model.settings;
        let nt = settings.dp_time_steps.max(2) - 1;
        let dq: Vec<f64> = p.iter().zip(q).map(|(a, b)| b - a).collect();
        let span = dq[1..].iter().map(|c| c * c).sum::<f64>().sqrt();
        let mut dir = vec![0.0; n];
        if n > 2 && span > 0.0 {
            for d in 1..n {
                dir[d] = dq[d] / span;
            }
        } else {
            dir[1] = 1.0;
        }
        let step: Vec<f64> = dq.iter().map(|c| c / nt as f64).collect();
        let flat = model.conformal_scale(p).is_some();
        let speed = if flat {
            1.0
        } else {
            // largest coordinate light speed along ±ê near the chord
            let mut c: f64 = 0.0;
            let spatial = &dir[1..];
            let back: Vec<f64> = spatial.iter().map(|x| -x).collect();
            for k in 0..=8 {
                let x: Vec<f64> = p.iter().zip(&dq).map(|(a, d)| a + d * k as f64 / 8.0).collect();
                c = c.max(model.light_speed(&x, spatial)).max(model.light_speed(&x, &back));
            }
            if c.is_finite() {
                c * 1.1
            } else {
                1.0
            }
        };
        let along = dq[1..].iter().zip(&dir[1..]).map(|(a, b)| a * b).sum::<f64>();
        // largest transverse distance from the chord inside the causal diamond
        let reach_t = speed * dq[0];
        let width = if reach_t > 0.0 {
            0.5 * (reach_t * reach_t - along * along).max(0.0) / reach_t
        } else {
            0.0
        };
        let tiny = 1e-12 * (1.0 + dq[0].abs());
        let (half, delta) = if width > tiny {
            let h = (settings.dp_space_steps.max(3) - 1) / 2;
            (h, width / h as f64)
        } else {
            (0, 0.0)
        };

        let lim = 2 * half as isize;
        let offsets = (1..=MAX_EDGE_LAYERS)
            .map(|s| {
                if half == 0 {
                    (0, 0)
                } else if flat {
                    let causal = |d: isize| -> bool {
                        let v: Vec<f64> = (0..n)
                            .map(|c| s as f64 * step[c] + d as f64 * delta * dir[c])
                            .collect();
                        causal_density(&v).is_some()
                    };
                    let mut lo = 0;
                    while lo > -lim && causal(lo - 1) {
                        lo -= 1;
                    }
                    let mut hi = 0;
                    while hi < lim && causal(hi + 1) {
                        hi += 1;
                    }
                    (lo, hi)
                } else {
                    let reach = s as f64 * (speed * step[0].abs() + along.abs() / nt as f64) / delta;
                    let k = (reach.ceil() as isize + 1).min(lim);
                    (-k, k)
                }
            })
            .collect();

        let mut lattice = Lattice {
            density,
            p: p.to_vec(),
            step,
            dir,
            delta,
            nt,
            half,
            offsets,
            data: NodeData::Scale(Vec::new()),
        };
        lattice.data = lattice.cache(flat);
        lattice
    }

    fn width(&self) -> usize {
        2 * self.half + 1
    }

    fn doubled_width(&self) -> usize {
        4 * self.half + 1
    }

    fn doubled_point(&self, a: usize, b: usize, out: &mut [f64]) {
        let t = a as f64 / 2.0;
        let s = (b as f64 - 2.0 * self.half as f64) * self.delta / 2.0;
        for (d, o) in out.iter_mut().enumerate() {
            *o = self.p[d] + self.step[d] * t + self.dir[d] * s;
        }
    }

    fn cache(&self, flat: bool) -> NodeData {
        let n = self.p.len();
        let w = self.doubled_width();
        let rows = 2 * self.nt + 1;
        if flat {
            let mut s = vec![f64::NAN; rows * w];
            s.par_chunks_mut(w).enumerate().for_each(|(a, row)| {
                let mut x = vec![0.0; n];
                for (b, v) in row.iter_mut().enumerate() {
                    self.doubled_point(a, b, &mut x);
                    *v = self.density.scale_ratio(&x);
                }
            });
            NodeData::Scale(s)
        } else {
            let model = self.density.model;
            let blank = (Frame { dim: n, e: [[0.0; 4]; 4] }, f64::NAN);
            let mut f = vec![blank; rows * w];
            f.par_chunks_mut(w).enumerate().for_each(|(a, row)| {
                let mut x = vec![0.0; n];
                for (b, v) in row.iter_mut().enumerate() {
                    self.doubled_point(a, b, &mut x);
                    if model.domain.contains(&x) {
                        let frame = model.frame(&x);
                        let weight = self.density.weight(&x);
                        if frame.determinant().abs() > 1e-12 && weight.is_finite() {
                            *v = (frame, weight);
                        }
                    }
                }
            });
            NodeData::Frames(f)
        }
    }

    fn stencils(&self) -> Vec<Vec<Stencil>> {
        let n = self.p.len();
        self.offsets
            .iter()
            .enumerate()
            .map(|(si, &(lo, hi))| {
                let s = (si + 1) as f64;
                (lo..=hi)
                    .map(|d| {
                        let disp: Vec<f64> = (0..n)
                            .map(|c| s * self.step[c] + d as f64 * self.delta * self.dir[c])
                            .collect();
                        let tau = causal_density(&disp);
                        Stencil { disp, tau }
                    })
                    .collect()
            })
            .collect()
    }

    /// Edge from layer `i`, node `j` to layer `i + s`, node `k`.
    #[inline]
    fn edge(&self, i: usize, s: usize, j: usize, k: usize, stencil: &Stencil) -> Option<f64> {
        let w = self.doubled_width();
        let ia = 2 * i * w + 2 * j;
        let im = (2 * i + s) * w + j + k;
        let ib = 2 * (i + s) * w + 2 * k;
        match &self.data {
            NodeData::Scale(c) => {
                let t = stencil.tau?;
                let v = t * (c[ia] + 4.0 * c[im] + c[ib]) / 6.0;
                if v.is_nan() {
                    None
                } else {
                    Some(v)
                }
            }
            NodeData::Frames(f) => {
                let v = &stencil.disp;
                let n = v.len();
                let eval = |idx: usize, strict: bool| -> Option<f64> {
                    let (frame, weight) = &f[idx];
                    if weight.is_nan() {
                        return None;
                    }
                    let fw = frame.flat_vector(v);
                    match causal_density(&fw[..n]) {
                        Some(t) => Some(t * weight),
                        None if !strict => Some(0.0),
                        None => None,
                    }
                };
                let a = eval(ia, false)?;
                let m = eval(im, true)?;
                let b = eval(ib, false)?;
                Some((a + 4.0 * m + b) / 6.0)
            }
        }
    }

    /// Best lattice path and its value, `None` if `q` cannot be reached.
    fn solve(&self) -> Option<(f64, Vec<Vec<f64>>)> {
        let n = self.p.len();
        let width = self.width();
        let stencils = self.stencils();

        let layers = self.nt + 1;
        let mut value = vec![f64::NEG_INFINITY; layers * width];
        // predecessor as (layer, node)
        let mut back = vec![(0u32, 0u32); layers * width];
        value[self.half] = 0.0;
        for i in 1..layers {
            let (done, rest) = value.split_at_mut(i * width);
            let row = &mut rest[..width];
            let back_row = &mut back[i * width..(i + 1) * width];
            let done = &*done;
            row.par_iter_mut()
                .zip(back_row.par_iter_mut())
                .enumerate()
                .for_each(|(k, (v, bp))| {
                    let mut best = f64::NEG_INFINITY;
                    let mut arg = (0u32, 0u32);
                    for s in 1..=MAX_EDGE_LAYERS.min(i) {
                        let from = i - s;
                        let (lo, _) = self.offsets[s - 1];
                        let prev = &done[from * width..(from + 1) * width];
                        for (o, stencil) in stencils[s - 1].iter().enumerate() {
                            let j = k as isize - (lo + o as isize);
                            if j < 0 || j >= width as isize {
                                continue;
                            }
                            let j = j as usize;
                            let base = prev[j];
                            if base == f64::NEG_INFINITY {
                                continue;
                            }
                            if let Some(e) = self.edge(from, s, j, k, stencil) {
                                if base + e > best {
                                    best = base + e;
                                    arg = (from as u32, j as u32);
                                }
                            }
                        }
                    }
                    *v = best;
                    *bp = arg;
                });
        }
        let end = value[self.nt * width + self.half];
        if end == f64::NEG_INFINITY {
            return None;
        }
        let mut path = Vec::new();
        let (mut i, mut j) = (self.nt, self.half);
        loop {
            let mut x = vec![0.0; n];
            self.doubled_point(2 * i, 2 * j, &mut x);
            path.push(x);
            if i == 0 {
                break;
            }
            let (pi, pj) = back[i * width + j];
            i = pi as usize;
            j = pj as usize;
        }
        path.reverse();
        Some((end, path))
    }
}

/// Vertex counts of the successive polishing levels.
const REFINE_LEVELS: [usize; 5] = [4, 8, 16, 32, 64];
const REFINE_HALF_SUBDIVISIONS: usize = 4;
const REFINE_MAX_SWEEPS: usize = 24;

/// Coarse-to-fine coordinate-wise golden-section polish of a path, spatial
/// coordinates only. Each level resamples the current polygon at equally spaced
/// times and sweeps over its interior vertices. Returns the polished length, or
/// `-∞` when the resampled path is not causal.
fn refine(density: &Density, path: &[Vec<f64>]) -> (f64, Vec<Vec<f64>>) {
    // no tolerance band here: moving a vertex off a null chain would otherwise
    // gain a spurious length of order √tol
    let seg = |a: &[f64], b: &[f64]| density.segment_tol(a, b, REFINE_HALF_SUBDIVISIONS, 0.0);
    let total = |v: &[Vec<f64>]| -> Option<f64> { v.windows(2).map(|w| seg(&w[0], &w[1])).sum() };

    let n = path[0].len();
    let t0 = path[0][0];
    let t1 = path[path.len() - 1][0];
    let mut current = path.to_vec();
    let mut best_value = f64::NEG_INFINITY;
    let mut best_path = current.clone();
    if path.len() < 2 || t1 <= t0 {
        return (best_value, best_path);
    }
    let reach = (t1 - t0) * density.model.light_speed(&path[0], &unit(n, 1)).clamp(1.0, 1e3);

    for &count in &REFINE_LEVELS {
        let mut verts: Vec<Vec<f64>> = (0..=count)
            .map(|k| resample(&current, t0 + (t1 - t0) * k as f64 / count as f64))
            .collect();
        verts[0] = path[0].clone();
        verts[count] = path[path.len() - 1].clone();
        let Some(mut value) = total(&verts) else {
            continue;
        };
        for _ in 0..REFINE_MAX_SWEEPS {
            let before = value;
            for v in 1..count {
                for c in 1..n {
                    let (l, r) = (verts[v - 1].clone(), verts[v + 1].clone());
                    let mut x = verts[v].clone();
                    let x0 = x[c];
                    let mut eval = |val: f64| -> Option<f64> {
                        x[c] = val;
                        Some(seg(&l, &x)? + seg(&x, &r)?)
                    };
                    let Some(f0) = eval(x0) else { continue };
                    let lo = feasible_end(&mut eval, x0, x0 - reach);
                    let hi = feasible_end(&mut eval, x0, x0 + reach);
                    let (bx, bf) = golden_max(&mut eval, lo, hi, x0, f0);
                    if bf > f0 {
                        verts[v][c] = bx;
                        value += bf - f0;
                    }
                }
            }
            if value - before < 1e-12 {
                break;
            }
        }
        if let Some(v) = total(&verts) {
            if v > best_value {
                best_value = v;
                best_path = verts.clone();
            }
            current = verts;
        }
    }
    (best_value, best_path)
}

/// Point of a polygon with increasing time coordinate at time `t`.
fn resample(path: &[Vec<f64>], t: f64) -> Vec<f64> {
    let k = path.partition_point(|x| x[0] <= t).clamp(1, path.len() - 1);
    let (a, b) = (&path[k - 1], &path[k]);
    let dt = b[0] - a[0];
    let u = if dt > 0.0 { ((t - a[0]) / dt).clamp(0.0, 1.0) } else { 0.0 };
    a.iter().zip(b).map(|(x, y)| x + u * (y - x)).collect()
}

fn unit(n: usize, axis: usize) -> Vec<f64> {
    let mut e = vec![0.0; n - 1];
    e[axis - 1] = 1.0;
    e
}

/// Farthest feasible point from `inside` towards `outside`, by bisection.
fn feasible_end(f: &mut impl FnMut(f64) -> Option<f64>, inside: f64, outside: f64) -> f64 {
    if f(outside).is_some() {
        return outside;
    }
    let (mut a, mut b) = (inside, outside);
    for _ in 0..40 {
        let m = 0.5 * (a + b);
        if f(m).is_some() {
            a = m;
        } else {
            b = m;
        }
    }
    a
}

fn golden_max(f: &mut impl FnMut(f64) -> Option<f64>, lo: f64, hi: f64, x0: f64, f0: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut best = (x0, f0);
    let mut eval = |x: f64, best: &mut (f64, f64)| -> f64 {
        let v = f(x).unwrap_or(f64::NEG_INFINITY);
        if v > best.1 {
            *best = (x, v);
        }
        v
    };
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = eval(c, &mut best);
    let mut fd = eval(d, &mut best);
    for _ in 0..48 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = eval(c, &mut best);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = eval(d, &mut best);
        }
    }
    best
}

/// Single-source lattice over a two-dimensional box: best weighted length from
/// `p` to every node of layers `t_i = p⁰ + i·h`, spacing `h/4` in `x`.
///
/// Each node takes the better of the straight ray from `p` and the best local
/// move from the previous layer, so the table dominates both the rays and the
/// lattice paths.
pub(crate) struct Fan<'a> {
    density: Density<'a>,
    p: Vec<f64>,
    h: f64,
    nt: usize,
    x0: f64,
    dx: f64,
    nx: usize,
    values: Vec<f64>,
}

const FAN_MOVES: isize = 4;
const FAN_RAY_HALF_SUBDIVISIONS: usize = 8;

impl<'a> Fan<'a> {
    pub(crate) fn new(p: &[f64], density: Density<'a>, t_max: f64) -> Result<Fan<'a>> {
        let model = density.model;
        if model.dimension != 2 || model.conformal_scale(p).is_none() {
            return Err(Error::Precondition(
                "single-source tables need a two-dimensional conformally flat model".into(),
            ));
        }
        model.check_point(p)?;
        let nt = if t_max > p[0] {
            model.settings.dp_time_steps.max(2) - 1
        } else {
            0
        };
        let h = if nt > 0 { (t_max - p[0]) / nt as f64 } else { 0.0 };
        let dx = h / FAN_MOVES as f64;
        let (x0, x1) = (model.domain.lower[1], model.domain.upper[1]);
        let nx = if dx > 0.0 {
            ((x1 - x0) / dx).floor() as usize + 1
        } else {
            0
        };
        let mut fan = Fan {
            density,
            p: p.to_vec(),
            h,
            nt,
            x0,
            dx,
            nx,
            values: vec![f64::NEG_INFINITY; (nt + 1) * nx],
        };
        fan.fill();
        Ok(fan)
    }

    fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [self.p[0] + i as f64 * self.h, self.x0 + j as f64 * self.dx]
    }

    fn fill(&mut self) {
        if self.nt == 0 {
            return;
        }
        let nx = self.nx;
        // w/Ω at the nodes and at the edge midpoints (half layers, half spacing)
        let node_s: Vec<f64> = (0..(self.nt + 1) * nx)
            .into_par_iter()
            .map(|idx| self.density.scale_ratio(&self.node(idx / nx, idx % nx)))
            .collect();
        let mw = 2 * nx - 1;
        let mid_s: Vec<f64> = (0..self.nt * mw)
            .into_par_iter()
            .map(|idx| {
                let (i, b) = (idx / mw, idx % mw);
                let x = [self.p[0] + (i as f64 + 0.5) * self.h, self.x0 + b as f64 * self.dx / 2.0];
                self.density.scale_ratio(&x)
            })
            .collect();
        let tau: Vec<f64> = (0..=FAN_MOVES)
            .map(|d| (self.h * self.h - (d as f64 * self.dx).powi(2)).max(0.0).sqrt())
            .collect();

        let mut values = std::mem::take(&mut self.values);
        for i in 1..=self.nt {
            let (head, tail) = values.split_at_mut(i * nx);
            let prev = &head[(i - 1) * nx..];
            let row = &mut tail[..nx];
            let this = &*self;
            row.par_iter_mut().enumerate().for_each(|(j, v)| {
                let q = this.node(i, j);
                let mut best = if flat_cone_order(&this.p, &q) {
                    this.density
                        .segment(&this.p, &q, FAN_RAY_HALF_SUBDIVISIONS)
                        .unwrap_or(f64::NEG_INFINITY)
                } else {
                    f64::NEG_INFINITY
                };
                let sb = node_s[i * nx + j];
                for d in -FAN_MOVES..=FAN_MOVES {
                    let k = j as isize - d;
                    if k < 0 || k >= nx as isize {
                        continue;
                    }
                    let k = k as usize;
                    let base = prev[k];
                    if base == f64::NEG_INFINITY {
                        continue;
                    }
                    let sa = node_s[(i - 1) * nx + k];
                    let sm = mid_s[(i - 1) * mw + j + k];
                    let e = tau[d.unsigned_abs()] * (sa + 4.0 * sm + sb) / 6.0;
                    if base + e > best {
                        best = base + e;
                    }
                }
                *v = best;
            });
        }
        self.values = values;
    }

    /// Best length to an arbitrary point `q`; `None` outside the future of `p`.
    pub(crate) fn value_at(&self, q: &[f64]) -> Option<f64> {
        if !flat_cone_order(&self.p, q) {
            return None;
        }
        if q[0] <= self.p[0] {
            return Some(0.0);
        }
        let mut best = self
            .density
            .segment(&self.p, q, FAN_RAY_HALF_SUBDIVISIONS)
            .unwrap_or(0.0);
        if self.nt == 0 {
            return Some(best);
        }
        // last layer strictly before q
        let li = (((q[0] - self.p[0]) / self.h).ceil() as usize).saturating_sub(1).min(self.nt);
        let t = self.p[0] + li as f64 * self.h;
        let reach = q[0] - t;
        if li >= 1 && reach > 0.0 {
            let lo = ((q[1] - reach - self.x0) / self.dx).ceil().max(0.0) as usize;
            let hi = (((q[1] + reach - self.x0) / self.dx).floor().max(-1.0) as isize)
                .min(self.nx as isize - 1);
            for k in lo as isize..=hi {
                let base = self.values[li * self.nx + k as usize];
                if base == f64::NEG_INFINITY {
                    continue;
                }
                let a = self.node(li, k as usize);
                if let Some(e) = self.density.segment(&a, q, 1) {
                    best = best.max(base + e);
                }
            }
        }
        Some(best)
    }
}
