//! Causal order between states `ω_{p,ξ}` on the two-sheeted space-time.
//!
//! `ω_{p,ξ} ⪯ ω_{q,φ}` iff `p ⪯ q` and the longest causal curve from `p` to `q`
//! carries enough weighted proper time to rotate the internal angle from
//! `arcsin√ξ` to `arcsin√φ`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::paths::{optimize, Density, Fan, Weighting};
use crate::geometry::{
    is_causally_related, Grid, Mass, Method, MixedState, SpacetimeModel, Strategy,
    VectorPotentials,
};

/// Tolerance on `achieved ≥ required` for closed-form lengths.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-9;

/// Below this `|Φ|` a certification point counts as a zero of the scalar field.
pub const VANISHING_FIELD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CausalDecision {
    pub related: bool,
    /// `p ⪯ q` on the space-time alone.
    pub base_related: bool,
    /// Threshold on the achieved length; infinite when the sheets cannot mix.
    pub required: f64,
    /// Best length over causal curves; NaN when `p ⋠ q` or not needed.
    pub achieved: f64,
    pub slack: f64,
    pub method: Method,
    /// Within the method's tolerance of the threshold.
    pub marginal: bool,
}

fn internal_angle(v: f64) -> f64 {
    v.sqrt().asin()
}

fn check_weight(v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("internal weight {v} outside [0, 1]")))
    }
}

/// `|arcsin√φ − arcsin√ξ| / |m|`, or the bare angle gap when the mass varies and
/// the weight sits inside the length integral.
pub fn required_proper_time(xi: f64, phi: f64, model: &SpacetimeModel) -> Result<f64> {
    check_weight(xi)?;
    check_weight(phi)?;
    let gap = (internal_angle(phi) - internal_angle(xi)).abs();
    if gap == 0.0 {
        return Ok(0.0);
    }
    if model.is_fluctuated() {
        return Ok(gap);
    }
    let m = model.mass.constant_value().map_or(0.0, |m| m.norm());
    Ok(if m > 0.0 { gap / m } else { f64::INFINITY })
}

fn default_method(model: &SpacetimeModel, p: &[f64]) -> Method {
    if model.closed_form_eligible() || model.conformal_scale(p).is_some() {
        Method::ClosedForm
    } else {
        Method::Grid
    }
}

fn tolerance(method: Method, model: &SpacetimeModel) -> f64 {
    match method {
        Method::ClosedForm => CLOSED_FORM_TOLERANCE,
        _ => model.settings.dp_tolerance,
    }
}

fn check_states(from: &MixedState, to: &MixedState, model: &SpacetimeModel) -> Result<()> {
    check_weight(from.xi)?;
    check_weight(to.xi)?;
    model.check_point(&from.point)?;
    model.check_point(&to.point)
}

pub fn decide(from: &MixedState, to: &MixedState, model: &SpacetimeModel) -> Result<CausalDecision> {
    decide_with(from, to, model, Strategy::Auto)
}

/// [`decide`] with an explicit choice between the closed form and the lattice.
pub fn decide_with(
    from: &MixedState,
    to: &MixedState,
    model: &SpacetimeModel,
    strategy: Strategy,
) -> Result<CausalDecision> {
    check_states(from, to, model)?;
    if model.is_diagonal() {
        return diagonal_mass_decide(from, to, model);
    }
    let (p, q) = (&from.point, &to.point);
    let required = required_proper_time(from.xi, to.xi, model)?;
    let base_related = is_causally_related(p, q, model)?;
    if !base_related {
        return Ok(CausalDecision {
            related: false,
            base_related,
            required,
            achieved: f64::NAN,
            slack: f64::NAN,
            method: default_method(model, p),
            marginal: false,
        });
    }
    let optimum = match optimize(p, q, model, strategy, Weighting::Decision) {
        Ok(o) => o,
        // the lattice can miss a connection the cone test accepts (null boundary)
        Err(Error::NotCausallyRelated) => crate::geometry::PathOptimum {
            value: 0.0,
            method: Method::Grid,
            path: vec![p.clone(), q.clone()],
        },
        Err(e) => return Err(e),
    };
    let achieved = optimum.value;
    let tol = tolerance(optimum.method, model);
    let slack = achieved - required;
    let related = required == 0.0 || slack >= -tol;
    let marginal = optimum.method != Method::ClosedForm && required.is_finite() && slack.abs() <= tol;
    Ok(CausalDecision {
        related,
        base_related,
        required,
        achieved,
        slack,
        method: optimum.method,
        marginal,
    })
}

/// Without an off-diagonal mass the sheets never mix: related iff `ξ = φ` and `p ⪯ q`.
pub fn diagonal_mass_decide(from: &MixedState, to: &MixedState, model: &SpacetimeModel) -> Result<CausalDecision> {
    if !model.is_diagonal() {
        return Err(Error::Precondition("model has an off-diagonal mass".into()));
    }
    check_states(from, to, model)?;
    let base_related = is_causally_related(&from.point, &to.point, model)?;
    let same = from.xi == to.xi;
    let required = if same { 0.0 } else { f64::INFINITY };
    Ok(CausalDecision {
        related: same && base_related,
        base_related,
        required,
        achieved: f64::NAN,
        slack: f64::NAN,
        method: default_method(model, &from.point),
        marginal: false,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceRow {
    pub point: Vec<f64>,
    /// Largest reachable `φ`; `None` outside the causal future.
    pub phi_max: Option<f64>,
    /// `|m|·τ` or `∫|Φ|dτ` along the best curve.
    pub angle_budget: f64,
}

impl SurfaceRow {
    pub fn reachable(&self) -> bool {
        self.phi_max.is_some()
    }
}

/// `sin²(min(π/2, arcsin√ξ + budget))`.
pub fn max_internal_weight(xi: f64, budget: f64) -> f64 {
    let angle = (internal_angle(xi) + budget).min(std::f64::consts::FRAC_PI_2);
    let s = angle.sin();
    (s * s).min(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub rows: Vec<SurfaceRow>,
    pub method: Method,
}

/// Largest reachable `φ` at every grid point, in grid order.
///
/// Flat models with a constant mass use the closed form. Other two-dimensional
/// models share one single-source table; four-dimensional curved models solve
/// one path problem per point.
pub fn future_cone(state: &MixedState, model: &SpacetimeModel, grid: &Grid) -> Result<Surface> {
    check_weight(state.xi)?;
    let p = &state.point;
    model.check_point(p)?;
    if grid.dimension() != model.dimension {
        return Err(Error::DimensionMismatch {
            expected: model.dimension,
            found: grid.dimension(),
        });
    }
    let xi = state.xi;
    let row = |point: Vec<f64>, budget: Option<f64>| -> SurfaceRow {
        match budget {
            Some(_) if model.is_diagonal() => SurfaceRow {
                point,
                phi_max: Some(xi),
                angle_budget: 0.0,
            },
            Some(b) => SurfaceRow {
                point,
                phi_max: Some(max_internal_weight(xi, b)),
                angle_budget: b,
            },
            None => SurfaceRow {
                point,
                phi_max: None,
                angle_budget: f64::NAN,
            },
        }
    };
    let points: Vec<Vec<f64>> = grid.points().collect();
    let mass_density = Density {
        model,
        weighting: Weighting::Mass,
    };

    if model.closed_form_eligible() {
        let rows = points
            .into_par_iter()
            .map(|q| {
                let budget = match optimize(p, &q, model, Strategy::ClosedForm, Weighting::Mass) {
                    Ok(o) if model.domain.contains(&q) => Some(o.value),
                    _ => None,
                };
                row(q, budget)
            })
            .collect();
        return Ok(Surface {
            rows,
            method: Method::ClosedForm,
        });
    }

    if model.dimension == 2 {
        let t_max = grid.upper[0].min(model.domain.upper[0]);
        let fan = Fan::new(p, mass_density, t_max)?;
        let rows = points
            .into_par_iter()
            .map(|q| {
                let budget = if model.domain.contains(&q) { fan.value_at(&q) } else { None };
                row(q, budget)
            })
            .collect();
        return Ok(Surface {
            rows,
            method: Method::Grid,
        });
    }

    let rows = points
        .into_par_iter()
        .map(|q| {
            let budget = if !model.domain.contains(&q) || !is_causally_related(p, &q, model)? {
                None
            } else {
                match optimize(p, &q, model, Strategy::Grid, Weighting::Mass) {
                    Ok(o) => Some(o.value),
                    Err(Error::NotCausallyRelated) => Some(0.0),
                    Err(e) => return Err(e),
                }
            };
            Ok(row(q, budget))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Surface {
        rows,
        method: Method::Grid,
    })
}

/// Replaces the mass by a scalar field `Φ = re + i·im` and records vector
/// potentials. Returns warnings for regions where `Φ` vanishes.
pub fn fluctuate(
    model: &SpacetimeModel,
    phi_re: Expr,
    phi_im: Expr,
    potentials: Option<VectorPotentials>,
) -> Result<(SpacetimeModel, Vec<String>)> {
    let mut out = SpacetimeModel::new(
        model.dimension,
        model.metric.clone(),
        Mass::Field { re: phi_re, im: phi_im },
        model.domain.clone(),
    )?
    .with_settings(model.settings.clone());
    if let Some(v) = potentials {
        out = out.with_vector_potentials(v)?;
    }
    let warnings = field_warnings(&out);
    Ok((out, warnings))
}

/// Diagnostics for a scalar field that vanishes somewhere on the certification grid.
pub fn field_warnings(model: &SpacetimeModel) -> Vec<String> {
    if !matches!(model.mass, Mass::Field { .. }) {
        return Vec::new();
    }
    let grid = model.certification_grid();
    let zeros = (0..grid.len())
        .into_par_iter()
        .filter(|&i| model.weight(&grid.point(i)) < VANISHING_FIELD)
        .count();
    if zeros == 0 {
        return Vec::new();
    }
    vec![format!(
        "scalar field vanishes at {zeros} of {} certification points; states there cannot change sheet and thresholds may be unreachable",
        grid.len()
    )]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{max_weighted_length, CausalCurve, DomainBox, Metric, Settings};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, PI};

    fn state(p: &[f64], xi: f64) -> MixedState {
        MixedState::new(p.to_vec(), xi).unwrap()
    }

    fn minkowski(m: f64) -> SpacetimeModel {
        let domain = DomainBox::new(vec![0.0, -2.0], vec![2.0, 2.0]).unwrap();
        SpacetimeModel::minkowski(2, Complex64::new(m, 0.0), domain).unwrap()
    }

    /// Flat metric written so that the closed form does not apply.
    fn minkowski_via_lattice(settings: Settings) -> SpacetimeModel {
        let domain = DomainBox::new(vec![0.0, -2.0], vec![2.0, 2.0]).unwrap();
        SpacetimeModel::conformal(Expr::parse("1 + 0*t").unwrap(), Complex64::new(1.0, 0.0), domain)
            .unwrap()
            .with_settings(settings)
    }

    fn field_model(re: &str) -> SpacetimeModel {
        let domain = DomainBox::new(vec![0.0, -2.0], vec![2.0, 2.0]).unwrap();
        let mass = Mass::Field {
            re: Expr::parse(re).unwrap(),
            im: Expr::constant(0.0),
        };
        SpacetimeModel::new(2, Metric::Minkowski, mass, domain).unwrap()
    }

    #[test]
    fn thresholds() {
        let m1 = minkowski(1.0);
        assert_abs_diff_eq!(required_proper_time(1.0, 0.0, &m1).unwrap(), FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(required_proper_time(0.3, 0.3, &m1).unwrap(), 0.0);
        assert_abs_diff_eq!(required_proper_time(0.0, 0.5, &minkowski(2.0)).unwrap(), FRAC_PI_8, epsilon = 1e-15);
        assert_eq!(required_proper_time(0.0, 0.5, &minkowski(0.0)).unwrap(), f64::INFINITY);
        assert_abs_diff_eq!(required_proper_time(0.0, 1.0, &field_model("1 + t")).unwrap(), FRAC_PI_2);
        assert!(required_proper_time(1.5, 0.0, &m1).is_err());
    }

    #[test]
    fn decision_examples() {
        let m = minkowski(1.0);
        let d = decide(&state(&[0.0, 0.0], 1.0), &state(&[2.0, 0.0], 0.0), &m).unwrap();
        assert!(d.related && d.base_related);
        assert_abs_diff_eq!(d.slack, 2.0 - FRAC_PI_2, epsilon = 1e-12);
        assert_eq!(d.method, Method::ClosedForm);
        let d = decide(&state(&[0.0, 0.0], 1.0), &state(&[1.0, 0.0], 0.0), &m).unwrap();
        assert!(!d.related && d.base_related);
        let d = decide(&state(&[0.0, 0.0], 0.3), &state(&[1.0, 1.0], 0.3), &m).unwrap();
        assert!(d.related);
        let d = decide(&state(&[0.0, 0.0], 0.3), &state(&[1.0, 1.0], 0.31), &m).unwrap();
        assert!(!d.related);
        assert_eq!(d.achieved, 0.0);
        let d = decide(&state(&[0.0, 0.0], 0.3), &state(&[1.0, 1.5], 0.3), &m).unwrap();
        assert!(!d.related && !d.base_related);
        assert!(decide(&state(&[0.0, 3.0], 0.3), &state(&[1.0, 1.5], 0.3), &m).is_err());
    }

    #[test]
    fn diagonal_examples() {
        let domain = DomainBox::new(vec![0.0, -2.0], vec![2.0, 2.0]).unwrap();
        let m = SpacetimeModel::new(2, Metric::Minkowski, Mass::Diagonal, domain).unwrap();
        let (p, q) = ([0.0, 0.0], [1.0, 0.5]);
        assert!(diagonal_mass_decide(&state(&p, 0.7), &state(&q, 0.7), &m).unwrap().related);
        assert!(!diagonal_mass_decide(&state(&p, 0.7), &state(&q, 0.70001), &m).unwrap().related);
        assert!(!diagonal_mass_decide(&state(&p, 0.7), &state(&[1.0, 1.5], 0.7), &m).unwrap().related);
        assert!(decide(&state(&p, 0.7), &state(&q, 0.7), &m).unwrap().related);
        assert!(diagonal_mass_decide(&state(&p, 0.7), &state(&q, 0.7), &minkowski(1.0)).is_err());
    }

    #[test]
    fn partial_order_axioms() {
        let m = minkowski(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let random_state = |rng: &mut ChaCha8Rng| {
            state(&[rng.gen_range(0.0..2.0), rng.gen_range(-1.0..1.0)], rng.gen_range(0.0..1.0))
        };
        let mut chains = 0;
        for _ in 0..3000 {
            let a = random_state(&mut rng);
            let b = random_state(&mut rng);
            let c = random_state(&mut rng);
            assert!(decide(&a, &a, &m).unwrap().related);
            let ab = decide(&a, &b, &m).unwrap().related;
            let bc = decide(&b, &c, &m).unwrap().related;
            if ab && bc {
                chains += 1;
                assert!(decide(&a, &c, &m).unwrap().related);
            }
            if ab && decide(&b, &a, &m).unwrap().related {
                assert_eq!(a, b);
            }
            let d = decide(&a, &b, &m).unwrap();
            assert!(!d.related || d.base_related);
        }
        assert!(chains > 10, "{chains}");
    }

    #[test]
    fn related_weights_form_an_interval_around_xi() {
        let m = minkowski(1.0);
        let (p, q) = ([0.0, 0.0], [1.0, 0.3]);
        for xi in [0.0, 0.2, 0.5, 0.9, 1.0] {
            let related: Vec<(f64, bool)> = (0..=200)
                .map(|k| {
                    let phi = k as f64 / 200.0;
                    (phi, decide(&state(&p, xi), &state(&q, phi), &m).unwrap().related)
                })
                .collect();
            let inside: Vec<f64> = related.iter().filter(|r| r.1).map(|r| r.0).collect();
            let (lo, hi) = (inside[0], *inside.last().unwrap());
            assert!(lo <= xi + 1e-12 && xi <= hi + 1e-12);
            for (phi, r) in related {
                assert_eq!(r, phi >= lo && phi <= hi, "xi {xi} phi {phi}");
            }
        }
    }

    #[test]
    fn closed_form_surface() {
        let m = minkowski(1.0);
        let grid = Grid::new(vec![0.0, -2.0], vec![2.0, 2.0], vec![41, 81]).unwrap();
        let s = future_cone(&state(&[0.0, 0.0], 0.0), &m, &grid).unwrap();
        assert_eq!(s.method, Method::ClosedForm);
        for r in &s.rows {
            let (t, x) = (r.point[0], r.point[1]);
            if x.abs() > t + crate::geometry::CONE_TIE_TOLERANCE {
                assert!(r.phi_max.is_none());
                continue;
            }
            let tau = (t * t - x * x).max(0.0).sqrt();
            let want = if tau >= FRAC_PI_2 { 1.0 } else { tau.sin().powi(2) };
            assert_abs_diff_eq!(r.phi_max.unwrap(), want, epsilon = 1e-12);
        }
        let at = |q: [f64; 2]| {
            let g = Grid::new(q.to_vec(), q.to_vec(), vec![1, 1]).unwrap();
            future_cone(&state(&[0.0, 0.0], 0.4), &m, &g).unwrap().rows[0].phi_max
        };
        assert_abs_diff_eq!(at([1.0, 1.0]).unwrap(), 0.4, epsilon = 1e-12);
        let g = Grid::new(vec![FRAC_PI_2, 0.0], vec![FRAC_PI_2, 0.0], vec![1, 1]).unwrap();
        let r = &future_cone(&state(&[0.0, 0.0], 0.0), &m, &g).unwrap().rows[0];
        assert_abs_diff_eq!(r.phi_max.unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn surface_is_confirmed_by_decide() {
        let m = minkowski(1.0);
        let grid = Grid::new(vec![0.0, -2.0], vec![2.0, 2.0], vec![21, 41]).unwrap();
        for xi in [0.0, 0.3] {
            let p = state(&[0.0, 0.0], xi);
            for r in future_cone(&p, &m, &grid).unwrap().rows {
                let Some(phi) = r.phi_max else {
                    assert!(!decide(&p, &state(&r.point, xi), &m).unwrap().related);
                    continue;
                };
                assert!(decide(&p, &state(&r.point, phi), &m).unwrap().related);
                if phi < 1.0 - 1e-6 {
                    let above = (phi + 1e-6).min(1.0);
                    assert!(!decide(&p, &state(&r.point, above), &m).unwrap().related);
                }
            }
        }
    }

    #[test]
    fn lattice_surface_tracks_closed_form() {
        let settings = Settings {
            dp_time_steps: 201,
            ..Settings::default()
        };
        let m = minkowski_via_lattice(settings);
        assert!(!m.closed_form_eligible());
        let grid = Grid::new(vec![0.0, -2.0], vec![2.0, 2.0], vec![41, 81]).unwrap();
        let s = future_cone(&state(&[0.0, 0.0], 0.0), &m, &grid).unwrap();
        assert_eq!(s.method, Method::Grid);
        for r in &s.rows {
            let (t, x) = (r.point[0], r.point[1]);
            if x.abs() > t + crate::geometry::CONE_TIE_TOLERANCE {
                assert!(r.phi_max.is_none());
                continue;
            }
            let tau = (t * t - x * x).max(0.0).sqrt();
            let want = if tau >= FRAC_PI_2 { 1.0 } else { tau.sin().powi(2) };
            assert_abs_diff_eq!(r.phi_max.unwrap(), want, epsilon = 2e-3);
        }
    }

    #[test]
    fn lattice_decisions_agree_with_closed_form_off_threshold() {
        let settings = Settings {
            dp_time_steps: 101,
            dp_space_steps: 101,
            ..Settings::default()
        };
        let exact = minkowski(1.0);
        let lattice = minkowski_via_lattice(settings);
        let p = [0.0, 0.0];
        let mut compared = 0;
        for i in 0..12 {
            for j in 0..12 {
                let q = [0.1 + 1.9 * i as f64 / 11.0, -1.9 + 3.8 * j as f64 / 11.0];
                if !crate::geometry::flat_cone_order(&p, &q) {
                    continue;
                }
                let tau = crate::geometry::flat_proper_time(&p, &q);
                let dp = decide(&state(&p, 0.0), &state(&q, 0.0), &lattice).unwrap();
                assert!((dp.achieved - tau).abs() <= 2e-3, "{q:?}: {} vs {tau}", dp.achieved);
                for a in 0..=10 {
                    for b in 0..=10 {
                        let (xi, phi) = (a as f64 / 10.0, b as f64 / 10.0);
                        let need = required_proper_time(xi, phi, &exact).unwrap();
                        if (tau - need).abs() <= 2e-3 {
                            continue;
                        }
                        let e = decide(&state(&p, xi), &state(&q, phi), &exact).unwrap().related;
                        let l = dp.achieved >= need - lattice.settings.dp_tolerance;
                        assert_eq!(e, l, "{q:?} {xi} {phi}");
                        compared += 1;
                    }
                }
            }
        }
        assert!(compared > 1000);
    }

    #[test]
    fn constant_field_matches_constant_mass() {
        let plain = minkowski(1.3);
        let (field, warnings) = fluctuate(&plain, Expr::parse("1.3").unwrap(), Expr::constant(0.0), None).unwrap();
        assert!(warnings.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let a = state(&[rng.gen_range(0.0..1.0), rng.gen_range(-1.0..1.0)], rng.gen_range(0.0..1.0));
            let b = state(&[rng.gen_range(0.0..2.0), rng.gen_range(-1.0..1.0)], rng.gen_range(0.0..1.0));
            let u = decide(&a, &b, &plain).unwrap();
            let v = decide(&a, &b, &field).unwrap();
            assert_eq!(u.related, v.related);
        }
    }

    #[test]
    fn growing_field_flips_at_the_scalar_threshold() {
        let model = field_model("1 + t");
        let flip = (1.0 + PI).sqrt() - 1.0;
        let related = |t: f64| decide(&state(&[0.0, 0.0], 0.0), &state(&[t, 0.0], 1.0), &model).unwrap().related;
        let (mut lo, mut hi) = (0.5, 1.8);
        assert!(!related(lo) && related(hi));
        for _ in 0..30 {
            let mid = 0.5 * (lo + hi);
            if related(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((hi - flip).abs() <= 2e-3, "{hi} vs {flip}");
    }

    #[test]
    fn off_axis_field_bends_the_best_curve() {
        let model = field_model("0.2 + 3*exp(-8*(x - 0.4)^2)");
        let (p, q) = ([0.0, 0.0], [1.5, 0.0]);
        let best = max_weighted_length(&p, &q, &model).unwrap();
        let straight = CausalCurve::straight(&p, &q, 201).unwrap();
        let along = crate::geometry::weighted_length(&straight, &model, 1.0).unwrap();
        assert!(best > along + 0.05, "{best} vs {along}");
    }

    #[test]
    fn vanishing_field_warns() {
        let (_, warnings) = fluctuate(&minkowski(1.0), Expr::parse("0*t").unwrap(), Expr::constant(0.0), None).unwrap();
        assert_eq!(warnings.len(), 1);
    }
}
