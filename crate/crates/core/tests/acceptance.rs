//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. Expected values come from closed forms written
//! out here, independently of the library code paths under test.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twosheet_core::causality::{decide, decide_with, future_cone};
use twosheet_core::clifford::{make_representation, verify_representation};
use twosheet_core::cone::{
    charpoly_certificate, min_eigenvalue, solve_spinor_system, verify_vector_noop, witness_matrix,
    witness_matrix_2d, CausalElementPair, ExprPair,
};
use twosheet_core::expr::Expr;
use twosheet_core::geometry::{
    is_causally_related, weighted_length, CausalCurve, DomainBox, Grid, Mass, Metric, MixedState, Settings,
    SpacetimeModel, Strategy, VectorPotentials,
};
use twosheet_core::oracle::{
    mc_check, random_pair, sample_causal_elements, witness_separation, OracleConfig, SampledElement, VerdictKind,
};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn figure_box() -> DomainBox {
    DomainBox::new(vec![0.0, -2.0], vec![2.0, 2.0]).unwrap()
}

fn minkowski(mass: f64) -> SpacetimeModel {
    SpacetimeModel::minkowski(2, Complex64::from(mass), figure_box()).unwrap()
}

fn field(re: &str) -> SpacetimeModel {
    let mass = Mass::Field {
        re: Expr::parse(re).unwrap(),
        im: Expr::constant(0.0),
    };
    SpacetimeModel::new(2, Metric::Minkowski, mass, figure_box()).unwrap()
}

fn state(x: &[f64], w: f64) -> MixedState {
    MixedState::new(x.to_vec(), w).unwrap()
}

/// Bisects the first `t` at which `related(t)` holds.
fn flip(mut lo: f64, mut hi: f64, steps: usize, related: impl Fn(f64) -> bool) -> Result<f64, String> {
    if related(lo) || !related(hi) {
        return Err(format!("no flip inside [{lo}, {hi}]"));
    }
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        if related(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// √(t² − |x|²) for flat points.
fn flat_tau(p: &[f64], q: &[f64]) -> Option<f64> {
    let dt = q[0] - p[0];
    let r2: f64 = p[1..].iter().zip(&q[1..]).map(|(a, b)| (b - a) * (b - a)).sum();
    (dt >= 0.0 && dt * dt >= r2).then(|| (dt * dt - r2).sqrt())
}

fn pure_state_threshold() -> Outcome {
    let model = minkowski(1.0);
    let probe = |strategy: Strategy, m: &SpacetimeModel| {
        let m = m.clone();
        move |t: f64| {
            decide_with(&state(&[0.0, 0.0], 1.0), &state(&[t, 0.0], 0.0), &m, strategy)
                .unwrap()
                .related
        }
    };
    let closed = flip(1.0, 2.0, 40, probe(Strategy::ClosedForm, &model))?;
    check((closed - FRAC_PI_2).abs() <= 1e-6, || format!("closed-form flip at {closed}"))?;
    // The lattice decision accepts within its tolerance band, which moves the
    // flip earlier by the band; a band of 1e-3 keeps it inside the criterion.
    let lattice_model = model.clone().with_settings(Settings {
        dp_tolerance: 1e-3,
        ..Settings::default()
    });
    let lattice = flip(1.0, 2.0, 16, probe(Strategy::Grid, &lattice_model))?;
    check((lattice - FRAC_PI_2).abs() <= 2e-3, || format!("lattice flip at {lattice}"))?;
    Ok(format!(
        "closed-form |dt| = {:.2e}, lattice |dt| = {:.2e}",
        (closed - FRAC_PI_2).abs(),
        (lattice - FRAC_PI_2).abs()
    ))
}

fn expected_surface(point: &[f64]) -> Option<f64> {
    flat_tau(&[0.0, 0.0], point).map(|tau| tau.min(FRAC_PI_2).sin().powi(2))
}

fn future_surface() -> Outcome {
    let grid = Grid::new(vec![0.0, -2.0], vec![2.0, 2.0], vec![201, 201]).unwrap();
    let origin = state(&[0.0, 0.0], 0.0);
    let model = minkowski(1.0);
    let surface = future_cone(&origin, &model, &grid).map_err(|e| e.to_string())?;

    // the closed-form surface must agree with the decision procedure itself
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..400 {
        let row = &surface.rows[rng.gen_range(0..surface.rows.len())];
        let Some(phi) = row.phi_max else { continue };
        let at = |w: f64| decide(&origin, &state(&row.point, w), &model).unwrap().related;
        check(at(phi), || format!("phi_max {phi} at {:?} rejected by decide", row.point))?;
        if phi < 1.0 - 1e-6 {
            check(!at(phi + 1e-6), || format!("above phi_max accepted at {:?}", row.point))?;
        }
    }

    let mut worst = 0.0_f64;
    for row in &surface.rows {
        match (row.phi_max, expected_surface(&row.point)) {
            (Some(a), Some(b)) => worst = worst.max((a - b).abs()),
            (None, None) => {}
            (a, b) => {
                // points on the light cone may round either way
                let tie = (row.point[1].abs() - row.point[0]).abs() <= 1e-12;
                check(tie, || format!("reachability differs at {:?}: {a:?} vs {b:?}", row.point))?;
            }
        }
    }
    check(worst <= 1e-6, || format!("closed-form deviation {worst:e}"))?;

    // a constant conformal factor written as an expression forces the lattice
    let lattice_model = SpacetimeModel::conformal(Expr::parse("1 + 0*t").unwrap(), Complex64::from(1.0), figure_box())
        .unwrap();
    let lattice = future_cone(&origin, &lattice_model, &grid).map_err(|e| e.to_string())?;
    let mut worst_lattice = 0.0_f64;
    for row in &lattice.rows {
        if let (Some(a), Some(b)) = (row.phi_max, expected_surface(&row.point)) {
            worst_lattice = worst_lattice.max((a - b).abs());
        }
    }
    check(worst_lattice <= 2e-3, || format!("lattice deviation {worst_lattice:e}"))?;
    Ok(format!(
        "201x201, closed form {worst:.2e}, lattice ({}) {worst_lattice:.2e}",
        lattice.method.as_str()
    ))
}

fn two_dimensional_certificate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0_f64;
    let mut worst_zero = 0.0_f64;
    let mut min_eig = f64::INFINITY;
    for _ in 0..1000 {
        let l1 = rng.gen_range(0.1..3.0);
        let l2 = rng.gen_range(0.1..3.0);
        let theta = rng.gen_range(0.05..FRAC_PI_2 - 0.05);
        let m = Complex64::from_polar(rng.gen_range(0.1..2.0), rng.gen_range(0.0..2.0 * PI));
        let a = witness_matrix_2d(l1, l2, theta, m);
        let c = charpoly_certificate(&a, 1e-10).map_err(|e| e.to_string())?;
        let csc2 = 1.0 / (2.0 * theta).sin().powi(2);
        let n = m.norm();
        let c1 = 2.0 * n * ((l2 / l1).sqrt() + (l1 / l2).sqrt()) * csc2;
        let c2 = n * n * ((l1 - l2).powi(2) + 4.0 * l1 * l2 * csc2) * csc2 / (l1 * l2);
        for (k, want) in [c1, c2].into_iter().enumerate() {
            worst = worst.max((c.coefficients[k] - want).abs() / want.max(1.0));
        }
        worst_zero = worst_zero
            .max(c.coefficients[2].abs() / c.scale.powi(3))
            .max(c.coefficients[3].abs() / c.scale.powi(4));
        min_eig = min_eig.min(min_eigenvalue(&a));
    }
    check(worst <= 1e-10, || format!("c1/c2 deviation {worst:e}"))?;
    check(worst_zero <= 1e-12, || format!("c3/c4 not zero: {worst_zero:e}"))?;
    check(min_eig >= -1e-10, || format!("min eigenvalue {min_eig:e}"))?;
    Ok(format!("1000 draws, c1/c2 {worst:.2e}, c3/c4 {worst_zero:.2e}, min eigenvalue {min_eig:.2e}"))
}

fn random_timelike(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let mut w = vec![0.0; dim];
    let mut r2 = 0.0;
    for wi in w.iter_mut().skip(1) {
        *wi = rng.gen_range(-2.0..2.0);
        r2 += *wi * *wi;
    }
    w[0] = (r2 + rng.gen_range(0.05..3.0_f64)).sqrt();
    w
}

fn four_dimensional_certificate() -> Outcome {
    let rep = make_representation(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0_f64;
    let mut worst_zero = 0.0_f64;
    let mut printed_gap = 0.0_f64;
    for _ in 0..1000 {
        let w = random_timelike(&mut rng, 4);
        let theta = rng.gen_range(0.05..FRAC_PI_2 - 0.05);
        let m = Complex64::from_polar(rng.gen_range(0.1..2.0), rng.gen_range(0.0..2.0 * PI));
        let a = witness_matrix(&rep, &w, theta, m);
        let c = charpoly_certificate(&a, 1e-10).map_err(|e| e.to_string())?;
        let n2 = w[0] * w[0] - w[1] * w[1] - w[2] * w[2] - w[3] * w[3];
        let n = n2.sqrt();
        let r2 = w[1] * w[1] + w[2] * w[2] + w[3] * w[3];
        let csc = 1.0 / (2.0 * theta).sin();
        let cos4 = (4.0 * theta).cos();
        let q = 2.0 * w[0] * w[0] - r2 - r2 * cos4;
        let mm = m.norm();
        let c1 = 8.0 * mm * w[0] * csc.powi(2) / n;
        let c2 = 4.0 * mm.powi(2) * (6.0 * w[0] * w[0] - r2 - r2 * cos4) * csc.powi(4) / n2;
        // The printed third and fourth coefficients are not invariant under
        // w → λw although the matrix is; these are the corrected forms.
        let c3 = 16.0 * mm.powi(3) * w[0] * q * csc.powi(6) / n.powi(3);
        let c4 = 4.0 * mm.powi(4) * q * q * csc.powi(8) / n2.powi(2);
        let printed4 = mm.powi(4) * q * q * csc.powi(8) / n.powi(3);
        for (k, want) in [c1, c2, c3, c4].into_iter().enumerate() {
            check(c.coefficients[k] >= -1e-9 * c.scale.powi(k as i32 + 1), || format!("c{} negative", k + 1))?;
            worst = worst.max((c.coefficients[k] - want).abs() / want.max(1.0));
        }
        printed_gap = printed_gap.max((c.coefficients[3] - printed4).abs() / c4.max(1.0));
        for k in 4..8 {
            worst_zero = worst_zero.max(c.coefficients[k].abs() / c.scale.powi(k as i32 + 1));
        }
    }
    check(worst <= 1e-9, || format!("c1..c4 deviation {worst:e}"))?;
    check(worst_zero <= 1e-10, || format!("c5..c8 not zero: {worst_zero:e}"))?;
    Ok(format!(
        "1000 draws, c1..c4 {worst:.2e} (c3/c4 corrected; printed c4 off by up to {printed_gap:.1e}), c5..c8 {worst_zero:.2e}"
    ))
}

fn spinor_system() -> Outcome {
    let mut worst = 0.0_f64;
    let mut vertical = 0;
    for dim in [2, 4] {
        let rep = make_representation(dim).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5 + dim as u64);
        for k in 0..1000 {
            let mut w = random_timelike(&mut rng, dim);
            if dim == 4 && k % 5 == 0 {
                w[1] = 0.0;
                vertical += 1;
            }
            let sol = solve_spinor_system(&w, &rep).map_err(|e| e.to_string())?;
            for (v, target) in rep.v_ops.iter().zip(&w) {
                // ψ* V ψ computed entry by entry
                let mut acc = Complex64::from(0.0);
                for i in 0..sol.psi.len() {
                    for j in 0..sol.psi.len() {
                        acc += sol.psi[i].conj() * v[(i, j)] * sol.psi[j];
                    }
                }
                worst = worst.max((acc - target).norm());
            }
        }
    }
    check(worst <= 1e-10, || format!("residual {worst:e}"))?;
    Ok(format!("2000 draws ({vertical} with w1 = 0), max residual {worst:.2e}"))
}

fn diagonal_finite_operator() -> Outcome {
    let model = SpacetimeModel::new(2, Metric::Minkowski, Mass::Diagonal, figure_box()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut related, mut total) = (0, 0);
    for _ in 0..1000 {
        let p = [rng.gen_range(0.0..2.0), rng.gen_range(-2.0..2.0)];
        let q = [rng.gen_range(0.0..2.0), rng.gen_range(-2.0..2.0)];
        let xi = if rng.gen_bool(0.2) { rng.gen_range(0..2) as f64 } else { rng.gen_range(0.0..1.0) };
        let phi = if rng.gen_bool(0.5) { xi } else { rng.gen_range(0.0..1.0) };
        let d = decide(&state(&p, xi), &state(&q, phi), &model).map_err(|e| e.to_string())?;
        let expected = xi == phi && flat_tau(&p, &q).is_some();
        check(d.related == expected, || format!("{p:?},{xi} -> {q:?},{phi}: {}", d.related))?;
        related += usize::from(expected);
        total += 1;
    }
    Ok(format!("{total} pairs, {related} related, exact agreement"))
}

fn vector_fluctuation_noop() -> Outcome {
    let rep = make_representation(2).unwrap();
    let grid = Grid::new(vec![0.0, -2.0], vec![2.0, 2.0], vec![101, 101]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let c = |rng: &mut ChaCha8Rng| format!("{:.3}", rng.gen_range(-2.0..2.0));
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let term = |rng: &mut ChaCha8Rng| {
            let (a, b, k) = (c(rng), c(rng), c(rng));
            match rng.gen_range(0..3) {
                0 => format!("{a}*sin({k}*t + {b}*x)"),
                1 => format!("{a} + {b}*t*x"),
                _ => format!("{a}*exp(-({k}*x)^2)"),
            }
        };
        let potentials = VectorPotentials {
            a: vec![Expr::parse(&term(&mut rng)).unwrap(), Expr::parse(&term(&mut rng)).unwrap()],
            b: vec![Expr::parse(&term(&mut rng)).unwrap(), Expr::parse(&term(&mut rng)).unwrap()],
        };
        let omega = format!("1 + 0.2*cos({}*x)", c(&mut rng));
        let model = SpacetimeModel::conformal(Expr::parse(&omega).unwrap(), Complex64::new(1.0, 0.3), figure_box())
            .unwrap()
            .with_vector_potentials(potentials)
            .unwrap();
        let a = format!("t + {}*sin(x)", c(&mut rng));
        let b = format!("{}*t - x^2", c(&mut rng));
        let pair = ExprPair::parse(&a, &b, 2).unwrap();
        let dev = verify_vector_noop(&model, &pair, &rep, &grid).map_err(|e| e.to_string())?;
        worst = worst.max(dev);
    }
    check(worst <= 1e-13, || format!("commutator {worst:e}"))?;
    Ok(format!("10 draws on 101x101, max commutator {worst:.2e}"))
}

fn scalar_fluctuation_threshold() -> Outcome {
    let growing = field("1 + t");
    let expected = (1.0 + PI).sqrt() - 1.0;
    let t = flip(0.5, 1.8, 16, |t| {
        decide(&state(&[0.0, 0.0], 0.0), &state(&[t, 0.0], 1.0), &growing).unwrap().related
    })?;
    check((t - expected).abs() <= 2e-3, || format!("field flip at {t}, expected {expected}"))?;

    // a constant field reproduces the constant-mass decisions exactly
    let constant = field("1");
    let plain = minkowski(1.0);
    for k in 0..=400 {
        let t = 1.0 + k as f64 / 400.0;
        let (p, q) = (state(&[0.0, 0.0], 1.0), state(&[t, 0.1], 0.0));
        let a = decide(&p, &q, &constant).unwrap();
        let b = decide(&p, &q, &plain).unwrap();
        check(a == b, || format!("constant field differs at t = {t}: {a:?} vs {b:?}"))?;
    }
    let relate = |m: &SpacetimeModel| {
        let m = m.clone();
        move |t: f64| decide(&state(&[0.0, 0.0], 1.0), &state(&[t, 0.0], 0.0), &m).unwrap().related
    };
    let (a, b) = (flip(1.0, 2.0, 40, relate(&constant))?, flip(1.0, 2.0, 40, relate(&plain))?);
    check(a == b, || format!("flips differ: {a} vs {b}"))?;
    Ok(format!("field flip {t:.6} (|dt| = {:.2e}), constant field flip identical", (t - expected).abs()))
}

fn oracle_consistency(elements: &[SampledElement], discarded: usize) -> Outcome {
    let model = minkowski(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut related, mut unrelated) = (Vec::new(), Vec::new());
    let mut draws = 0;
    while related.len() < 100 || unrelated.len() < 100 {
        draws += 1;
        if draws > 100_000 {
            return Err("could not draw enough pairs".into());
        }
        let (p, q) = random_pair(&model, &mut rng).map_err(|e| e.to_string())?;
        let d = decide(&p, &q, &model).map_err(|e| e.to_string())?;
        if d.related && related.len() < 100 {
            related.push((p, q, d));
        } else if !d.related && d.base_related && p.xi != q.xi && unrelated.len() < 100 {
            unrelated.push((p, q, d));
        }
    }
    for (p, q, d) in &related {
        let v = mc_check(p, q, elements, d, &model);
        check(v.kind == VerdictKind::Consistent, || format!("{p:?} -> {q:?}: {v:?}"))?;
    }
    let mut margin = f64::INFINITY;
    for (p, q, d) in &unrelated {
        let value = witness_separation(p, q, &model).map_err(|e| e.to_string())?;
        margin = margin.min(-value);
        let v = mc_check(p, q, elements, d, &model);
        check(v.kind == VerdictKind::Separated, || format!("{p:?} -> {q:?}: {v:?}"))?;
    }
    check(margin > 1e-6, || format!("witness margin {margin:e}"))?;
    Ok(format!(
        "{} elements ({discarded} discarded), 100 related pairs consistent, 100 unrelated separated (margin {margin:.2e})",
        elements.len()
    ))
}

fn property_suites(elements: &[SampledElement]) -> Outcome {
    // Clifford identities
    let mut clifford = 0.0_f64;
    for dim in [2, 4] {
        let report = verify_representation(&make_representation(dim).unwrap());
        clifford = clifford.max(report.max_residual);
    }
    check(clifford <= 1e-14, || format!("Clifford residual {clifford:e}"))?;

    // reparameterization invariance on a curved background with a field
    let model = SpacetimeModel::new(
        2,
        Metric::Conformal2D {
            omega: Expr::parse("1 + 0.3*sin(x)").unwrap(),
        },
        Mass::Field {
            re: Expr::parse("1 + 0.5*t").unwrap(),
            im: Expr::parse("0.2*x").unwrap(),
        },
        figure_box(),
    )
    .unwrap();
    let path = |s: f64| vec![1.5 * s, 0.3 * (2.0 * s).sin()];
    let samples = 4001;
    let uniform: Vec<f64> = (0..samples).map(|i| i as f64 / (samples - 1) as f64).collect();
    let direct = CausalCurve::new(uniform.clone(), uniform.iter().map(|&s| path(s)).collect()).unwrap();
    let warped = CausalCurve::new(uniform.clone(), uniform.iter().map(|&u| path(0.5 * (u + u * u))).collect()).unwrap();
    let (l1, l2) = (
        weighted_length(&direct, &model, 1.0).unwrap(),
        weighted_length(&warped, &model, 1.0).unwrap(),
    );
    check((l1 - l2).abs() <= 1e-8, || format!("reparameterization {l1} vs {l2}"))?;

    // partial-order axioms on random triples
    let flat = minkowski(1.0);
    let lattice = SpacetimeModel::conformal(Expr::parse("1 + 0*t").unwrap(), Complex64::from(1.0), figure_box())
        .unwrap()
        .with_settings(Settings {
            dp_time_steps: 101,
            dp_space_steps: 101,
            ..Settings::default()
        });
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut triples = 0;
    for (model, count) in [(&flat, 3000), (&lattice, 60)] {
        let tol = model.settings.dp_tolerance;
        for _ in 0..count {
            let (a, b) = random_pair(model, &mut rng).unwrap();
            let c = {
                let (_, c) = random_pair(model, &mut rng).unwrap();
                let mut point = b.point.clone();
                point[0] += rng.gen_range(0.0..(2.0 - point[0]));
                let reach = (point[0] - b.point[0]) * rng.gen_range(-1.0..1.0);
                point[1] = (point[1] + reach).clamp(-2.0, 2.0);
                if !is_causally_related(&b.point, &point, model).unwrap() {
                    continue;
                }
                MixedState::new(point, c.xi).unwrap()
            };
            let ab = decide(&a, &b, model).unwrap();
            let bc = decide(&b, &c, model).unwrap();
            let ac = decide(&a, &c, model).unwrap();
            check(decide(&a, &a, model).unwrap().related, || format!("not reflexive at {a:?}"))?;
            if ab.related && bc.related {
                // the composed slack may be lost twice within the band
                check(ac.related || ac.slack >= -2.0 * tol, || format!("transitivity: {a:?} {b:?} {c:?}"))?;
            }
            let ba = decide(&b, &a, model).unwrap();
            if ab.related && ba.related {
                check(a.point == b.point && a.xi == b.xi, || format!("antisymmetry: {a:?} {b:?}"))?;
            }
            triples += 1;
        }
    }

    // gradient causality of every sampled element
    let grid = Grid::new(vec![0.0, -2.0], vec![2.0, 2.0], vec![41, 41]).unwrap();
    let mut worst = f64::INFINITY;
    for e in elements {
        for x in grid.points() {
            let s = e.pair.sample(&x);
            for g in [s.grad_a, s.grad_b] {
                // future-directed causal covector: g₀ ≥ |g₁|
                worst = worst.min(g[0] - g[1].abs());
            }
        }
    }
    check(worst >= -1e-9, || format!("non-causal gradient, margin {worst:e}"))?;
    Ok(format!(
        "Clifford {clifford:.1e}, reparameterization {:.1e}, {triples} triples, {} elements causal",
        (l1 - l2).abs(),
        elements.len()
    ))
}

fn main() {
    let mut failures = 0;
    let mut report = |n: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {n:>2} {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {n:>2} {name}: {detail} [{secs:.1}s]");
            }
        }
    };
    report(1, "pure-state threshold", &mut pure_state_threshold);
    report(2, "future-cone surface", &mut future_surface);
    report(3, "two-dimensional witness certificate", &mut two_dimensional_certificate);
    report(4, "four-dimensional witness certificate", &mut four_dimensional_certificate);
    report(5, "spinor system", &mut spinor_system);
    report(6, "diagonal finite operator", &mut diagonal_finite_operator);
    report(7, "vector fluctuation no-op", &mut vector_fluctuation_noop);
    report(8, "scalar fluctuation threshold", &mut scalar_fluctuation_threshold);

    let model = minkowski(1.0);
    let rep = make_representation(2).unwrap();
    let start = Instant::now();
    let sampled = sample_causal_elements(&model, &rep, &OracleConfig::new(10_000, 2024));
    let sampling = start.elapsed().as_secs_f64();
    let (elements, discarded) = match sampled {
        Ok(r) => (r.elements, r.discarded.len()),
        Err(e) => {
            println!("FAIL  9 oracle consistency: {e}");
            println!("FAIL 10 property suites: no sampled elements");
            std::process::exit(1);
        }
    };
    report(9, "oracle consistency", &mut || {
        oracle_consistency(&elements, discarded).map(|d| format!("{d}; sampling {sampling:.1}s"))
    });
    report(10, "property suites", &mut || property_suites(&elements));
    if failures > 0 {
        std::process::exit(1);
    }
}
