//! Fixtures shared by the benchmarks.

use twosheet_core::geometry::{DomainBox, Mass, Metric, Settings};
use twosheet_core::num::Complex64;
use twosheet_core::{CausalCurve, Expr, SpacetimeModel};

pub fn unit_box() -> DomainBox {
    DomainBox::new(vec![0.0, -2.0], vec![2.0, 2.0]).expect("valid box")
}

pub fn flat() -> SpacetimeModel {
    SpacetimeModel::minkowski(2, Complex64::new(1.0, 0.0), unit_box()).expect("valid model")
}

/// Conformally flat model with a growing scalar field; never closed form.
pub fn curved(steps: usize) -> SpacetimeModel {
    let omega = Expr::parse("1 + 0.2*sin(t)*cos(x)").expect("valid expression");
    let mass = Mass::Field {
        re: Expr::parse("1 + t").expect("valid expression"),
        im: Expr::constant(0.0),
    };
    SpacetimeModel::new(2, Metric::Conformal2D { omega }, mass, unit_box())
        .expect("valid model")
        .with_settings(Settings {
            dp_time_steps: steps,
            dp_space_steps: steps,
            ..Settings::default()
        })
}

pub fn flat_4d() -> SpacetimeModel {
    let domain = DomainBox::new(vec![0.0, -1.0, -1.0, -1.0], vec![2.0, 1.0, 1.0, 1.0]).expect("valid box");
    SpacetimeModel::minkowski(4, Complex64::new(1.0, 0.0), domain).expect("valid model")
}

/// Short timelike curve along which pure states are separated.
pub fn short_curve(dim: usize) -> CausalCurve {
    let mut end = vec![0.0; dim];
    end[0] = 0.3;
    end[1] = 0.05;
    CausalCurve::straight(&vec![0.0; dim], &end, 201).expect("valid curve")
}
