//! Causal structure of two-sheeted space-times.
//!
//! States are pairs of a space-time point and an internal weight. The library
//! decides whether one state can causally influence another, computes future
//! cones, builds separating elements when it cannot, and cross-checks its own
//! decisions against randomly sampled causal elements.

pub mod causality;
pub mod clifford;
pub mod cone;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod io;
pub mod oracle;

pub use causality::{decide, decide_with, future_cone, CausalDecision, Surface, SurfaceRow};
pub use clifford::{make_representation, verify_representation, CMatrix, SpinRepresentation};
pub use cone::{is_causal_element, witness_element, CausalElementPair, ExprPair, WitnessElement};
pub use error::{Error, Result};
pub use expr::Expr;
pub use geometry::{CausalCurve, DomainBox, Grid, Mass, Metric, Method, MixedState, Settings, SpacetimeModel};
pub use oracle::{run_oracle, sample_causal_elements, OracleConfig, Verdict, VerdictKind};

/// Re-export so downstream crates agree on the complex type.
pub use num_complex as num;
