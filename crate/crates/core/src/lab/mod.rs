//! Numerical laboratory for the large-deviation statements: scaling
//! regimes, exact event probabilities, rate curves, cumulant and LLN tables,
//! and sampler goodness-of-fit.

pub mod continuity;
pub mod curve;
pub mod event;
pub mod gof;
pub mod regime;

pub use curve::{
    dirichlet_rate_curve, fit_line, geometric_grid, lln_table, mgf_limit_curve, rate_curve,
    ConvergenceRow, ConvergenceTable, ThetaOfK,
};
pub use event::{event_log_prob, gem_log_density, EventSpec, KnScale};
pub use gof::{gof_validate, GofReport, GofTarget};
pub use regime::{speed, Coupling, ScalingRegime, SpeedKind};
