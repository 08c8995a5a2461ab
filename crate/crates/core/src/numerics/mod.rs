//! Shared numeric substrate: adaptive ODE stepping, adaptive quadrature,
//! monotone root finding, log-space accumulation, distance metrics and the
//! seeded generator used by every simulator.

pub mod logspace;
pub mod metrics;
pub mod ode;
pub mod quad;
pub mod rng;
pub mod roots;

use thiserror::Error;

pub use logspace::{log_add_exp, log_sum_exp, normalize_log};
pub use metrics::{l1_distance, l1_distance_weighted, tv_distance};
pub use ode::{integrate_adaptive, OdeTrace, StepperConfig};
pub use quad::{quad_adaptive, quad_adaptive_with, QuadConfig};
pub use rng::RngStream;
pub use roots::find_root_monotone;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("step budget of {max_steps} exceeded at t = {t}")]
    StiffnessBudgetExceeded { max_steps: usize, t: f64 },
    #[error("quadrature tolerance not met: estimate {estimate}, error bound {error}")]
    ToleranceNotMet { estimate: f64, error: f64 },
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("grid mismatch: {left} vs {right} points")]
    GridMismatch { left: usize, right: usize },
    #[error("non-finite value encountered: {0}")]
    NonFinite(&'static str),
}
