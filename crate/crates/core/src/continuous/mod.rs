//! The piecewise-deterministic (continuous) bursting model: potential,
//! analytic stationary densities, the post-jump transition operator, PDMP
//! simulation, inverse rate estimation, modes and the ergodicity margin.

mod density;
mod ergodicity;
mod grid;
mod inverse;
mod kernel;
mod modes;
mod pdmp;
mod potential;

pub use density::{
    auto_grid, ln_unnormalized_density, stationary_cdf, stationary_density, stationary_density_exponential,
    stationary_density_separable,
};
pub use ergodicity::{ergodicity_margin, ergodicity_margin_with, ergodicity_scan, MarginProbe};
pub use grid::{Grid, GridDensity};
pub use inverse::{
    hazard_from_m1, phi_from_density, phi_from_grid_density, phi_from_log_density, GammaDensity, HillSolutionDensity,
    LogDensity,
};
pub use kernel::{
    density_from_fixed_point, kernel_fixed_point, kernel_matrix, kernel_matrix_generic, FixedPoint, FixedPointReport,
    KernelGrid,
};
pub use modes::{count_modes_continuous, BoundaryBehavior, ModeKind, ModeReportContinuous, DEFAULT_PROBES};
pub use pdmp::{simulate_pdmp, simulate_pdmp_replicas, Histogram, PdmpJump, PdmpRun};

pub use potential::Potential;

use crate::numerics::NumericsError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ContinuousError {
    #[error("x = {x} is outside the domain x > 0")]
    DomainError { x: f64 },
    #[error("level {r} is below inf Q = {q_inf}")]
    RangeError { r: f64, q_inf: f64 },
    #[error("stationary density is not integrable: {0}")]
    NotIntegrable(String),
    #[error("grid too narrow: {mass:e} of the mass from x = {source_x} leaves the grid")]
    GridTooNarrow { source_x: f64, mass: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("numerical blowup: {0}")]
    NumericalBlowup(String),
    #[error("root window too small: f({x_hi}) = {f} > 0, the density still increases at the edge")]
    WindowTooSmall { x_hi: f64, f: f64 },
    #[error("{0}")]
    Unsupported(&'static str),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
