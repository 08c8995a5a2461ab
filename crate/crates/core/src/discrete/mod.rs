//! Stationary laws, truncated master-equation evolution, jump-chain
//! simulation and mode analysis for the discrete bursting model.

mod families;
mod master;
mod modes;
mod pmf;
mod simulate;
mod stationary;

pub use families::{family_pmf, named_family_params, FamilyParams};
pub use master::{evolve_master, master_rhs_truncated, MasterTrace};
pub use modes::{count_modes_discrete, ModeReportDiscrete};
pub use pmf::Pmf;
pub use simulate::{simulate_jump_chain, simulate_replicas, JumpChainRun, ReplicaSummary};
pub use stationary::{
    mean_identity_residual, stationary_pmf_general, stationary_pmf_general_with, stationary_pmf_geometric,
    stationary_pmf_geometric_with, DEFAULT_TAIL_TOL,
};

use crate::numerics::NumericsError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiscreteError {
    #[error(
        "tail mass {mass:e} in the top 5% of indices exceeds {tol:e}; n_max too small or the law is not normalizable"
    )]
    TailNotConverged { mass: f64, tol: f64 },
    #[error("not normalizable: p = {p} >= 1")]
    NotNormalizable { p: f64 },
    #[error("{0}")]
    Unsupported(&'static str),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
