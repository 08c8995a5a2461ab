use super::{stationary_pmf_general, DiscreteError, Pmf};
use crate::models::{BurstPmf, DiscreteBurstModel};
use crate::numerics::{integrate_adaptive, l1_distance, StepperConfig};

/// Right-hand side of the master equation truncated to `{0, ..., N}`.
///
/// Bursts that would overshoot `N` land in `N`, so the columns of the
/// truncated generator sum to zero and mass is conserved exactly.
pub fn master_rhs_truncated(model: &DiscreteBurstModel, p: &[f64], out: &mut [f64]) {
    let n_max = p.len() - 1;
    let lam: Vec<f64> = (0..=n_max).map(|n| model.lambda().eval(n)).collect();
    let gam: Vec<f64> = (0..=n_max).map(|n| model.gamma().eval(n)).collect();
    rhs_with(model.burst(), &lam, &gam, p, out);
}

fn rhs_with(burst: &BurstPmf, lam: &[f64], gam: &[f64], p: &[f64], out: &mut [f64]) {
    let n_max = p.len() - 1;
    for n in 0..n_max {
        out[n] = -(lam[n] + gam[n]) * p[n] + gam[n + 1] * p[n + 1];
    }
    out[n_max] = -gam[n_max] * p[n_max];
    match burst {
        BurstPmf::Geometric { b } => {
            // g_n = Σ_{k<n} b^{n-1-k} λ_k p_k
            let mut g = 0.0;
            for n in 1..=n_max {
                g = b * g + lam[n - 1] * p[n - 1];
                out[n] += if n < n_max { (1.0 - b) * g } else { g };
            }
        }
        _ => {
            let kmax = burst.support_max().unwrap_or(n_max);
            for k in 0..n_max {
                let flux = lam[k] * p[k];
                if flux == 0.0 {
                    continue;
                }
                for j in 1..=kmax.min(n_max - k - 1) {
                    out[k + j] += burst.prob(j) * flux;
                }
                out[n_max] += burst.tail(n_max - k - 1) * flux;
            }
        }
    }
}

/// Snapshots of the truncated evolution with the L1 distance to the
/// stationary pmf at each time.
#[derive(Debug, Clone)]
pub struct MasterTrace {
    pub times: Vec<f64>,
    pub pmfs: Vec<Pmf>,
    pub l1_to_stationary: Vec<f64>,
    pub stationary: Pmf,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

/// Integrates the truncated master equation from `v0` with snapshots at
/// `snapshots` evenly spaced times in `[0, t_end]`.
pub fn evolve_master(
    model: &DiscreteBurstModel,
    v0: &Pmf,
    t_end: f64,
    snapshots: usize,
    cfg: &StepperConfig,
) -> Result<MasterTrace, DiscreteError> {
    if !(t_end > 0.0) || snapshots < 2 {
        return Err(DiscreteError::InvalidInput("need t_end > 0 and at least 2 snapshots".into()));
    }
    let n_max = v0.n_max();
    let stationary = stationary_pmf_general(model, n_max)?;
    let lam: Vec<f64> = (0..=n_max).map(|n| model.lambda().eval(n)).collect();
    let gam: Vec<f64> = (0..=n_max).map(|n| model.gamma().eval(n)).collect();
    let burst = model.burst();
    let times: Vec<f64> = (0..snapshots).map(|i| t_end * i as f64 / (snapshots - 1) as f64).collect();
    let trace = integrate_adaptive(|_, p, out| rhs_with(burst, &lam, &gam, p, out), v0.values(), &times, cfg)?;
    let mut pmfs = Vec::with_capacity(snapshots);
    let mut l1 = Vec::with_capacity(snapshots);
    for state in trace.states {
        l1.push(l1_distance(&state, stationary.values())?);
        pmfs.push(Pmf::from_raw(state));
    }
    Ok(MasterTrace {
        times: trace.times,
        pmfs,
        l1_to_stationary: l1,
        stationary,
        accepted_steps: trace.accepted_steps,
        rejected_steps: trace.rejected_steps,
    })
}
