use super::{DiscreteError, Pmf};
use crate::models::{BurstPmf, DiscreteBurstModel};

/// Largest mass tolerated in the top 5% of indices.
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;

// Rescale the running recurrence once values pass e^600.
const RESCALE_NATS: f64 = 600.0;

/// Stationary pmf from the tail-sum recurrence
/// `γ_{n+1} p_{n+1} = Σ_{k<=n} h̄_{n-k} λ_k p_k`, valid for any burst pmf.
pub fn stationary_pmf_general(model: &DiscreteBurstModel, n_max: usize) -> Result<Pmf, DiscreteError> {
    stationary_pmf_general_with(model, n_max, DEFAULT_TAIL_TOL)
}

pub fn stationary_pmf_general_with(
    model: &DiscreteBurstModel,
    n_max: usize,
    tail_tol: f64,
) -> Result<Pmf, DiscreteError> {
    check_n_max(n_max)?;
    let burst = model.burst();
    let support = burst.support_max();
    let lambda: Vec<f64> = (0..=n_max).map(|n| model.lambda().eval(n)).collect();
    let tails: Vec<f64> = (0..=n_max).map(|l| burst.tail(l)).collect();

    // scaled[k] * e^{shift} = p_k with p_0 = 1; `lp[k] = λ_k * scaled[k]`
    let mut scaled = vec![0.0; n_max + 1];
    let mut lp = vec![0.0; n_max + 1];
    let mut shift = 0.0;
    scaled[0] = 1.0;
    lp[0] = lambda[0];
    for n in 0..n_max {
        let lo = match support {
            Some(k) => (n + 1).saturating_sub(k),
            None => 0,
        };
        // h̄_{n-k} vanishes once n - k reaches the burst support
        let mut acc = 0.0;
        for k in lo..=n {
            acc += tails[n - k] * lp[k];
        }
        let next = acc / model.gamma().eval(n + 1);
        scaled[n + 1] = next;
        lp[n + 1] = lambda[n + 1] * next;
        if next > RESCALE_NATS.exp() {
            let f = (-RESCALE_NATS).exp();
            scaled[..=n + 1].iter_mut().for_each(|v| *v *= f);
            lp[..=n + 1].iter_mut().for_each(|v| *v *= f);
            shift += RESCALE_NATS;
        }
    }
    let logs: Vec<f64> = scaled.iter().map(|v| v.ln() + shift).collect();
    finish(logs, tail_tol)
}

/// Stationary pmf for geometric bursts via the ratio
/// `p_{n+1} / p_n = (λ_n + b γ_n) / γ_{n+1}`, accumulated in log space.
pub fn stationary_pmf_geometric(model: &DiscreteBurstModel, n_max: usize) -> Result<Pmf, DiscreteError> {
    stationary_pmf_geometric_with(model, n_max, DEFAULT_TAIL_TOL)
}

pub fn stationary_pmf_geometric_with(
    model: &DiscreteBurstModel,
    n_max: usize,
    tail_tol: f64,
) -> Result<Pmf, DiscreteError> {
    check_n_max(n_max)?;
    let BurstPmf::Geometric { b } = *model.burst() else {
        return Err(DiscreteError::Unsupported("ratio recurrence needs a geometric burst"));
    };
    let mut logs = Vec::with_capacity(n_max + 1);
    let mut acc = 0.0;
    logs.push(0.0);
    for n in 0..n_max {
        let (l, g) = model.rates(n);
        acc += (l + b * g).ln() - model.gamma().eval(n + 1).ln();
        logs.push(acc);
    }
    finish(logs, tail_tol)
}

fn check_n_max(n_max: usize) -> Result<(), DiscreteError> {
    if n_max < 1 {
        return Err(DiscreteError::InvalidInput("n_max must be >= 1".into()));
    }
    Ok(())
}

fn finish(logs: Vec<f64>, tail_tol: f64) -> Result<Pmf, DiscreteError> {
    if logs.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
        return Err(DiscreteError::InvalidInput("recurrence produced non-finite values".into()));
    }
    let pmf = Pmf::from_log_weights(logs);
    let n = pmf.values().len();
    let start = n - (n / 20).max(1);
    let mass: f64 = pmf.values()[start..].iter().sum();
    if !(mass <= tail_tol) {
        return Err(DiscreteError::TailNotConverged { mass, tol: tail_tol });
    }
    Ok(pmf)
}

/// `|Σ_n γ_{n+1} p_{n+1} - E(h) Σ_k λ_k p_k|` over the truncated support.
pub fn mean_identity_residual(model: &DiscreteBurstModel, pmf: &Pmf) -> f64 {
    let p = pmf.values();
    let lhs: f64 = (1..p.len()).map(|n| model.gamma().eval(n) * p[n]).sum();
    let flux: f64 = p.iter().enumerate().map(|(k, pk)| model.lambda().eval(k) * pk).sum();
    (lhs - model.burst().mean() * flux).abs()
}
