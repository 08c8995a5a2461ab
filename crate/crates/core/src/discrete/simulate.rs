use super::{DiscreteError, Pmf};
use crate::models::DiscreteBurstModel;
use crate::numerics::RngStream;
use crate::par::{map_indexed, Exec};

/// Outcome of one jump-chain run.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpChainRun {
    /// `(T_k, ξ_k)` for every jump, when recording was requested.
    pub path: Vec<(f64, u64)>,
    /// Time spent in each state (index = copy number).
    pub occupancy: Vec<f64>,
    pub total_time: f64,
    pub jumps: usize,
    pub final_state: u64,
    /// State where the total jump rate vanished, if the chain got stuck.
    pub absorbed: Option<u64>,
}

impl JumpChainRun {
    /// Time-weighted occupancy as a pmf on `{0, ..., n_max}`; states above
    /// `n_max` are lumped into `n_max`.
    pub fn empirical(&self, n_max: usize) -> Pmf {
        lumped(&self.occupancy, self.total_time, n_max)
    }
}

fn lumped(occ: &[f64], total: f64, n_max: usize) -> Pmf {
    let mut v = vec![0.0; n_max + 1];
    for (n, t) in occ.iter().enumerate() {
        v[n.min(n_max)] += t / total;
    }
    Pmf::from_raw(v)
}

/// Simulates the minimal jump chain from `n0` for `n_jumps` jumps.
///
/// Holding times are `ε_k / (λ_n + γ_n)` with unit exponentials `ε_k`; a
/// jump is a degradation with probability `γ_n / (λ_n + γ_n)` and otherwise
/// adds a burst drawn from `h`.
pub fn simulate_jump_chain(
    model: &DiscreteBurstModel,
    n0: u64,
    n_jumps: usize,
    rng: &mut RngStream,
    record: bool,
) -> Result<JumpChainRun, DiscreteError> {
    if n_jumps == 0 {
        return Err(DiscreteError::InvalidInput("n_jumps must be >= 1".into()));
    }
    let mut n = n0;
    let mut t = 0.0;
    let mut occupancy = vec![0.0; 64];
    let mut path = Vec::with_capacity(if record { n_jumps } else { 0 });
    let mut absorbed = None;
    let mut jumps = 0;
    while jumps < n_jumps {
        let (lam, gam) = model.rates(n as usize);
        let rate = lam + gam;
        if rate <= 0.0 {
            absorbed = Some(n);
            break;
        }
        let hold = rng.exp1() / rate;
        let idx = n as usize;
        if idx >= occupancy.len() {
            occupancy.resize((idx + 1).next_power_of_two(), 0.0);
        }
        occupancy[idx] += hold;
        t += hold;
        if rng.uniform_open() <= gam / rate {
            n -= 1;
        } else {
            n += model.burst().sample(rng);
        }
        jumps += 1;
        if record {
            path.push((t, n));
        }
    }
    if jumps == 0 {
        return Err(DiscreteError::InvalidInput(format!("no jump possible from state {n0}")));
    }
    let last = occupancy.iter().rposition(|v| *v > 0.0).unwrap_or(0);
    occupancy.truncate(last + 1);
    Ok(JumpChainRun { path, occupancy, total_time: t, jumps, final_state: n, absorbed })
}

/// Pooled occupancy of independent replicas, replica `r` drawing from split `r`
/// of `seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaSummary {
    pub occupancy: Vec<f64>,
    pub total_time: f64,
    pub absorbed: usize,
}

impl ReplicaSummary {
    pub fn empirical(&self, n_max: usize) -> Pmf {
        lumped(&self.occupancy, self.total_time, n_max)
    }
}

pub fn simulate_replicas(
    model: &DiscreteBurstModel,
    n0: u64,
    n_jumps: usize,
    seed: u64,
    replicas: usize,
    exec: Exec,
) -> Result<ReplicaSummary, DiscreteError> {
    let runs = map_indexed(exec, replicas, |r| {
        let mut rng = RngStream::new(seed, r as u64);
        simulate_jump_chain(model, n0, n_jumps, &mut rng, false)
    });
    let mut occupancy: Vec<f64> = Vec::new();
    let mut total_time = 0.0;
    let mut absorbed = 0;
    for run in runs {
        let run = run?;
        if occupancy.len() < run.occupancy.len() {
            occupancy.resize(run.occupancy.len(), 0.0);
        }
        for (o, v) in occupancy.iter_mut().zip(&run.occupancy) {
            *o += v;
        }
        total_time += run.total_time;
        absorbed += run.absorbed.is_some() as usize;
    }
    Ok(ReplicaSummary { occupancy, total_time, absorbed })
}
