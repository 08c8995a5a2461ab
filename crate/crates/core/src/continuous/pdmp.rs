use super::{ContinuousError, Potential};
use crate::models::{ContinuousBurstModel, DegradationFn};
use crate::numerics::RngStream;
use crate::par::{map_indexed, Exec};

/// One jump of the post-jump recurrence
/// `Y_k = Q⁻¹(Q(Y_{k-1}) + ε_k) + e_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdmpJump {
    pub k: usize,
    pub t: f64,
    pub y_pre: f64,
    pub y_post: f64,
    pub eps: f64,
    pub burst: f64,
}

/// Time-weighted occupancy on uniform bins `[lo + i w, lo + (i+1) w)`,
/// accumulated exactly along the deterministic flow.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub width: f64,
    pub time: Vec<f64>,
    pub below: f64,
    pub above: f64,
    pub total: f64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self, ContinuousError> {
        if !(hi > lo && lo >= 0.0) || bins == 0 {
            return Err(ContinuousError::InvalidInput(format!("bad histogram [{lo}, {hi}) x {bins}")));
        }
        Ok(Self { lo, width: (hi - lo) / bins as f64, time: vec![0.0; bins], below: 0.0, above: 0.0, total: 0.0 })
    }

    pub fn hi(&self) -> f64 {
        self.lo + self.width * self.time.len() as f64
    }

    /// Adds the time the flow spends going from `from` down to `to`.
    pub fn add_flow(&mut self, gamma: &DegradationFn, from: f64, to: f64) {
        let (lo, hi) = (self.lo, self.hi());
        let span = |a: f64, b: f64| {
            let top = b.min(from);
            let bottom = a.max(to);
            if top > bottom {
                gamma.transit_time(top, bottom)
            } else {
                0.0
            }
        };
        if to < lo {
            self.below += span(0.0, lo);
        }
        if from > hi {
            self.above += span(hi, f64::INFINITY);
        }
        let n = self.time.len();
        let first = (((to - lo) / self.width).floor().max(0.0) as usize).min(n);
        let last = (((from - lo) / self.width).floor().max(0.0) as usize).min(n - 1);
        if from > lo {
            for i in first..=last {
                let a = lo + i as f64 * self.width;
                self.time[i] += span(a, a + self.width);
            }
        }
        self.total += gamma.transit_time(from, to);
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.time.iter_mut().zip(&other.time) {
            *a += b;
        }
        self.below += other.below;
        self.above += other.above;
        self.total += other.total;
    }

    /// Fraction of time in each bin.
    pub fn masses(&self) -> Vec<f64> {
        self.time.iter().map(|t| t / self.total).collect()
    }

    /// Fraction of time outside `[lo, hi)`.
    pub fn outside(&self) -> f64 {
        (self.below + self.above) / self.total
    }

    /// Bin densities (mass / width).
    pub fn densities(&self) -> Vec<f64> {
        self.masses().into_iter().map(|m| m / self.width).collect()
    }

    /// L1 distance between the occupancy law and a reference law with CDF
    /// `cdf`, over the bins plus the outside mass.
    pub fn l1_against(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let mut l1 = 0.0;
        let mut inside = 0.0;
        for (i, m) in self.masses().iter().enumerate() {
            let a = self.lo + i as f64 * self.width;
            let p = cdf(a + self.width) - cdf(a);
            inside += p;
            l1 += (m - p).abs();
        }
        l1 + (self.outside() - (1.0 - inside)).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdmpRun {
    pub jumps: Vec<PdmpJump>,
    pub histogram: Option<Histogram>,
    pub total_time: f64,
    pub final_state: f64,
    pub jumps_done: usize,
    /// Set when `Q(0) < ∞` and a draw exceeded the remaining potential:
    /// no further jump ever happens.
    pub no_further_jumps: bool,
}

/// Simulates `n_jumps` jumps from `y0`, optionally recording the path and
/// a time-weighted histogram.
pub fn simulate_pdmp(
    model: &ContinuousBurstModel,
    y0: f64,
    n_jumps: usize,
    rng: &mut RngStream,
    record: bool,
    histogram: Option<Histogram>,
) -> Result<PdmpRun, ContinuousError> {
    if !(y0 > 0.0) || n_jumps == 0 {
        return Err(ContinuousError::InvalidInput("need y0 > 0 and n_jumps >= 1".into()));
    }
    let pot = Potential::new(model);
    let gamma = model.gamma();
    let q0 = pot.q_zero();
    let mut hist = histogram;
    let mut jumps = Vec::with_capacity(if record { n_jumps } else { 0 });
    let mut y = y0;
    let mut t = 0.0;
    let mut done = 0;
    let mut no_further_jumps = false;
    for k in 1..=n_jumps {
        let eps = rng.exp1();
        let level = pot.q(y) + eps;
        if q0.is_some_and(|q0| level >= q0) {
            no_further_jumps = true;
            break;
        }
        let y_pre = pot.inverse(level)?;
        if let Some(h) = hist.as_mut() {
            h.add_flow(gamma, y, y_pre);
        }
        t += gamma.transit_time(y, y_pre);
        let burst = model.burst().sample(y_pre, rng);
        let y_post = y_pre + burst;
        if record {
            jumps.push(PdmpJump { k, t, y_pre, y_post, eps, burst });
        }
        y = y_post;
        done = k;
    }
    Ok(PdmpRun { jumps, histogram: hist, total_time: t, final_state: y, jumps_done: done, no_further_jumps })
}

/// Pools the histograms of independent replicas; replica `r` uses split `r`.
pub fn simulate_pdmp_replicas(
    model: &ContinuousBurstModel,
    y0: f64,
    n_jumps: usize,
    seed: u64,
    replicas: usize,
    histogram: &Histogram,
    exec: Exec,
) -> Result<Histogram, ContinuousError> {
    let runs = map_indexed(exec, replicas, |r| {
        let mut rng = RngStream::new(seed, r as u64);
        simulate_pdmp(model, y0, n_jumps, &mut rng, false, Some(histogram.clone()))
    });
    let mut total = histogram.clone();
    for run in runs {
        total.merge(run?.histogram.as_ref().unwrap());
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BurstKernel, RateFn};

    fn model(rate: f64) -> ContinuousBurstModel {
        ContinuousBurstModel::new(
            RateFn::Constant { rate },
            DegradationFn::LinearDecay { rate: 1.0 },
            BurstKernel::Exponential { mean: 1.0 },
        )
        .unwrap()
    }

    #[test]
    fn recurrence_step() {
        // φ = 1, γ = x: Q⁻¹(Q(y) + ε) = y e^{-ε}
        let pot = Potential::new(&model(1.0));
        let y_pre = pot.inverse(pot.q(1.0) + 2f64.ln()).unwrap();
        assert!((y_pre + 0.3 - 0.8).abs() < 1e-15);
    }

    #[test]
    fn path_is_consistent() {
        let m = model(2.0);
        let run = simulate_pdmp(&m, 1.0, 500, &mut RngStream::new(1, 0), true, None).unwrap();
        let mut prev = (0.0, 1.0);
        for j in &run.jumps {
            assert!(j.y_pre <= prev.1 && j.y_post > j.y_pre);
            assert!((j.y_pre - prev.1 * (-j.eps / 2.0).exp()).abs() < 1e-12 * prev.1);
            assert!((j.t - prev.0 - (prev.1 / j.y_pre).ln()).abs() < 1e-12 * (1.0 + j.t));
            prev = (j.t, j.y_post);
        }
        let again = simulate_pdmp(&m, 1.0, 500, &mut RngStream::new(1, 0), true, None).unwrap();
        assert_eq!(run, again);
    }

    #[test]
    fn exposure_is_exact() {
        let g = DegradationFn::LinearDecay { rate: 2.0 };
        let mut h = Histogram::new(0.0, 4.0, 4).unwrap();
        h.add_flow(&g, 5.0, 0.5);
        assert!((h.above - (5.0f64 / 4.0).ln() / 2.0).abs() < 1e-15);
        assert!((h.time[0] - 2f64.ln() / 2.0).abs() < 1e-15);
        assert!((h.time[2] - 1.5f64.ln() / 2.0).abs() < 1e-15);
        let sum: f64 = h.time.iter().sum::<f64>() + h.above + h.below;
        assert!((sum - h.total).abs() < 1e-14);
    }

    #[test]
    fn histogram_approaches_gamma_law() {
        let m = model(2.0);
        let cdf = |x: f64| 1.0 - (1.0 + x) * (-x).exp();
        let h0 = Histogram::new(0.0, 10.0, 40).unwrap();
        let small = simulate_pdmp(&m, 1.0, 10_000, &mut RngStream::new(3, 0), false, Some(h0.clone())).unwrap();
        let big = simulate_pdmp(&m, 1.0, 100_000, &mut RngStream::new(3, 0), false, Some(h0)).unwrap();
        let (a, b) = (small.histogram.unwrap().l1_against(cdf), big.histogram.unwrap().l1_against(cdf));
        assert!(b < a && b < 0.05, "{a} {b}");
    }
}
