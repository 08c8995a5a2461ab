use super::{check, HillParams, ModelError, PMF_RENORMALIZE_TOL};
use crate::numerics::RngStream;

/// Production rates `λ_n`, `n = 0, 1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub enum RateSeq {
    Constant {
        rate: f64,
    },
    /// `basal + slope n`
    Linear {
        basal: f64,
        slope: f64,
    },
    Hill(HillParams),
    /// `max(0, basal + slope n)` up to `cutoff`, zero afterwards.
    Truncated {
        basal: f64,
        slope: f64,
        cutoff: usize,
    },
    /// Table of `λ_0, λ_1, ...`; the last entry persists beyond the table.
    Tabulated(Vec<f64>),
}

impl RateSeq {
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            RateSeq::Constant { rate } => check("rate", *rate, *rate >= 0.0, "must be >= 0"),
            RateSeq::Linear { basal, slope } => {
                check("basal", *basal, *basal >= 0.0, "must be >= 0")?;
                check("slope", *slope, *slope >= 0.0, "must be >= 0 (use the truncated form for decreasing rates)")
            }
            RateSeq::Hill(_) => Ok(()),
            RateSeq::Truncated { basal, slope, .. } => {
                check("basal", *basal, *basal >= 0.0, "must be >= 0")?;
                check("slope", *slope, slope.is_finite(), "must be finite")
            }
            RateSeq::Tabulated(v) => {
                if v.is_empty() {
                    return Err(ModelError::Malformed("tabulated rate table is empty"));
                }
                for &x in v {
                    check("rate table entry", x, x >= 0.0, "must be >= 0")?;
                }
                Ok(())
            }
        }
    }

    #[inline]
    pub fn eval(&self, n: usize) -> f64 {
        match self {
            RateSeq::Constant { rate } => *rate,
            RateSeq::Linear { basal, slope } => basal + slope * n as f64,
            RateSeq::Hill(h) => h.eval(n as f64),
            RateSeq::Truncated { basal, slope, cutoff } => {
                if n > *cutoff {
                    0.0
                } else {
                    (basal + slope * n as f64).max(0.0)
                }
            }
            RateSeq::Tabulated(v) => v[n.min(v.len() - 1)],
        }
    }
}

/// Degradation rates `γ_n` with `γ_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum DegradationSeq {
    /// `γ_n = rate n`
    LinearDecay { rate: f64 },
    /// Table of `γ_0 = 0, γ_1, ...`; the last entry persists beyond the table.
    Tabulated(Vec<f64>),
}

impl DegradationSeq {
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            DegradationSeq::LinearDecay { rate } => check("gamma", *rate, *rate > 0.0, "must be > 0"),
            DegradationSeq::Tabulated(v) => {
                if v.len() < 2 {
                    return Err(ModelError::Malformed("degradation table needs gamma_0 and at least gamma_1"));
                }
                check("gamma_0", v[0], v[0] == 0.0, "must be exactly 0")?;
                for &x in &v[1..] {
                    check("degradation table entry", x, x > 0.0, "must be > 0 for n >= 1")?;
                }
                Ok(())
            }
        }
    }

    #[inline]
    pub fn eval(&self, n: usize) -> f64 {
        match self {
            DegradationSeq::LinearDecay { rate } => rate * n as f64,
            DegradationSeq::Tabulated(v) => v[n.min(v.len() - 1)],
        }
    }

    pub fn linear_rate(&self) -> Option<f64> {
        match self {
            DegradationSeq::LinearDecay { rate } => Some(*rate),
            DegradationSeq::Tabulated(_) => None,
        }
    }
}

/// Finite burst-size table `h_1..h_K` with cached tail sums.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPmf {
    probs: Vec<f64>,
    // tails[l] = Σ_{j > l} h_j for l = 0..=K
    tails: Vec<f64>,
    cdf: Vec<f64>,
}

impl TabulatedPmf {
    /// Accepts `h_1..h_K`; renormalizes when the sum is within
    /// [`PMF_RENORMALIZE_TOL`] of one, rejects otherwise.
    pub fn new(raw: &[f64]) -> Result<Self, ModelError> {
        if raw.is_empty() {
            return Err(ModelError::Malformed("burst table is empty"));
        }
        for &h in raw {
            check("burst probability", h, h >= 0.0, "must be >= 0")?;
        }
        let sum: f64 = raw.iter().sum();
        if (sum - 1.0).abs() > PMF_RENORMALIZE_TOL {
            return Err(ModelError::BurstNotNormalized { sum, tol: PMF_RENORMALIZE_TOL });
        }
        let probs: Vec<f64> = raw.iter().map(|h| h / sum).collect();
        let k = probs.len();
        let mut tails = vec![0.0; k + 1];
        for l in (0..k).rev() {
            tails[l] = tails[l + 1] + probs[l];
        }
        let mut cdf = Vec::with_capacity(k);
        let mut acc = 0.0;
        for &p in &probs {
            acc += p;
            cdf.push(acc);
        }
        Ok(Self { probs, tails, cdf })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Burst-size law on `{1, 2, ...}`.
#[derive(Debug, Clone, PartialEq)]
pub enum BurstPmf {
    /// `h_k = (1-b) b^{k-1}`, `b ∈ (0,1)`.
    Geometric {
        b: f64,
    },
    Tabulated(TabulatedPmf),
}

impl BurstPmf {
    pub fn geometric(b: f64) -> Result<Self, ModelError> {
        check("b", b, b > 0.0 && b < 1.0, "geometric burst parameter must lie in (0, 1)")?;
        Ok(BurstPmf::Geometric { b })
    }

    pub fn tabulated(raw: &[f64]) -> Result<Self, ModelError> {
        Ok(BurstPmf::Tabulated(TabulatedPmf::new(raw)?))
    }

    /// Always-one-molecule bursts, `h_1 = 1`.
    pub fn degenerate() -> Self {
        BurstPmf::Tabulated(TabulatedPmf::new(&[1.0]).expect("valid"))
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            BurstPmf::Geometric { b } => {
                check("b", *b, *b > 0.0 && *b < 1.0, "geometric burst parameter must lie in (0, 1)")
            }
            BurstPmf::Tabulated(_) => Ok(()),
        }
    }

    /// `h_k`; zero for `k = 0`.
    pub fn prob(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        match self {
            BurstPmf::Geometric { b } => (1.0 - b) * b.powi((k - 1) as i32),
            BurstPmf::Tabulated(t) => t.probs.get(k - 1).copied().unwrap_or(0.0),
        }
    }

    /// Tail sum `h̄_l = Σ_{j > l} h_j`.
    pub fn tail(&self, l: usize) -> f64 {
        match self {
            BurstPmf::Geometric { b } => b.powi(l.min(i32::MAX as usize) as i32),
            BurstPmf::Tabulated(t) => t.tails.get(l).copied().unwrap_or(0.0),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            BurstPmf::Geometric { b } => 1.0 / (1.0 - b),
            BurstPmf::Tabulated(t) => t.probs.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum(),
        }
    }

    /// Largest burst with positive probability, `None` when unbounded.
    pub fn support_max(&self) -> Option<usize> {
        match self {
            BurstPmf::Geometric { .. } => None,
            BurstPmf::Tabulated(t) => Some(t.probs.len()),
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> u64 {
        match self {
            BurstPmf::Geometric { b } => rng.geometric(*b),
            BurstPmf::Tabulated(t) => rng.categorical(&t.cdf) as u64 + 1,
        }
    }
}

/// The discrete bursting model: rates `λ_n`, `γ_n` and burst pmf `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBurstModel {
    lambda: RateSeq,
    gamma: DegradationSeq,
    burst: BurstPmf,
}

impl DiscreteBurstModel {
    pub fn new(lambda: RateSeq, gamma: DegradationSeq, burst: BurstPmf) -> Result<Self, ModelError> {
        lambda.validate()?;
        gamma.validate()?;
        burst.validate()?;
        let l0 = lambda.eval(0);
        check("lambda_0", l0, l0 > 0.0, "production at zero copies must be > 0")?;
        Ok(Self { lambda, gamma, burst })
    }

    pub fn lambda(&self) -> &RateSeq {
        &self.lambda
    }
    pub fn gamma(&self) -> &DegradationSeq {
        &self.gamma
    }
    pub fn burst(&self) -> &BurstPmf {
        &self.burst
    }

    /// `(λ_n, γ_n)`.
    #[inline]
    pub fn rates(&self, n: usize) -> (f64, f64) {
        (self.lambda.eval(n), self.gamma.eval(n))
    }

    /// Total jump rate `λ_n + γ_n`.
    pub fn jump_rate(&self, n: usize) -> f64 {
        let (l, g) = self.rates(n);
        l + g
    }

    /// Probability that a jump out of `n` is a degradation step.
    pub fn degradation_prob(&self, n: usize) -> f64 {
        let (l, g) = self.rates(n);
        if l + g == 0.0 {
            0.0
        } else {
            g / (l + g)
        }
    }
}

/// `(λ_n, γ_n)` for a model.
pub fn eval_rates_discrete(model: &DiscreteBurstModel, n: usize) -> (f64, f64) {
    model.rates(n)
}
