use super::{check, HillParams, ModelError, KERNEL_ROW_RENORMALIZE_TOL};
use crate::numerics::{quad_adaptive, RngStream};

/// Production rate `φ(x)` on `x > 0`, with analytic derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateFn {
    Constant {
        rate: f64,
    },
    /// `basal + slope x`
    Linear {
        basal: f64,
        slope: f64,
    },
    /// `basal + slope x + curvature x²`
    Quadratic {
        basal: f64,
        slope: f64,
        curvature: f64,
    },
    Hill(HillParams),
}

impl RateFn {
    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            RateFn::Constant { rate } => check("rate", rate, rate >= 0.0, "must be >= 0"),
            RateFn::Linear { basal, slope } => {
                check("basal", basal, basal >= 0.0, "must be >= 0")?;
                check("slope", slope, slope >= 0.0, "must be >= 0")
            }
            RateFn::Quadratic { basal, slope, curvature } => {
                check("basal", basal, basal >= 0.0, "must be >= 0")?;
                check("slope", slope, slope >= 0.0, "must be >= 0")?;
                check("curvature", curvature, curvature >= 0.0, "must be >= 0")
            }
            RateFn::Hill(_) => Ok(()),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            RateFn::Constant { rate } => rate,
            RateFn::Linear { basal, slope } => basal + slope * x,
            RateFn::Quadratic { basal, slope, curvature } => basal + x * (slope + curvature * x),
            RateFn::Hill(h) => h.eval(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            RateFn::Constant { .. } => 0.0,
            RateFn::Linear { slope, .. } => slope,
            RateFn::Quadratic { slope, curvature, .. } => slope + 2.0 * curvature * x,
            RateFn::Hill(h) => h.derivative(x),
        }
    }

    /// `φ(0+)`.
    pub fn at_origin(&self) -> f64 {
        self.eval(0.0)
    }
}

/// Degradation rate `γ(x)`. Only linear decay is built in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DegradationFn {
    /// `γ(x) = rate x`
    LinearDecay { rate: f64 },
}

impl DegradationFn {
    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            DegradationFn::LinearDecay { rate } => check("gamma", rate, rate > 0.0, "must be > 0"),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            DegradationFn::LinearDecay { rate } => rate * x,
        }
    }

    #[inline]
    pub fn derivative(&self, _x: f64) -> f64 {
        match *self {
            DegradationFn::LinearDecay { rate } => rate,
        }
    }

    pub fn rate(&self) -> f64 {
        match *self {
            DegradationFn::LinearDecay { rate } => rate,
        }
    }

    /// Flow `π_t x` of `x' = -γ(x)`.
    pub fn flow(&self, x: f64, t: f64) -> f64 {
        match *self {
            DegradationFn::LinearDecay { rate } => x * (-rate * t).exp(),
        }
    }

    /// Time for the flow to carry `from` down to `to` (`to <= from`).
    pub fn transit_time(&self, from: f64, to: f64) -> f64 {
        match *self {
            DegradationFn::LinearDecay { rate } => (from / to).ln() / rate,
        }
    }
}

/// Survival-type function `ν` generating a separable burst kernel
/// `h(x, y) = -ν'(x + y) / ν(y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NuFn {
    /// `(alpha + x)^(-beta)`
    PowerTail { alpha: f64, beta: f64 },
    /// `exp(-(alpha x + beta x²))`; `beta = 0` recovers exponential bursts
    /// with mean `1/alpha`.
    GaussianExp { alpha: f64, beta: f64 },
    /// `(alpha - x)^beta` on `x < alpha`, zero beyond.
    FiniteSupport { alpha: f64, beta: f64 },
}

impl NuFn {
    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            NuFn::PowerTail { alpha, beta } | NuFn::FiniteSupport { alpha, beta } => {
                check("alpha", alpha, alpha > 0.0, "must be > 0")?;
                check("beta", beta, beta > 0.0, "must be > 0")
            }
            NuFn::GaussianExp { alpha, beta } => {
                check("alpha", alpha, alpha >= 0.0, "must be >= 0")?;
                check("beta", beta, beta >= 0.0, "must be >= 0")?;
                check("alpha + beta", alpha + beta, alpha + beta > 0.0, "nu must decay to zero")
            }
        }
    }

    /// Right end of the support (`+inf` unless finite-support).
    pub fn support_end(&self) -> f64 {
        match *self {
            NuFn::FiniteSupport { alpha, .. } => alpha,
            _ => f64::INFINITY,
        }
    }

    /// `ln ν(x)`; `-inf` outside the support.
    #[inline]
    pub fn ln_nu(&self, x: f64) -> f64 {
        match *self {
            NuFn::PowerTail { alpha, beta } => -beta * (alpha + x).ln(),
            NuFn::GaussianExp { alpha, beta } => -(alpha * x + beta * x * x),
            NuFn::FiniteSupport { alpha, beta } => {
                if x < alpha {
                    beta * (alpha - x).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn nu(&self, x: f64) -> f64 {
        self.ln_nu(x).exp()
    }

    /// `-ν'(x) / ν(x)`.
    #[inline]
    pub fn hazard(&self, x: f64) -> f64 {
        match *self {
            NuFn::PowerTail { alpha, beta } => beta / (alpha + x),
            NuFn::GaussianExp { alpha, beta } => alpha + 2.0 * beta * x,
            NuFn::FiniteSupport { alpha, beta } => {
                if x < alpha {
                    beta / (alpha - x)
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// `ν'(x)`.
    pub fn derivative(&self, x: f64) -> f64 {
        let v = self.nu(x);
        if v == 0.0 {
            0.0
        } else {
            -self.hazard(x) * v
        }
    }

    /// Smallest `x >= 0` with `ln ν(x) = level` (`level <= ln ν(0)`).
    pub fn inverse_ln(&self, level: f64) -> f64 {
        match *self {
            NuFn::PowerTail { alpha, beta } => ((-level / beta).exp() - alpha).max(0.0),
            NuFn::GaussianExp { alpha, beta } => {
                let c = -level;
                if beta == 0.0 {
                    (c / alpha).max(0.0)
                } else {
                    // beta x² + alpha x - c = 0, stable positive root
                    let disc = (alpha * alpha + 4.0 * beta * c).max(0.0);
                    (2.0 * c / (alpha + disc.sqrt())).max(0.0)
                }
            }
            NuFn::FiniteSupport { alpha, beta } => (alpha - (level / beta).exp()).clamp(0.0, alpha),
        }
    }

    /// Mean residual size `∫_0^∞ ν(x + y) dx / ν(y)`, the mean burst given
    /// pre-jump level `y`.
    pub fn mean_residual(&self, y: f64) -> f64 {
        match *self {
            NuFn::PowerTail { alpha, beta } => {
                if beta > 1.0 {
                    (alpha + y) / (beta - 1.0)
                } else {
                    f64::INFINITY
                }
            }
            NuFn::GaussianExp { alpha, beta } => {
                if beta == 0.0 {
                    return 1.0 / alpha;
                }
                let base = self.ln_nu(y);
                quad_adaptive(|s| (self.ln_nu(y + s) - base).exp(), 0.0, f64::INFINITY, 1e-13).unwrap_or(f64::NAN)
            }
            NuFn::FiniteSupport { alpha, beta } => ((alpha - y) / (beta + 1.0)).max(0.0),
        }
    }
}

/// Burst kernel tabulated on an `x` grid, piecewise linear in `x`, with one
/// row per `y` band `[y_breaks[r], y_breaks[r+1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedKernel {
    x: Vec<f64>,
    y_breaks: Vec<f64>,
    rows: Vec<Vec<f64>>,
    // cumulative trapezoid mass per row at each x knot
    cum: Vec<Vec<f64>>,
}

impl TabulatedKernel {
    pub fn new(x: Vec<f64>, y_breaks: Vec<f64>, rows: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        if x.len() < 2 || x[0] != 0.0 || x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ModelError::Malformed("kernel x grid must start at 0 and increase strictly"));
        }
        if y_breaks.is_empty() || y_breaks[0] != 0.0 || y_breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ModelError::Malformed("kernel y breaks must start at 0 and increase strictly"));
        }
        if rows.len() != y_breaks.len() || rows.iter().any(|r| r.len() != x.len()) {
            return Err(ModelError::Malformed("kernel rows must match the x grid and y breaks"));
        }
        let mut rows = rows;
        let mut cum = Vec::with_capacity(rows.len());
        for (ri, row) in rows.iter_mut().enumerate() {
            if row.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(ModelError::Malformed("kernel values must be finite and >= 0"));
            }
            let mass = trapezoid_cumulative(&x, row).last().copied().unwrap_or(0.0);
            if (mass - 1.0).abs() > KERNEL_ROW_RENORMALIZE_TOL {
                return Err(ModelError::KernelRowNotNormalized { row: ri, mass });
            }
            row.iter_mut().for_each(|v| *v /= mass);
            cum.push(trapezoid_cumulative(&x, row));
        }
        Ok(Self { x, y_breaks, rows, cum })
    }

    fn row_index(&self, y: f64) -> usize {
        self.y_breaks.partition_point(|&b| b <= y).saturating_sub(1)
    }

    pub fn density(&self, x: f64, y: f64) -> f64 {
        if x < 0.0 || x > *self.x.last().unwrap() {
            return 0.0;
        }
        let row = &self.rows[self.row_index(y)];
        let i = self.x.partition_point(|&k| k <= x).clamp(1, self.x.len() - 1);
        let (x0, x1) = (self.x[i - 1], self.x[i]);
        let w = (x - x0) / (x1 - x0);
        row[i - 1] * (1.0 - w) + row[i] * w
    }

    pub fn cdf(&self, x: f64, y: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let last = *self.x.last().unwrap();
        if x >= last {
            return 1.0;
        }
        let r = self.row_index(y);
        let (row, cum) = (&self.rows[r], &self.cum[r]);
        let i = self.x.partition_point(|&k| k <= x).clamp(1, self.x.len() - 1);
        let (x0, x1) = (self.x[i - 1], self.x[i]);
        let dx = x - x0;
        let slope = (row[i] - row[i - 1]) / (x1 - x0);
        cum[i - 1] + row[i - 1] * dx + 0.5 * slope * dx * dx
    }

    pub fn mean(&self, y: f64) -> f64 {
        let r = self.row_index(y);
        let row = &self.rows[r];
        // exact for piecewise-linear densities
        self.x
            .windows(2)
            .zip(row.windows(2))
            .map(|(xs, fs)| {
                let h = xs[1] - xs[0];
                h * (fs[0] * (2.0 * xs[0] + xs[1]) + fs[1] * (xs[0] + 2.0 * xs[1])) / 6.0
            })
            .sum()
    }

    fn sample(&self, y: f64, rng: &mut RngStream) -> f64 {
        let u = rng.uniform_open();
        let r = self.row_index(y);
        let (row, cum) = (&self.rows[r], &self.cum[r]);
        let i = cum.partition_point(|&c| c < u).clamp(1, self.x.len() - 1);
        let (x0, x1) = (self.x[i - 1], self.x[i]);
        let need = u - cum[i - 1];
        let slope = (row[i] - row[i - 1]) / (x1 - x0);
        let f0 = row[i - 1];
        // solve f0 d + slope d²/2 = need on [0, x1 - x0]
        let d = if slope.abs() < 1e-300 {
            if f0 > 0.0 {
                need / f0
            } else {
                0.0
            }
        } else {
            let disc = (f0 * f0 + 2.0 * slope * need).max(0.0);
            2.0 * need / (f0 + disc.sqrt())
        };
        x0 + d.clamp(0.0, x1 - x0)
    }
}

fn trapezoid_cumulative(x: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..x.len() {
        acc += 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
        out.push(acc);
    }
    out
}

/// Burst-size density `h(x, y)` for a jump from pre-jump level `y`.
#[derive(Debug, Clone, PartialEq)]
pub enum BurstKernel {
    /// `h(x, y) = e^{-x/mean} / mean`
    Exponential {
        mean: f64,
    },
    Separable(NuFn),
    Tabulated(TabulatedKernel),
}

impl BurstKernel {
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            BurstKernel::Exponential { mean } => check("b", *mean, *mean > 0.0, "exponential burst mean must be > 0"),
            BurstKernel::Separable(nu) => nu.validate(),
            BurstKernel::Tabulated(_) => Ok(()),
        }
    }

    /// The generating `ν` when the kernel is separable; exponential bursts
    /// are separable with `ν(x) = e^{-x/b}`.
    pub fn as_separable(&self) -> Option<NuFn> {
        match self {
            BurstKernel::Exponential { mean } => Some(NuFn::GaussianExp { alpha: 1.0 / mean, beta: 0.0 }),
            BurstKernel::Separable(nu) => Some(*nu),
            BurstKernel::Tabulated(_) => None,
        }
    }

    pub fn density(&self, x: f64, y: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match self {
            BurstKernel::Exponential { mean } => (-x / mean).exp() / mean,
            BurstKernel::Separable(nu) => {
                let base = nu.ln_nu(y);
                let v = (nu.ln_nu(x + y) - base).exp();
                if v == 0.0 {
                    0.0
                } else {
                    nu.hazard(x + y) * v
                }
            }
            BurstKernel::Tabulated(t) => t.density(x, y),
        }
    }

    /// `P(burst <= x | y)`.
    pub fn cdf(&self, x: f64, y: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self {
            BurstKernel::Exponential { mean } => -(-x / mean).exp_m1(),
            BurstKernel::Separable(nu) => {
                let d = nu.ln_nu(x + y) - nu.ln_nu(y);
                -d.exp_m1()
            }
            BurstKernel::Tabulated(t) => t.cdf(x, y),
        }
    }

    /// Mean burst `m_1(y)`.
    pub fn mean(&self, y: f64) -> f64 {
        match self {
            BurstKernel::Exponential { mean } => *mean,
            BurstKernel::Separable(nu) => nu.mean_residual(y),
            BurstKernel::Tabulated(t) => t.mean(y),
        }
    }

    pub fn sample(&self, y: f64, rng: &mut RngStream) -> f64 {
        match self {
            BurstKernel::Exponential { mean } => rng.exponential(*mean),
            BurstKernel::Separable(nu) => {
                let level = nu.ln_nu(y) + rng.uniform_open().ln();
                (nu.inverse_ln(level) - y).max(0.0)
            }
            BurstKernel::Tabulated(t) => t.sample(y, rng),
        }
    }
}

/// The continuous (PDMP) bursting model with the reference point `x_ref`
/// anchoring the potential, `Q(x_ref) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousBurstModel {
    phi: RateFn,
    gamma: DegradationFn,
    burst: BurstKernel,
    x_ref: f64,
}

impl ContinuousBurstModel {
    pub fn new(phi: RateFn, gamma: DegradationFn, burst: BurstKernel) -> Result<Self, ModelError> {
        phi.validate()?;
        gamma.validate()?;
        burst.validate()?;
        // With γ(x) = γx, ∫_0 φ/γ diverges exactly when φ(0+) > 0.
        let p0 = phi.at_origin();
        check("phi(0)", p0, p0 > 0.0, "production at the origin must be > 0 so that Q(0) = inf")?;
        Ok(Self { phi, gamma, burst, x_ref: 1.0 })
    }

    pub fn with_reference(mut self, x_ref: f64) -> Result<Self, ModelError> {
        check("x_ref", x_ref, x_ref > 0.0, "must be > 0")?;
        self.x_ref = x_ref;
        Ok(self)
    }

    pub fn phi(&self) -> &RateFn {
        &self.phi
    }
    pub fn gamma(&self) -> &DegradationFn {
        &self.gamma
    }
    pub fn burst(&self) -> &BurstKernel {
        &self.burst
    }
    pub fn x_ref(&self) -> f64 {
        self.x_ref
    }

    /// `φ(x) / γ(x)`.
    #[inline]
    pub fn hazard_ratio(&self, x: f64) -> f64 {
        self.phi.eval(x) / self.gamma.eval(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad_adaptive;

    fn nus() -> Vec<NuFn> {
        vec![
            NuFn::PowerTail { alpha: 1.5, beta: 2.5 },
            NuFn::GaussianExp { alpha: 1.0, beta: 0.5 },
            NuFn::GaussianExp { alpha: 0.7, beta: 0.0 },
            NuFn::FiniteSupport { alpha: 2.0, beta: 1.3 },
        ]
    }

    #[test]
    fn kernel_rows_integrate_to_one() {
        let mut kernels: Vec<BurstKernel> = nus().into_iter().map(BurstKernel::Separable).collect();
        kernels.push(BurstKernel::Exponential { mean: 0.8 });
        for k in &kernels {
            for y in [0.05, 0.7, 1.6] {
                let end = match k {
                    BurstKernel::Separable(nu) => (nu.support_end() - y).max(0.0),
                    _ => f64::INFINITY,
                };
                let m = quad_adaptive(|x| k.density(x, y), 0.0, end, 1e-12).unwrap();
                assert!((m - 1.0).abs() < 1e-8, "{k:?} y={y}: {m}");
                if end.is_finite() {
                    assert!((k.cdf(end, y) - 1.0).abs() < 1e-12);
                } else {
                    assert!((k.cdf(1e6, y) - 1.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn separable_shift_identity() {
        // h(x - y, y) ν(y) = -ν'(x) for x > y
        for nu in nus() {
            let k = BurstKernel::Separable(nu);
            for (x, y) in [(0.9, 0.3), (1.9, 1.2), (0.5, 0.01)] {
                let lhs = k.density(x - y, y) * nu.nu(y);
                assert!((lhs + nu.derivative(x)).abs() < 1e-12 * (1.0 + lhs.abs()), "{nu:?}");
            }
        }
    }

    #[test]
    fn hazard_matches_log_derivative() {
        for nu in nus() {
            for x in [0.1, 0.6, 1.4] {
                let d = 1e-6;
                let fd = -(nu.ln_nu(x + d) - nu.ln_nu(x - d)) / (2.0 * d);
                assert!((fd - nu.hazard(x)).abs() < 1e-6 * (1.0 + fd.abs()));
            }
        }
    }

    #[test]
    fn inverse_ln_roundtrip() {
        for nu in nus() {
            for x in [0.0, 0.2, 1.1, 1.9] {
                let back = nu.inverse_ln(nu.ln_nu(x));
                assert!((back - x).abs() < 1e-10, "{nu:?} {x} {back}");
            }
        }
    }

    #[test]
    fn mean_residual_matches_quadrature_and_hazard_identity() {
        // -ν'/ν = (1 + m1') / m1
        for nu in nus() {
            for y in [0.2, 0.9] {
                let m = nu.mean_residual(y);
                let end = (nu.support_end() - y).max(0.0);
                let q = quad_adaptive(|x| x * BurstKernel::Separable(nu).density(x, y), 0.0, end, 1e-12).unwrap();
                assert!((m - q).abs() < 1e-8 * (1.0 + q), "{nu:?}: {m} vs {q}");
                let d = 1e-5;
                let dm = (nu.mean_residual(y + d) - nu.mean_residual(y - d)) / (2.0 * d);
                assert!(((1.0 + dm) / m - nu.hazard(y)).abs() < 1e-5, "{nu:?}");
            }
        }
    }

    #[test]
    fn sampler_matches_mean() {
        let mut rng = RngStream::new(3, 0);
        for nu in nus() {
            let k = BurstKernel::Separable(nu);
            let y = 0.4;
            let n = 100_000;
            let m: f64 = (0..n).map(|_| k.sample(y, &mut rng)).sum::<f64>() / n as f64;
            let want = k.mean(y);
            assert!((m - want).abs() < 0.03 * want.max(0.3), "{nu:?}: {m} vs {want}");
        }
    }

    #[test]
    fn tabulated_kernel() {
        // triangular density on [0, 2] peaking at 1, same for all y
        let x: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
        let row: Vec<f64> = x.iter().map(|&v| if v <= 1.0 { v } else { 2.0 - v }).collect();
        let k = TabulatedKernel::new(x.clone(), vec![0.0, 5.0], vec![row.clone(), row]).unwrap();
        let bk = BurstKernel::Tabulated(k);
        assert!((bk.cdf(1.0, 0.3) - 0.5).abs() < 1e-12);
        assert!((bk.cdf(0.5, 7.0) - 0.125).abs() < 1e-12);
        assert!((bk.mean(1.0) - 1.0).abs() < 1e-12);
        let mut rng = RngStream::new(4, 0);
        let n = 50_000;
        let m: f64 = (0..n).map(|_| bk.sample(0.0, &mut rng)).sum::<f64>() / n as f64;
        assert!((m - 1.0).abs() < 0.01);
        let bad = TabulatedKernel::new(x.clone(), vec![0.0], vec![vec![2.0; 21]]);
        assert!(matches!(bad, Err(ModelError::KernelRowNotNormalized { .. })));
    }

    #[test]
    fn model_requires_divergent_potential_at_origin() {
        let r = ContinuousBurstModel::new(
            RateFn::Linear { basal: 0.0, slope: 1.0 },
            DegradationFn::LinearDecay { rate: 1.0 },
            BurstKernel::Exponential { mean: 1.0 },
        );
        assert!(r.is_err());
        let ok = ContinuousBurstModel::new(
            RateFn::Hill(HillParams::new(1.0, 1.0, 1.0, 0.0, 2.0).unwrap()),
            DegradationFn::LinearDecay { rate: 1.0 },
            BurstKernel::Exponential { mean: 1.0 },
        )
        .unwrap();
        assert!(ok.clone().with_reference(-1.0).is_err());
        assert_eq!(ok.with_reference(3.7).unwrap().x_ref(), 3.7);
    }

    #[test]
    fn rate_derivatives() {
        let fns = [
            RateFn::Constant { rate: 2.0 },
            RateFn::Linear { basal: 1.0, slope: 0.3 },
            RateFn::Quadratic { basal: 1.0, slope: 0.3, curvature: 0.2 },
            RateFn::Hill(HillParams::new(1.5, 1.0, 0.5, 2.0, 3.0).unwrap()),
        ];
        for f in fns {
            for x in [0.2, 1.0, 3.3] {
                let d = 1e-6;
                let fd = (f.eval(x + d) - f.eval(x - d)) / (2.0 * d);
                assert!((fd - f.derivative(x)).abs() < 1e-6 * (1.0 + fd.abs()), "{f:?}");
            }
        }
    }
}
