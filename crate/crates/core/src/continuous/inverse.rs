use super::{ContinuousError, GridDensity};
use crate::models::{BurstKernel, DegradationFn, HillParams};

/// A density known through its log and log-derivative.
pub trait LogDensity {
    /// `ln u(x)` up to an additive constant.
    fn ln_density(&self, x: f64) -> f64;
    /// `d/dx ln u(x)`.
    fn d_ln_density(&self, x: f64) -> f64;
}

/// `u ∝ x^{shape-1} e^{-rate x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaDensity {
    pub shape: f64,
    pub rate: f64,
}

impl LogDensity for GammaDensity {
    fn ln_density(&self, x: f64) -> f64 {
        (self.shape - 1.0) * x.ln() - self.rate * x
    }
    fn d_ln_density(&self, x: f64) -> f64 {
        (self.shape - 1.0) / x - self.rate
    }
}

/// Stationary density for Hill regulation, linear decay `γ x` and
/// exponential bursts of mean `b`:
/// `u ∝ x^{λ/(γΛ) - 1} (Λ + Δ x^N)^θ e^{-x/b}`, `θ = λ(ΘΛ - Δ)/(γ N Δ Λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillSolutionDensity {
    pub hill: HillParams,
    pub gamma: f64,
    pub b: f64,
}

impl HillSolutionDensity {
    pub fn theta(&self) -> f64 {
        let h = &self.hill;
        h.scale() * (h.numer_coeff() * h.denom_const() - h.denom_coeff())
            / (self.gamma * h.exponent() * h.denom_coeff() * h.denom_const())
    }

    fn power(&self) -> f64 {
        self.hill.scale() / (self.gamma * self.hill.denom_const()) - 1.0
    }
}

impl LogDensity for HillSolutionDensity {
    fn ln_density(&self, x: f64) -> f64 {
        let h = &self.hill;
        self.power() * x.ln()
            + self.theta() * super::potential::ln_denominator(x, h.denom_const(), h.denom_coeff(), h.exponent())
            - x / self.b
    }
    fn d_ln_density(&self, x: f64) -> f64 {
        let h = &self.hill;
        let p = x.powf(h.exponent());
        let frac = h.exponent() * h.denom_coeff() * p / (x * (h.denom_const() + h.denom_coeff() * p));
        self.power() / x + self.theta() * frac - 1.0 / self.b
    }
}

/// `-ν'/ν` recovered from the mean residual burst `m1` and its derivative.
pub fn hazard_from_m1(m1: f64, dm1: f64) -> f64 {
    (1.0 + dm1) / m1
}

fn burst_hazard(burst: &BurstKernel) -> Result<impl Fn(f64) -> f64 + '_, ContinuousError> {
    let nu = burst
        .as_separable()
        .ok_or(ContinuousError::Unsupported("rate inversion needs an exponential or separable kernel"))?;
    Ok(move |x: f64| nu.hazard(x))
}

/// `φ(x) = γ(x) η(x) + γ'(x) + γ(x) (ln u)'(x)` with analytic derivatives,
/// where `η = -ν'/ν` (`1/b` for exponential bursts).
pub fn phi_from_log_density(
    gamma: &DegradationFn,
    burst: &BurstKernel,
    density: &dyn LogDensity,
    xs: &[f64],
) -> Result<Vec<f64>, ContinuousError> {
    let eta = burst_hazard(burst)?;
    Ok(xs.iter().map(|&x| gamma.eval(x) * (eta(x) + density.d_ln_density(x)) + gamma.derivative(x)).collect())
}

/// Alias of [`phi_from_log_density`].
pub fn phi_from_density(
    gamma: &DegradationFn,
    burst: &BurstKernel,
    density: &dyn LogDensity,
    xs: &[f64],
) -> Result<Vec<f64>, ContinuousError> {
    phi_from_log_density(gamma, burst, density, xs)
}

/// Finite-difference estimate of `φ` at interior knots where `u > floor`:
/// `φ = γ η + γ (ln(γ u))'` with three-point nonuniform differences.
/// Returns `(x, φ(x))` pairs.
pub fn phi_from_grid_density(
    gamma: &DegradationFn,
    burst: &BurstKernel,
    u: &GridDensity,
    floor: f64,
) -> Result<Vec<(f64, f64)>, ContinuousError> {
    let eta = burst_hazard(burst)?;
    let x = u.grid.knots();
    let floor = floor.max(1e-300);
    let lg: Vec<f64> = x.iter().zip(&u.values).map(|(&p, &v)| (gamma.eval(p) * v).ln()).collect();
    let mut out = Vec::new();
    for i in 1..x.len() - 1 {
        if !(u.values[i - 1] > floor && u.values[i] > floor && u.values[i + 1] > floor) {
            continue;
        }
        let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
        let d = -h1 / (h0 * (h0 + h1)) * lg[i - 1] + (h1 - h0) / (h0 * h1) * lg[i] + h0 / (h1 * (h0 + h1)) * lg[i + 1];
        out.push((x[i], gamma.eval(x[i]) * (eta(x[i]) + d)));
    }
    if out.is_empty() {
        return Err(ContinuousError::NumericalBlowup(format!("no interior knots with u > {floor:e}")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuous::{stationary_density, Grid};
    use crate::models::{ContinuousBurstModel, RateFn};

    const G: DegradationFn = DegradationFn::LinearDecay { rate: 1.0 };

    #[test]
    fn gamma_densities_recover_constants() {
        let burst = BurstKernel::Exponential { mean: 1.0 };
        let xs: Vec<f64> = (1..50).map(|i| i as f64 * 0.3).collect();
        for (shape, want) in [(2.0, 2.0), (1.0, 1.0)] {
            let phi = phi_from_density(&G, &burst, &GammaDensity { shape, rate: 1.0 }, &xs).unwrap();
            assert!(phi.iter().all(|p| (p - want).abs() < 1e-12));
        }
    }

    #[test]
    fn hill_roundtrip_both_paths() {
        let h = HillParams::new(1.5, 1.0, 1.0 / 81.0, 0.0823, 4.0).unwrap();
        let burst = BurstKernel::Exponential { mean: 1.0 };
        let dens = HillSolutionDensity { hill: h, gamma: 1.0, b: 1.0 };
        let xs: Vec<f64> = (1..200).map(|i| i as f64 * 0.1).collect();
        let phi = phi_from_density(&G, &burst, &dens, &xs).unwrap();
        for (x, p) in xs.iter().zip(&phi) {
            assert!((p - h.eval(*x)).abs() < 1e-10 * h.eval(*x));
        }
        let model = ContinuousBurstModel::new(RateFn::Hill(h), G, burst.clone()).unwrap();
        let grid = Grid::geometric(1e-4, 60.0, 8192).unwrap();
        let u = stationary_density(&model, &grid).unwrap();
        let fd = phi_from_grid_density(&G, &burst, &u, 1e-12).unwrap();
        let analytic = phi_from_density(&G, &burst, &dens, &fd.iter().map(|p| p.0).collect::<Vec<_>>()).unwrap();
        for ((x, a), b) in fd.iter().zip(&analytic) {
            assert!((a - b).abs() < 1e-4 * b, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn m1_hazard_identity() {
        // power tail: m1 = (α + y)/(β - 1), hazard β/(α + y)
        let (a, b, y) = (1.5, 3.0, 0.7);
        assert!((hazard_from_m1((a + y) / (b - 1.0), 1.0 / (b - 1.0)) - b / (a + y)).abs() < 1e-15);
    }
}
