use super::{ContinuousError, Grid, GridDensity, Potential};
use crate::models::{BurstKernel, ContinuousBurstModel, HillParams, NuFn, RateFn};
use crate::numerics::{quad_adaptive_with, QuadConfig};

/// `ln(ν(x) e^{-Q(x)} / γ(x))`, the log of the unnormalized stationary
/// density for a separable (or exponential) burst kernel.
pub fn ln_unnormalized_density(potential: &Potential, nu: &NuFn, x: f64) -> f64 {
    nu.ln_nu(x) - potential.q(x) - potential.gamma().eval(x).ln()
}

/// Stationary density for exponential bursts, `u ∝ e^{-x/b - Q(x)} / γ(x)`.
pub fn stationary_density_exponential(
    model: &ContinuousBurstModel,
    grid: &Grid,
) -> Result<GridDensity, ContinuousError> {
    if !matches!(model.burst(), BurstKernel::Exponential { .. }) {
        return Err(ContinuousError::Unsupported("expected an exponential burst kernel"));
    }
    stationary_density(model, grid)
}

/// Stationary density for a separable kernel, `u ∝ ν(x) e^{-Q(x)} / γ(x)`.
pub fn stationary_density_separable(model: &ContinuousBurstModel, grid: &Grid) -> Result<GridDensity, ContinuousError> {
    if !matches!(model.burst(), BurstKernel::Separable(_)) {
        return Err(ContinuousError::Unsupported("expected a separable burst kernel"));
    }
    stationary_density(model, grid)
}

/// Analytic stationary density for any kernel with a generating `ν`.
pub fn stationary_density(model: &ContinuousBurstModel, grid: &Grid) -> Result<GridDensity, ContinuousError> {
    let nu = model
        .burst()
        .as_separable()
        .ok_or(ContinuousError::Unsupported("analytic stationary density needs an exponential or separable kernel"))?;
    check_power_tail(model, &nu)?;
    let pot = Potential::new(model);
    let ln_u = |x: f64| ln_unnormalized_density(&pot, &nu, x);
    check_integrable(&ln_u, &nu, model)?;
    let c = normalizing_constant(&ln_u, nu.support_end(), grid)?;
    let samples: Vec<f64> = grid.knots().iter().map(|&x| (ln_u(x) - c.ln()).exp()).collect();
    GridDensity::from_samples(grid.clone(), samples, Some(c))
}

// Sufficient condition for the power-tail kernel with Hill regulation.
fn check_power_tail(model: &ContinuousBurstModel, nu: &NuFn) -> Result<(), ContinuousError> {
    if let (NuFn::PowerTail { beta, .. }, RateFn::Hill(h)) = (nu, model.phi()) {
        let g = model.gamma().rate();
        let bound = hill_tail_exponent(h, g) + 1.0;
        if !(*beta > bound) {
            return Err(ContinuousError::NotIntegrable(format!(
                "power-tail exponent beta = {beta} must exceed lambda*Theta/(gamma*Delta) + 1 = {bound}"
            )));
        }
    }
    Ok(())
}

fn hill_tail_exponent(h: &HillParams, g: f64) -> f64 {
    h.scale() * h.numer_coeff() / (g * h.denom_coeff())
}

// Log-log slope tests at both ends: integrable iff slope > -1 near 0 and
// < -1 at infinity (or the density is already negligible).
fn check_integrable(ln_u: &dyn Fn(f64) -> f64, nu: &NuFn, model: &ContinuousBurstModel) -> Result<(), ContinuousError> {
    let scale = model.x_ref();
    let slope = |a: f64, b: f64| (ln_u(b) - ln_u(a)) / (b.ln() - a.ln());
    let s0 = slope(scale * 1e-14, scale * 1e-13);
    if !(s0 > -1.0) {
        return Err(ContinuousError::NotIntegrable(format!("log-log slope {s0} at the origin")));
    }
    if nu.support_end().is_finite() {
        return Ok(());
    }
    let reference = ln_u(scale) + scale.ln();
    for k in 1..=12 {
        let x = scale * 10f64.powi(k);
        let v = ln_u(x) + x.ln();
        if v < reference - 800.0 || v == f64::NEG_INFINITY {
            return Ok(());
        }
    }
    let s1 = slope(scale * 1e11, scale * 1e12);
    if !(s1 < -1.0) {
        return Err(ContinuousError::NotIntegrable(format!("log-log slope {s1} at infinity")));
    }
    Ok(())
}

/// `∫_0^end e^{ln_u(x)} dx`, integrated in `s = ln x` on both sides of the
/// peak of `x u(x)` so that power laws at either end become exponentials.
pub(crate) fn normalizing_constant(
    ln_u: &dyn Fn(f64) -> f64,
    support_end: f64,
    grid: &Grid,
) -> Result<f64, ContinuousError> {
    let peak = grid
        .knots()
        .iter()
        .copied()
        .filter(|&x| x < support_end)
        .max_by(|a, b| (ln_u(*a) + a.ln()).total_cmp(&(ln_u(*b) + b.ln())))
        .ok_or(ContinuousError::InvalidInput("grid lies outside the support".into()))?;
    let shift = ln_u(peak) + peak.ln();
    let cfg = QuadConfig { abs_tol: 1e-15, rel_tol: 1e-12, max_panels: 4000 };
    let f = |s: f64| {
        let x = s.exp();
        if x >= support_end || x == 0.0 || !x.is_finite() {
            0.0
        } else {
            (ln_u(x) + s - shift).exp()
        }
    };
    let s_peak = peak.ln();
    let left = quad_adaptive_with(|t| f(s_peak - t), 0.0, f64::INFINITY, &cfg)?;
    let right = if support_end.is_finite() {
        // the mapped half-line would waste panels past the support
        quad_adaptive_with(
            |x: f64| if x >= support_end { 0.0 } else { (ln_u(x) - shift).exp() },
            peak,
            support_end,
            &cfg,
        )?
    } else {
        quad_adaptive_with(|t| f(s_peak + t), 0.0, f64::INFINITY, &cfg)?
    };
    let c = (left + right) * shift.exp();
    if !(c.is_finite() && c > 0.0) {
        return Err(ContinuousError::NotIntegrable(format!("normalizing integral evaluated to {c}")));
    }
    Ok(c)
}

/// Stationary CDF `F(x) = ∫_0^x u`, integrated in `ln x` so that the
/// integrable singularity at the origin is harmless. `grid` only locates the
/// peak for the normalizing constant.
pub fn stationary_cdf(model: &ContinuousBurstModel, grid: &Grid) -> Result<impl Fn(f64) -> f64, ContinuousError> {
    let u = stationary_density(model, grid)?;
    let c = u.c.unwrap_or(1.0);
    let nu = model.burst().as_separable().ok_or(ContinuousError::Unsupported("needs a separable kernel"))?;
    let pot = Potential::new(model);
    let cfg = QuadConfig { abs_tol: 1e-15, rel_tol: 1e-12, max_panels: 4000 };
    Ok(move |x: f64| {
        if !(x > 0.0) {
            return 0.0;
        }
        let end = nu.support_end();
        let s_top = x.min(end).ln();
        let f = |t: f64| {
            let z = (s_top - t).exp();
            if z == 0.0 || z >= end {
                0.0
            } else {
                (ln_unnormalized_density(&pot, &nu, z) + z.ln() - c.ln()).exp()
            }
        };
        quad_adaptive_with(f, 0.0, f64::INFINITY, &cfg).unwrap_or(f64::NAN).min(1.0)
    })
}

/// Default log-spaced grid for `model`: from `1e-6` times the burst scale up
/// to where `x u(x)` has fallen by `e^{-36}` from its peak (or just inside a
/// finite burst support).
pub fn auto_grid(
    model: &ContinuousBurstModel,
    knots: usize,
    x_min: Option<f64>,
    x_max: Option<f64>,
) -> Result<Grid, ContinuousError> {
    let m1 = model.burst().mean(0.0);
    let scale = if m1.is_finite() && m1 > 0.0 { m1 } else { 1.0 };
    let lo = x_min.unwrap_or(1e-6 * scale);
    let hi = match x_max {
        Some(v) => v,
        None => match model.burst().as_separable() {
            Some(nu) if nu.support_end().is_finite() => nu.support_end() * (1.0 - 1e-9),
            Some(nu) => {
                let pot = Potential::new(model);
                let f = |x: f64| ln_unnormalized_density(&pot, &nu, x) + x.ln();
                let mut best = f64::NEG_INFINITY;
                let mut hi = 60.0 * scale;
                for k in 0..480 {
                    let x = scale * 2f64.powf(k as f64 / 4.0 - 20.0);
                    let v = f(x);
                    best = best.max(v);
                    if x > scale && v < best - 36.0 {
                        hi = x;
                        break;
                    }
                }
                hi
            }
            None => 60.0 * scale,
        },
    };
    Grid::geometric(lo, hi, knots)
}
