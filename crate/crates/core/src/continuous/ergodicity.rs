use super::Potential;
use crate::models::ContinuousBurstModel;
use crate::numerics::{quad_adaptive_with, QuadConfig};

/// `e^{Q(y)} ∫_0^y (m1(z) φ(z)/γ(z) - 1) e^{-Q(z)} dz` for a model; negative
/// values along increasing `y` certify mean ergodicity of the jump chain.
pub fn ergodicity_margin(model: &ContinuousBurstModel, y: f64) -> f64 {
    let pot = Potential::new(model);
    ergodicity_margin_with(&pot, |z| model.burst().mean(z), y)
}

/// Margin for an arbitrary potential and mean burst `m1`.
pub fn ergodicity_margin_with(pot: &Potential, m1: impl Fn(f64) -> f64, y: f64) -> f64 {
    let qy = pot.q(y);
    // z = y e^{-t}
    let integrand = |t: f64| {
        let z = y * (-t).exp();
        if z == 0.0 {
            return 0.0;
        }
        let w = (qy - pot.q(z)).exp();
        if w == 0.0 {
            0.0
        } else {
            (m1(z) * pot.hazard(z) - 1.0) * w * z
        }
    };
    let cfg = QuadConfig { abs_tol: 1e-14, rel_tol: 1e-12, max_panels: 4000 };
    quad_adaptive_with(integrand, 0.0, f64::INFINITY, &cfg).unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MarginProbe {
    pub y: f64,
    pub margin: f64,
    pub running_sup: f64,
}

/// Margins at increasing probes with the running supremum, a finite-range
/// stand-in for the limsup.
pub fn ergodicity_scan(model: &ContinuousBurstModel, probes: &[f64]) -> Vec<MarginProbe> {
    let pot = Potential::new(model);
    let mut sup = f64::NEG_INFINITY;
    probes
        .iter()
        .map(|&y| {
            let margin = ergodicity_margin_with(&pot, |z| model.burst().mean(z), y);
            sup = sup.max(margin);
            MarginProbe { y, margin, running_sup: sup }
        })
        .collect()
}
