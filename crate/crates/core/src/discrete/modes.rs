use super::DiscreteError;
use crate::models::{BurstPmf, DiscreteBurstModel};

/// Shape of the stationary pmf read off the sign of
/// `f(n) = λ_n + b γ_n - γ_{n+1}`, which has the sign of `p_{n+1} - p_n`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ModeReportDiscrete {
    /// Indices where a new strict sign of `f` first appears.
    pub sign_changes: Vec<usize>,
    /// Local maxima of the pmf, including 0 when `boundary_mode` holds.
    pub maxima: Vec<usize>,
    pub minima: Vec<usize>,
    /// `λ_0 < γ_1`, i.e. `p_1 < p_0`.
    pub boundary_mode: bool,
}

pub fn count_modes_discrete(model: &DiscreteBurstModel, n_max: usize) -> Result<ModeReportDiscrete, DiscreteError> {
    let BurstPmf::Geometric { b } = *model.burst() else {
        return Err(DiscreteError::Unsupported("mode analysis needs a geometric burst"));
    };
    let f = |n: usize| {
        let (l, g) = model.rates(n);
        l + b * g - model.gamma().eval(n + 1)
    };
    let boundary_mode = model.lambda().eval(0) < model.gamma().eval(1);
    let mut report = ModeReportDiscrete { sign_changes: vec![], maxima: vec![], minima: vec![], boundary_mode };
    if boundary_mode {
        report.maxima.push(0);
    }
    let mut prev = 0.0f64;
    for n in 0..n_max {
        let v = f(n);
        // zeros keep the previous sign until a strict one shows up
        if v == 0.0 {
            continue;
        }
        if prev != 0.0 && v.signum() != prev.signum() {
            report.sign_changes.push(n);
            if v < 0.0 {
                report.maxima.push(n);
            } else {
                report.minima.push(n);
            }
        }
        prev = v;
    }
    Ok(report)
}
