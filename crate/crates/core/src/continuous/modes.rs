use super::ContinuousError;
use crate::models::ContinuousBurstModel;

pub const DEFAULT_PROBES: usize = 2048;
const PLATEAU: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Maximum,
    Minimum,
    /// A flat stretch with no sign change across it.
    Degenerate,
}

impl ModeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeKind::Maximum => "max",
            ModeKind::Minimum => "min",
            ModeKind::Degenerate => "degenerate",
        }
    }
}

/// Behavior of the density at the origin, read off `φ(0+) - γ'(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryBehavior {
    /// `u -> ∞`; the origin acts as a mode.
    Divergent,
    /// `u(0+)` finite and positive.
    Finite,
    /// `u -> 0`.
    Vanishing,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ModeReportContinuous {
    pub roots: Vec<(f64, ModeKind)>,
    pub boundary: BoundaryBehavior,
}

impl ModeReportContinuous {
    pub fn maxima(&self) -> Vec<f64> {
        self.roots.iter().filter(|r| r.1 == ModeKind::Maximum).map(|r| r.0).collect()
    }
}

/// Roots of `f = φ - γ η - γ'` on `[lo, hi]` (`η = -ν'/ν`, i.e. `1/b` for
/// exponential bursts). `f` has the sign of `(ln u)'`, so `+ -> -` is a
/// maximum of the stationary density and `- -> +` a minimum.
pub fn count_modes_continuous(
    model: &ContinuousBurstModel,
    lo: f64,
    hi: f64,
    probes: usize,
) -> Result<ModeReportContinuous, ContinuousError> {
    if !(lo > 0.0 && hi > lo) || probes < 2 {
        return Err(ContinuousError::InvalidInput(format!("bad mode window [{lo}, {hi}] x {probes}")));
    }
    let nu = model
        .burst()
        .as_separable()
        .ok_or(ContinuousError::Unsupported("mode analysis needs an exponential or separable kernel"))?;
    let (phi, gamma) = (model.phi(), model.gamma());
    let f = |x: f64| phi.eval(x) - gamma.eval(x) * nu.hazard(x) - gamma.derivative(x);

    let f_hi = f(hi);
    if f_hi > 0.0 {
        return Err(ContinuousError::WindowTooSmall { x_hi: hi, f: f_hi });
    }
    let edge = phi.at_origin() - gamma.derivative(0.0);
    let boundary = if edge < 0.0 {
        BoundaryBehavior::Divergent
    } else if edge == 0.0 {
        BoundaryBehavior::Finite
    } else {
        BoundaryBehavior::Vanishing
    };

    let (a, b) = (lo.ln(), hi.ln());
    let xs: Vec<f64> = (0..probes).map(|i| (a + (b - a) * i as f64 / (probes - 1) as f64).exp()).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    // last sample with a clear sign
    let mut prev: Option<usize> = None;
    for i in 0..probes {
        if fs[i].abs() < PLATEAU {
            continue;
        }
        if let Some(p) = prev {
            let flat = i > p + 1;
            if fs[p].signum() != fs[i].signum() {
                let x = if flat { 0.5 * (xs[p + 1] + xs[i - 1]) } else { bisect(&f, xs[p], xs[i]) };
                let kind = if fs[i] < 0.0 { ModeKind::Maximum } else { ModeKind::Minimum };
                roots.push((x, kind));
            } else if flat {
                roots.push((0.5 * (xs[p + 1] + xs[i - 1]), ModeKind::Degenerate));
            }
        }
        prev = Some(i);
    }
    Ok(ModeReportContinuous { roots, boundary })
}

fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    while b - a > 1e-13 * b {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
