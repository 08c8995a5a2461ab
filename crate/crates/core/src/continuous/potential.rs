use super::ContinuousError;
use crate::models::{ContinuousBurstModel, DegradationFn, RateFn};
use crate::numerics::{find_root_monotone, quad_adaptive_with, QuadConfig};

const CACHE_SPAN: i32 = 80;

/// `Q(x) = ∫_x^{x_ref} φ(z)/γ(z) dz`, nonincreasing, with `Q(x_ref) = 0`.
///
/// Closed forms cover every built-in rate with linear degradation; the
/// quadrature path tabulates `Q` at `x_ref 2^k` once and integrates only the
/// last short stretch per call.
#[derive(Debug, Clone)]
pub struct Potential {
    phi: RateFn,
    gamma: DegradationFn,
    x_ref: f64,
    f_ref: f64,
    cache: Option<Vec<f64>>,
}

impl Potential {
    pub fn new(model: &ContinuousBurstModel) -> Self {
        Self::from_rates(*model.phi(), *model.gamma(), model.x_ref())
    }

    /// Potential for an arbitrary rate pair. Unlike a full model this does
    /// not require `Q(0) = ∞`.
    pub fn from_rates(phi: RateFn, gamma: DegradationFn, x_ref: f64) -> Self {
        let mut p = Self { phi, gamma, x_ref, f_ref: 0.0, cache: None };
        p.f_ref = p.antiderivative(x_ref);
        p
    }

    /// Same potential evaluated by quadrature only.
    pub fn quadrature(phi: RateFn, gamma: DegradationFn, x_ref: f64) -> Self {
        let mut p = Self::from_rates(phi, gamma, x_ref);
        let n = (2 * CACHE_SPAN + 1) as usize;
        let mut values = vec![0.0; n];
        let knot = |k: i32| x_ref * 2f64.powi(k);
        for k in 1..=CACHE_SPAN {
            let i = (CACHE_SPAN + k) as usize;
            values[i] = values[i - 1] - p.integrate(knot(k - 1), knot(k));
            let j = (CACHE_SPAN - k) as usize;
            values[j] = values[j + 1] + p.integrate(knot(-k), knot(-k + 1));
        }
        p.cache = Some(values);
        p
    }

    pub fn x_ref(&self) -> f64 {
        self.x_ref
    }

    pub fn phi(&self) -> &RateFn {
        &self.phi
    }

    pub fn gamma(&self) -> &DegradationFn {
        &self.gamma
    }

    /// `φ(x) / γ(x)`, equal to `-Q'(x)`.
    #[inline]
    pub fn hazard(&self, x: f64) -> f64 {
        self.phi.eval(x) / self.gamma.eval(x)
    }

    fn integrate(&self, a: f64, b: f64) -> f64 {
        let cfg = QuadConfig { abs_tol: 0.0, rel_tol: 1e-13, max_panels: 2000 };
        quad_adaptive_with(|z| self.hazard(z), a, b, &cfg).unwrap_or(f64::NAN)
    }

    // F with F' = φ/γ for linear γ.
    fn antiderivative(&self, x: f64) -> f64 {
        let DegradationFn::LinearDecay { rate: g } = self.gamma;
        let log_term = |c: f64| if c == 0.0 { 0.0 } else { c * x.ln() };
        match self.phi {
            RateFn::Constant { rate } => log_term(rate) / g,
            RateFn::Linear { basal, slope } => (log_term(basal) + slope * x) / g,
            RateFn::Quadratic { basal, slope, curvature } => {
                (log_term(basal) + slope * x + 0.5 * curvature * x * x) / g
            }
            RateFn::Hill(h) => {
                let (lam, big_l, del, th, n) =
                    (h.scale(), h.denom_const(), h.denom_coeff(), h.numer_coeff(), h.exponent());
                (lam / g) * (x.ln() / big_l + (th - del / big_l) / (n * del) * ln_denominator(x, big_l, del, n))
            }
        }
    }

    /// `Q(x)`; `+inf` at `x = 0` when `φ(0) > 0`.
    pub fn q(&self, x: f64) -> f64 {
        if x == 0.0 {
            return self.q_zero().unwrap_or(f64::INFINITY);
        }
        match &self.cache {
            None => self.f_ref - self.antiderivative(x),
            Some(values) => {
                let k = (x / self.x_ref).log2().round().clamp(-CACHE_SPAN as f64, CACHE_SPAN as f64) as i32;
                let knot = self.x_ref * 2f64.powi(k);
                values[(k + CACHE_SPAN) as usize] + self.integrate(x, knot)
            }
        }
    }

    /// Checked `Q(x)`.
    pub fn q_checked(&self, x: f64) -> Result<f64, ContinuousError> {
        if !(x > 0.0) {
            return Err(ContinuousError::DomainError { x });
        }
        Ok(self.q(x))
    }

    /// `Q(0+)` when finite.
    pub fn q_zero(&self) -> Option<f64> {
        if self.phi.at_origin() > 0.0 {
            None
        } else {
            Some(self.f_ref - self.antiderivative(0.0))
        }
    }

    /// `Q(∞)` when finite.
    pub fn q_inf(&self) -> Option<f64> {
        let DegradationFn::LinearDecay { rate: g } = self.gamma;
        match self.phi {
            RateFn::Constant { rate: 0.0 } => Some(0.0),
            RateFn::Linear { basal, slope } if basal == 0.0 && slope == 0.0 => Some(0.0),
            RateFn::Quadratic { basal, slope, curvature } if basal == 0.0 && slope == 0.0 && curvature == 0.0 => {
                Some(0.0)
            }
            RateFn::Hill(h) if h.numer_coeff() == 0.0 => {
                let f_inf = -(h.scale() / g) * h.denom_coeff().ln() / (h.exponent() * h.denom_const());
                Some(self.f_ref - f_inf)
            }
            _ => None,
        }
    }

    /// Generalized inverse `sup{x : Q(x) >= r}`.
    pub fn inverse(&self, r: f64) -> Result<f64, ContinuousError> {
        if r.is_nan() {
            return Err(ContinuousError::InvalidInput("level is NaN".into()));
        }
        if let Some(q_inf) = self.q_inf() {
            if r < q_inf {
                return Err(ContinuousError::RangeError { r, q_inf });
            }
            if r == q_inf {
                return Ok(f64::INFINITY);
            }
        }
        if let Some(q0) = self.q_zero() {
            if r >= q0 {
                return Ok(0.0);
            }
        }
        if r == f64::INFINITY {
            return Ok(0.0);
        }
        // bracket in s = ln x, where s -> Q(e^s) is decreasing
        let g = |s: f64| self.q(s.exp()) - r;
        let s0 = self.x_ref.ln();
        let (mut lo, mut hi) = (s0, s0);
        let mut step = 1.0;
        if g(s0) > 0.0 {
            while g(hi) > 0.0 {
                lo = hi;
                hi += step;
                step *= 2.0;
                if hi > 709.0 {
                    return Err(ContinuousError::NumericalBlowup(format!("Q^-1({r}) beyond e^709")));
                }
            }
        } else {
            while g(lo) < 0.0 {
                hi = lo;
                lo -= step;
                step *= 2.0;
                if lo < -745.0 {
                    return Ok(0.0);
                }
            }
        }
        let mut s = find_root_monotone(g, lo, hi, 1e-14)?;
        // Newton polish: d/ds Q(e^s) = -e^s φ/γ
        for _ in 0..3 {
            let x = s.exp();
            let res = self.q(x) - r;
            let slope = x * self.hazard(x);
            if res == 0.0 || !(slope > 0.0) {
                break;
            }
            let next = s + res / slope;
            if (self.q(next.exp()) - r).abs() >= res.abs() {
                break;
            }
            s = next;
        }
        Ok(s.exp())
    }
}

/// `ln(Λ + Δ x^N)` without overflow.
pub(crate) fn ln_denominator(x: f64, big_l: f64, del: f64, n: f64) -> f64 {
    let t = n * x.ln();
    if t > 0.0 {
        t + (del + big_l * (-t).exp()).ln()
    } else {
        (big_l + del * t.exp()).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::HillParams;
    use crate::numerics::RngStream;

    fn lin(rate: f64) -> DegradationFn {
        DegradationFn::LinearDecay { rate }
    }

    fn forms() -> Vec<RateFn> {
        vec![
            RateFn::Constant { rate: 1.3 },
            RateFn::Linear { basal: 0.7, slope: 0.4 },
            RateFn::Quadratic { basal: 0.7, slope: 0.4, curvature: 0.05 },
            RateFn::Hill(HillParams::new(1.0, 1.0, 1.0, 0.0, 1.0).unwrap()),
            RateFn::Hill(HillParams::new(1.5, 1.0, 1.0 / 81.0, 0.0823, 4.0).unwrap()),
            RateFn::Hill(HillParams::new(2.0, 0.5, 2.0, 3.0, 2.5).unwrap()),
        ]
    }

    #[test]
    fn closed_forms() {
        let p = Potential::from_rates(RateFn::Constant { rate: 1.0 }, lin(1.0), 1.0);
        assert!((p.q(0.5) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(p.q(1.0), 0.0);
        assert_eq!(p.q(0.0), f64::INFINITY);
        let h = Potential::from_rates(forms()[3], lin(1.0), 1.0);
        assert!((h.q(0.5) - 1.5f64.ln()).abs() < 1e-15);
        assert!(matches!(p.q_checked(-1.0), Err(ContinuousError::DomainError { .. })));
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for phi in forms() {
            for x_ref in [1.0, 3.7] {
                let c = Potential::from_rates(phi, lin(1.3), x_ref);
                let q = Potential::quadrature(phi, lin(1.3), x_ref);
                for i in 0..100 {
                    let x = 10f64.powf(-4.0 + 7.0 * i as f64 / 99.0);
                    let (a, b) = (c.q(x), q.q(x));
                    assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "{phi:?} x={x}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let mut rng = RngStream::new(11, 0);
        for phi in forms() {
            let p = Potential::from_rates(phi, lin(1.0), 1.0);
            let lo = p.q_inf().unwrap_or(-50.0);
            for _ in 0..100 {
                let r = lo + 1e-6 + (30.0 - lo) * rng.uniform_open();
                let x = p.inverse(r).unwrap();
                assert!((p.q(x) - r).abs() <= 1e-10, "{phi:?} r={r}");
            }
        }
        let p = Potential::from_rates(RateFn::Constant { rate: 1.0 }, lin(1.0), 1.0);
        assert!((p.inverse(2f64.ln()).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(p.inverse(0.0).unwrap(), 1.0);
    }

    #[test]
    fn finite_limit_gives_range_error() {
        let p = Potential::from_rates(forms()[3], lin(1.0), 1.0);
        let q_inf = p.q_inf().unwrap();
        // Q(∞) = -ln 2 for this rate
        assert!((q_inf + 2f64.ln()).abs() < 1e-15);
        assert!((p.q(1e12) - q_inf).abs() < 1e-11);
        assert!(matches!(p.inverse(q_inf - 0.1), Err(ContinuousError::RangeError { .. })));
    }

    #[test]
    fn finite_at_origin_without_basal_rate() {
        let p = Potential::from_rates(RateFn::Linear { basal: 0.0, slope: 2.0 }, lin(1.0), 1.0);
        assert_eq!(p.q_zero(), Some(2.0));
        assert_eq!(p.inverse(5.0).unwrap(), 0.0);
    }
}
