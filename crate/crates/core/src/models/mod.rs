//! Model definitions shared by the discrete and continuous halves: production
//! rates, degradation rates and burst-size laws.

mod continuous;
mod discrete;

use thiserror::Error;

pub use continuous::{BurstKernel, ContinuousBurstModel, DegradationFn, NuFn, RateFn, TabulatedKernel};
pub use discrete::{eval_rates_discrete, BurstPmf, DegradationSeq, DiscreteBurstModel, RateSeq, TabulatedPmf};

/// Tolerance inside which a tabulated burst pmf is silently renormalized.
pub const PMF_RENORMALIZE_TOL: f64 = 1e-9;
/// Tolerance inside which a tabulated kernel row is silently renormalized.
pub const KERNEL_ROW_RENORMALIZE_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },
    #[error("burst pmf sums to {sum}, more than {tol:e} away from 1")]
    BurstNotNormalized { sum: f64, tol: f64 },
    #[error("tabulated kernel row {row} integrates to {mass}, not 1")]
    KernelRowNotNormalized { row: usize, mass: f64 },
    #[error("{0}")]
    Malformed(&'static str),
}

pub(crate) fn check(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<(), ModelError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter { name, value, reason })
    }
}

/// Hill-type regulation `scale (1 + numer_coeff s^exponent) / (denom_const + denom_coeff s^exponent)`.
///
/// Used both as the discrete rate `λ_n` and the continuous rate `φ(x)`.
/// Parameters are validated once here, evaluation is branch-free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillParams {
    scale: f64,
    denom_const: f64,
    denom_coeff: f64,
    numer_coeff: f64,
    exponent: f64,
}

impl HillParams {
    pub fn new(
        scale: f64,
        denom_const: f64,
        denom_coeff: f64,
        numer_coeff: f64,
        exponent: f64,
    ) -> Result<Self, ModelError> {
        check("scale", scale, scale > 0.0, "must be > 0")?;
        check("denom_const", denom_const, denom_const > 0.0, "must be > 0")?;
        check("denom_coeff", denom_coeff, denom_coeff > 0.0, "must be > 0")?;
        check("numer_coeff", numer_coeff, numer_coeff >= 0.0, "must be >= 0")?;
        check("exponent", exponent, exponent > 0.0, "must be > 0")?;
        Ok(Self { scale, denom_const, denom_coeff, numer_coeff, exponent })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
    pub fn denom_const(&self) -> f64 {
        self.denom_const
    }
    pub fn denom_coeff(&self) -> f64 {
        self.denom_coeff
    }
    pub fn numer_coeff(&self) -> f64 {
        self.numer_coeff
    }
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        let p = s.powf(self.exponent);
        self.scale * (1.0 + self.numer_coeff * p) / (self.denom_const + self.denom_coeff * p)
    }

    /// d/ds of [`eval`](Self::eval).
    pub fn derivative(&self, s: f64) -> f64 {
        if s <= 0.0 {
            // s^(N-1) term: finite only for N >= 1
            return if self.exponent > 1.0 {
                0.0
            } else if self.exponent == 1.0 {
                self.scale * (self.numer_coeff * self.denom_const - self.denom_coeff)
                    / (self.denom_const * self.denom_const)
            } else {
                f64::INFINITY.copysign(self.numer_coeff * self.denom_const - self.denom_coeff)
            };
        }
        let p = s.powf(self.exponent);
        let dp = self.exponent * p / s;
        let den = self.denom_const + self.denom_coeff * p;
        self.scale * dp * (self.numer_coeff * self.denom_const - self.denom_coeff) / (den * den)
    }

    /// Limit as `s -> inf`.
    pub fn limit_at_infinity(&self) -> f64 {
        self.scale * self.numer_coeff / self.denom_coeff
    }
}
