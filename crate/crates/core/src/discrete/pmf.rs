use crate::numerics::{l1_distance, normalize_log, NumericsError};

/// Probability vector on `{0, ..., n_max}`.
///
/// `values` are always linear-scale probabilities. When the law was built
/// through a log-space recurrence whose dynamic range exceeds what doubles
/// can hold, the logs are kept as well so far-tail entries that underflow
/// to zero stay recoverable.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    values: Vec<f64>,
    logs: Option<Vec<f64>>,
}

impl Pmf {
    /// Wraps raw nonnegative weights, normalizing them to unit mass.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self, NumericsError> {
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(NumericsError::NonFinite("pmf weights"));
        }
        let s: f64 = weights.iter().sum();
        if s <= 0.0 {
            return Err(NumericsError::NonFinite("pmf mass"));
        }
        Ok(Self { values: weights.into_iter().map(|w| w / s).collect(), logs: None })
    }

    /// Builds from unnormalized log-weights.
    pub fn from_log_weights(logs: Vec<f64>) -> Self {
        let values = normalize_log(&logs);
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = logs.iter().copied().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
        let keep = max - min > 700.0;
        let logs = keep.then(|| {
            let z = crate::numerics::log_sum_exp(&logs);
            logs.iter().map(|l| l - z).collect()
        });
        Self { values, logs }
    }

    /// Point mass at `n` on `{0, ..., n_max}`.
    pub fn delta(n: usize, n_max: usize) -> Self {
        let mut values = vec![0.0; n_max + 1];
        values[n.min(n_max)] = 1.0;
        Self { values, logs: None }
    }

    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Self { values, logs: None }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn is_log_scale(&self) -> bool {
        self.logs.is_some()
    }

    /// `ln p_n`, exact even where `p_n` underflows.
    pub fn ln_value(&self, n: usize) -> f64 {
        match &self.logs {
            Some(l) => l[n],
            None => self.values[n].ln(),
        }
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    pub fn l1(&self, other: &Pmf) -> Result<f64, NumericsError> {
        l1_distance(&self.values, &other.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_weights_keep_underflowing_tail() {
        let logs: Vec<f64> = (0..4).map(|i| -400.0 * i as f64).collect();
        let p = Pmf::from_log_weights(logs);
        assert!(p.is_log_scale());
        assert_eq!(p.values()[3], 0.0);
        assert!((p.ln_value(3) + 1200.0).abs() < 1e-9);
        assert!((p.mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn delta_and_weights() {
        let d = Pmf::delta(2, 4);
        assert_eq!(d.values(), &[0.0, 0.0, 1.0, 0.0, 0.0]);
        let w = Pmf::from_weights(vec![1.0, 3.0]).unwrap();
        assert_eq!(w.values(), &[0.25, 0.75]);
        assert!(Pmf::from_weights(vec![0.0]).is_err());
    }
}
