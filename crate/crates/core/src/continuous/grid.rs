use super::ContinuousError;
use crate::numerics::l1_distance_weighted;

/// Strictly increasing positive knots.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    x: Vec<f64>,
}

impl Grid {
    pub fn new(x: Vec<f64>) -> Result<Self, ContinuousError> {
        if x.len() < 3 || !(x[0] > 0.0) || x.windows(2).any(|w| !(w[1] > w[0])) || !x[x.len() - 1].is_finite() {
            return Err(ContinuousError::InvalidInput("grid needs >= 3 strictly increasing positive knots".into()));
        }
        Ok(Self { x })
    }

    /// `n` log-spaced knots from `lo` to `hi` inclusive.
    pub fn geometric(lo: f64, hi: f64, n: usize) -> Result<Self, ContinuousError> {
        if !(lo > 0.0 && hi > lo) || n < 3 {
            return Err(ContinuousError::InvalidInput(format!("bad geometric grid [{lo}, {hi}] x {n}")));
        }
        let (a, b) = (lo.ln(), hi.ln());
        let mut x: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
        x[0] = lo;
        x[n - 1] = hi;
        Self::new(x)
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Trapezoid weights on the knots.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let x = &self.x;
        let n = x.len();
        let mut w = vec![0.0; n];
        for i in 0..n - 1 {
            let h = 0.5 * (x[i + 1] - x[i]);
            w[i] += h;
            w[i + 1] += h;
        }
        w
    }

    /// Cell edges `e_0 = 0 < e_1 < ... < e_M`: geometric midpoints between
    /// knots, closed by the mirror of the last interior edge.
    pub fn cell_edges(&self) -> Vec<f64> {
        let x = &self.x;
        let n = x.len();
        let mut e = Vec::with_capacity(n + 1);
        e.push(0.0);
        for i in 1..n {
            e.push((x[i - 1] * x[i]).sqrt());
        }
        e.push(x[n - 1] * x[n - 1] / e[n - 1]);
        e
    }
}

/// Density sampled on a grid, normalized to unit trapezoid mass.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    pub grid: Grid,
    pub values: Vec<f64>,
    /// Normalizing constant of the unnormalized density over `(0, ∞)`,
    /// by adaptive quadrature, when one was computed.
    pub c: Option<f64>,
}

impl GridDensity {
    /// Normalizes nonnegative samples to unit trapezoid mass.
    pub fn from_samples(grid: Grid, samples: Vec<f64>, c: Option<f64>) -> Result<Self, ContinuousError> {
        if samples.len() != grid.len() || samples.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(ContinuousError::NumericalBlowup("density samples must be finite and >= 0".into()));
        }
        let mass: f64 = grid.trapezoid_weights().iter().zip(&samples).map(|(w, v)| w * v).sum();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(ContinuousError::NumericalBlowup(format!("grid mass {mass}")));
        }
        Ok(Self { values: samples.into_iter().map(|v| v / mass).collect(), grid, c })
    }

    pub fn mass(&self) -> f64 {
        self.grid.trapezoid_weights().iter().zip(&self.values).map(|(w, v)| w * v).sum()
    }

    /// Trapezoid-weighted L1 distance on a shared grid.
    pub fn l1(&self, other: &GridDensity) -> Result<f64, ContinuousError> {
        if self.grid != other.grid {
            return Err(crate::numerics::NumericsError::GridMismatch {
                left: self.grid.len(),
                right: other.grid.len(),
            }
            .into());
        }
        Ok(l1_distance_weighted(&self.values, &other.values, &self.grid.trapezoid_weights())?)
    }
}
