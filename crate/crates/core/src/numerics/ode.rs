//! Dormand–Prince 5(4) embedded Runge–Kutta integrator with
//! elementary step-size control. Steps are clamped so every requested snapshot time is
//! hit exactly.

use super::NumericsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub initial_step: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-13, max_steps: 1_000_000, initial_step: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeTrace {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

/// Integrate `y' = rhs(t, y)` from `t = 0` and record the state at each of
/// the (increasing, nonnegative) `times`.
pub fn integrate_adaptive<F>(
    mut rhs: F,
    y0: &[f64],
    times: &[f64],
    cfg: &StepperConfig,
) -> Result<OdeTrace, NumericsError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = 0.0;
    let mut h = cfg.initial_step.max(f64::MIN_POSITIVE);
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut trace =
        OdeTrace { times: Vec::with_capacity(times.len()), states: Vec::new(), accepted_steps: 0, rejected_steps: 0 };

    rhs(t, &y, &mut k[0]);
    let mut steps = 0usize;
    for &target in times {
        while t < target {
            if steps >= cfg.max_steps {
                return Err(NumericsError::StiffnessBudgetExceeded { max_steps: cfg.max_steps, t });
            }
            steps += 1;
            let remaining = target - t;
            let hit = h >= remaining;
            let step = if hit { remaining } else { h };

            for s in 1..7 {
                for i in 0..n {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += A[s][j] * kj[i];
                    }
                    stage[i] = y[i] + step * acc;
                }
                let (_, tail) = k.split_at_mut(s);
                rhs(t + C[s] * step, &stage, &mut tail[0]);
            }
            // stage 7 was evaluated at the 5th-order solution
            y_new.copy_from_slice(&stage);

            let mut err_sq = 0.0;
            for i in 0..n {
                let mut e = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    e += E[j] * kj[i];
                }
                let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
                let r = step * e / sc;
                err_sq += r * r;
            }
            let err = (err_sq / n.max(1) as f64).sqrt();
            if !err.is_finite() {
                return Err(NumericsError::NonFinite("ode error estimate"));
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                t = if hit { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                let (first, rest) = k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
                trace.accepted_steps += 1;
                // keep a clamped final step from shrinking the controller's h
                h = if hit { h.max(step * factor) } else { step * factor };
            } else {
                trace.rejected_steps += 1;
                h = step * factor.min(1.0);
            }
        }
        trace.times.push(target);
        trace.states.push(y.clone());
    }
    Ok(trace)
}
