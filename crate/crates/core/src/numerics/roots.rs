use super::NumericsError;

const MAX_ITER: usize = 400;

/// Root of a monotone `f` on `[lo, hi]` by a safeguarded Illinois/bisection
/// hybrid. Stops once `|f(x)| <= tol` or the bracket is narrower than
/// `tol * |x|`.
pub fn find_root_monotone<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64, NumericsError> {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let mut fb = f(b);
    if fa.is_nan() || fb.is_nan() {
        return Err(NumericsError::NonFinite("root bracket endpoint"));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(NumericsError::NoBracket { lo: a, hi: b, f_lo: fa, f_hi: fb });
    }
    // side of the last retained endpoint, for the Illinois halving
    let mut last_side = 0i8;
    let mut width = b - a;
    for _ in 0..MAX_ITER {
        let mut x = if fa.is_finite() && fb.is_finite() { b - fb * (b - a) / (fb - fa) } else { f64::NAN };
        let mid = 0.5 * (a + b);
        if !(x > a && x < b) {
            x = mid;
        }
        let fx = f(x);
        if fx.is_nan() {
            return Err(NumericsError::NonFinite("root iterate"));
        }
        if fx.abs() <= tol || fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if last_side == -1 {
                fb *= 0.5;
            }
            last_side = -1;
        } else {
            b = x;
            fb = fx;
            if last_side == 1 {
                fa *= 0.5;
            }
            last_side = 1;
        }
        let new_width = b - a;
        if new_width > 0.5 * width {
            // Secant stalled: force a bisection step.
            let m = 0.5 * (a + b);
            let fm = f(m);
            if fm.abs() <= tol || fm == 0.0 {
                return Ok(m);
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
            last_side = 0;
        }
        width = b - a;
        let c = 0.5 * (a + b);
        if width <= tol * c.abs().max(f64::MIN_POSITIVE) || width <= 4.0 * f64::EPSILON * c.abs() {
            return Ok(c);
        }
    }
    Ok(0.5 * (a + b))
}
