use super::{ContinuousError, Grid, GridDensity, Potential};
use crate::models::{ContinuousBurstModel, NuFn};
use crate::numerics::{log_add_exp, quad_adaptive_with, QuadConfig};
use crate::par::{for_each_chunk_mut, map_indexed, Exec};

/// Mass allowed to leave the grid from its smallest source knot.
const ESCAPE_TOL: f64 = 1e-4;

/// Post-jump transition operator discretized as a Markov chain on grid cells.
///
/// Cell `i` is `[e_i, e_{i+1})` around knot `x_i`, with `e_0 = 0` and the last
/// cell extended to infinity, so every column is a probability vector.
/// Entry `(i, j)` is the probability that the next post-jump state lands in
/// cell `i` given the current one equals `x_j`.
#[derive(Debug, Clone)]
pub struct KernelGrid {
    grid: Grid,
    edges: Vec<f64>,
    // column-major, cols[j * m + i]
    cols: Vec<f64>,
    exec: Exec,
}

impl KernelGrid {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn size(&self) -> usize {
        self.grid.len()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Nominal cell widths `e_{i+1} - e_i`.
    pub fn widths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let m = self.size();
        &self.cols[j * m..(j + 1) * m]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.cols[j * self.size() + i]
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.size()).map(|j| self.column(j).iter().sum()).collect()
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    /// `out = P m`.
    pub fn apply(&self, m: &[f64], out: &mut [f64]) {
        let n = self.size();
        let cols = &self.cols;
        for_each_chunk_mut(self.exec, out, 256, |start, chunk| {
            chunk.iter_mut().for_each(|v| *v = 0.0);
            let len = chunk.len();
            for (j, &mj) in m.iter().enumerate() {
                if mj == 0.0 {
                    continue;
                }
                let col = &cols[j * n + start..j * n + start + len];
                for (o, c) in chunk.iter_mut().zip(col) {
                    *o += mj * c;
                }
            }
        });
    }

    /// Cell masses of a density sampled at the knots.
    pub fn masses_of(&self, density: &[f64]) -> Vec<f64> {
        let w = self.widths();
        let m: Vec<f64> = density.iter().zip(&w).map(|(v, w)| v * w).collect();
        let s: f64 = m.iter().sum();
        m.into_iter().map(|v| v / s).collect()
    }

    /// Knot density from cell masses.
    pub fn density_of(&self, masses: &[f64]) -> Result<GridDensity, ContinuousError> {
        let samples = masses.iter().zip(self.widths()).map(|(m, w)| (m / w).max(0.0)).collect();
        GridDensity::from_samples(self.grid.clone(), samples, None)
    }
}

/// Transition operator for the model's burst kernel: closed-form cell
/// probabilities for separable (and exponential) kernels, the generic
/// quadrature route for tabulated rows.
pub fn kernel_matrix(model: &ContinuousBurstModel, grid: &Grid, exec: Exec) -> Result<KernelGrid, ContinuousError> {
    match model.burst().as_separable() {
        Some(nu) => separable_matrix(model, &nu, grid, exec),
        None => kernel_matrix_generic(model, grid, exec),
    }
}

fn separable_matrix(
    model: &ContinuousBurstModel,
    nu: &NuFn,
    grid: &Grid,
    exec: Exec,
) -> Result<KernelGrid, ContinuousError> {
    let x = grid.knots();
    let m = x.len();
    if x[m - 1] >= nu.support_end() {
        return Err(ContinuousError::InvalidInput("grid must lie inside the burst support".into()));
    }
    let pot = Potential::new(model);
    let edges = grid.cell_edges();

    // ln A at x_0, e_1, x_1, ..., e_{m-1}, x_{m-1}, where
    // A(p) = ∫_0^p (φ/γ) e^{-Q} / ν.
    let g = |z: f64| pot.hazard(z).ln() - pot.q(z) - nu.ln_nu(z);
    let mut pts = Vec::with_capacity(2 * m - 1);
    for i in 0..m {
        if i > 0 {
            pts.push(edges[i]);
        }
        pts.push(x[i]);
    }
    let first = ln_integral_from_zero(&g, pts[0])?;
    let panels = map_indexed(exec, pts.len() - 1, |k| ln_panel(&g, pts[k], pts[k + 1]));
    let mut ln_a = Vec::with_capacity(pts.len());
    ln_a.push(first);
    for p in panels {
        let prev = *ln_a.last().unwrap();
        ln_a.push(log_add_exp(prev, p?));
    }
    let ln_r = |p: f64, la: f64| (nu.ln_nu(p) + pot.q(p) + la).min(0.0);
    let knot_q: Vec<f64> = x.iter().map(|&v| pot.q(v)).collect();
    let knot_ln_nu: Vec<f64> = x.iter().map(|&v| nu.ln_nu(v)).collect();
    let knot_ln_r: Vec<f64> = (0..m).map(|i| ln_r(x[i], ln_a[2 * i])).collect();
    let edge_q: Vec<f64> = edges.iter().map(|&e| pot.q(e)).collect();
    let edge_ln_nu: Vec<f64> = edges.iter().map(|&e| nu.ln_nu(e)).collect();
    // 1 - R(e_i) for interior edges; e_0 never enters.
    let edge_one_minus_r: Vec<f64> =
        (0..=m).map(|i| if i == 0 || i == m { 0.0 } else { -ln_r(edges[i], ln_a[2 * i - 1]).exp_m1() }).collect();

    let escape = (edge_ln_nu[m] - knot_ln_nu[0] + knot_ln_r[0]).exp();
    if escape > ESCAPE_TOL {
        return Err(ContinuousError::GridTooNarrow { source_x: x[0], mass: escape });
    }

    let mut cols = vec![0.0; m * m];
    for_each_chunk_mut(exec, &mut cols, m, |start, col| {
        let j = start / m;
        let y = x[j];
        let cdf = |i: usize| -> f64 {
            if i == 0 {
                0.0
            } else if i == m {
                1.0
            } else if edges[i] <= y {
                (knot_q[j] - edge_q[i]).exp() * edge_one_minus_r[i]
            } else {
                1.0 - (edge_ln_nu[i] - knot_ln_nu[j] + knot_ln_r[j]).exp()
            }
        };
        let mut lo = 0.0;
        for (i, c) in col.iter_mut().enumerate() {
            let hi = cdf(i + 1);
            *c = (hi - lo).max(0.0);
            lo = hi;
        }
    });
    Ok(KernelGrid { grid: grid.clone(), edges, cols, exec })
}

// ln ∫_0^p e^{g}, integrated in t with z = p e^{-t}.
fn ln_integral_from_zero(g: &dyn Fn(f64) -> f64, p: f64) -> Result<f64, ContinuousError> {
    let shift = g(p) + p.ln();
    let cfg = QuadConfig { abs_tol: 0.0, rel_tol: 1e-13, max_panels: 4000 };
    let v = quad_adaptive_with(
        |t| {
            let z = p * (-t).exp();
            if z == 0.0 || !z.is_finite() {
                0.0
            } else {
                (g(z) + z.ln() - shift).exp()
            }
        },
        0.0,
        f64::INFINITY,
        &cfg,
    )?;
    Ok(v.ln() + shift)
}

fn ln_panel(g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<f64, ContinuousError> {
    let shift = g(0.5 * (a + b));
    let cfg = QuadConfig { abs_tol: 0.0, rel_tol: 1e-13, max_panels: 200 };
    let v = quad_adaptive_with(|z| (g(z) - shift).exp(), a, b, &cfg)?;
    Ok(v.ln() + shift)
}

/// Generic transition operator for any burst kernel: the pre-jump law is
/// integrated exactly over cells, each cell's burst launched from a
/// representative point. `O(M²)` through running column sums.
pub fn kernel_matrix_generic(
    model: &ContinuousBurstModel,
    grid: &Grid,
    exec: Exec,
) -> Result<KernelGrid, ContinuousError> {
    let pot = Potential::new(model);
    let burst = model.burst();
    let x = grid.knots();
    let m = x.len();
    let edges = grid.cell_edges();
    let edge_q: Vec<f64> = edges.iter().map(|&e| pot.q(e)).collect();
    let knot_q: Vec<f64> = x.iter().map(|&v| pot.q(v)).collect();

    let launch = |z: f64, row: &mut [f64]| {
        let mut lo = 0.0;
        for (i, r) in row.iter_mut().enumerate() {
            let hi = if i + 1 == m { 1.0 } else { burst.cdf(edges[i + 1] - z, z) };
            *r = (hi - lo).max(0.0);
            lo = hi;
        }
    };

    let escape = 1.0 - burst.cdf(edges[m] - x[0], x[0]);
    if escape > ESCAPE_TOL {
        return Err(ContinuousError::GridTooNarrow { source_x: x[0], mass: escape });
    }

    let mut cols = vec![0.0; m * m];
    // running Σ_{l<j} e^{Q(x_j)} (e^{-Q(e_{l+1})} - e^{-Q(e_l)}) T(x_l)
    let mut running = vec![0.0; m];
    let mut row = vec![0.0; m];
    for j in 0..m {
        if j > 0 {
            let f = (knot_q[j] - knot_q[j - 1]).exp();
            let w = (knot_q[j] - edge_q[j]).exp() - (knot_q[j] - edge_q[j - 1]).exp();
            launch(x[j - 1], &mut row);
            for (r, t) in running.iter_mut().zip(&row) {
                *r = f * *r + w * t;
            }
        }
        // the stretch [e_j, x_j] of the source's own cell
        let wp = -(knot_q[j] - edge_q[j]).exp_m1();
        let z = if j == 0 { 0.5 * x[0] } else { (edges[j] * x[j]).sqrt() };
        launch(z, &mut row);
        let col = &mut cols[j * m..(j + 1) * m];
        for ((c, r), t) in col.iter_mut().zip(&running).zip(&row) {
            *c = r + wp * t;
        }
    }
    Ok(KernelGrid { grid: grid.clone(), edges, cols, exec })
}

/// Convergence record of [`kernel_fixed_point`].
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FixedPointReport {
    pub iterations: usize,
    /// `‖P m − m‖₁` of the returned masses.
    pub residual: f64,
    /// Whether the Cesàro average, rather than the last iterate, met `tol`.
    pub used_cesaro: bool,
    /// Largest `|Σ m − 1|` seen over the iterates.
    pub mass_drift: f64,
}

#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub masses: Vec<f64>,
    pub density: GridDensity,
    pub report: FixedPointReport,
}

/// Invariant law of the post-jump chain by power iteration with Cesàro
/// averaging. Starts from uniform cell masses unless `start` is given.
pub fn kernel_fixed_point(
    kernel: &KernelGrid,
    start: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPoint, ContinuousError> {
    let n = kernel.size();
    let mut m: Vec<f64> = match start {
        Some(s) if s.len() == n => {
            let total: f64 = s.iter().sum();
            if !(total > 0.0) || s.iter().any(|v| !(*v >= 0.0)) {
                return Err(ContinuousError::InvalidInput("start masses must be >= 0 with positive sum".into()));
            }
            s.iter().map(|v| v / total).collect()
        }
        Some(_) => return Err(ContinuousError::InvalidInput("start length must match the grid".into())),
        None => vec![1.0 / n as f64; n],
    };
    let mut next = vec![0.0; n];
    let mut sum = vec![0.0; n];
    let mut avg = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut drift = 0.0f64;
    let mut best = f64::INFINITY;
    for it in 1..=max_iter {
        kernel.apply(&m, &mut next);
        let res: f64 = next.iter().zip(&m).map(|(a, b)| (a - b).abs()).sum();
        drift = drift.max((next.iter().sum::<f64>() - 1.0).abs());
        for (s, v) in sum.iter_mut().zip(&next) {
            *s += v;
        }
        std::mem::swap(&mut m, &mut next);
        best = best.min(res);
        if res <= tol {
            return finish(kernel, m, it, res, false, drift);
        }
        if it % 16 == 0 || it == max_iter {
            for (a, s) in avg.iter_mut().zip(&sum) {
                *a = s / it as f64;
            }
            kernel.apply(&avg, &mut scratch);
            let res_avg: f64 = scratch.iter().zip(&avg).map(|(a, b)| (a - b).abs()).sum();
            best = best.min(res_avg);
            if res_avg <= tol {
                return finish(kernel, avg, it, res_avg, true, drift);
            }
        }
    }
    Err(ContinuousError::NoConvergence { iterations: max_iter, residual: best })
}

fn finish(
    kernel: &KernelGrid,
    masses: Vec<f64>,
    iterations: usize,
    residual: f64,
    used_cesaro: bool,
    mass_drift: f64,
) -> Result<FixedPoint, ContinuousError> {
    let last = *masses.last().unwrap();
    if last > ESCAPE_TOL {
        let x = kernel.grid.knots();
        return Err(ContinuousError::GridTooNarrow { source_x: x[x.len() - 1], mass: last });
    }
    let density = kernel.density_of(&masses)?;
    Ok(FixedPoint { masses, density, report: FixedPointReport { iterations, residual, used_cesaro, mass_drift } })
}

/// Stationary density from the post-jump invariant density `v`:
/// `u(x) = (1/γ(x)) ∫_x^∞ e^{Q(y) - Q(x)} v(y) dy`, with `v` linear between
/// knots and zero past the last one.
pub fn density_from_fixed_point(model: &ContinuousBurstModel, v: &GridDensity) -> Result<GridDensity, ContinuousError> {
    let pot = Potential::new(model);
    let x = v.grid.knots();
    let n = x.len();
    let q: Vec<f64> = x.iter().map(|&p| pot.q(p)).collect();
    let cfg = QuadConfig { abs_tol: 0.0, rel_tol: 1e-12, max_panels: 200 };
    let mut tail = vec![0.0; n];
    for i in (0..n - 1).rev() {
        let (x0, x1, v0, v1) = (x[i], x[i + 1], v.values[i], v.values[i + 1]);
        let panel = quad_adaptive_with(
            |y| {
                let w = (y - x0) / (x1 - x0);
                (pot.q(y) - q[i]).exp() * (v0 * (1.0 - w) + v1 * w)
            },
            x0,
            x1,
            &cfg,
        )?;
        tail[i] = panel + (q[i + 1] - q[i]).exp() * tail[i + 1];
    }
    let samples: Vec<f64> = tail.iter().zip(x).map(|(t, &p)| t / model.gamma().eval(p)).collect();
    if samples[0] > 0.0 && samples[1] > 0.0 {
        let slope = (samples[1].ln() - samples[0].ln()) / (x[1].ln() - x[0].ln());
        if !(slope > -1.0) {
            return Err(ContinuousError::NotIntegrable(format!("log-log slope {slope} at the origin")));
        }
    }
    GridDensity::from_samples(v.grid.clone(), samples, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuous::{ln_unnormalized_density, stationary_density};
    use crate::models::{BurstKernel, DegradationFn, RateFn, TabulatedKernel};

    fn gamma_model(l0: f64) -> ContinuousBurstModel {
        ContinuousBurstModel::new(
            RateFn::Constant { rate: l0 },
            DegradationFn::LinearDecay { rate: 1.0 },
            BurstKernel::Exponential { mean: 1.0 },
        )
        .unwrap()
    }

    fn analytic_v(model: &ContinuousBurstModel, grid: &Grid) -> GridDensity {
        // v ∝ -ν' e^{-Q} = hazard_ν · ν e^{-Q}
        let pot = Potential::new(model);
        let nu = model.burst().as_separable().unwrap();
        let s = grid
            .knots()
            .iter()
            .map(|&x| nu.hazard(x) * (ln_unnormalized_density(&pot, &nu, x) + pot.gamma().eval(x).ln()).exp())
            .collect();
        GridDensity::from_samples(grid.clone(), s, None).unwrap()
    }

    #[test]
    fn columns_are_stochastic() {
        let grid = Grid::geometric(1e-6, 40.0, 400).unwrap();
        for model in [gamma_model(2.0), gamma_model(0.5)] {
            let k = kernel_matrix(&model, &grid, Exec::Parallel).unwrap();
            for s in k.column_sums() {
                assert!((s - 1.0).abs() < 1e-12, "{s}");
            }
        }
    }

    #[test]
    fn fixed_point_matches_analytic() {
        let grid = Grid::geometric(1e-6, 40.0, 1024).unwrap();
        let model = gamma_model(2.0);
        let k = kernel_matrix(&model, &grid, Exec::Parallel).unwrap();
        let fp = kernel_fixed_point(&k, None, 1e-12, 2000).unwrap();
        let v = analytic_v(&model, &grid);
        assert!(fp.density.l1(&v).unwrap() < 5e-3);
        assert!(fp.report.mass_drift < 1e-9);
        let u = density_from_fixed_point(&model, &fp.density).unwrap();
        let exact = stationary_density(&model, &grid).unwrap();
        assert!(u.l1(&exact).unwrap() < 1e-2, "{}", u.l1(&exact).unwrap());
    }

    #[test]
    fn generic_route_agrees_with_separable() {
        let grid = Grid::geometric(1e-5, 40.0, 600).unwrap();
        let model = gamma_model(2.0);
        let a = kernel_matrix(&model, &grid, Exec::Parallel).unwrap();
        let b = kernel_matrix_generic(&model, &grid, Exec::Parallel).unwrap();
        for s in b.column_sums() {
            assert!((s - 1.0).abs() < 1e-12);
        }
        let fa = kernel_fixed_point(&a, None, 1e-12, 2000).unwrap();
        let fb = kernel_fixed_point(&b, None, 1e-12, 2000).unwrap();
        assert!(fa.density.l1(&fb.density).unwrap() < 2e-2, "{}", fa.density.l1(&fb.density).unwrap());
    }

    #[test]
    fn tabulated_rows_run() {
        let xs: Vec<f64> = (0..=200).map(|i| i as f64 * 0.1).collect();
        let raw: Vec<f64> = xs.iter().map(|x| (-x).exp()).collect();
        let mass: f64 = raw.windows(2).map(|w| 0.05 * (w[0] + w[1])).sum();
        let row: Vec<f64> = raw.iter().map(|v| v / mass).collect();
        let tab = TabulatedKernel::new(xs, vec![0.0], vec![row]).unwrap();
        let model = ContinuousBurstModel::new(
            RateFn::Constant { rate: 2.0 },
            DegradationFn::LinearDecay { rate: 1.0 },
            BurstKernel::Tabulated(tab),
        )
        .unwrap();
        let grid = Grid::geometric(1e-5, 40.0, 500).unwrap();
        let k = kernel_matrix(&model, &grid, Exec::Sequential).unwrap();
        let fp = kernel_fixed_point(&k, None, 1e-11, 2000).unwrap();
        let v = analytic_v(&gamma_model(2.0), &grid);
        assert!(fp.density.l1(&v).unwrap() < 3e-2);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let grid = Grid::geometric(1e-6, 40.0, 300).unwrap();
        let model = gamma_model(1.5);
        let a = kernel_matrix(&model, &grid, Exec::Sequential).unwrap();
        let b = kernel_matrix(&model, &grid, Exec::Parallel).unwrap();
        assert_eq!(a.cols, b.cols);
        let fa = kernel_fixed_point(&a, None, 1e-12, 2000).unwrap();
        let fb = kernel_fixed_point(&b, None, 1e-12, 2000).unwrap();
        assert_eq!(fa.masses, fb.masses);
    }

    #[test]
    fn narrow_grid_is_rejected() {
        let grid = Grid::geometric(1e-6, 0.5, 100).unwrap();
        assert!(matches!(
            kernel_matrix(&gamma_model(2.0), &grid, Exec::Sequential),
            Err(ContinuousError::GridTooNarrow { .. })
        ));
    }
}
