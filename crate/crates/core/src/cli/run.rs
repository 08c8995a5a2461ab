//! Runs one configured experiment (or a one-parameter sweep of it) and
//! writes CSV outputs plus `summary.json` into an output directory.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use super::config::{ConfigError, ExperimentConfig, Mode};
use crate::continuous::{
    auto_grid, count_modes_continuous, density_from_fixed_point, ergodicity_scan, kernel_fixed_point, kernel_matrix,
    kernel_matrix_generic, phi_from_grid_density, simulate_pdmp, simulate_pdmp_replicas, stationary_cdf,
    stationary_density, BoundaryBehavior, ContinuousError, Grid, Histogram,
};
use crate::discrete::{
    evolve_master, family_pmf, mean_identity_residual, named_family_params, simulate_replicas, stationary_pmf_general,
    stationary_pmf_general_with, stationary_pmf_geometric, DiscreteError, FamilyParams, Pmf, DEFAULT_TAIL_TOL,
};
use crate::io::{fmt_f64, write_csv, xy_rows};
use crate::models::{BurstKernel, BurstPmf, ContinuousBurstModel};
use crate::numerics::{RngStream, StepperConfig};
use crate::par::{map_indexed, Exec};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl RunError {
    /// 1 for configuration and I/O problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(_) => 1,
            RunError::Numeric(_) => 2,
        }
    }
}

impl From<DiscreteError> for RunError {
    fn from(e: DiscreteError) -> Self {
        RunError::Numeric(e.to_string())
    }
}

impl From<ContinuousError> for RunError {
    fn from(e: ContinuousError) -> Self {
        RunError::Numeric(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub mode: String,
    pub wall_time_s: f64,
    pub seed: Option<u64>,
    pub scalars: BTreeMap<String, f64>,
    pub labels: BTreeMap<String, String>,
    pub files: Vec<String>,
    /// Canonical rendering of the config that produced this run.
    pub config: String,
}

struct Outputs<'a> {
    dir: &'a Path,
    files: Vec<String>,
    scalars: BTreeMap<String, f64>,
    labels: BTreeMap<String, String>,
    seed: Option<u64>,
}

impl Outputs<'_> {
    fn csv<I, S>(&mut self, name: &str, header: &str, rows: I) -> Result<(), RunError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        write_csv(&self.dir.join(name), header, rows)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn scalar(&mut self, name: &str, value: f64) {
        self.scalars.insert(name.to_string(), value);
    }

    fn label(&mut self, name: &str, value: impl Into<String>) {
        self.labels.insert(name.to_string(), value.into());
    }
}

/// Runs `cfg` and writes everything into `out`. `exec` controls the
/// data-parallel inner loops; outputs do not depend on it.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path, exec: Exec) -> Result<RunSummary, RunError> {
    let start = Instant::now();
    fs::create_dir_all(out)?;
    let mut o = Outputs { dir: out, files: Vec::new(), scalars: BTreeMap::new(), labels: BTreeMap::new(), seed: None };
    match cfg.mode() {
        Mode::StationaryDiscrete => stationary_discrete(cfg, &mut o)?,
        Mode::EvolveMaster => evolve(cfg, &mut o)?,
        Mode::SimulateDiscrete => simulate_discrete(cfg, &mut o, exec)?,
        Mode::StationaryContinuous => stationary_continuous(cfg, &mut o)?,
        Mode::SimulatePdmp => simulate_continuous(cfg, &mut o, exec)?,
        Mode::KernelFixedPoint => fixed_point(cfg, &mut o, exec)?,
        Mode::InvertPhi => invert_phi(cfg, &mut o)?,
        Mode::Modes if cfg.is_discrete() => modes_discrete(cfg, &mut o)?,
        Mode::Modes => modes_continuous(cfg, &mut o)?,
        Mode::Ergodicity => ergodicity(cfg, &mut o)?,
    }
    let summary = RunSummary {
        mode: cfg.mode().as_str().to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        seed: o.seed,
        scalars: o.scalars,
        labels: o.labels,
        files: o.files,
        config: cfg.render(),
    };
    let json = serde_json::to_string_pretty(&summary).map_err(io::Error::other)?;
    fs::write(out.join("summary.json"), json + "\n")?;
    Ok(summary)
}

fn pmf_rows(p: &Pmf) -> impl Iterator<Item = String> + '_ {
    p.values().iter().enumerate().map(|(n, v)| format!("{n},{}", fmt_f64(*v)))
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn stationary_discrete(cfg: &ExperimentConfig, o: &mut Outputs) -> Result<(), RunError> {
    let model = cfg.discrete_model()?;
    let n_max = cfg.int("numeric.n_max", 500) as usize;
    // reports NotNormalizable for a supercritical negative binomial before the tail check does
    let family = named_family_params(&model)?;
    let pmf = stationary_pmf_general_with(&model, n_max, cfg.num("numeric.tail_tol", DEFAULT_TAIL_TOL))?;
    o.csv("pmf.csv", "n,p", pmf_rows(&pmf))?;
    o.scalar("mass", pmf.mass());
    o.scalar("mean", pmf.mean());
    o.scalar("p0", pmf.values()[0]);
    o.scalar("mean_identity_residual", mean_identity_residual(&model, &pmf));
    if !matches!(family, FamilyParams::None) {
        let closed = family_pmf(&family, n_max)?;
        o.scalar("closed_form_sup_diff", sup_diff(pmf.values(), &closed));
    }
    o.label("family", family_name(&family));
    if matches!(model.burst(), BurstPmf::Geometric { .. }) {
        if let Ok(g) = stationary_pmf_geometric(&model, n_max) {
            o.scalar("geometric_recurrence_sup_diff", sup_diff(pmf.values(), g.values()));
        }
    }
    Ok(())
}

fn family_name(f: &FamilyParams) -> &'static str {
    match f {
        FamilyParams::NegativeBinomial { .. } => "negative-binomial",
        FamilyParams::Hypergeometric { .. } => "hypergeometric",
        FamilyParams::GeneralizedHypergeometric { .. } => "generalized-hypergeometric",
        FamilyParams::None => "none",
    }
}

fn evolve(cfg: &ExperimentConfig, o: &mut Outputs) -> Result<(), RunError> {
    let model = cfg.discrete_model()?;
    let n_max = cfg.int("numeric.n_max", 500) as usize;
    let n0 = cfg.int("numeric.n0", 0) as usize;
    if n0 > n_max {
        return Err(ConfigError::Validation {
            key: "numeric.n0".into(),
            message: "must not exceed numeric.n_max".into(),
        }
        .into());
    }
    let stepper = StepperConfig {
        rel_tol: cfg.num("numeric.rel_tol", 1e-10),
        abs_tol: cfg.num("numeric.abs_tol", 1e-13),
        max_steps: cfg.int("numeric.max_steps", 1_000_000) as usize,
        ..StepperConfig::default()
    };
    let trace = evolve_master(
        &model,
        &Pmf::delta(n0, n_max),
        cfg.num("numeric.t_end", 30.0),
        cfg.int("numeric.snapshots", 31) as usize,
        &stepper,
    )?;
    o.csv("trace.csv", "t,l1_distance", xy_rows(&trace.times, &trace.l1_to_stationary))?;
    let last = trace.pmfs.last().expect("at least two snapshots");
    o.csv("pmf.csv", "n,p", pmf_rows(last))?;
    o.scalar("final_l1", *trace.l1_to_stationary.last().unwrap_or(&f64::NAN));
    o.scalar("max_mass_error", trace.pmfs.iter().map(|p| (p.mass() - 1.0).abs()).fold(0.0, f64::max));
    o.scalar("accepted_steps", trace.accepted_steps as f64);
    o.scalar("rejected_steps", trace.rejected_steps as f64);
    Ok(())
}

fn simulate_discrete(cfg: &ExperimentConfig, o: &mut Outputs, exec: Exec) -> Result<(), RunError> {
    let model = cfg.discrete_model()?;
    let n_max = cfg.int("numeric.n_max", 500) as usize;
    let seed = cfg.int("numeric.seed", 0);
    o.seed = Some(seed);
    let summary = simulate_replicas(
        &model,
        cfg.int("numeric.n0", 0),
        cfg.int("numeric.jumps", 1_000_000) as usize,
        seed,
        cfg.int("numeric.replicas", 1) as usize,
        exec,
    )?;
    let emp = summary.empirical(n_max);
    o.csv("pmf.csv", "n,p", pmf_rows(&emp))?;
    o.scalar("total_time", summary.total_time);
    o.scalar("absorbed_replicas", summary.absorbed as f64);
    o.scalar("mean", emp.mean());
    if let Ok(exact) = stationary_pmf_general(&model, n_max) {
        o.scalar("l1_to_stationary", emp.l1(&exact).map_err(|e| RunError::Numeric(e.to_string()))?);
    }
    Ok(())
}

fn grid_for(cfg: &ExperimentConfig, model: &ContinuousBurstModel, default_knots: u64) -> Result<Grid, RunError> {
    Ok(auto_grid(
        model,
        cfg.int("numeric.grid_knots", default_knots) as usize,
        cfg.num_opt("numeric.grid_min"),
        cfg.num_opt("numeric.grid_max"),
    )?)
}

fn stationary_continuous(cfg: &ExperimentConfig, o: &mut Outputs) -> Result<(), RunError> {
    let model = cfg.continuous_model()?;
    let grid = grid_for(cfg, &model, 2048)?;
    let u = stationary_density(&model, &grid)?;
    o.csv("density.csv", "x,u", xy_rows(grid.knots(), &u.values))?;
    o.scalar("normalizing_constant", u.c.unwrap_or(f64::NAN));
    o.scalar("x_ref", model.x_ref());
    o.scalar("grid_min", grid.knots()[0]);
    o.scalar("grid_max", grid.knots()[grid.len() - 1]);
    Ok(())
}

fn simulate_continuous(cfg: &ExperimentConfig, o: &mut Outputs, exec: Exec) -> Result<(), RunError> {
    let model = cfg.continuous_model()?;
    let seed = cfg.int("numeric.seed", 0);
    o.seed = Some(seed);
    let m1 = model.burst().mean(0.0);
    let y0 = cfg.num("numeric.y0", if m1.is_finite() && m1 > 0.0 { m1 } else { 1.0 });
    let jumps = cfg.int("numeric.jumps", 100_000) as usize;
    let hist_max = match cfg.num_opt("numeric.hist_max") {
        Some(h) => h,
        None => {
            let g = auto_grid(&model, 16, None, None)?;
            g.knots()[g.len() - 1]
        }
    };
    let bins = cfg.int("numeric.bins", 64) as usize;
    let empty = Histogram::new(0.0, hist_max, bins)?;
    let hist = simulate_pdmp_replicas(&model, y0, jumps, seed, cfg.int("numeric.replicas", 1) as usize, &empty, exec)?;

    // the recorded path is a prefix of replica 0
    let record = (cfg.int("numeric.record", 10_000) as usize).min(jumps);
    if record > 0 {
        let mut rng = RngStream::new(seed, 0);
        let run = simulate_pdmp(&model, y0, record, &mut rng, true, None)?;
        o.csv(
            "trajectory.csv",
            "k,t,y_pre,y_post",
            run.jumps.iter().map(|j| format!("{},{},{},{}", j.k, fmt_f64(j.t), fmt_f64(j.y_pre), fmt_f64(j.y_post))),
        )?;
    }
    let centers: Vec<f64> = (0..bins).map(|i| hist.lo + (i as f64 + 0.5) * hist.width).collect();
    o.csv("histogram.csv", "x,u", xy_rows(&centers, &hist.densities()))?;
    o.scalar("total_time", hist.total);
    o.scalar("outside_mass", hist.outside());
    if model.burst().as_separable().is_some() {
        let grid = auto_grid(&model, 512, None, None)?;
        let cdf = stationary_cdf(&model, &grid)?;
        o.scalar("l1_to_stationary", hist.l1_against(cdf));
    }
    Ok(())
}

fn fixed_point(cfg: &ExperimentConfig, o: &mut Outputs, exec: Exec) -> Result<(), RunError> {
    let model = cfg.continuous_model()?;
    let grid = grid_for(cfg, &model, 1024)?;
    let kernel = match model.burst() {
        BurstKernel::Tabulated(_) => kernel_matrix_generic(&model, &grid, exec)?,
        _ => kernel_matrix(&model, &grid, exec)?,
    };
    let fp = kernel_fixed_point(
        &kernel,
        None,
        cfg.num("numeric.tol", 1e-12),
        cfg.int("numeric.max_iter", 100_000) as usize,
    )?;
    let u = density_from_fixed_point(&model, &fp.density)?;
    o.csv("post_jump.csv", "x,v", xy_rows(grid.knots(), &fp.density.values))?;
    o.csv("density.csv", "x,u", xy_rows(grid.knots(), &u.values))?;
    o.scalar("iterations", fp.report.iterations as f64);
    o.scalar("residual", fp.report.residual);
    o.scalar("used_cesaro", if fp.report.used_cesaro { 1.0 } else { 0.0 });
    o.scalar("mass_drift", fp.report.mass_drift);
    if let Ok(exact) = stationary_density(&model, &grid) {
        o.scalar("l1_to_stationary", u.l1(&exact)?);
    }
    Ok(())
}

fn invert_phi(cfg: &ExperimentConfig, o: &mut Outputs) -> Result<(), RunError> {
    let model = cfg.continuous_model()?;
    let grid = grid_for(cfg, &model, 2048)?;
    let u = stationary_density(&model, &grid)?;
    let est = phi_from_grid_density(model.gamma(), model.burst(), &u, cfg.num("numeric.floor", 1e-10))?;
    let (xs, phis): (Vec<f64>, Vec<f64>) = est.iter().copied().unzip();
    o.csv("phi.csv", "x,phi", xy_rows(&xs, &phis))?;
    let rel = est
        .iter()
        .map(|&(x, p)| {
            let exact = model.phi().eval(x);
            (p - exact).abs() / exact.abs().max(1e-300)
        })
        .fold(0.0, f64::max);
    o.scalar("max_rel_error", rel);
    o.scalar("points", est.len() as f64);
    Ok(())
}

fn modes_discrete(cfg: &ExperimentConfig, o: &mut Outputs) -> Result<(), RunError> {
    let model = cfg.discrete_model()?;
    let report = crate::discrete::count_modes_discrete(&model, cfg.int("numeric.n_max", 500) as usize)?;
    let mut rows: Vec<(usize, &str)> = report.maxima.iter().map(|&n| (n, "max")).collect();
    rows.extend(report.minima.iter().map(|&n| (n, "min")));
    rows.sort();
    o.csv("modes.csv", "x_root,kind", rows.iter().map(|(n, k)| format!("{},{k}", fmt_f64(*n as f64))))?;
    o.scalar("maxima", report.maxima.len() as f64);
    o.scalar("minima", report.minima.len() as f64);
    o.scalar("boundary_mode", if report.boundary_mode { 1.0 } else { 0.0 });
    Ok(())
}

fn modes_continuous(cfg: &ExperimentConfig, o: &mut Outputs) -> Result<(), RunError> {
    let model = cfg.continuous_model()?;
    let (lo, hi) = match (cfg.num_opt("numeric.window_lo"), cfg.num_opt("numeric.window_hi")) {
        (Some(lo), Some(hi)) => (lo, hi),
        (lo, hi) => {
            let g = auto_grid(&model, 16, lo, None)?;
            (lo.unwrap_or(g.knots()[0]), hi.unwrap_or(g.knots()[g.len() - 1]))
        }
    };
    let report = count_modes_continuous(&model, lo, hi, cfg.int("numeric.probes", 2048) as usize)?;
    o.csv("modes.csv", "x_root,kind", report.roots.iter().map(|(x, k)| format!("{},{}", fmt_f64(*x), k.as_str())))?;
    o.scalar("maxima", report.maxima().len() as f64);
    o.scalar("roots", report.roots.len() as f64);
    o.scalar("window_lo", lo);
    o.scalar("window_hi", hi);
    let boundary = match report.boundary {
        BoundaryBehavior::Divergent => "divergent",
        BoundaryBehavior::Finite => "finite",
        BoundaryBehavior::Vanishing => "vanishing",
    };
    o.label("boundary", boundary);
    Ok(())
}

fn ergodicity(cfg: &ExperimentConfig, o: &mut Outputs) -> Result<(), RunError> {
    let model = cfg.continuous_model()?;
    let probes: Vec<f64> = match cfg.list("numeric.margin_probes") {
        Some(v) => v.to_vec(),
        None => (0..=60).map(|i| 10f64.powf(-3.0 + 0.1 * i as f64)).collect(),
    };
    let scan = ergodicity_scan(&model, &probes);
    o.csv(
        "margins.csv",
        "y,margin,running_sup",
        scan.iter().map(|p| format!("{},{},{}", fmt_f64(p.y), fmt_f64(p.margin), fmt_f64(p.running_sup))),
    )?;
    o.scalar("sup_margin", scan.last().map_or(f64::NAN, |p| p.running_sup));
    o.scalar("min_margin", scan.iter().map(|p| p.margin).fold(f64::INFINITY, f64::min));
    Ok(())
}

/// `section.key=start:stop:count`, `count` evenly spaced values inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub key: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl FromStr for SweepSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: &str| ConfigError::Validation { key: "--sweep".into(), message: format!("`{s}`: {m}") };
        let (key, range) = s.split_once('=').ok_or_else(|| bad("expected section.key=start:stop:count"))?;
        let parts: Vec<&str> = range.split(':').collect();
        let [a, b, n] = parts[..] else { return Err(bad("expected start:stop:count")) };
        let start: f64 = a.trim().parse().map_err(|_| bad("bad start"))?;
        let stop: f64 = b.trim().parse().map_err(|_| bad("bad stop"))?;
        let count: usize = n.trim().parse().map_err(|_| bad("bad count"))?;
        if count == 0 || !start.is_finite() || !stop.is_finite() {
            return Err(bad("need finite bounds and count >= 1"));
        }
        Ok(Self { key: key.trim().to_string(), start, stop, count })
    }
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        (0..self.count).map(|i| self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub value: f64,
    /// 0, 1 or 2 as for a single run.
    pub status: i32,
    pub dir: PathBuf,
    pub summary: Option<RunSummary>,
    pub error: Option<String>,
}

/// Runs one experiment per sweep value (in parallel under `exec`) into
/// `out/point_NNNN/`, then writes `out/sweep.csv` in index order.
pub fn run_sweep(
    cfg: &ExperimentConfig,
    spec: &SweepSpec,
    out: &Path,
    exec: Exec,
) -> Result<Vec<SweepPoint>, RunError> {
    // catches an unknown or mistyped key before any work starts
    let mut probe = cfg.clone();
    set_swept(&mut probe, &spec.key, spec.start)?;
    fs::create_dir_all(out)?;
    let values = spec.values();
    let points = map_indexed(exec, values.len(), |i| {
        let value = values[i];
        let dir = out.join(format!("point_{i:04}"));
        let mut point_cfg = cfg.clone();
        let result = set_swept(&mut point_cfg, &spec.key, value)
            .map_err(RunError::from)
            .and_then(|_| run_experiment(&point_cfg, &dir, Exec::Sequential));
        match result {
            Ok(s) => SweepPoint { index: i, value, status: 0, dir, summary: Some(s), error: None },
            Err(e) => {
                SweepPoint { index: i, value, status: e.exit_code(), dir, summary: None, error: Some(e.to_string()) }
            }
        }
    });
    let mut names: Vec<&String> =
        points.iter().filter_map(|p| p.summary.as_ref()).flat_map(|s| s.scalars.keys()).collect();
    names.sort();
    names.dedup();
    let mut header = String::from("index,value,status");
    for n in &names {
        header.push(',');
        header.push_str(n);
    }
    let rows = points.iter().map(|p| {
        let mut row = format!("{},{},{}", p.index, fmt_f64(p.value), p.status);
        for n in &names {
            row.push(',');
            if let Some(v) = p.summary.as_ref().and_then(|s| s.scalars.get(*n)) {
                row.push_str(&fmt_f64(*v));
            }
        }
        row
    });
    write_csv(&out.join("sweep.csv"), &header, rows)?;
    Ok(points)
}

fn set_swept(cfg: &mut ExperimentConfig, key: &str, value: f64) -> Result<(), ConfigError> {
    if super::config::is_integer_key(key) {
        if value < 0.0 || value.fract() != 0.0 {
            return Err(ConfigError::Validation {
                key: key.into(),
                message: format!("sweep value {value} is not an integer"),
            });
        }
        cfg.set(key, &format!("{}", value as u64))
    } else {
        cfg.set(key, &format!("{value:?}"))
    }
}
