//! Experiment configuration: a line-oriented `section.key = value` format.
//!
//! Every key has a fixed type. Keys that the selected forms or mode never read
//! are rejected instead of silently ignored, so a typo cannot change a run.
//! [`ExperimentConfig::render`] produces a canonical form (sorted keys,
//! shortest round-trip numbers) and parsing the render gives the same config.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::models::{
    BurstKernel, BurstPmf, ContinuousBurstModel, DegradationFn, DegradationSeq, DiscreteBurstModel, HillParams,
    ModelError, NuFn, RateFn, RateSeq,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid `{key}`: {message}")]
    Validation { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation { key: key.to_string(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, clap::ValueEnum)]
pub enum Mode {
    StationaryDiscrete,
    StationaryContinuous,
    EvolveMaster,
    SimulateDiscrete,
    SimulatePdmp,
    KernelFixedPoint,
    InvertPhi,
    Modes,
    Ergodicity,
}

impl Mode {
    pub const ALL: [Mode; 9] = [
        Mode::StationaryDiscrete,
        Mode::StationaryContinuous,
        Mode::EvolveMaster,
        Mode::SimulateDiscrete,
        Mode::SimulatePdmp,
        Mode::KernelFixedPoint,
        Mode::InvertPhi,
        Mode::Modes,
        Mode::Ergodicity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::StationaryDiscrete => "stationary-discrete",
            Mode::StationaryContinuous => "stationary-continuous",
            Mode::EvolveMaster => "evolve-master",
            Mode::SimulateDiscrete => "simulate-discrete",
            Mode::SimulatePdmp => "simulate-pdmp",
            Mode::KernelFixedPoint => "kernel-fixed-point",
            Mode::InvertPhi => "invert-phi",
            Mode::Modes => "modes",
            Mode::Ergodicity => "ergodicity",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.as_str() == s)
    }

    /// `Some(true)` for discrete-only modes, `Some(false)` for
    /// continuous-only, `None` when both apply.
    fn wants_discrete(self) -> Option<bool> {
        match self {
            Mode::StationaryDiscrete | Mode::EvolveMaster | Mode::SimulateDiscrete => Some(true),
            Mode::Modes => None,
            _ => Some(false),
        }
    }

    fn numeric_keys(self, discrete: bool) -> &'static [&'static str] {
        match self {
            Mode::StationaryDiscrete => &["n_max", "tail_tol"],
            Mode::EvolveMaster => &["n_max", "t_end", "snapshots", "rel_tol", "abs_tol", "max_steps", "n0"],
            Mode::SimulateDiscrete => &["n_max", "seed", "jumps", "replicas", "n0"],
            Mode::StationaryContinuous => &["grid_knots", "grid_min", "grid_max"],
            Mode::SimulatePdmp => &["seed", "jumps", "replicas", "y0", "bins", "hist_max", "record"],
            Mode::KernelFixedPoint => &["grid_knots", "grid_min", "grid_max", "tol", "max_iter"],
            Mode::InvertPhi => &["grid_knots", "grid_min", "grid_max", "floor"],
            Mode::Modes if discrete => &["n_max"],
            Mode::Modes => &["window_lo", "window_hi", "probes"],
            Mode::Ergodicity => &["margin_probes"],
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Num,
    Int,
    Text,
    List,
}

const SCHEMA: &[(&str, Kind)] = &[
    ("mode", Kind::Text),
    ("rate.form", Kind::Text),
    ("rate.lambda0", Kind::Num),
    ("rate.lambda1", Kind::Num),
    ("rate.lambda2", Kind::Num),
    ("rate.cutoff", Kind::Int),
    ("rate.values", Kind::List),
    ("rate.scale", Kind::Num),
    ("rate.denom_const", Kind::Num),
    ("rate.denom_coeff", Kind::Num),
    ("rate.numer_coeff", Kind::Num),
    ("rate.exponent", Kind::Num),
    ("degradation.form", Kind::Text),
    ("degradation.gamma", Kind::Num),
    ("degradation.values", Kind::List),
    ("burst.form", Kind::Text),
    ("burst.b", Kind::Num),
    ("burst.values", Kind::List),
    ("burst.nu", Kind::Text),
    ("burst.alpha", Kind::Num),
    ("burst.beta", Kind::Num),
    ("potential.x_ref", Kind::Num),
    ("numeric.n_max", Kind::Int),
    ("numeric.tail_tol", Kind::Num),
    ("numeric.t_end", Kind::Num),
    ("numeric.snapshots", Kind::Int),
    ("numeric.rel_tol", Kind::Num),
    ("numeric.abs_tol", Kind::Num),
    ("numeric.max_steps", Kind::Int),
    ("numeric.n0", Kind::Int),
    ("numeric.seed", Kind::Int),
    ("numeric.jumps", Kind::Int),
    ("numeric.replicas", Kind::Int),
    ("numeric.y0", Kind::Num),
    ("numeric.bins", Kind::Int),
    ("numeric.hist_max", Kind::Num),
    ("numeric.record", Kind::Int),
    ("numeric.grid_knots", Kind::Int),
    ("numeric.grid_min", Kind::Num),
    ("numeric.grid_max", Kind::Num),
    ("numeric.tol", Kind::Num),
    ("numeric.max_iter", Kind::Int),
    ("numeric.floor", Kind::Num),
    ("numeric.window_lo", Kind::Num),
    ("numeric.window_hi", Kind::Num),
    ("numeric.probes", Kind::Int),
    ("numeric.margin_probes", Kind::List),
    ("output.dir", Kind::Text),
];

fn kind_of(key: &str) -> Option<Kind> {
    SCHEMA.iter().find(|(k, _)| *k == key).map(|&(_, t)| t)
}

/// Whether `key` takes a nonnegative integer value.
pub fn is_integer_key(key: &str) -> bool {
    kind_of(key) == Some(Kind::Int)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(u64),
    Text(String),
    List(Vec<f64>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // Debug is the shortest string that parses back to the same f64
            Value::Num(x) => write!(f, "{x:?}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Text(s) => f.write_str(s),
            Value::List(v) => {
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x:?}")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_num(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_value(key: &str, raw: &str) -> Result<Value, String> {
    let kind = kind_of(key).ok_or_else(|| format!("unknown key `{key}`"))?;
    if raw.is_empty() {
        return Err(format!("`{key}` has an empty value"));
    }
    Ok(match kind {
        Kind::Num => Value::Num(parse_num(raw)?),
        Kind::Int => Value::Int(raw.parse().map_err(|_| format!("`{raw}` is not a nonnegative integer"))?),
        Kind::Text => {
            if raw.chars().any(char::is_whitespace) {
                return Err(format!("`{raw}` contains whitespace"));
            }
            Value::Text(raw.to_string())
        }
        Kind::List => Value::List(raw.split(',').map(|t| parse_num(t.trim())).collect::<Result<_, _>>()?),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    mode: Mode,
    values: BTreeMap<String, Value>,
}

impl ExperimentConfig {
    /// Parses and validates; the file must contain a `mode` line.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::parse_inner(text, None)
    }

    /// Parses and validates for `mode`. A `mode` line in the file, if present,
    /// must agree.
    pub fn parse_for(text: &str, mode: Mode) -> Result<Self, ConfigError> {
        Self::parse_inner(text, Some(mode))
    }

    fn parse_inner(text: &str, mode: Option<Mode>) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, raw)) = content.split_once('=') else {
                return Err(ConfigError::Parse { line, message: format!("expected `key = value`, got `{content}`") });
            };
            let (key, raw) = (key.trim(), raw.trim());
            let value = parse_value(key, raw).map_err(|message| ConfigError::Parse { line, message })?;
            if values.insert(key.to_string(), value).is_some() {
                return Err(ConfigError::Parse { line, message: format!("duplicate key `{key}`") });
            }
        }
        let file_mode = match values.get("mode") {
            Some(Value::Text(s)) => Some(Mode::parse(s).ok_or_else(|| invalid("mode", format!("unknown mode `{s}`")))?),
            _ => None,
        };
        let mode = match (mode, file_mode) {
            (Some(a), Some(b)) if a != b => {
                return Err(invalid("mode", format!("file says `{b}` but `{a}` was requested")));
            }
            (Some(m), _) | (None, Some(m)) => m,
            (None, None) => return Err(invalid("mode", "missing")),
        };
        values.insert("mode".into(), Value::Text(mode.as_str().into()));
        let cfg = Self { mode, values };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Canonical text: one `key = value` line per key in sorted order.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.values {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.values.get(key)
    }

    /// Replaces (or adds) one key and revalidates.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), ConfigError> {
        if key == "mode" {
            return Err(invalid("mode", "cannot be overridden"));
        }
        let value = parse_value(key, raw.trim()).map_err(|m| invalid(key, m))?;
        let mut next = self.clone();
        next.values.insert(key.to_string(), value);
        next.validate()?;
        *self = next;
        Ok(())
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        match self.values.get(key) {
            Some(Value::Text(s)) => Some(s),
            _ => None,
        }
    }

    pub fn num_opt(&self, key: &str) -> Option<f64> {
        match self.values.get(key) {
            Some(Value::Num(x)) => Some(*x),
            _ => None,
        }
    }

    pub fn num(&self, key: &str, default: f64) -> f64 {
        self.num_opt(key).unwrap_or(default)
    }

    pub fn int(&self, key: &str, default: u64) -> u64 {
        match self.values.get(key) {
            Some(Value::Int(n)) => *n,
            _ => default,
        }
    }

    pub fn list(&self, key: &str) -> Option<&[f64]> {
        match self.values.get(key) {
            Some(Value::List(v)) => Some(v),
            _ => None,
        }
    }

    /// Whether the burst form makes this a discrete-model config.
    pub fn is_discrete(&self) -> bool {
        matches!(self.text("burst.form"), Some("geometric" | "tabulated"))
    }

    fn require_num(&self, key: &str) -> Result<f64, ConfigError> {
        self.num_opt(key).ok_or_else(|| invalid(key, "required by the selected form"))
    }

    fn require_list(&self, key: &str) -> Result<&[f64], ConfigError> {
        self.list(key).ok_or_else(|| invalid(key, "required by the selected form"))
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let burst_form = self.text("burst.form").ok_or_else(|| invalid("burst.form", "missing"))?;
        let discrete = match burst_form {
            "geometric" | "tabulated" => true,
            "exponential" | "separable" => false,
            other => {
                return Err(invalid(
                    "burst.form",
                    format!("unknown form `{other}` (geometric, tabulated, exponential, separable)"),
                ))
            }
        };
        if let Some(want) = self.mode.wants_discrete() {
            if want != discrete {
                let kind = if want { "a discrete" } else { "a continuous" };
                return Err(invalid("burst.form", format!("mode `{}` needs {kind} burst law", self.mode)));
            }
        }

        let rate_form = self.text("rate.form").ok_or_else(|| invalid("rate.form", "missing"))?;
        let rate_keys: &[&str] = match (rate_form, discrete) {
            ("constant", _) => &["lambda0"],
            ("linear", _) => &["lambda0", "lambda1"],
            ("quadratic", false) => &["lambda0", "lambda1", "lambda2"],
            ("truncated", true) => &["lambda0", "lambda1", "cutoff"],
            ("tabulated", true) => &["values"],
            ("hill", _) => &["scale", "denom_const", "denom_coeff", "numer_coeff", "exponent"],
            (other, _) => {
                let allowed = if discrete {
                    "constant, linear, hill, truncated, tabulated"
                } else {
                    "constant, linear, quadratic, hill"
                };
                return Err(invalid("rate.form", format!("`{other}` is not available here ({allowed})")));
            }
        };
        let deg_form = self.text("degradation.form").unwrap_or("linear");
        let deg_keys: &[&str] = match (deg_form, discrete) {
            ("linear", _) => &["gamma"],
            ("tabulated", true) => &["values"],
            (other, _) => return Err(invalid("degradation.form", format!("`{other}` is not available here"))),
        };
        let burst_keys: &[&str] = match burst_form {
            "geometric" | "exponential" => &["b"],
            "tabulated" => &["values"],
            _ => &["nu", "alpha", "beta"],
        };

        let mut allowed: Vec<String> = ["mode", "rate.form", "degradation.form", "burst.form", "output.dir"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        allowed.extend(rate_keys.iter().map(|k| format!("rate.{k}")));
        allowed.extend(deg_keys.iter().map(|k| format!("degradation.{k}")));
        allowed.extend(burst_keys.iter().map(|k| format!("burst.{k}")));
        allowed.extend(self.mode.numeric_keys(discrete).iter().map(|k| format!("numeric.{k}")));
        if !discrete {
            allowed.push("potential.x_ref".into());
        }
        for key in self.values.keys() {
            if !allowed.iter().any(|a| a == key) {
                return Err(invalid(key, format!("not used by mode `{}` with the selected forms", self.mode)));
            }
        }

        if discrete {
            self.discrete_model()?;
        } else {
            self.continuous_model()?;
        }
        self.validate_numeric()
    }

    fn validate_numeric(&self) -> Result<(), ConfigError> {
        let positive = |key: &str| match self.values.get(key) {
            Some(Value::Num(x)) if *x <= 0.0 => Err(invalid(key, "must be > 0")),
            Some(Value::Int(0)) => Err(invalid(key, "must be > 0")),
            _ => Ok(()),
        };
        for key in [
            "numeric.n_max",
            "numeric.tail_tol",
            "numeric.t_end",
            "numeric.rel_tol",
            "numeric.abs_tol",
            "numeric.max_steps",
            "numeric.replicas",
            "numeric.y0",
            "numeric.bins",
            "numeric.hist_max",
            "numeric.grid_min",
            "numeric.grid_max",
            "numeric.tol",
            "numeric.max_iter",
            "numeric.floor",
            "numeric.window_lo",
            "numeric.window_hi",
            "potential.x_ref",
        ] {
            positive(key)?;
        }
        if self.int("numeric.snapshots", 2) < 2 {
            return Err(invalid("numeric.snapshots", "must be >= 2"));
        }
        if self.int("numeric.grid_knots", 3) < 3 {
            return Err(invalid("numeric.grid_knots", "must be >= 3"));
        }
        if self.int("numeric.probes", 2) < 2 {
            return Err(invalid("numeric.probes", "must be >= 2"));
        }
        if let (Some(lo), Some(hi)) = (self.num_opt("numeric.grid_min"), self.num_opt("numeric.grid_max")) {
            if hi <= lo {
                return Err(invalid("numeric.grid_max", "must exceed numeric.grid_min"));
            }
        }
        if let (Some(lo), Some(hi)) = (self.num_opt("numeric.window_lo"), self.num_opt("numeric.window_hi")) {
            if hi <= lo {
                return Err(invalid("numeric.window_hi", "must exceed numeric.window_lo"));
            }
        }
        if let Some(v) = self.list("numeric.margin_probes") {
            if v.iter().any(|&y| y <= 0.0) {
                return Err(invalid("numeric.margin_probes", "probe levels must be > 0"));
            }
        }
        Ok(())
    }

    fn hill(&self) -> Result<HillParams, ConfigError> {
        HillParams::new(
            self.require_num("rate.scale")?,
            self.require_num("rate.denom_const")?,
            self.require_num("rate.denom_coeff")?,
            self.require_num("rate.numer_coeff")?,
            self.require_num("rate.exponent")?,
        )
        .map_err(|e| model_error("rate", e))
    }

    pub fn discrete_model(&self) -> Result<DiscreteBurstModel, ConfigError> {
        let lambda = match self.text("rate.form").unwrap_or_default() {
            "constant" => RateSeq::Constant { rate: self.require_num("rate.lambda0")? },
            "linear" => {
                RateSeq::Linear { basal: self.require_num("rate.lambda0")?, slope: self.require_num("rate.lambda1")? }
            }
            "truncated" => RateSeq::Truncated {
                basal: self.require_num("rate.lambda0")?,
                slope: self.require_num("rate.lambda1")?,
                cutoff: self.int("rate.cutoff", u64::MAX).min(usize::MAX as u64) as usize,
            },
            "tabulated" => RateSeq::Tabulated(self.require_list("rate.values")?.to_vec()),
            "hill" => RateSeq::Hill(self.hill()?),
            other => return Err(invalid("rate.form", format!("`{other}` is not a discrete rate form"))),
        };
        if self.text("rate.form") == Some("truncated") && self.get("rate.cutoff").is_none() {
            return Err(invalid("rate.cutoff", "required by the selected form"));
        }
        let gamma = match self.text("degradation.form").unwrap_or("linear") {
            "tabulated" => DegradationSeq::Tabulated(self.require_list("degradation.values")?.to_vec()),
            _ => DegradationSeq::LinearDecay { rate: self.require_num("degradation.gamma")? },
        };
        let burst = match self.text("burst.form").unwrap_or_default() {
            "geometric" => {
                let b = self.require_num("burst.b")?;
                if !(b > 0.0 && b < 1.0) {
                    return Err(invalid("burst.b", format!("geometric burst parameter b = {b} must lie in (0, 1)")));
                }
                BurstPmf::geometric(b).map_err(|e| model_error("burst", e))?
            }
            _ => BurstPmf::tabulated(self.require_list("burst.values")?).map_err(|e| model_error("burst", e))?,
        };
        DiscreteBurstModel::new(lambda, gamma, burst).map_err(|e| model_error("model", e))
    }

    pub fn continuous_model(&self) -> Result<ContinuousBurstModel, ConfigError> {
        let phi = match self.text("rate.form").unwrap_or_default() {
            "constant" => RateFn::Constant { rate: self.require_num("rate.lambda0")? },
            "linear" => {
                RateFn::Linear { basal: self.require_num("rate.lambda0")?, slope: self.require_num("rate.lambda1")? }
            }
            "quadratic" => RateFn::Quadratic {
                basal: self.require_num("rate.lambda0")?,
                slope: self.require_num("rate.lambda1")?,
                curvature: self.require_num("rate.lambda2")?,
            },
            "hill" => RateFn::Hill(self.hill()?),
            other => return Err(invalid("rate.form", format!("`{other}` is not a continuous rate form"))),
        };
        let gamma = DegradationFn::LinearDecay { rate: self.require_num("degradation.gamma")? };
        let burst = match self.text("burst.form").unwrap_or_default() {
            "exponential" => BurstKernel::Exponential { mean: self.require_num("burst.b")? },
            _ => {
                let alpha = self.require_num("burst.alpha")?;
                let beta = self.require_num("burst.beta")?;
                let nu = match self.text("burst.nu") {
                    Some("power-tail") => NuFn::PowerTail { alpha, beta },
                    Some("gaussian-exp") => NuFn::GaussianExp { alpha, beta },
                    Some("finite-support") => NuFn::FiniteSupport { alpha, beta },
                    Some(other) => {
                        return Err(invalid(
                            "burst.nu",
                            format!("unknown `{other}` (power-tail, gaussian-exp, finite-support)"),
                        ))
                    }
                    None => return Err(invalid("burst.nu", "required by the selected form")),
                };
                BurstKernel::Separable(nu)
            }
        };
        let model = ContinuousBurstModel::new(phi, gamma, burst).map_err(|e| model_error("model", e))?;
        match self.num_opt("potential.x_ref") {
            Some(x_ref) => model.with_reference(x_ref).map_err(|e| model_error("potential.x_ref", e)),
            None => Ok(model),
        }
    }
}

fn model_error(key: &str, e: ModelError) -> ConfigError {
    invalid(key, e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const NB: &str = "mode = stationary-discrete\nrate.form = constant\nrate.lambda0 = 1\n\
                      degradation.gamma = 1\nburst.form = geometric\nburst.b = 0.5\n";

    #[test]
    fn minimal_negative_binomial_config() {
        let cfg = ExperimentConfig::parse(NB).unwrap();
        assert_eq!(cfg.mode(), Mode::StationaryDiscrete);
        assert!(cfg.is_discrete());
        cfg.discrete_model().unwrap();
    }

    #[test]
    fn render_is_canonical_and_idempotent() {
        let shuffled = "# comment\nburst.b = 5e-1   # trailing\nburst.form = geometric\n\n\
                        degradation.gamma = 1.0\nrate.lambda0 = 1\nrate.form = constant\nmode = stationary-discrete\n";
        let a = ExperimentConfig::parse(shuffled).unwrap();
        let b = ExperimentConfig::parse(NB).unwrap();
        assert_eq!(a, b);
        let r = a.render();
        assert_eq!(ExperimentConfig::parse(&r).unwrap().render(), r);
        assert!(r.starts_with("burst.b = 0.5\n"));
    }

    #[test]
    fn geometric_b_out_of_range() {
        let text = NB.replace("burst.b = 0.5", "burst.b = 1.5");
        match ExperimentConfig::parse(&text) {
            Err(ConfigError::Validation { key, message }) => {
                assert_eq!(key, "burst.b");
                assert!(message.contains("(0, 1)"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = format!("{NB}rate.lamda1 = 2\n");
        assert!(matches!(ExperimentConfig::parse(&text), Err(ConfigError::Parse { line: 7, .. })));
        let text = "mode = modes\nrate.form constant\n";
        assert!(matches!(ExperimentConfig::parse(text), Err(ConfigError::Parse { line: 2, .. })));
        let text = format!("{NB}burst.b = 0.3\n");
        assert!(matches!(ExperimentConfig::parse(&text), Err(ConfigError::Parse { line: 7, .. })));
        let text = NB.replace("= 0.5", "= half");
        assert!(matches!(ExperimentConfig::parse(&text), Err(ConfigError::Parse { line: 6, .. })));
    }

    #[test]
    fn unused_parameters_rejected() {
        let text = format!("{NB}rate.lambda1 = 2\n");
        assert!(
            matches!(ExperimentConfig::parse(&text), Err(ConfigError::Validation { key, .. }) if key == "rate.lambda1")
        );
        let text = format!("{NB}numeric.grid_knots = 100\n");
        assert!(ExperimentConfig::parse(&text).is_err());
        let text = format!("{NB}potential.x_ref = 2\n");
        assert!(ExperimentConfig::parse(&text).is_err());
    }

    #[test]
    fn mode_and_burst_kind_must_agree() {
        let text = NB.replace("stationary-discrete", "kernel-fixed-point");
        assert!(
            matches!(ExperimentConfig::parse(&text), Err(ConfigError::Validation { key, .. }) if key == "burst.form")
        );
        let body = NB.replace("mode = stationary-discrete\n", "");
        assert!(ExperimentConfig::parse_for(&body, Mode::Modes).is_ok());
        assert!(ExperimentConfig::parse_for(NB, Mode::EvolveMaster).is_err());
        assert!(ExperimentConfig::parse(&body).is_err());
    }

    #[test]
    fn continuous_separable_config() {
        let text = "mode = stationary-continuous\nrate.form = hill\nrate.scale = 1.5\nrate.denom_const = 1\n\
                    rate.denom_coeff = 0.0123\nrate.numer_coeff = 0.08\nrate.exponent = 4\ndegradation.gamma = 1\n\
                    burst.form = separable\nburst.nu = gaussian-exp\nburst.alpha = 1\nburst.beta = 0.1\n\
                    potential.x_ref = 3.7\nnumeric.grid_knots = 512\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        let m = cfg.continuous_model().unwrap();
        assert_eq!(m.x_ref(), 3.7);
        assert!(ExperimentConfig::parse(&text.replace("gaussian-exp", "gauss")).is_err());
    }

    #[test]
    fn set_revalidates() {
        let mut cfg = ExperimentConfig::parse(NB).unwrap();
        cfg.set("burst.b", "0.25").unwrap();
        assert_eq!(cfg.num_opt("burst.b"), Some(0.25));
        assert!(cfg.set("burst.b", "2").is_err());
        assert_eq!(cfg.num_opt("burst.b"), Some(0.25));
        assert!(cfg.set("mode", "modes").is_err());
    }

    #[test]
    fn lists_roundtrip() {
        let text = "mode = ergodicity\nrate.form = constant\nrate.lambda0 = 2\ndegradation.gamma = 1\n\
                    burst.form = exponential\nburst.b = 1\nnumeric.margin_probes = 0.1,1, 10 ,1e3\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.list("numeric.margin_probes").unwrap(), &[0.1, 1.0, 10.0, 1000.0]);
        assert!(cfg.render().contains("numeric.margin_probes = 0.1, 1.0, 10.0, 1000.0\n"));
    }
}
