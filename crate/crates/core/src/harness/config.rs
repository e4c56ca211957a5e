use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::consistency::EpsilonRule;
use crate::graph::Objective;
use crate::manifold::Manifold;
use crate::solvers::SolverKind;

/// Schedule exponents of the parameter rule for intrinsic dimension `m`.
/// Only `k_epsilon` drives the experiment; the rest are metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleExponents {
    pub k_epsilon: f64,
    pub k_delta: f64,
    pub k_theta: f64,
    pub k_zeta: f64,
}

impl ScheduleExponents {
    pub fn for_dim(m: usize) -> Self {
        let m = m as f64;
        Self {
            k_epsilon: 3.0 / (2.0 + 4.0 * m),
            k_delta: 2.0 / (1.0 + 2.0 * m),
            k_theta: 1.0 / (2.0 * (1.0 + 2.0 * m)),
            k_zeta: 3.0 / (1.0 + 2.0 * m),
        }
    }
}

/// Fully resolved experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub manifold: Manifold,
    pub n_list: Vec<usize>,
    pub schedule: EpsilonRule,
    pub exponents: ScheduleExponents,
    /// `a = ε^{bandwidth_exponent}`.
    pub bandwidth_exponent: f64,
    pub solver: SolverKind,
    pub objective: Objective,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Keep wall-clock times in records; off by default so outputs are reproducible byte for byte.
    pub record_timings: bool,
    /// Resolution of the quadrature grid on which cut errors are measured.
    pub error_grid_resolution: usize,
}

impl ExperimentConfig {
    pub fn epsilon(&self, position: usize) -> f64 {
        self.schedule.epsilon(self.n_list[position], position).expect("validated schedule")
    }

    pub fn bandwidth(&self, epsilon: f64) -> f64 {
        epsilon.powf(self.bandwidth_exponent)
    }

    /// Minimal config with defaults for everything but the sizes.
    pub fn new(manifold: Manifold, n_list: Vec<usize>, trials: usize, seed: u64) -> Self {
        let raw = RawConfig {
            manifold: Some(manifold.name().to_string()),
            n_list: Some(n_list),
            trials: Some(trials),
            seed: Some(seed),
            ..RawConfig::default()
        };
        resolve(raw, "").expect("defaults are valid")
    }
}

/// One violated requirement, with the line of the offending key when known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<ConfigIssue>),
}

impl ConfigError {
    pub fn issues(&self) -> &[ConfigIssue] {
        match self {
            ConfigError::Invalid(v) => v,
            ConfigError::Io { .. } => &[],
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    kind: Option<String>,
    c: Option<f64>,
    exponent: Option<f64>,
    log_power: Option<f64>,
    values: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    manifold: Option<String>,
    n_list: Option<Vec<usize>>,
    schedule: Option<RawSchedule>,
    bandwidth_exponent: Option<f64>,
    solver: Option<SolverKind>,
    objective: Option<Objective>,
    trials: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    record_timings: Option<bool>,
    error_grid_resolution: Option<usize>,
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text)
}

/// Parse, apply defaults and check every invariant, collecting all violations.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| {
        ConfigError::Invalid(vec![ConfigIssue { line: Some(e.line()), message: format!("{e}") }])
    })?;
    resolve(raw, text)
}

fn line_of(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

fn resolve(raw: RawConfig, text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut issues = Vec::new();
    let mut issue = |key: &str, message: String| issues.push(ConfigIssue { line: line_of(text, key), message });

    let manifold = match raw.manifold.as_deref() {
        None => {
            issue("manifold", "manifold required".into());
            None
        }
        Some(name) => match name.parse::<Manifold>() {
            Ok(m) => Some(m),
            Err(e) => {
                issue("manifold", e.to_string());
                None
            }
        },
    };
    let n_list = raw.n_list.unwrap_or_default();
    if n_list.is_empty() {
        issue("n_list", "n_list required".into());
    }
    for &n in &n_list {
        if n < 8 {
            issue("n_list", format!("n = {n} is below the minimum of 8"));
        }
    }
    let trials = raw.trials.unwrap_or(1);
    if trials < 1 {
        issue("trials", "trials must be at least 1".into());
    }
    let bandwidth_exponent = raw.bandwidth_exponent.unwrap_or(1.0 / 3.0);
    if !(bandwidth_exponent > 0.0 && bandwidth_exponent < 1.0) {
        issue("bandwidth_exponent", format!("bandwidth_exponent {bandwidth_exponent} must lie in (0, 1)"));
    }
    let error_grid_resolution = raw.error_grid_resolution.unwrap_or(match manifold {
        Some(Manifold::Circle) | None => 8192,
        Some(Manifold::FlatTorus2) => 256,
        Some(Manifold::Sphere2) => 160,
    });
    if error_grid_resolution < 4 {
        issue("error_grid_resolution", "error_grid_resolution must be at least 4".into());
    }

    let exponents = ScheduleExponents::for_dim(manifold.map_or(1, Manifold::intrinsic_dim));
    let raw_schedule = raw.schedule.unwrap_or_default();
    let schedule = match raw_schedule.kind.as_deref().unwrap_or("power") {
        "power" => {
            let c = raw_schedule.c.unwrap_or(1.0);
            let exponent = raw_schedule.exponent.unwrap_or(exponents.k_epsilon);
            let log_power = raw_schedule.log_power.unwrap_or(0.0);
            if !(c > 0.0 && c.is_finite()) {
                issue("c", format!("schedule constant c = {c} must be positive"));
            }
            if !exponent.is_finite() || !log_power.is_finite() {
                issue("schedule", "schedule exponents must be finite".into());
            }
            Some(EpsilonRule::Power { c, exponent, log_power })
        }
        "explicit" => match raw_schedule.values {
            Some(values) => {
                if values.len() != n_list.len() {
                    issue("values", format!("explicit schedule has {} values for {} sizes", values.len(), n_list.len()));
                }
                Some(EpsilonRule::Explicit { values })
            }
            None => {
                issue("schedule", "explicit schedule requires values".into());
                None
            }
        },
        other => {
            issue("kind", format!("unknown schedule kind {other:?} (expected \"power\" or \"explicit\")"));
            None
        }
    };

    if let (Some(m), Some(rule)) = (manifold, &schedule) {
        for (pos, &n) in n_list.iter().enumerate() {
            if let Some(eps) = rule.epsilon(n, pos) {
                if !(eps > 0.0 && eps <= m.epsilon_0()) {
                    issue(
                        "schedule",
                        format!("epsilon({n}) = {eps:.6} is outside (0, {}] for {m}", m.epsilon_0()),
                    );
                }
            }
        }
    }

    match (manifold, schedule) {
        (Some(manifold), Some(schedule)) if issues.is_empty() => Ok(ExperimentConfig {
            manifold,
            n_list,
            schedule,
            exponents,
            bandwidth_exponent,
            solver: raw.solver.unwrap_or(SolverKind::Pipeline),
            objective: raw.objective.unwrap_or(Objective::CheegerRatio),
            trials,
            seed: raw.seed.unwrap_or(0),
            out: raw.out,
            record_timings: raw.record_timings.unwrap_or(false),
            error_grid_resolution,
        }),
        _ => Err(ConfigError::Invalid(issues)),
    }
}
