//! Experiment configuration files.
//!
//! Configs are JSON documents (conventionally with a `.cfg` extension) that
//! carry a `schema_version`. Parsing happens in two passes: serde checks the
//! structure and types, then [`validate`] checks every constraint and
//! reports all violations at once, each tagged with the path of the
//! offending field (`groups[0].completion.pareto.shape`).
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "seed": 7,
//!   "groups": [
//!     {"label": "g1",
//!      "completion": {"pareto": {"scale": 1.0, "shape": 1.2}},
//!      "reward": {"power_of_time": {"exponent": 0.6}}}
//!   ],
//!   "deadlines": [1.5, 2, 3],
//!   "utility": {"alpha": 1.0, "weights": [1.0]},
//!   "v": 20.0,
//!   "tau": 1,
//!   "experiment": {
//!     "simulate": {"policy": "olum", "budget": 4000, "trials": 1000},
//!     "regret": {"budgets": [250, 500, 1000, 2000, 4000, 8000], "trials": 300}
//!   },
//!   "flags": {"truncate_last": false, "trace": false}
//! }
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::distributions::{CompletionSpec, DeadlineSet, GroupModel, RewardSpec};
use crate::error::Error;
use crate::offline::SrpDistribution;
use crate::olum::{budget_matched_v, GammaCap, OlumParams};
use crate::sim::{Environment, EpisodeOptions, Policy};
use crate::utility::UtilitySpec;

pub const SCHEMA_VERSION: u32 = 1;

/// Validation failure at a field path.
#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Syntax(Issue),
    #[error("{} invalid field(s):\n{}", .0.len(), .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Issue>),
}

impl ConfigError {
    pub fn issues(&self) -> Vec<Issue> {
        match self {
            ConfigError::Io { path, source } => vec![Issue {
                path: path.display().to_string(),
                message: source.to_string(),
            }],
            ConfigError::Syntax(i) => vec![i.clone()],
            ConfigError::Invalid(v) => v.clone(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    #[serde(default)]
    seed: u64,
    groups: Vec<RawGroup>,
    deadlines: Vec<f64>,
    utility: RawUtility,
    #[serde(default)]
    v: Option<f64>,
    #[serde(default = "default_tau")]
    tau: usize,
    #[serde(default)]
    gamma_cap: Option<RawGammaCap>,
    #[serde(default)]
    experiment: RawExperiment,
    #[serde(default)]
    flags: Flags,
}

fn default_tau() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    label: String,
    completion: CompletionSpec,
    reward: RewardSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUtility {
    alpha: f64,
    weights: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum RawGammaCap {
    EmpiricalRate { fallback: f64 },
    Fixed(f64),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    #[serde(default)]
    simulate: Option<RawSimulate>,
    #[serde(default)]
    regret: Option<RawRegret>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulate {
    policy: PolicySpec,
    budget: f64,
    trials: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegret {
    budgets: Vec<f64>,
    trials: usize,
}

/// Policy named in a `simulate` experiment.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicySpec {
    Olum,
    OracleSrp,
    /// Fixed dispatch probabilities with one deadline per group.
    Srp {
        selection: Vec<f64>,
        deadlines: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    #[serde(default)]
    pub truncate_last: bool,
    #[serde(default)]
    pub trace: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSpec {
    pub policy: PolicySpec,
    pub budget: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretSpec {
    pub budgets: Vec<f64>,
    pub trials: usize,
}

/// A fully validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub env: Environment,
    pub alpha: f64,
    pub seed: u64,
    /// `None` selects `V = √(B / ln B)` per budget.
    pub v: Option<f64>,
    pub tau: usize,
    pub gamma_cap: GammaCap,
    pub flags: Flags,
    pub simulate: Option<SimulateSpec>,
    pub regret: Option<RegretSpec>,
}

impl ExperimentConfig {
    pub fn episode_options(&self) -> EpisodeOptions {
        EpisodeOptions {
            truncate_last: self.flags.truncate_last,
            trace: self.flags.trace,
        }
    }

    /// OLUM parameters for a run with budget `budget`.
    pub fn olum_params(&self, budget: f64) -> OlumParams {
        OlumParams {
            v: self.v.unwrap_or_else(|| budget_matched_v(budget)),
            tau: self.tau,
            gamma_cap: self.gamma_cap,
        }
    }

    pub fn build_policy(&self, spec: &PolicySpec, budget: f64) -> Result<Policy, Error> {
        Ok(match spec {
            PolicySpec::Olum => Policy::Olum(self.olum_params(budget)),
            PolicySpec::OracleSrp => Policy::oracle(&self.env)?,
            PolicySpec::Srp { selection, deadlines } => Policy::Srp(SrpDistribution::from_selection(
                &self.env.deadlines,
                selection,
                deadlines,
            )?),
        })
    }
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::Syntax(Issue {
            path: if path == "." { "<root>".into() } else { path },
            message: e.into_inner().to_string(),
        })
    })?;
    validate(raw).map_err(ConfigError::Invalid)
}

fn completion_key(c: &CompletionSpec) -> &'static str {
    match c {
        CompletionSpec::Pareto { .. } => "pareto",
        CompletionSpec::Exponential { .. } => "exponential",
        CompletionSpec::Deterministic { .. } => "deterministic",
        CompletionSpec::Empirical { .. } => "empirical",
    }
}

fn reward_key(r: &RewardSpec) -> &'static str {
    match r {
        RewardSpec::PowerOfTime { .. } => "power_of_time",
        RewardSpec::Constant { .. } => "constant",
        RewardSpec::ScaledUniform { .. } => "scaled_uniform",
    }
}

fn message(e: &Error) -> String {
    match e {
        Error::InvalidParameter { reason, .. } => reason.clone(),
        other => other.to_string(),
    }
}

fn field(e: &Error) -> Option<&'static str> {
    match e {
        Error::InvalidParameter { name, .. } => Some(name),
        _ => None,
    }
}

fn validate(raw: RawConfig) -> Result<ExperimentConfig, Vec<Issue>> {
    let mut issues = Vec::new();
    let mut push = |path: String, message: String| issues.push(Issue { path, message });

    if raw.schema_version != SCHEMA_VERSION {
        push(
            "schema_version".into(),
            format!(
                "unsupported version {} (expected {SCHEMA_VERSION})",
                raw.schema_version
            ),
        );
    }

    if raw.groups.is_empty() {
        push("groups".into(), "need at least one group".into());
    }
    let mut groups = Vec::new();
    for (i, g) in raw.groups.iter().enumerate() {
        if raw.groups[..i].iter().any(|h| h.label == g.label) {
            push(
                format!("groups[{i}].label"),
                format!("duplicate label `{}`", g.label),
            );
        }
        let cpath = format!("groups[{i}].completion.{}", completion_key(&g.completion));
        let rpath = format!("groups[{i}].reward.{}", reward_key(&g.reward));
        let mut ok = true;
        if let Err(e) = g.completion.validate() {
            push(format!("{cpath}.{}", field(&e).unwrap_or("?")), message(&e));
            ok = false;
        }
        if let Err(e) = g.reward.validate() {
            push(format!("{rpath}.{}", field(&e).unwrap_or("?")), message(&e));
            ok = false;
        }
        if ok {
            match GroupModel::new(g.label.clone(), g.completion.clone(), g.reward.clone()) {
                Ok(m) => groups.push(m),
                Err(e) => push(format!("{rpath}.{}", field(&e).unwrap_or("?")), message(&e)),
            }
        }
    }

    let deadlines = match DeadlineSet::new(raw.deadlines.clone()) {
        Ok(d) => Some(d),
        Err(e) => {
            let path = match e {
                Error::InvalidDeadline(bad) => raw
                    .deadlines
                    .iter()
                    .position(|&t| t == bad || (t.is_nan() && bad.is_nan()))
                    .map_or("deadlines".to_string(), |j| format!("deadlines[{j}]")),
                _ => "deadlines".to_string(),
            };
            push(path, message(&e));
            None
        }
    };

    let alpha = raw.utility.alpha;
    if !(alpha.is_finite() && alpha >= 0.0) {
        push(
            "utility.alpha".into(),
            format!("must be finite and >= 0, got {alpha}"),
        );
    }
    if raw.utility.weights.len() != raw.groups.len() {
        push(
            "utility.weights".into(),
            format!(
                "{} weights for {} groups",
                raw.utility.weights.len(),
                raw.groups.len()
            ),
        );
    }
    let mut utilities = Vec::new();
    for (i, &w) in raw.utility.weights.iter().enumerate() {
        match UtilitySpec::new(alpha, w) {
            Ok(u) => utilities.push(u),
            Err(e) if field(&e) == Some("weight") => push(format!("utility.weights[{i}]"), message(&e)),
            Err(_) => {}
        }
    }

    if let Some(v) = raw.v {
        if !(v.is_finite() && v > 0.0) {
            push("v".into(), format!("must be positive and finite, got {v}"));
        }
    }
    if raw.tau < 1 {
        push("tau".into(), "delay must be at least 1".into());
    }
    let gamma_cap = match raw.gamma_cap {
        None => GammaCap::default(),
        Some(RawGammaCap::EmpiricalRate { fallback }) => {
            if !(fallback.is_finite() && fallback >= 0.0) {
                push(
                    "gamma_cap.empirical_rate.fallback".into(),
                    format!("must be finite and >= 0, got {fallback}"),
                );
            }
            GammaCap::EmpiricalRate { fallback }
        }
        Some(RawGammaCap::Fixed(c)) => {
            if !(c.is_finite() && c >= 0.0) {
                push(
                    "gamma_cap.fixed".into(),
                    format!("must be finite and >= 0, got {c}"),
                );
            }
            GammaCap::Fixed(c)
        }
    };

    let simulate = raw.experiment.simulate.map(|s| {
        if !(s.budget.is_finite() && s.budget > 0.0) {
            push(
                "experiment.simulate.budget".into(),
                format!("must be positive and finite, got {}", s.budget),
            );
        }
        if s.trials < 2 {
            push(
                "experiment.simulate.trials".into(),
                "need at least two trials".into(),
            );
        }
        if let PolicySpec::Srp {
            selection,
            deadlines: per_group,
        } = &s.policy
        {
            let base = "experiment.simulate.policy.srp";
            if selection.len() != raw.groups.len() {
                push(
                    format!("{base}.selection"),
                    format!("{} entries for {} groups", selection.len(), raw.groups.len()),
                );
            }
            if per_group.len() != raw.groups.len() {
                push(
                    format!("{base}.deadlines"),
                    format!("{} entries for {} groups", per_group.len(), raw.groups.len()),
                );
            }
            if selection.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                push(
                    format!("{base}.selection"),
                    "entries must be finite and non-negative".into(),
                );
            } else if (selection.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                push(format!("{base}.selection"), "must sum to 1".into());
            }
            if let Some(d) = &deadlines {
                for (j, &t) in per_group.iter().enumerate() {
                    if !d.contains(t) {
                        push(
                            format!("{base}.deadlines[{j}]"),
                            format!("{t} is not in the deadline set"),
                        );
                    }
                }
            }
        }
        SimulateSpec {
            policy: s.policy,
            budget: s.budget,
            trials: s.trials,
        }
    });

    let regret = raw.experiment.regret.map(|r| {
        let b = &r.budgets;
        if b.len() < 4 {
            push(
                "experiment.regret.budgets".into(),
                "need at least four budgets".into(),
            );
        } else if b.windows(2).any(|w| !(w[1] > w[0])) || !(b[0] > 1.0) || b.iter().any(|x| !x.is_finite()) {
            push(
                "experiment.regret.budgets".into(),
                "must be finite, strictly increasing and above 1".into(),
            );
        } else if (b[b.len() - 1] / b[0]).log10() < 1.5 - 1e-9 {
            push(
                "experiment.regret.budgets".into(),
                "must span at least 1.5 decades".into(),
            );
        }
        if r.trials < 2 {
            push(
                "experiment.regret.trials".into(),
                "need at least two trials".into(),
            );
        }
        RegretSpec {
            budgets: r.budgets,
            trials: r.trials,
        }
    });

    if !issues.is_empty() {
        return Err(issues);
    }
    let env = Environment::new(groups, utilities, deadlines.expect("validated")).map_err(|e| {
        vec![Issue {
            path: "groups".into(),
            message: e.to_string(),
        }]
    })?;
    Ok(ExperimentConfig {
        schema_version: raw.schema_version,
        env,
        alpha,
        seed: raw.seed,
        v: raw.v,
        tau: raw.tau,
        gamma_cap,
        flags: raw.flags,
        simulate,
        regret,
    })
}
