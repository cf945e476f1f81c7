//! TOML experiment configuration.
//!
//! A config is a document with the sections `environment`, `algorithm`,
//! `budget` (required) and `schedule`, `init`, `stable_point`, `checkpoints`,
//! `output`, `audit` (optional). Unknown keys are rejected. After parsing, all
//! defaults are filled in so the config can be echoed back verbatim.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Parse(String),

    #[error("invalid config:\n{}", .0.iter().map(|v| format!("  - {v}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<String>),
}

pub const DEFAULT_REPEATS: u32 = 30;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_CHECKPOINTS: usize = 200;
pub const DEFAULT_OVERRIDE_FACTOR: f64 = 100.0;

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_repeats() -> u32 {
    DEFAULT_REPEATS
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default = "default_seed")]
    pub base_seed: u64,
    #[serde(default = "default_repeats")]
    pub repeats: u32,
    pub environment: EnvironmentConfig,
    pub algorithm: AlgorithmConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
    pub budget: BudgetConfig,
    #[serde(default)]
    pub init: InitConfig,
    #[serde(default)]
    pub stable_point: StablePointConfig,
    #[serde(default)]
    pub checkpoints: CheckpointConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub audit: AuditConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvironmentKind {
    Gaussian,
    Eta,
    PointMass,
    Strategic,
}

/// Environment parameters. Which keys apply depends on `kind`:
///
/// * `gaussian`: `mu`, `sigma`, `epsilon`
/// * `eta`: `p`, `mu`, `w`, `epsilon`
/// * `point_mass`: `epsilon`, `coupling`, `curvature`
/// * `strategic`: `epsilon` or `epsilon_ratio` (ε as a multiple of γ/β),
///   optional `lambda`, `strategic_dims`, and a `[environment.data]` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub kind: EnvironmentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curvature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategic_dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataConfig>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Synthetic,
    Csv,
}

/// Strategic-classification base data: `synthetic` (`n`, `d`,
/// `label_balance`, `seed`) or `csv` (`path`, `label_column`, optional
/// `feature_columns`, `max_rows`, `subsample_seed`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub source: DataSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_balance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_column: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_columns: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsample_seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    Greedy,
    Lazy,
    Rgd,
    Rrm,
}

/// `lazy`: `n0`, `alpha` (both default 1). `rgd`: `mc_samples` (used only
/// without an exact population gradient, default 1000). `rrm`: `tol`,
/// `max_iter` for the inner solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub kind: AlgorithmKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleVariant {
    /// Step sizes from the convergence theorems (for RGD: the contraction step).
    #[default]
    Theorem,
    /// ε-free harmonic schedule with c_η = factor/γ.
    Override,
    /// Theorem schedule when ε < γ/β, otherwise the override; the choice is
    /// recorded in the run metadata.
    Auto,
    Constant,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default)]
    pub variant: ScheduleVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

/// Exactly one of `samples` or `deployments`. Greedy deploy counts one
/// deployment per sample; RGD and RRM need `deployments`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deployments: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    /// Initial model; the environment's default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StablePointSource {
    ClosedForm,
    RrmEmpirical,
    Explicit,
    /// No reference point; distance columns stay empty.
    None,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StablePointConfig {
    /// Defaults to `closed_form` when available, else `rrm_empirical`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<StablePointSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rounds: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckpointGrid {
    #[default]
    Geometric,
    Every,
    Explicit,
}

/// Checkpoints are outer steps: SGD updates for greedy deploy, rounds for the
/// other algorithms. Step 0 and the final step are always written.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointConfig {
    #[serde(default)]
    pub grid: CheckpointGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// 90% band in the aggregate file; lo = hi = mean when off.
    #[serde(default = "default_true")]
    pub band: bool,
    /// Monte-Carlo samples for PR(θ) at each checkpoint; 0 disables it.
    #[serde(default)]
    pub perf_risk_samples: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            band: true,
            perf_risk_samples: 0,
        }
    }
}

/// Every field is optional; missing ones take the defaults below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditConfig {
    pub pairs: usize,
    pub n_samples: usize,
    pub coordinate: usize,
    pub paired: bool,
    pub bootstrap: usize,
    /// Pairs are drawn uniformly within ±spread of the initial model.
    pub spread: f64,
    pub abs_tol: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            pairs: 10,
            n_samples: 100_000,
            coordinate: 0,
            paired: false,
            bootstrap: 50,
            spread: 5.0,
            abs_tol: 1e-9,
        }
    }
}

/// Parses and structurally validates a config, filling every default.
///
/// A metadata file written by a previous run is also accepted: its `[config]`
/// table is used. Checks that need the environment's constants (such as the
/// convergence regime) happen when the experiment is prepared.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    let body = match table.get("config") {
        Some(toml::Value::Table(t)) if table.contains_key("resolved") => t.clone(),
        _ => table,
    };
    let mut cfg: ExperimentConfig = body
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    let mut v = Vec::new();
    cfg.resolve_defaults(&mut v);
    if v.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Invalid(v))
    }
}

impl ExperimentConfig {
    /// Serializes the config as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    fn resolve_defaults(&mut self, v: &mut Vec<String>) {
        if self.repeats < 1 {
            v.push("repeats must be >= 1".into());
        }
        self.environment.check(v);
        self.check_algorithm(v);
        self.check_budget(v);
        self.check_stable_point(v);
        self.check_checkpoints(v);
        self.check_audit(v);
        if let Some(theta) = &self.init.theta {
            if theta.is_empty() || theta.iter().any(|x| !x.is_finite()) {
                v.push("init.theta must be a non-empty list of finite numbers".into());
            }
        }
    }

    fn check_algorithm(&mut self, v: &mut Vec<String>) {
        let a = &mut self.algorithm;
        let kind = a.kind;
        let name = kind_name(kind);
        let forbid = |present: bool, key: &str, why: &str, v: &mut Vec<String>| {
            if present {
                v.push(format!("algorithm.{key} is not used by {name}: {why}"));
            }
        };
        if kind != AlgorithmKind::Lazy {
            let why = "only lazy deploy has a deployment schedule";
            forbid(a.n0.is_some(), "n0", why, v);
            forbid(a.alpha.is_some(), "alpha", why, v);
        }
        if kind != AlgorithmKind::Rgd {
            forbid(a.mc_samples.is_some(), "mc_samples", "only rgd estimates population gradients", v);
        }
        if kind != AlgorithmKind::Rrm {
            let why = "only rrm runs an inner solver";
            forbid(a.tol.is_some(), "tol", why, v);
            forbid(a.max_iter.is_some(), "max_iter", why, v);
        }
        match kind {
            AlgorithmKind::Lazy => {
                let n0 = *a.n0.get_or_insert(1.0);
                let alpha = *a.alpha.get_or_insert(1.0);
                if !(n0 >= 1.0) || !n0.is_finite() {
                    v.push(format!("algorithm.n0 must be >= 1, got {n0}"));
                }
                if !(alpha > 0.0) || !alpha.is_finite() {
                    v.push(format!("algorithm.alpha must be > 0, got {alpha}"));
                }
            }
            AlgorithmKind::Rgd => {
                if *a.mc_samples.get_or_insert(1000) == 0 {
                    v.push("algorithm.mc_samples must be >= 1".into());
                }
            }
            AlgorithmKind::Rrm => {
                let tol = *a.tol.get_or_insert(1e-10);
                if !(tol > 0.0) {
                    v.push(format!("algorithm.tol must be > 0, got {tol}"));
                }
                if *a.max_iter.get_or_insert(1_000_000) == 0 {
                    v.push("algorithm.max_iter must be >= 1".into());
                }
            }
            AlgorithmKind::Greedy => {}
        }

        if kind == AlgorithmKind::Rrm {
            if self.schedule.is_some() {
                v.push("[schedule] is not used by rrm".into());
            }
            return;
        }
        let s = self.schedule.get_or_insert_with(ScheduleConfig::default);
        match s.variant {
            ScheduleVariant::Override | ScheduleVariant::Auto => {
                let f = *s.factor.get_or_insert(DEFAULT_OVERRIDE_FACTOR);
                if !(f > 0.0) || !f.is_finite() {
                    v.push(format!("schedule.factor must be > 0, got {f}"));
                }
                if s.eta.is_some() {
                    v.push("schedule.eta only applies to variant = \"constant\"".into());
                }
            }
            ScheduleVariant::Constant => {
                match s.eta {
                    Some(eta) if eta > 0.0 && eta.is_finite() => {}
                    Some(eta) => v.push(format!("schedule.eta must be > 0, got {eta}")),
                    None => v.push("schedule.eta is required for variant = \"constant\"".into()),
                }
                if s.factor.is_some() {
                    v.push("schedule.factor only applies to override and auto".into());
                }
            }
            ScheduleVariant::Theorem => {
                if s.factor.is_some() || s.eta.is_some() {
                    v.push("schedule.factor and schedule.eta do not apply to variant = \"theorem\"".into());
                }
            }
        }
        if kind == AlgorithmKind::Rgd
            && matches!(s.variant, ScheduleVariant::Override | ScheduleVariant::Auto)
        {
            v.push("rgd uses a constant step: schedule variant must be theorem or constant".into());
        }
    }

    fn check_budget(&self, v: &mut Vec<String>) {
        let b = &self.budget;
        match (b.samples, b.deployments) {
            (Some(_), Some(_)) => v.push("budget: give either samples or deployments, not both".into()),
            (None, None) => v.push("budget: samples or deployments is required".into()),
            (Some(0), _) | (_, Some(0)) => v.push("budget must be >= 1".into()),
            (Some(_), None) => {
                if matches!(self.algorithm.kind, AlgorithmKind::Rgd | AlgorithmKind::Rrm) {
                    v.push(format!(
                        "budget: {} is population-level and needs budget.deployments",
                        kind_name(self.algorithm.kind)
                    ));
                }
            }
            (None, Some(_)) => {}
        }
    }

    fn check_stable_point(&self, v: &mut Vec<String>) {
        let s = &self.stable_point;
        match (s.source, &s.value) {
            (Some(StablePointSource::Explicit), None) => {
                v.push("stable_point.value is required for source = \"explicit\"".into())
            }
            (Some(StablePointSource::Explicit), Some(val)) if val.iter().any(|x| !x.is_finite()) => {
                v.push("stable_point.value must be finite".into())
            }
            (Some(src), Some(_)) if src != StablePointSource::Explicit => {
                v.push("stable_point.value only applies to source = \"explicit\"".into())
            }
            (None, Some(_)) => v.push("stable_point.value needs source = \"explicit\"".into()),
            _ => {}
        }
        if let Some(t) = s.tol {
            if !(t > 0.0) {
                v.push(format!("stable_point.tol must be > 0, got {t}"));
            }
        }
    }

    fn check_checkpoints(&mut self, v: &mut Vec<String>) {
        let c = &mut self.checkpoints;
        match c.grid {
            CheckpointGrid::Geometric => {
                if *c.points.get_or_insert(DEFAULT_CHECKPOINTS) < 2 {
                    v.push("checkpoints.points must be >= 2".into());
                }
                if c.steps.is_some() {
                    v.push("checkpoints.steps only applies to grid = \"explicit\"".into());
                }
            }
            CheckpointGrid::Every => {
                if c.points.is_some() || c.steps.is_some() {
                    v.push("checkpoints.points and checkpoints.steps do not apply to grid = \"every\"".into());
                }
            }
            CheckpointGrid::Explicit => match &c.steps {
                None => v.push("checkpoints.steps is required for grid = \"explicit\"".into()),
                Some(s) => {
                    if s.is_empty() || s.windows(2).any(|w| w[0] >= w[1]) {
                        v.push("checkpoints.steps must be non-empty and strictly increasing".into());
                    }
                    if c.points.is_some() {
                        v.push("checkpoints.points does not apply to grid = \"explicit\"".into());
                    }
                }
            },
        }
    }

    fn check_audit(&self, v: &mut Vec<String>) {
        let a = &self.audit;
        if a.n_samples == 0 {
            v.push("audit.n_samples must be >= 1".into());
        }
        if !(a.spread > 0.0) || !a.spread.is_finite() {
            v.push(format!("audit.spread must be > 0, got {}", a.spread));
        }
        if a.bootstrap == 1 {
            v.push("audit.bootstrap must be 0 (off) or >= 2".into());
        }
        if !(a.abs_tol >= 0.0) {
            v.push("audit.abs_tol must be >= 0".into());
        }
    }
}

fn kind_name(kind: AlgorithmKind) -> &'static str {
    match kind {
        AlgorithmKind::Greedy => "greedy",
        AlgorithmKind::Lazy => "lazy",
        AlgorithmKind::Rgd => "rgd",
        AlgorithmKind::Rrm => "rrm",
    }
}

impl EnvironmentConfig {
    fn check(&self, v: &mut Vec<String>) {
        use EnvironmentKind::*;
        let kind = match self.kind {
            Gaussian => "gaussian",
            Eta => "eta",
            PointMass => "point_mass",
            Strategic => "strategic",
        };
        let (required, optional): (&[&str], &[&str]) = match self.kind {
            Gaussian => (&["mu", "sigma", "epsilon"], &[]),
            Eta => (&["p", "mu", "w", "epsilon"], &[]),
            PointMass => (&["epsilon", "coupling", "curvature"], &[]),
            Strategic => (&["data"], &["epsilon", "epsilon_ratio", "lambda", "strategic_dims"]),
        };
        let present = [
            ("epsilon", self.epsilon.is_some()),
            ("epsilon_ratio", self.epsilon_ratio.is_some()),
            ("mu", self.mu.is_some()),
            ("sigma", self.sigma.is_some()),
            ("p", self.p.is_some()),
            ("w", self.w.is_some()),
            ("coupling", self.coupling.is_some()),
            ("curvature", self.curvature.is_some()),
            ("lambda", self.lambda.is_some()),
            ("strategic_dims", self.strategic_dims.is_some()),
            ("data", self.data.is_some()),
        ];
        for (key, is_set) in present {
            if required.contains(&key) && !is_set {
                v.push(format!("environment.{key} is required for kind = \"{kind}\""));
            }
            if is_set && !required.contains(&key) && !optional.contains(&key) {
                v.push(format!("environment.{key} is not used by kind = \"{kind}\""));
            }
        }
        for (key, val) in [
            ("epsilon", self.epsilon),
            ("epsilon_ratio", self.epsilon_ratio),
            ("mu", self.mu),
            ("sigma", self.sigma),
            ("p", self.p),
            ("w", self.w),
            ("coupling", self.coupling),
            ("curvature", self.curvature),
            ("lambda", self.lambda),
        ] {
            if let Some(x) = val {
                if !x.is_finite() {
                    v.push(format!("environment.{key} must be finite"));
                }
            }
        }
        let mut range = |key: &str, val: Option<f64>, ok: fn(f64) -> bool, want: &str| {
            if let Some(x) = val.filter(|x| x.is_finite() && !ok(*x)) {
                v.push(format!("environment.{key} must be {want}, got {x}"));
            }
        };
        match self.kind {
            Gaussian | Eta => range("epsilon", self.epsilon, |x| (0.0..1.0).contains(&x), "in [0, 1)"),
            PointMass | Strategic => range("epsilon", self.epsilon, |x| x >= 0.0, ">= 0"),
        }
        range("epsilon_ratio", self.epsilon_ratio, |x| x >= 0.0, ">= 0");
        range("sigma", self.sigma, |x| x >= 0.0, ">= 0");
        range("p", self.p, |x| (0.0..=1.0).contains(&x), "in [0, 1]");
        range("w", self.w, |x| x > 0.0, "> 0");
        range("lambda", self.lambda, |x| x > 0.0, "> 0");
        range("coupling", self.coupling, |x| x > 0.0, "> 0");
        range("curvature", self.curvature, |x| x >= 0.0, ">= 0");
        if self.kind == Eta {
            range("mu", self.mu, |x| x > 0.0, "> 0");
        }
        if let (Some(b), Some(g)) = (self.coupling, self.curvature) {
            if g > b {
                v.push(format!("environment.curvature ({g}) must not exceed coupling ({b})"));
            }
        }
        if self.kind == Strategic {
            if self.epsilon.is_some() == self.epsilon_ratio.is_some() {
                v.push("environment: strategic needs exactly one of epsilon or epsilon_ratio".into());
            }
            if let Some(d) = &self.data {
                d.check(v);
            }
        }
    }
}

impl DataConfig {
    fn check(&self, v: &mut Vec<String>) {
        let (required, optional): (&[&str], &[&str]) = match self.source {
            DataSource::Synthetic => (&["n", "d"], &["label_balance", "seed"]),
            DataSource::Csv => (&["path", "label_column"], &["feature_columns", "max_rows", "subsample_seed"]),
        };
        let present = [
            ("n", self.n.is_some()),
            ("d", self.d.is_some()),
            ("label_balance", self.label_balance.is_some()),
            ("seed", self.seed.is_some()),
            ("path", self.path.is_some()),
            ("label_column", self.label_column.is_some()),
            ("feature_columns", self.feature_columns.is_some()),
            ("max_rows", self.max_rows.is_some()),
            ("subsample_seed", self.subsample_seed.is_some()),
        ];
        for (key, is_set) in present {
            if required.contains(&key) && !is_set {
                v.push(format!("environment.data.{key} is required for this source"));
            }
            if is_set && !required.contains(&key) && !optional.contains(&key) {
                v.push(format!("environment.data.{key} is not used by this source"));
            }
        }
        if let Some(m) = self.max_rows {
            if m == 0 {
                v.push("environment.data.max_rows must be >= 1".into());
            }
        }
    }
}
