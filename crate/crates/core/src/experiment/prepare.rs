use std::path::Path;

use super::config::{
    AlgorithmKind, CheckpointGrid, ConfigError, DataSource, EnvironmentKind, ExperimentConfig,
    ScheduleVariant, StablePointSource, DEFAULT_OVERRIDE_FACTOR,
};
use super::ExperimentError;
use crate::data::{load_credit_csv, preprocess, synthetic_credit, CsvOptions, Dataset};
use crate::environments::{
    compute_logistic_constants, EtaEnv, GaussianEnv, PointMassEnv, StrategicEnv, DEFAULT_STRATEGIC_DIMS,
};
use crate::optimizers::{
    empirical_stable_point, rgd_step_size, DeploymentSchedule, LazyBudget, SolverOptions, StepSchedule,
};
use crate::params::ParamVector;
use crate::problem::Environment;
use crate::trajectory::RecordPolicy;

/// What a run executes, with every schedule resolved.
#[derive(Clone, Debug, PartialEq)]
pub enum Plan {
    Greedy {
        steps: StepSchedule,
        num_steps: u64,
    },
    Lazy {
        deployment: DeploymentSchedule,
        steps: StepSchedule,
        budget: LazyBudget,
    },
    Rgd {
        eta: f64,
        num_steps: u64,
        mc_samples: usize,
    },
    Rrm {
        solver: SolverOptions,
        rounds: u64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataInfo {
    pub rows: usize,
    pub dim: usize,
    pub dropped_rows: usize,
    pub positive_rate: f64,
}

/// A validated experiment ready to run.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub env: Box<dyn Environment>,
    pub theta1: ParamVector,
    pub theta_ps: Option<ParamVector>,
    pub theta_ps_source: StablePointSource,
    pub plan: Plan,
    /// Final outer step (SGD update or round).
    pub last_step: u64,
    pub checkpoint_steps: Vec<u64>,
    pub record: RecordPolicy,
    /// Schedule switches and other resolution decisions, echoed in metadata.
    pub notes: Vec<String>,
    pub data_info: Option<DataInfo>,
}

fn invalid(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::Config(ConfigError::Invalid(vec![msg.into()]))
}

impl Experiment {
    /// Builds the environment, resolves schedules and the reference point,
    /// and checks everything that needs the problem constants.
    ///
    /// `cached_stable_point` (from a previous run's metadata) replaces the
    /// RRM computation when the source is `rrm_empirical`.
    pub fn prepare(
        config: ExperimentConfig,
        cached_stable_point: Option<ParamVector>,
    ) -> Result<Self, ExperimentError> {
        let (env, data_info) = build_environment(&config)?;
        let constants = env.constants();
        let mut notes = Vec::new();
        let mut violations = Vec::new();

        let theta1 = match &config.init.theta {
            Some(t) => ParamVector::new(t.clone()),
            None => env.default_init(),
        };
        if let Err(e) = env.check_domain(&theta1) {
            violations.push(format!("init.theta: {e}"));
        }

        let schedule = config.schedule.clone().unwrap_or_default();
        let factor = schedule.factor.unwrap_or(DEFAULT_OVERRIDE_FACTOR);
        let regime_msg = || {
            format!(
                "the theorem schedule needs epsilon < gamma/beta (epsilon = {}, gamma/beta = {}); \
                 use schedule.variant = \"override\" or \"auto\"",
                constants.epsilon,
                constants.ratio()
            )
        };
        let mut step_schedule = |theorem: fn(&crate::ProblemConstants) -> crate::Result<StepSchedule>,
                                 greedy: bool,
                                 violations: &mut Vec<String>|
         -> Option<StepSchedule> {
            let r = match schedule.variant {
                ScheduleVariant::Theorem => {
                    if greedy && !constants.in_convergence_regime() {
                        violations.push(regime_msg());
                        return None;
                    }
                    theorem(&constants)
                }
                ScheduleVariant::Override => StepSchedule::epsilon_free(&constants, factor),
                ScheduleVariant::Auto => {
                    if !greedy || constants.in_convergence_regime() {
                        theorem(&constants)
                    } else {
                        notes.push(format!(
                            "auto schedule: epsilon = {} >= gamma/beta = {}, switched to the \
                             epsilon-free override with factor {factor}",
                            constants.epsilon,
                            constants.ratio()
                        ));
                        StepSchedule::epsilon_free(&constants, factor)
                    }
                }
                ScheduleVariant::Constant => StepSchedule::constant(schedule.eta.unwrap_or(f64::NAN)),
            };
            match r {
                Ok(s) => Some(s),
                Err(e) => {
                    violations.push(format!("schedule: {e}"));
                    None
                }
            }
        };

        let alg = &config.algorithm;
        let budget = &config.budget;
        let plan = match alg.kind {
            AlgorithmKind::Greedy => {
                let num_steps = budget.samples.or(budget.deployments).unwrap_or(0);
                step_schedule(StepSchedule::greedy_theorem, true, &mut violations)
                    .map(|steps| Plan::Greedy { steps, num_steps })
            }
            AlgorithmKind::Lazy => {
                let steps = step_schedule(StepSchedule::lazy_theorem, false, &mut violations);
                let deployment = DeploymentSchedule::new(alg.n0.unwrap_or(1.0), alg.alpha.unwrap_or(1.0));
                let deployment = deployment.map_err(|e| violations.push(format!("algorithm: {e}"))).ok();
                let lazy_budget = match (budget.samples, budget.deployments) {
                    (Some(s), _) => LazyBudget::Samples(s),
                    (_, d) => LazyBudget::Deployments(d.unwrap_or(0)),
                };
                match (steps, deployment) {
                    (Some(steps), Some(deployment)) => {
                        if let LazyBudget::Samples(s) = lazy_budget {
                            if deployment.rounds_within(s).0 == 0 {
                                violations.push(format!(
                                    "budget.samples = {s} is smaller than the first round ({} samples)",
                                    deployment.samples_in_round(1)
                                ));
                            }
                        }
                        Some(Plan::Lazy {
                            deployment,
                            steps,
                            budget: lazy_budget,
                        })
                    }
                    _ => None,
                }
            }
            AlgorithmKind::Rgd => {
                let eta = match schedule.variant {
                    ScheduleVariant::Constant => schedule.eta,
                    _ => match rgd_step_size(&constants) {
                        Ok(eta) => Some(eta),
                        Err(_) => {
                            violations.push(format!(
                                "the rgd contraction step needs epsilon < gamma/beta (epsilon = {}, \
                                 gamma/beta = {}); set schedule.variant = \"constant\" with an eta",
                                constants.epsilon,
                                constants.ratio()
                            ));
                            None
                        }
                    },
                };
                eta.map(|eta| Plan::Rgd {
                    eta,
                    num_steps: budget.deployments.unwrap_or(0),
                    mc_samples: alg.mc_samples.unwrap_or(1000),
                })
            }
            AlgorithmKind::Rrm => Some(Plan::Rrm {
                solver: SolverOptions {
                    tol: alg.tol.unwrap_or(1e-10),
                    max_iter: alg.max_iter.unwrap_or(1_000_000),
                },
                rounds: budget.deployments.unwrap_or(0),
            }),
        };

        let source = config.stable_point.source.unwrap_or(if env.stable_point().is_some() {
            StablePointSource::ClosedForm
        } else {
            StablePointSource::RrmEmpirical
        });
        match (source, &config.stable_point.value) {
            (StablePointSource::ClosedForm, _) if env.stable_point().is_none() => violations.push(format!(
                "stable_point: {} has no closed-form stable point for these parameters",
                env.name()
            )),
            (StablePointSource::Explicit, Some(v)) if v.len() != env.param_dim() => violations.push(format!(
                "stable_point.value has {} entries, expected {}",
                v.len(),
                env.param_dim()
            )),
            _ => {}
        }

        if !violations.is_empty() {
            return Err(ExperimentError::Config(ConfigError::Invalid(violations)));
        }
        let plan = plan.expect("plan is set when there are no violations");

        let theta_ps = match source {
            StablePointSource::ClosedForm => env.stable_point(),
            StablePointSource::Explicit => config.stable_point.value.clone().map(ParamVector::new),
            StablePointSource::None => None,
            StablePointSource::RrmEmpirical => match cached_stable_point {
                Some(p) if p.dim() == env.param_dim() => {
                    notes.push("stable point taken from cached metadata".into());
                    Some(p)
                }
                _ => {
                    if !constants.in_convergence_regime() {
                        notes.push(format!(
                            "rrm_empirical stable point computed with epsilon >= gamma/beta \
                             (epsilon = {}, gamma/beta = {}); convergence is not guaranteed",
                            constants.epsilon,
                            constants.ratio()
                        ));
                    }
                    Some(empirical_stable_point(
                        env.as_ref(),
                        &theta1,
                        config.stable_point.tol.unwrap_or(1e-10),
                        config.stable_point.max_rounds.unwrap_or(10_000),
                        SolverOptions::default(),
                    )?)
                }
            },
        };

        let last_step = match &plan {
            Plan::Greedy { num_steps, .. } => *num_steps,
            Plan::Lazy {
                deployment, budget, ..
            } => match budget {
                LazyBudget::Deployments(k) => *k,
                LazyBudget::Samples(s) => deployment.rounds_within(*s).0,
            },
            Plan::Rgd { num_steps, .. } => *num_steps,
            Plan::Rrm { rounds, .. } => *rounds,
        };
        let c = &config.checkpoints;
        let checkpoint_steps: Vec<u64> = match c.grid {
            CheckpointGrid::Geometric => geometric_grid(last_step, c.points.unwrap_or(2)),
            CheckpointGrid::Every => (0..=last_step).collect(),
            CheckpointGrid::Explicit => {
                let steps = c.steps.clone().unwrap_or_default();
                if let Some(&bad) = steps.iter().find(|&&s| s > last_step) {
                    return Err(invalid(format!(
                        "checkpoint {bad} is beyond the final step {last_step}"
                    )));
                }
                let mut all = vec![0];
                all.extend(steps.into_iter().filter(|&s| s > 0));
                if *all.last().unwrap() != last_step {
                    all.push(last_step);
                }
                all
            }
        };
        let record = match c.grid {
            CheckpointGrid::Every => RecordPolicy::EveryStep,
            _ => RecordPolicy::checkpoints(checkpoint_steps.iter().copied()),
        };

        Ok(Experiment {
            config,
            env,
            theta1,
            theta_ps,
            theta_ps_source: source,
            plan,
            last_step,
            checkpoint_steps,
            record,
            notes,
            data_info,
        })
    }
}

/// Roughly `points` log-spaced steps in [1, last], plus step 0.
pub fn geometric_grid(last: u64, points: usize) -> Vec<u64> {
    let mut grid = vec![0u64];
    if last == 0 {
        return grid;
    }
    let points = points.max(2);
    let log_last = (last as f64).ln();
    for i in 0..points {
        let s = (log_last * i as f64 / (points - 1) as f64).exp().round() as u64;
        let s = s.clamp(1, last);
        if *grid.last().unwrap() < s {
            grid.push(s);
        }
    }
    if *grid.last().unwrap() != last {
        grid.push(last);
    }
    grid
}

fn env_error(e: crate::Error) -> ExperimentError {
    invalid(format!("environment: {e}"))
}

fn build_environment(
    config: &ExperimentConfig,
) -> Result<(Box<dyn Environment>, Option<DataInfo>), ExperimentError> {
    let e = &config.environment;
    let need = |v: Option<f64>| v.unwrap_or(f64::NAN);
    Ok(match e.kind {
        EnvironmentKind::Gaussian => (
            Box::new(GaussianEnv::new(need(e.mu), need(e.sigma), need(e.epsilon)).map_err(env_error)?),
            None,
        ),
        EnvironmentKind::Eta => (
            Box::new(EtaEnv::new(need(e.p), need(e.mu), need(e.w), need(e.epsilon)).map_err(env_error)?),
            None,
        ),
        EnvironmentKind::PointMass => (
            Box::new(
                PointMassEnv::new(need(e.epsilon), need(e.coupling), need(e.curvature)).map_err(env_error)?,
            ),
            None,
        ),
        EnvironmentKind::Strategic => {
            let data_cfg = e.data.as_ref().ok_or_else(|| invalid("environment.data is required"))?;
            let (data, dropped) = match data_cfg.source {
                DataSource::Synthetic => (
                    synthetic_credit(
                        data_cfg.n.unwrap_or(0),
                        data_cfg.d.unwrap_or(0),
                        data_cfg.label_balance.unwrap_or(0.5),
                        data_cfg.seed.unwrap_or(config.base_seed),
                    )
                    .map_err(|e| invalid(format!("environment.data: {e}")))?,
                    0,
                ),
                DataSource::Csv => {
                    let path = data_cfg.path.clone().unwrap_or_default();
                    let opts = CsvOptions {
                        label_column: data_cfg.label_column.clone().unwrap_or_default(),
                        feature_columns: data_cfg.feature_columns.clone(),
                    };
                    let loaded = load_credit_csv(Path::new(&path), &opts)?;
                    let mut raw: Dataset = loaded.dataset;
                    if let Some(cap) = data_cfg.max_rows {
                        raw = raw.subsample(cap, data_cfg.subsample_seed.unwrap_or(config.base_seed));
                    }
                    (preprocess(&raw)?, loaded.dropped_rows)
                }
            };
            let lambda = e.lambda.unwrap_or_else(|| StrategicEnv::default_lambda(data.len()));
            let epsilon = match (e.epsilon, e.epsilon_ratio) {
                (Some(eps), _) => eps,
                (None, Some(r)) => r * compute_logistic_constants(&data, lambda, 0.0).ratio(),
                (None, None) => f64::NAN,
            };
            let dims = e.strategic_dims.clone().unwrap_or_else(|| DEFAULT_STRATEGIC_DIMS.to_vec());
            let info = DataInfo {
                rows: data.len(),
                dim: data.dim(),
                dropped_rows: dropped,
                positive_rate: data.positive_rate(),
            };
            (
                Box::new(StrategicEnv::new(data, epsilon, dims, Some(lambda)).map_err(env_error)?),
                Some(info),
            )
        }
    })
}
