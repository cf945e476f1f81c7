use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;

use super::config::StablePointSource;
use super::prepare::{Experiment, Plan};
use super::ExperimentError;
use crate::analysis::{confidence_band, sensitivity_audit, AuditOptions, AuditRow, Z_90};
use crate::optimizers::{empirical_stable_point, greedy_deploy, lazy_deploy, rgd, rrm, RunOptions, SolverOptions};
use crate::params::ParamVector;
use crate::rng::{seeded, substream, substream_seed};
use crate::trajectory::{RunStatus, Trajectory};

const EVAL_SALT: u64 = 0x5EED_E7A1_0000_0000;

/// One row of the aggregate file.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub checkpoint: u64,
    pub samples: u64,
    pub deployments: u64,
    pub mean_dist_sq: Option<f64>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub n_runs: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub run_id: u64,
    pub seed: u64,
    pub status: RunStatus,
    pub final_dist_sq: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ExperimentSummary {
    pub out_dir: PathBuf,
    pub runs: Vec<RunSummary>,
    pub aggregate: Vec<AggregateRow>,
}

impl Experiment {
    pub fn run_seed(&self, run_id: u64) -> u64 {
        substream_seed(self.config.base_seed, run_id)
    }

    /// Executes one replicate on its own random substream.
    pub fn run_one(&self, run_id: u64) -> Result<Trajectory, ExperimentError> {
        let mut rng = substream(self.config.base_seed, run_id);
        let opts = RunOptions {
            reference: self.theta_ps.clone(),
            record: self.record.clone(),
            perf_risk_samples: self.config.output.perf_risk_samples,
            eval_seed: self.run_seed(run_id) ^ EVAL_SALT,
        };
        let env = self.env.as_ref();
        let t = match &self.plan {
            Plan::Greedy { steps, num_steps } => greedy_deploy(env, &self.theta1, *num_steps, steps, &opts, &mut rng)?,
            Plan::Lazy {
                deployment,
                steps,
                budget,
            } => lazy_deploy(env, &self.theta1, *budget, deployment, steps, &opts, &mut rng)?,
            Plan::Rgd {
                eta,
                num_steps,
                mc_samples,
            } => rgd(env, &self.theta1, *eta, *num_steps, *mc_samples, &opts, &mut rng)?,
            Plan::Rrm { solver, rounds } => rrm(env, &self.theta1, *rounds, *solver, &opts)?,
        };
        Ok(t)
    }

    /// Runs every replicate, `jobs` at a time. Results are in run order.
    pub fn run_all(&self, jobs: usize) -> Result<Vec<Trajectory>, ExperimentError> {
        let repeats = u64::from(self.config.repeats);
        if jobs <= 1 {
            return (0..repeats).map(|r| self.run_one(r)).collect();
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| ExperimentError::Runtime(format!("cannot start worker pool: {e}")))?;
        pool.install(|| (0..repeats).into_par_iter().map(|r| self.run_one(r)).collect())
    }

    /// Runs all replicates and writes trace, aggregate and metadata files.
    pub fn run_to_dir(&self, out_dir: &Path, jobs: usize) -> Result<ExperimentSummary, ExperimentError> {
        let trajectories = self.run_all(jobs)?;
        fs::create_dir_all(out_dir).map_err(|source| ExperimentError::Io {
            path: out_dir.to_path_buf(),
            source,
        })?;
        for (run_id, t) in trajectories.iter().enumerate() {
            write_atomic(&out_dir.join(trace_file_name(run_id as u64)), trace_csv(run_id as u64, t).as_bytes())?;
        }
        let aggregate = aggregate(&trajectories, self.config.output.band);
        write_atomic(&out_dir.join("aggregate.csv"), aggregate_csv(&aggregate).as_bytes())?;
        write_atomic(&out_dir.join("metadata.toml"), self.metadata(&trajectories).as_bytes())?;
        let runs = trajectories
            .iter()
            .enumerate()
            .map(|(i, t)| RunSummary {
                run_id: i as u64,
                seed: self.run_seed(i as u64),
                status: t.status,
                final_dist_sq: t.last().and_then(|r| r.dist_sq),
            })
            .collect();
        Ok(ExperimentSummary {
            out_dir: out_dir.to_path_buf(),
            runs,
            aggregate,
        })
    }

    /// Random θ pairs around the initial model, audited for ε-sensitivity.
    pub fn audit(&self) -> Result<Vec<AuditRow>, ExperimentError> {
        let a = &self.config.audit;
        let mut rng = seeded(self.config.base_seed);
        let bounds = self.env.bounds();
        let draw = |rng: &mut crate::SimRng| {
            let mut v: Vec<f64> = self
                .theta1
                .as_slice()
                .iter()
                .map(|x| x + a.spread * (2.0 * rng.random::<f64>() - 1.0))
                .collect();
            if let Some(b) = bounds {
                b.clamp_in_place(&mut v);
            }
            ParamVector::new(v)
        };
        let pairs: Vec<_> = (0..a.pairs).map(|_| (draw(&mut rng), draw(&mut rng))).collect();
        let opts = AuditOptions {
            n_samples: a.n_samples,
            coordinate: a.coordinate,
            paired: a.paired,
            bootstrap: a.bootstrap,
            abs_tol: a.abs_tol,
        };
        Ok(sensitivity_audit(self.env.as_ref(), &pairs, &opts, &mut rng)?)
    }

    /// RRM fixed point from the initial model, ignoring any configured source.
    pub fn compute_stable_point(&self) -> Result<ParamVector, ExperimentError> {
        let sp = &self.config.stable_point;
        Ok(empirical_stable_point(
            self.env.as_ref(),
            &self.theta1,
            sp.tol.unwrap_or(1e-10),
            sp.max_rounds.unwrap_or(10_000),
            SolverOptions::default(),
        )?)
    }

    fn metadata(&self, trajectories: &[Trajectory]) -> String {
        use toml::{Table, Value};
        let floats = |v: &[f64]| Value::Array(v.iter().map(|x| Value::Float(*x)).collect());
        let c = self.env.constants();

        let mut resolved = Table::new();
        resolved.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
        resolved.insert("environment".into(), Value::String(self.env.name().into()));
        resolved.insert(
            "rng".into(),
            Value::String("ChaCha8; run seed = base_seed XOR run_id".into()),
        );
        let mut constants = Table::new();
        for (k, v) in [
            ("epsilon", c.epsilon),
            ("beta", c.beta),
            ("gamma", c.gamma),
            ("sigma_sq", c.sigma_sq),
            ("l_sq", c.l_sq),
            ("gamma_over_beta", c.ratio()),
        ] {
            constants.insert(k.into(), Value::Float(v));
        }
        constants.insert("in_regime".into(), Value::Boolean(c.in_convergence_regime()));
        resolved.insert("constants".into(), Value::Table(constants));
        resolved.insert("theta1".into(), floats(self.theta1.as_slice()));
        resolved.insert(
            "stable_point_source".into(),
            Value::String(
                match self.theta_ps_source {
                    StablePointSource::ClosedForm => "closed_form",
                    StablePointSource::RrmEmpirical => "rrm_empirical",
                    StablePointSource::Explicit => "explicit",
                    StablePointSource::None => "none",
                }
                .into(),
            ),
        );
        if let Some(p) = &self.theta_ps {
            resolved.insert("theta_ps".into(), floats(p.as_slice()));
        }

        let mut plan = Table::new();
        if let Plan::Greedy { steps, .. } | Plan::Lazy { steps, .. } = &self.plan {
            plan.insert("step_variant".into(), Value::try_from(steps.variant()).expect("variant serializes"));
            plan.insert("c_eta".into(), Value::Float(steps.scale()));
            plan.insert("k0".into(), Value::Float(steps.offset()));
        }
        match &self.plan {
            Plan::Lazy { deployment, .. } => {
                plan.insert("n0".into(), Value::Float(deployment.n0()));
                plan.insert("alpha".into(), Value::Float(deployment.alpha()));
                plan.insert(
                    "samples".into(),
                    Value::Integer(deployment.samples_after(self.last_step) as i64),
                );
            }
            Plan::Rgd { eta, mc_samples, .. } => {
                plan.insert("eta".into(), Value::Float(*eta));
                plan.insert("mc_samples".into(), Value::Integer(*mc_samples as i64));
            }
            Plan::Rrm { solver, .. } => {
                plan.insert("solver_tol".into(), Value::Float(solver.tol));
                plan.insert("solver_max_iter".into(), Value::Integer(solver.max_iter as i64));
            }
            Plan::Greedy { .. } => {}
        }
        plan.insert("final_step".into(), Value::Integer(self.last_step as i64));
        plan.insert("checkpoints".into(), Value::Integer(self.checkpoint_steps.len() as i64));
        resolved.insert("plan".into(), Value::Table(plan));

        if let Some(d) = &self.data_info {
            let mut t = Table::new();
            t.insert("rows".into(), Value::Integer(d.rows as i64));
            t.insert("dim".into(), Value::Integer(d.dim as i64));
            t.insert("dropped_rows".into(), Value::Integer(d.dropped_rows as i64));
            t.insert("positive_rate".into(), Value::Float(d.positive_rate));
            resolved.insert("data".into(), Value::Table(t));
        }
        resolved.insert(
            "notes".into(),
            Value::Array(self.notes.iter().map(|n| Value::String(n.clone())).collect()),
        );

        let mut runs = Table::new();
        runs.insert(
            "seeds".into(),
            Value::Array(
                (0..trajectories.len() as u64)
                    .map(|r| Value::String(self.run_seed(r).to_string()))
                    .collect(),
            ),
        );
        runs.insert(
            "status".into(),
            Value::Array(trajectories.iter().map(|t| Value::String(t.status.label().into())).collect()),
        );
        runs.insert(
            "diverged_at".into(),
            Value::Array(
                trajectories
                    .iter()
                    .map(|t| match t.status {
                        RunStatus::Diverged { step } => Value::Integer(step as i64),
                        RunStatus::Completed => Value::Integer(-1),
                    })
                    .collect(),
            ),
        );
        resolved.insert("runs".into(), Value::Table(runs));

        let mut doc = Table::new();
        doc.insert(
            "config".into(),
            Value::try_from(&self.config).expect("config serializes"),
        );
        doc.insert("resolved".into(), Value::Table(resolved));
        toml::to_string(&doc).expect("metadata serializes")
    }
}

pub fn trace_file_name(run_id: u64) -> String {
    format!("trace_run{run_id:03}.csv")
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub const TRACE_HEADER: &str = "run_id,checkpoint,samples,deployments,dist_sq,perf_risk,status";
pub const AGGREGATE_HEADER: &str = "checkpoint,samples,deployments,mean_dist_sq,lo,hi,n_runs";

/// Per-run trace. `status` is the run's terminal status on every row.
pub fn trace_csv(run_id: u64, t: &Trajectory) -> String {
    let mut out = String::with_capacity(64 * (t.records.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in &t.records {
        let _ = writeln!(
            out,
            "{run_id},{},{},{},{},{},{}",
            r.step,
            r.samples,
            r.deployments,
            fmt_opt(r.dist_sq),
            fmt_opt(r.perf_risk),
            t.status.label()
        );
    }
    out
}

pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::with_capacity(96 * (rows.len() + 1));
    out.push_str(AGGREGATE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.checkpoint,
            r.samples,
            r.deployments,
            fmt_opt(r.mean_dist_sq),
            fmt_opt(r.lo),
            fmt_opt(r.hi),
            r.n_runs
        );
    }
    out
}

/// Mean and 90% band of dist² per checkpoint, over the runs that reached it
/// (diverged runs stop contributing). With fewer than two runs, or the band
/// switched off, lo = hi = mean.
pub fn aggregate(trajectories: &[Trajectory], band: bool) -> Vec<AggregateRow> {
    let mut steps: Vec<u64> = trajectories
        .iter()
        .flat_map(|t| t.records.iter().map(|r| r.step))
        .collect();
    steps.sort_unstable();
    steps.dedup();
    let mut rows = Vec::with_capacity(steps.len());
    for step in steps {
        let recs: Vec<_> = trajectories.iter().filter_map(|t| t.record_at(step)).collect();
        let first = recs[0];
        let dists: Option<Vec<f64>> = recs.iter().map(|r| r.dist_sq).collect();
        let (mean, lo, hi) = match dists {
            None => (None, None, None),
            Some(d) => {
                let mean = d.iter().sum::<f64>() / d.len() as f64;
                if band && d.len() >= 2 {
                    let traces: Vec<Vec<f64>> = d.iter().map(|x| vec![*x]).collect();
                    let b = confidence_band(&traces, Z_90).expect("at least two equal-length traces");
                    (Some(b.mean[0]), Some(b.lo[0]), Some(b.hi[0]))
                } else {
                    (Some(mean), Some(mean), Some(mean))
                }
            }
        };
        rows.push(AggregateRow {
            checkpoint: step,
            samples: first.samples,
            deployments: first.deployments,
            mean_dist_sq: mean,
            lo,
            hi,
            n_runs: recs.len(),
        });
    }
    rows
}

/// Writes to a temporary sibling, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ExperimentError> {
    let io = |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    };
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}
