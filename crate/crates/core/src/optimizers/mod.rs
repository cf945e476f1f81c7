//! Stochastic and population-level optimizers for performative prediction.
//!
//! All optimizers return a [`Trajectory`] whose record 0 is the initial model.
//! Sample and deployment counters follow one convention: `samples` counts
//! draws from the distribution map, `deployments` counts redeployments after
//! the initial model.

mod greedy;
mod lazy;
mod rgd;
mod rrm;
mod schedule;

pub use greedy::greedy_deploy;
pub use lazy::{lazy_deploy, LazyBudget};
pub use rgd::{rgd, rgd_contraction_bound, rgd_step_size};
pub use rrm::{empirical_stable_point, rrm, SolverOptions};
pub use schedule::{greedy_step_size, lazy_step_size, DeploymentSchedule, StepSchedule, StepVariant};

use crate::error::Result;
use crate::params::ParamVector;
use crate::problem::{performative_risk, Environment};
use crate::rng::{seeded, SimRng};
use crate::trajectory::{RecordPolicy, Trajectory, TrajectoryRecord};

/// Iterates whose norm exceeds this are treated as diverged.
pub const DIVERGENCE_NORM: f64 = 1e12;

/// What to record along a run.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Point to measure ‖θ − θ_ref‖² against, typically θ_PS.
    pub reference: Option<ParamVector>,
    pub record: RecordPolicy,
    /// Monte-Carlo samples for PR(θ) at each record; 0 disables it.
    pub perf_risk_samples: usize,
    /// Seed of the evaluation stream, kept apart from the optimizer stream.
    pub eval_seed: u64,
}

impl RunOptions {
    pub fn with_reference(reference: ParamVector) -> Self {
        RunOptions {
            reference: Some(reference),
            ..Default::default()
        }
    }
}

pub(crate) fn is_diverged(theta: &[f64]) -> bool {
    let mut sq = 0.0;
    for v in theta {
        if !v.is_finite() {
            return true;
        }
        sq += v * v;
    }
    !(sq.sqrt() <= DIVERGENCE_NORM)
}

pub(crate) struct Recorder<'a, E: Environment + ?Sized> {
    env: &'a E,
    opts: &'a RunOptions,
    eval_rng: SimRng,
    last_step: u64,
}

impl<'a, E: Environment + ?Sized> Recorder<'a, E> {
    pub(crate) fn new(env: &'a E, opts: &'a RunOptions, last_step: u64) -> Result<Self> {
        if let Some(r) = &opts.reference {
            r.check_dim(env.param_dim())?;
        }
        Ok(Recorder {
            env,
            opts,
            eval_rng: seeded(opts.eval_seed),
            last_step,
        })
    }

    pub(crate) fn wants(&self, step: u64) -> bool {
        self.opts.record.wants(step, self.last_step)
    }

    pub(crate) fn push(
        &mut self,
        traj: &mut Trajectory,
        step: u64,
        samples: u64,
        deployments: u64,
        theta: &ParamVector,
    ) -> Result<()> {
        let dist_sq = match &self.opts.reference {
            Some(r) => Some(theta.dist_sq(r)?),
            None => None,
        };
        let perf_risk = if self.opts.perf_risk_samples > 0 {
            Some(performative_risk(
                self.env,
                theta,
                self.opts.perf_risk_samples,
                &mut self.eval_rng,
            )?)
        } else {
            None
        };
        traj.push(TrajectoryRecord {
            step,
            samples,
            deployments,
            theta: theta.clone(),
            dist_sq,
            perf_risk,
        });
        Ok(())
    }
}
