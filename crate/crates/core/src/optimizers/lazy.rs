use serde::{Deserialize, Serialize};

use super::{is_diverged, DeploymentSchedule, Recorder, RunOptions, StepSchedule};
use crate::error::{Error, Result};
use crate::params::ParamVector;
use crate::problem::Environment;
use crate::rng::SimRng;
use crate::trajectory::{RunStatus, Trajectory};

/// How long a lazy-deploy run lasts. A sample budget only runs complete rounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LazyBudget {
    Deployments(u64),
    Samples(u64),
}

/// Lazy deploy: θ_k stays deployed for n(k) samples while an inner SGD run
/// (restarted step sizes, warm-started at θ_k) approaches G(θ_k).
///
/// The record at step k holds θ_{k+1}, after k deployments.
pub fn lazy_deploy<E: Environment + ?Sized>(
    env: &E,
    theta1: &ParamVector,
    budget: LazyBudget,
    deployment: &DeploymentSchedule,
    steps: &StepSchedule,
    opts: &RunOptions,
    rng: &mut SimRng,
) -> Result<Trajectory> {
    env.check_domain(theta1)?;
    let rounds = match budget {
        LazyBudget::Deployments(k) => k,
        LazyBudget::Samples(s) => deployment.rounds_within(s).0,
    };
    if rounds == 0 {
        return Err(Error::InvalidParameter(
            "lazy deploy budget does not cover a single deployment round".into(),
        ));
    }
    let bounds = env.bounds();
    let loss = env.loss();
    let mut recorder = Recorder::new(env, opts, rounds)?;
    let mut traj = Trajectory::new();
    let mut deployed = theta1.clone();
    let mut phi = theta1.clone();
    let mut grad = vec![0.0; phi.dim()];
    let mut samples = 0u64;
    recorder.push(&mut traj, 0, 0, 0, &deployed)?;

    'outer: for k in 1..=rounds {
        let n_k = deployment.samples_in_round(k);
        for j in 1..=n_k {
            let z = env.sample(&deployed, rng)?;
            loss.check(&z, &phi)?;
            loss.grad_into(&z, &phi, &mut grad);
            let eta = steps.eta(j);
            for (t, g) in phi.as_mut_slice().iter_mut().zip(&grad) {
                *t -= eta * g;
            }
            if let Some(b) = bounds {
                b.clamp_in_place(phi.as_mut_slice());
            }
            if is_diverged(phi.as_slice()) {
                traj.status = RunStatus::Diverged { step: k };
                break 'outer;
            }
        }
        samples += n_k;
        deployed.as_mut_slice().copy_from_slice(phi.as_slice());
        if recorder.wants(k) {
            recorder.push(&mut traj, k, samples, k, &deployed)?;
        }
    }
    Ok(traj)
}
