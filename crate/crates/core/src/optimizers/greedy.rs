use super::{is_diverged, Recorder, RunOptions, StepSchedule};
use crate::error::Result;
use crate::params::ParamVector;
use crate::problem::Environment;
use crate::rng::SimRng;
use crate::trajectory::{RunStatus, Trajectory};

/// Greedy deploy: every SGD step redeploys, and the next sample is drawn from
/// the distribution induced by the current iterate.
///
/// θ_{k+1} = Π_Θ(θ_k − η_k ∇ℓ(z_k; θ_k)), z_k ∼ D(θ_k). The record at step k
/// holds θ_{k+1} after k samples and k deployments.
pub fn greedy_deploy<E: Environment + ?Sized>(
    env: &E,
    theta1: &ParamVector,
    num_steps: u64,
    schedule: &StepSchedule,
    opts: &RunOptions,
    rng: &mut SimRng,
) -> Result<Trajectory> {
    env.check_domain(theta1)?;
    let bounds = env.bounds();
    let loss = env.loss();
    let mut recorder = Recorder::new(env, opts, num_steps)?;
    let mut traj = Trajectory::new();
    let mut theta = theta1.clone();
    let mut grad = vec![0.0; theta.dim()];
    recorder.push(&mut traj, 0, 0, 0, &theta)?;

    for k in 1..=num_steps {
        let z = env.sample(&theta, rng)?;
        loss.check(&z, &theta)?;
        loss.grad_into(&z, &theta, &mut grad);
        let eta = schedule.eta(k);
        for (t, g) in theta.as_mut_slice().iter_mut().zip(&grad) {
            *t -= eta * g;
        }
        if let Some(b) = bounds {
            b.clamp_in_place(theta.as_mut_slice());
        }
        if is_diverged(theta.as_slice()) {
            traj.status = RunStatus::Diverged { step: k };
            break;
        }
        if recorder.wants(k) {
            recorder.push(&mut traj, k, k, k, &theta)?;
        }
    }
    Ok(traj)
}
