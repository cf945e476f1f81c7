use super::{is_diverged, Recorder, RunOptions};
use crate::error::{Error, Result};
use crate::params::ParamVector;
use crate::problem::{population_gradient, Environment, ProblemConstants};
use crate::rng::SimRng;
use crate::trajectory::{RunStatus, Trajectory};

/// Repeated gradient descent on the population:
/// θ_{k+1} = Π_Θ(θ_k − η E_{z∼D(θ_k)} ∇ℓ(z; θ_k)).
///
/// Uses the exact population gradient when the environment has one (no
/// samples are counted); otherwise `mc_samples` draws per step.
pub fn rgd<E: Environment + ?Sized>(
    env: &E,
    theta1: &ParamVector,
    eta: f64,
    num_steps: u64,
    mc_samples: usize,
    opts: &RunOptions,
    rng: &mut SimRng,
) -> Result<Trajectory> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidParameter(format!("step size must be > 0, got {eta}")));
    }
    env.check_domain(theta1)?;
    let per_step = if env.capabilities().closed_form_population_gradient {
        0
    } else {
        mc_samples as u64
    };
    let bounds = env.bounds();
    let mut recorder = Recorder::new(env, opts, num_steps)?;
    let mut traj = Trajectory::new();
    let mut theta = theta1.clone();
    recorder.push(&mut traj, 0, 0, 0, &theta)?;

    for k in 1..=num_steps {
        let g = population_gradient(env, &theta, mc_samples, rng)?;
        theta.axpy(-eta, &g)?;
        if let Some(b) = bounds {
            b.clamp_in_place(theta.as_mut_slice());
        }
        if is_diverged(theta.as_slice()) {
            traj.status = RunStatus::Diverged { step: k };
            break;
        }
        if recorder.wants(k) {
            recorder.push(&mut traj, k, k * per_step, k, &theta)?;
        }
    }
    Ok(traj)
}

/// The constant step (γ − εβ) / (2(1 + ε²)β²) under which RGD contracts
/// towards θ_PS; requires ε < γ/β.
pub fn rgd_step_size(c: &ProblemConstants) -> Result<f64> {
    c.require_regime()?;
    Ok(c.effective_strong_convexity() / (2.0 * (1.0 + c.epsilon * c.epsilon) * c.beta * c.beta))
}

/// Per-step contraction factor 1 − η(γ − εβ)/2 on ‖θ − θ_PS‖.
pub fn rgd_contraction_bound(c: &ProblemConstants, eta: f64) -> f64 {
    1.0 - eta * c.effective_strong_convexity() / 2.0
}
