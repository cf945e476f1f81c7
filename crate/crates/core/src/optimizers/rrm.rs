use super::{is_diverged, Recorder, RunOptions};
use crate::error::{Error, Result};
use crate::params::ParamVector;
use crate::problem::Environment;
use crate::trajectory::{RunStatus, Trajectory};

/// Settings for the inner decoupled-risk solver. Environments with a closed
/// form for G ignore them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: 1_000_000,
        }
    }
}

/// Repeated risk minimization: θ_{k+1} = G(θ_k).
pub fn rrm<E: Environment + ?Sized>(
    env: &E,
    theta1: &ParamVector,
    num_rounds: u64,
    solver: SolverOptions,
    opts: &RunOptions,
) -> Result<Trajectory> {
    env.check_domain(theta1)?;
    let mut recorder = Recorder::new(env, opts, num_rounds)?;
    let mut traj = Trajectory::new();
    let mut theta = theta1.clone();
    recorder.push(&mut traj, 0, 0, 0, &theta)?;
    for k in 1..=num_rounds {
        theta = env.solve_decoupled(&theta, solver.tol, solver.max_iter)?;
        if is_diverged(theta.as_slice()) {
            traj.status = RunStatus::Diverged { step: k };
            break;
        }
        if recorder.wants(k) {
            recorder.push(&mut traj, k, 0, k, &theta)?;
        }
    }
    Ok(traj)
}

/// Iterates θ ← G(θ) until successive iterates are within `tol`.
///
/// Convergence is only guaranteed for ε < γ/β; outside that regime the
/// iteration may still settle, or fail with `FixedPointNoConvergence`.
pub fn empirical_stable_point<E: Environment + ?Sized>(
    env: &E,
    theta1: &ParamVector,
    tol: f64,
    max_rounds: usize,
    solver: SolverOptions,
) -> Result<ParamVector> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {tol}")));
    }
    env.check_domain(theta1)?;
    let mut theta = theta1.clone();
    let mut step = f64::INFINITY;
    for _ in 0..max_rounds {
        let next = env.solve_decoupled(&theta, solver.tol.min(tol * 1e-2), solver.max_iter)?;
        if !next.is_finite() {
            return Err(Error::NonFinite);
        }
        step = next.dist(&theta)?;
        theta = next;
        if step < tol {
            return Ok(theta);
        }
    }
    Err(Error::FixedPointNoConvergence {
        rounds: max_rounds,
        last_step: step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::{EtaEnv, GaussianEnv, PointMassEnv};

    #[test]
    fn gaussian_rrm_is_geometric() {
        let env = GaussianEnv::new(10.0, 0.1, 0.2).unwrap();
        let t = rrm(&env, &ParamVector::scalar(0.0), 20, SolverOptions::default(), &RunOptions::default()).unwrap();
        for (k, r) in t.records.iter().enumerate() {
            let expected = 12.5 * (1.0 - 0.2f64.powi(k as i32));
            assert!((r.theta[0] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn stable_point_matches_closed_forms() {
        let g = GaussianEnv::new(10.0, 0.1, 0.2).unwrap();
        let s = empirical_stable_point(&g, &ParamVector::scalar(0.0), 1e-12, 1000, SolverOptions::default()).unwrap();
        assert!((s[0] - 12.5).abs() < 1e-10);

        let e = EtaEnv::new(0.5, 10.0, 4.0, 0.25).unwrap();
        let s = empirical_stable_point(&e, &e.default_init(), 1e-12, 1000, SolverOptions::default()).unwrap();
        assert!((s[0] - 3.2).abs() < 1e-10 && (s[1] - 10.0).abs() < 1e-10);
    }

    #[test]
    fn no_performativity_settles_after_one_round() {
        let g = GaussianEnv::new(10.0, 0.1, 0.0).unwrap();
        let s = empirical_stable_point(&g, &ParamVector::scalar(-3.0), 1e-12, 2, SolverOptions::default()).unwrap();
        assert_eq!(s[0], 10.0);
    }

    #[test]
    fn unstable_map_reports_failure() {
        let env = PointMassEnv::new(1.5, 1.0, 1.0).unwrap();
        let r = empirical_stable_point(&env, &ParamVector::scalar(1.0), 1e-9, 50, SolverOptions::default());
        assert!(matches!(r, Err(Error::FixedPointNoConvergence { .. })));
    }
}
