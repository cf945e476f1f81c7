use rand::Rng;
use serde::Serialize;

use super::wasserstein::{bootstrap_w1_se, empirical_w1_1d, sorted};
use crate::error::{Error, Result};
use crate::params::ParamVector;
use crate::problem::{Environment, Sample};
use crate::rng::{seeded, SimRng};

/// Settings for [`sensitivity_audit`].
#[derive(Clone, Debug, PartialEq)]
pub struct AuditOptions {
    pub n_samples: usize,
    /// Index into the sample vector (features, then the label if present).
    pub coordinate: usize,
    /// Draw both sides from the same random stream, so base draws coincide.
    pub paired: bool,
    pub bootstrap: usize,
    /// Absolute slack added to the pass threshold.
    pub abs_tol: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            n_samples: 100_000,
            coordinate: 0,
            paired: false,
            bootstrap: 50,
            abs_tol: 1e-9,
        }
    }
}

/// One audited pair. `pass` means w1 ≤ bound + 3·se + abs_tol.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditRow {
    pub theta: ParamVector,
    pub theta_prime: ParamVector,
    pub w1: f64,
    pub bound: f64,
    pub se: f64,
    /// w1 / bound, when the bound is positive.
    pub ratio: Option<f64>,
    pub pass: bool,
}

/// Compares the empirical W₁ of one sample coordinate under D(θ) and D(θ′)
/// with the sensitivity bound ε‖θ − θ′‖. The 1-D projection is 1-Lipschitz,
/// so its W₁ is a lower bound on the full W₁.
pub fn sensitivity_audit<E: Environment + ?Sized>(
    env: &E,
    pairs: &[(ParamVector, ParamVector)],
    opts: &AuditOptions,
    rng: &mut SimRng,
) -> Result<Vec<AuditRow>> {
    if opts.n_samples == 0 {
        return Err(Error::InvalidParameter("audit needs n_samples >= 1".into()));
    }
    let width = env.sample_dim();
    let probe = env.sample(&env.default_init(), &mut seeded(0))?;
    let width = width + usize::from(probe.label.is_some());
    if opts.coordinate >= width {
        return Err(Error::InvalidParameter(format!(
            "audit coordinate {} is out of range for {}-dimensional samples",
            opts.coordinate, width
        )));
    }
    let epsilon = env.constants().epsilon;
    let mut rows = Vec::with_capacity(pairs.len());
    for (theta, theta_prime) in pairs {
        env.check_domain(theta)?;
        env.check_domain(theta_prime)?;
        let seed_a: u64 = rng.random();
        let seed_b: u64 = if opts.paired { seed_a } else { rng.random() };
        let a = draw(env, theta, opts, seed_a)?;
        let b = draw(env, theta_prime, opts, seed_b)?;
        let w1 = empirical_w1_1d(&a, &b)?;
        let se = if opts.bootstrap >= 2 {
            bootstrap_w1_se(&a, &b, opts.bootstrap, rng)?
        } else {
            0.0
        };
        let bound = epsilon * theta.dist(theta_prime)?;
        rows.push(AuditRow {
            theta: theta.clone(),
            theta_prime: theta_prime.clone(),
            w1,
            bound,
            se,
            ratio: (bound > 0.0).then(|| w1 / bound),
            pass: w1 <= bound + 3.0 * se + opts.abs_tol,
        });
    }
    Ok(rows)
}

fn coordinate(z: &Sample, i: usize) -> f64 {
    if i < z.features.len() {
        z.features[i]
    } else {
        z.label.unwrap_or(f64::NAN)
    }
}

fn draw<E: Environment + ?Sized>(
    env: &E,
    theta: &ParamVector,
    opts: &AuditOptions,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut r = seeded(seed);
    let mut out = Vec::with_capacity(opts.n_samples);
    for _ in 0..opts.n_samples {
        out.push(coordinate(&env.sample(theta, &mut r)?, opts.coordinate));
    }
    Ok(sorted(&out))
}
