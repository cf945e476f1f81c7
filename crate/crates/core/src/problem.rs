//! The environment abstraction: a distribution map D(·) paired with a loss.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::Loss;
use crate::params::{BoxBounds, ParamVector};
use crate::rng::SimRng;

/// One draw z ∼ D(θ).
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: Option<f64>,
}

impl Sample {
    pub fn unlabelled(features: Vec<f64>) -> Self {
        Sample {
            features,
            label: None,
        }
    }

    pub fn labelled(features: Vec<f64>, label: f64) -> Self {
        Sample {
            features,
            label: Some(label),
        }
    }
}

/// Problem constants: sensitivity ε, joint smoothness β, strong convexity γ,
/// and the gradient second-moment constants σ² and L².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    pub epsilon: f64,
    pub beta: f64,
    pub gamma: f64,
    pub sigma_sq: f64,
    pub l_sq: f64,
}

impl ProblemConstants {
    pub fn new(epsilon: f64, beta: f64, gamma: f64, sigma_sq: f64, l_sq: f64) -> Result<Self> {
        let c = ProblemConstants {
            epsilon,
            beta,
            gamma,
            sigma_sq,
            l_sq,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.epsilon, self.beta, self.gamma, self.sigma_sq, self.l_sq];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("problem constants must be finite".into()));
        }
        if self.epsilon < 0.0 || self.sigma_sq < 0.0 || self.l_sq < 0.0 || self.gamma < 0.0 {
            return Err(Error::InvalidParameter(
                "epsilon, gamma, sigma^2 and L^2 must be nonnegative".into(),
            ));
        }
        if !(self.beta > 0.0) || self.beta < self.gamma {
            return Err(Error::InvalidParameter(format!(
                "need beta >= gamma and beta > 0 (beta = {}, gamma = {})",
                self.beta, self.gamma
            )));
        }
        Ok(())
    }

    /// γ/β, the inverse condition number.
    pub fn ratio(&self) -> f64 {
        self.gamma / self.beta
    }

    /// γ − εβ.
    pub fn effective_strong_convexity(&self) -> f64 {
        self.gamma - self.epsilon * self.beta
    }

    /// True iff γ > 0 and ε < γ/β, the regime with a unique stable point.
    pub fn in_convergence_regime(&self) -> bool {
        self.gamma > 0.0 && self.epsilon < self.ratio()
    }

    pub fn require_regime(&self) -> Result<()> {
        if self.in_convergence_regime() {
            Ok(())
        } else {
            Err(Error::Regime {
                epsilon: self.epsilon,
                ratio: self.ratio(),
            })
        }
    }
}

/// Which closed forms an environment provides.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capabilities {
    pub closed_form_g: bool,
    pub closed_form_stable_point: bool,
    pub closed_form_population_gradient: bool,
}

/// An ε-sensitive distribution map together with the loss it is optimized under.
///
/// Implementations are immutable; all randomness comes from the caller's stream,
/// so the same θ and the same stream state always produce the same sample.
pub trait Environment: Send + Sync {
    fn name(&self) -> &'static str;

    fn constants(&self) -> ProblemConstants;

    fn param_dim(&self) -> usize;

    fn sample_dim(&self) -> usize;

    fn loss(&self) -> &dyn Loss;

    fn capabilities(&self) -> Capabilities;

    /// Parameter set Θ; `None` means all of ℝ^d.
    fn bounds(&self) -> Option<&BoxBounds> {
        None
    }

    /// Draws z ∼ D(θ).
    fn sample(&self, theta: &ParamVector, rng: &mut SimRng) -> Result<Sample>;

    /// Conventional starting point for optimizers.
    fn default_init(&self) -> ParamVector {
        ParamVector::zeros(self.param_dim())
    }

    /// Closed-form G(θ) = argmin_θ' E_{z∼D(θ)} ℓ(z; θ'), when known.
    fn decoupled_minimizer(&self, _theta: &ParamVector) -> Option<ParamVector> {
        None
    }

    /// G(θ), computed by whatever means the environment supports.
    ///
    /// `tol` and `max_iter` only matter for environments that need an
    /// iterative solver.
    fn solve_decoupled(&self, theta: &ParamVector, _tol: f64, _max_iter: usize) -> Result<ParamVector> {
        self.check_domain(theta)?;
        self.decoupled_minimizer(theta)
            .ok_or(Error::Unavailable("decoupled risk minimizer G"))
    }

    fn stable_point(&self) -> Option<ParamVector> {
        None
    }

    /// Exact E_{z∼D(θ)} ∇ℓ(z; θ), when known.
    fn exact_population_gradient(&self, _theta: &ParamVector) -> Option<ParamVector> {
        None
    }

    /// Dimension and Θ-membership check for a parameter the map will be evaluated at.
    fn check_domain(&self, theta: &ParamVector) -> Result<()> {
        theta.check_dim(self.param_dim())?;
        if !theta.is_finite() {
            return Err(Error::NonFinite);
        }
        if let Some(b) = self.bounds() {
            if !b.contains(theta) {
                return Err(Error::OutsideDomain(format!(
                    "{} is outside the box [{:?}, {:?}]",
                    theta,
                    b.lower(),
                    b.upper()
                )));
            }
        }
        Ok(())
    }
}

/// Exact performatively stable point, or `Unavailable`.
pub fn closed_form_stable_point(env: &dyn Environment) -> Result<ParamVector> {
    env.stable_point()
        .ok_or(Error::Unavailable("closed-form stable point"))
}

/// E_{z∼D(θ)} ∇ℓ(z; θ): exact when the environment has a closed form
/// (`mc_samples` is then ignored), otherwise a Monte-Carlo mean.
pub fn population_gradient<E: Environment + ?Sized>(
    env: &E,
    theta: &ParamVector,
    mc_samples: usize,
    rng: &mut SimRng,
) -> Result<ParamVector> {
    env.check_domain(theta)?;
    if let Some(g) = env.exact_population_gradient(theta) {
        return Ok(g);
    }
    if mc_samples == 0 {
        return Err(Error::InvalidParameter("mc_samples must be >= 1".into()));
    }
    let loss = env.loss();
    let mut acc = vec![0.0; theta.dim()];
    let mut g = vec![0.0; theta.dim()];
    for _ in 0..mc_samples {
        let z = env.sample(theta, rng)?;
        loss.check(&z, theta)?;
        loss.grad_into(&z, theta, &mut g);
        for (a, v) in acc.iter_mut().zip(&g) {
            *a += v;
        }
    }
    let inv = 1.0 / mc_samples as f64;
    Ok(ParamVector::new(acc.into_iter().map(|v| v * inv).collect()))
}

/// Monte-Carlo estimate of PR(θ) = E_{z∼D(θ)} ℓ(z; θ).
pub fn performative_risk<E: Environment + ?Sized>(
    env: &E,
    theta: &ParamVector,
    mc_samples: usize,
    rng: &mut SimRng,
) -> Result<f64> {
    env.check_domain(theta)?;
    if mc_samples == 0 {
        return Err(Error::InvalidParameter("mc_samples must be >= 1".into()));
    }
    let loss = env.loss();
    let mut acc = 0.0;
    for _ in 0..mc_samples {
        let z = env.sample(theta, rng)?;
        loss.check(&z, theta)?;
        acc += loss.value(&z, theta);
    }
    Ok(acc / mc_samples as f64)
}
