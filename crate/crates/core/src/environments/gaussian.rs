use crate::error::{Error, Result};
use crate::loss::{Loss, SquaredLoss};
use crate::params::ParamVector;
use crate::problem::{Capabilities, Environment, ProblemConstants, Sample};
use crate::rng::{standard_normal, SimRng};

/// Mean estimation under performativity: D(θ) = N(μ + εθ, σ²) with squared loss.
///
/// For ℓ = ½(z − θ)² the constants are forced: β = γ = L² = 1 and σ²_A3 = σ².
/// σ = 0 is allowed and gives a deterministic map.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianEnv {
    mu: f64,
    sigma: f64,
    epsilon: f64,
}

impl GaussianEnv {
    pub fn new(mu: f64, sigma: f64, epsilon: f64) -> Result<Self> {
        if !mu.is_finite() || !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gaussian environment needs finite mu and sigma >= 0 (mu = {mu}, sigma = {sigma})"
            )));
        }
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidParameter(format!(
                "gaussian environment needs epsilon in [0, 1), got {epsilon}"
            )));
        }
        Ok(GaussianEnv { mu, sigma, epsilon })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Mean of D(θ).
    pub fn mean_at(&self, theta: f64) -> f64 {
        self.mu + self.epsilon * theta
    }

    /// θ_PS = μ / (1 − ε).
    pub fn stable_value(&self) -> f64 {
        self.mu / (1.0 - self.epsilon)
    }

    /// Exact PR(θ) = ½σ² + ½(μ + εθ − θ)².
    pub fn exact_performative_risk(&self, theta: f64) -> f64 {
        let bias = self.mean_at(theta) - theta;
        0.5 * self.sigma * self.sigma + 0.5 * bias * bias
    }

    /// Exact W₁(D(θ), D(θ′)) = ε|θ − θ′| for equal-variance normals.
    pub fn exact_w1(&self, theta: f64, theta_prime: f64) -> f64 {
        self.epsilon * (theta - theta_prime).abs()
    }
}

impl Environment for GaussianEnv {
    fn name(&self) -> &'static str {
        "gaussian"
    }

    fn constants(&self) -> ProblemConstants {
        ProblemConstants {
            epsilon: self.epsilon,
            beta: 1.0,
            gamma: 1.0,
            sigma_sq: self.sigma * self.sigma,
            l_sq: 1.0,
        }
    }

    fn param_dim(&self) -> usize {
        1
    }

    fn sample_dim(&self) -> usize {
        1
    }

    fn loss(&self) -> &dyn Loss {
        &SquaredLoss
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            closed_form_g: true,
            closed_form_stable_point: true,
            closed_form_population_gradient: true,
        }
    }

    fn sample(&self, theta: &ParamVector, rng: &mut SimRng) -> Result<Sample> {
        theta.check_dim(1)?;
        let z = self.mean_at(theta[0]) + self.sigma * standard_normal(rng);
        Ok(Sample::unlabelled(vec![z]))
    }

    /// The risk minimizer of the static problem, θ₁ = μ.
    fn default_init(&self) -> ParamVector {
        ParamVector::scalar(self.mu)
    }

    fn decoupled_minimizer(&self, theta: &ParamVector) -> Option<ParamVector> {
        Some(ParamVector::scalar(self.mean_at(theta[0])))
    }

    fn stable_point(&self) -> Option<ParamVector> {
        Some(ParamVector::scalar(self.stable_value()))
    }

    fn exact_population_gradient(&self, theta: &ParamVector) -> Option<ParamVector> {
        Some(ParamVector::scalar((1.0 - self.epsilon) * theta[0] - self.mu))
    }
}
