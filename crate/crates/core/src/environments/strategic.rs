use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::loss::{sigmoid, softplus, LogisticLoss, Loss};
use crate::params::{dot, ParamVector};
use crate::problem::{Capabilities, Environment, ProblemConstants, Sample};
use crate::rng::{index, SimRng};

/// Default strategic feature indices (0-based).
pub const DEFAULT_STRATEGIC_DIMS: [usize; 3] = [1, 6, 8];

/// Best response of an agent with linear utility u(x′, θ) = −θᵀx′ and cost
/// (1/2ε)‖x′ − x‖² over the strategic coordinates: x′_S = x_S − εθ_S.
/// Other coordinates are returned unchanged.
pub fn best_response(x: &[f64], theta: &ParamVector, epsilon: f64, strategic_dims: &[usize]) -> Vec<f64> {
    let mut out = x.to_vec();
    for &i in strategic_dims {
        out[i] -= epsilon * theta[i];
    }
    out
}

/// Constants of the regularized logistic objective on `data`:
/// γ = λ and β = max{2, (1/4n)Σ‖xᵢ‖² + γ}, with L² = β² and σ² set to the
/// mean squared feature norm (a bound on E‖x(σ(xᵀθ) − y)‖²).
pub fn compute_logistic_constants(data: &Dataset, lambda: f64, epsilon: f64) -> ProblemConstants {
    let n = data.len() as f64;
    let mean_norm_sq = data.rows().map(|x| dot(x, x)).sum::<f64>() / n;
    let gamma = lambda;
    let beta = f64::max(2.0, mean_norm_sq / 4.0 + gamma);
    ProblemConstants {
        epsilon,
        beta,
        gamma,
        sigma_sq: mean_norm_sq,
        l_sq: beta * beta,
    }
}

/// Strategic classification: agents drawn from a fixed base dataset shift their
/// strategic features in response to the deployed logistic classifier.
///
/// The empirical distribution of `data` is the base distribution, so
/// expectations over D(θ) are finite sums and computed exactly.
#[derive(Clone, Debug)]
pub struct StrategicEnv {
    data: Dataset,
    epsilon: f64,
    strategic_dims: Vec<usize>,
    loss: LogisticLoss,
    constants: ProblemConstants,
}

impl StrategicEnv {
    /// λ defaults to 10³/n.
    pub fn new(data: Dataset, epsilon: f64, strategic_dims: Vec<usize>, lambda: Option<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!("epsilon must be >= 0, got {epsilon}")));
        }
        if let Some(&bad) = strategic_dims.iter().find(|&&i| i >= data.dim()) {
            return Err(Error::InvalidParameter(format!(
                "strategic dimension {bad} out of range for {} features",
                data.dim()
            )));
        }
        let lambda = lambda.unwrap_or_else(|| Self::default_lambda(data.len()));
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
        }
        let constants = compute_logistic_constants(&data, lambda, epsilon);
        Ok(StrategicEnv {
            data,
            epsilon,
            strategic_dims,
            loss: LogisticLoss { lambda },
            constants,
        })
    }

    pub fn default_lambda(n: usize) -> f64 {
        1e3 / n as f64
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    pub fn lambda(&self) -> f64 {
        self.loss.lambda
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn strategic_dims(&self) -> &[usize] {
        &self.strategic_dims
    }

    /// Common feature shift x_BR − x induced by deploying θ.
    fn shift(&self, deployed: &ParamVector) -> Vec<f64> {
        let mut s = vec![0.0; self.data.dim()];
        for &i in &self.strategic_dims {
            s[i] = -self.epsilon * deployed[i];
        }
        s
    }

    /// ∇_φ E_{z∼D(deployed)} ℓ(z; φ), summed exactly over the base data.
    pub fn decoupled_gradient(&self, deployed: &ParamVector, phi: &ParamVector) -> ParamVector {
        let d = self.data.dim();
        let shift = self.shift(deployed);
        let phi = phi.as_slice();
        let offset = dot(&shift, phi);
        let mut g = vec![0.0; d];
        for (x, &y) in self.data.rows().zip(self.data.labels()) {
            let r = sigmoid(dot(x, phi) + offset) - y;
            for ((gj, xj), sj) in g.iter_mut().zip(x).zip(&shift) {
                *gj += r * (xj + sj);
            }
        }
        let inv = 1.0 / self.data.len() as f64;
        ParamVector::new(
            g.iter()
                .zip(phi)
                .map(|(gj, pj)| gj * inv + self.loss.lambda * pj)
                .collect(),
        )
    }

    /// (1/4n)Σ‖xᵢ + s‖² + λ for the best-response shift s at `deployed`: an
    /// upper bound on the Hessian of the decoupled risk.
    pub fn shifted_smoothness(&self, deployed: &ParamVector) -> f64 {
        let shift = self.shift(deployed);
        let mean_norm_sq = self
            .data
            .rows()
            .map(|x| x.iter().zip(&shift).map(|(a, b)| (a + b) * (a + b)).sum::<f64>())
            .sum::<f64>()
            / self.data.len() as f64;
        mean_norm_sq / 4.0 + self.loss.lambda
    }

    /// E_{z∼D(deployed)} ℓ(z; φ).
    pub fn decoupled_risk(&self, deployed: &ParamVector, phi: &ParamVector) -> f64 {
        let shift = self.shift(deployed);
        let offset = dot(&shift, phi.as_slice());
        let data_term: f64 = self
            .data
            .rows()
            .zip(self.data.labels())
            .map(|(x, &y)| {
                let t = dot(x, phi.as_slice()) + offset;
                softplus(t) - y * t
            })
            .sum::<f64>()
            / self.data.len() as f64;
        data_term + 0.5 * self.loss.lambda * phi.norm_sq()
    }
}

impl Environment for StrategicEnv {
    fn name(&self) -> &'static str {
        "strategic"
    }

    fn constants(&self) -> ProblemConstants {
        self.constants
    }

    fn param_dim(&self) -> usize {
        self.data.dim()
    }

    fn sample_dim(&self) -> usize {
        self.data.dim()
    }

    fn loss(&self) -> &dyn Loss {
        &self.loss
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            closed_form_g: false,
            closed_form_stable_point: false,
            closed_form_population_gradient: true,
        }
    }

    fn sample(&self, theta: &ParamVector, rng: &mut SimRng) -> Result<Sample> {
        theta.check_dim(self.data.dim())?;
        let i = index(rng, self.data.len());
        let x = best_response(self.data.row(i), theta, self.epsilon, &self.strategic_dims);
        Ok(Sample::labelled(x, self.data.label(i)))
    }

    /// Full-batch gradient descent on the best-responded data, warm-started at
    /// `theta`, until the gradient norm drops below `tol`. The step is the
    /// inverse smoothness of the shifted objective, which exceeds β once the
    /// shift is large.
    fn solve_decoupled(&self, theta: &ParamVector, tol: f64, max_iter: usize) -> Result<ParamVector> {
        self.check_domain(theta)?;
        let step = 1.0 / self.shifted_smoothness(theta);
        let mut phi = theta.clone();
        let mut residual = f64::INFINITY;
        for _ in 0..max_iter {
            let g = self.decoupled_gradient(theta, &phi);
            residual = g.norm();
            if residual < tol {
                return Ok(phi);
            }
            phi.axpy(-step, &g)?;
        }
        let g = self.decoupled_gradient(theta, &phi);
        if g.norm() < tol {
            return Ok(phi);
        }
        Err(Error::SolverNoConvergence {
            iterations: max_iter,
            residual: residual.min(g.norm()),
        })
    }

    fn exact_population_gradient(&self, theta: &ParamVector) -> Option<ParamVector> {
        Some(self.decoupled_gradient(theta, theta))
    }
}
