use crate::error::{Error, Result};
use crate::loss::{LinearSquaredLoss, Loss};
use crate::params::{BoxBounds, ParamVector};
use crate::problem::{Capabilities, Environment, ProblemConstants, Sample};
use crate::rng::{bernoulli, SimRng};

/// Trip-duration prediction where the forecast feeds back into traffic.
///
/// Weather x ∼ Bernoulli(p), prediction f_θ(x) = θ₁x + θ₂, and outcome
/// y = μ + w·x − ε(f_θ(x) − μ). The loss is ½(y − f_θ(x))². Parameters live in
/// the box [0, w] × [0, 2μ]; sampling outside it is rejected.
///
/// Declared constants use the second-moment matrix H = E[(x,1)(x,1)ᵀ]:
/// γ = λ_min(H) (strong convexity of the expected loss), β = 2 (the largest
/// per-sample curvature, ‖(1,1)‖²), L² = 2·λ_max(H), σ² = 0 since y is a
/// deterministic function of x and the model class can fit it exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaEnv {
    p: f64,
    mu: f64,
    w: f64,
    epsilon: f64,
    bounds: BoxBounds,
}

impl EtaEnv {
    pub fn new(p: f64, mu: f64, w: f64, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !(mu > 0.0) || !(w > 0.0) || !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidParameter(format!(
                "eta environment needs p in [0,1], mu > 0, w > 0, epsilon in [0,1) \
                 (p = {p}, mu = {mu}, w = {w}, epsilon = {epsilon})"
            )));
        }
        if !(mu.is_finite() && w.is_finite()) {
            return Err(Error::InvalidParameter("eta parameters must be finite".into()));
        }
        let bounds = BoxBounds::new(vec![0.0, 0.0], vec![w, 2.0 * mu])?;
        Ok(EtaEnv {
            p,
            mu,
            w,
            epsilon,
            bounds,
        })
    }

    pub fn predict(theta: &ParamVector, x: f64) -> f64 {
        x * theta[0] + theta[1]
    }

    /// y = μ + w·x − ε(f_θ(x) − μ).
    pub fn outcome(&self, theta: &ParamVector, x: f64) -> f64 {
        self.mu + self.w * x - self.epsilon * (Self::predict(theta, x) - self.mu)
    }

    /// Eigenvalues (λ_min, λ_max) of H = [[p, p], [p, 1]].
    fn moment_eigenvalues(&self) -> (f64, f64) {
        let trace = 1.0 + self.p;
        let det = self.p * (1.0 - self.p);
        let disc = (trace * trace - 4.0 * det).max(0.0).sqrt();
        (0.5 * (trace - disc), 0.5 * (trace + disc))
    }
}

impl Environment for EtaEnv {
    fn name(&self) -> &'static str {
        "eta"
    }

    fn constants(&self) -> ProblemConstants {
        let (lo, hi) = self.moment_eigenvalues();
        ProblemConstants {
            epsilon: self.epsilon,
            beta: 2.0,
            gamma: lo,
            sigma_sq: 0.0,
            l_sq: 2.0 * hi,
        }
    }

    fn param_dim(&self) -> usize {
        2
    }

    fn sample_dim(&self) -> usize {
        1
    }

    fn loss(&self) -> &dyn Loss {
        &LinearSquaredLoss
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            closed_form_g: true,
            closed_form_stable_point: true,
            closed_form_population_gradient: true,
        }
    }

    fn bounds(&self) -> Option<&BoxBounds> {
        Some(&self.bounds)
    }

    fn sample(&self, theta: &ParamVector, rng: &mut SimRng) -> Result<Sample> {
        self.check_domain(theta)?;
        let x = if bernoulli(rng, self.p) { 1.0 } else { 0.0 };
        Ok(Sample::labelled(vec![x], self.outcome(theta, x)))
    }

    /// Centre of the parameter box.
    fn default_init(&self) -> ParamVector {
        ParamVector::new(vec![0.5 * self.w, self.mu])
    }

    /// G(θ) = (w − εθ₁, μ − ε(θ₂ − μ)): the model class interpolates E[y | x].
    fn decoupled_minimizer(&self, theta: &ParamVector) -> Option<ParamVector> {
        let y0 = self.outcome(theta, 0.0);
        let y1 = self.outcome(theta, 1.0);
        Some(ParamVector::new(vec![y1 - y0, y0]))
    }

    /// θ_PS = (w / (1 + ε), μ).
    fn stable_point(&self) -> Option<ParamVector> {
        Some(ParamVector::new(vec![self.w / (1.0 + self.epsilon), self.mu]))
    }

    fn exact_population_gradient(&self, theta: &ParamVector) -> Option<ParamVector> {
        let r0 = self.outcome(theta, 0.0) - Self::predict(theta, 0.0);
        let r1 = self.outcome(theta, 1.0) - Self::predict(theta, 1.0);
        let p = self.p;
        Some(ParamVector::new(vec![-p * r1, -(1.0 - p) * r0 - p * r1]))
    }
}
