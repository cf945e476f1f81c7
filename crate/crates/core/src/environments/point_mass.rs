use crate::error::{Error, Result};
use crate::loss::{LinearQuadraticLoss, Loss};
use crate::params::ParamVector;
use crate::problem::{Capabilities, Environment, ProblemConstants, Sample};
use crate::rng::SimRng;

/// Deterministic counterexample map: D(θ) is a point mass at 1 + εθ, with loss
/// ℓ(z; θ) = −b·z·θ + (g/2)θ².
///
/// Repeated gradient descent diverges here when g = 0 (convex only) or when
/// ε ≥ g/b, for every positive step size.
#[derive(Clone, Debug, PartialEq)]
pub struct PointMassEnv {
    epsilon: f64,
    loss: LinearQuadraticLoss,
}

impl PointMassEnv {
    /// `coupling` is b (the joint smoothness), `curvature` is g (the strong convexity).
    pub fn new(epsilon: f64, coupling: f64, curvature: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !(coupling > 0.0) || !(curvature >= 0.0) || curvature > coupling {
            return Err(Error::InvalidParameter(format!(
                "point-mass environment needs epsilon >= 0 and coupling >= curvature >= 0, coupling > 0 \
                 (epsilon = {epsilon}, coupling = {coupling}, curvature = {curvature})"
            )));
        }
        if !(epsilon.is_finite() && coupling.is_finite()) {
            return Err(Error::InvalidParameter("point-mass parameters must be finite".into()));
        }
        Ok(PointMassEnv {
            epsilon,
            loss: LinearQuadraticLoss {
                coupling,
                curvature,
            },
        })
    }

    pub fn location(&self, theta: f64) -> f64 {
        1.0 + self.epsilon * theta
    }

    /// Multiplier m in the RGD map θ ↦ m·θ + η·b, i.e. m = 1 − η(g − εb).
    pub fn rgd_multiplier(&self, eta: f64) -> f64 {
        1.0 - eta * (self.loss.curvature - self.epsilon * self.loss.coupling)
    }
}

impl Environment for PointMassEnv {
    fn name(&self) -> &'static str {
        "point_mass"
    }

    fn constants(&self) -> ProblemConstants {
        ProblemConstants {
            epsilon: self.epsilon,
            beta: self.loss.coupling,
            gamma: self.loss.curvature,
            sigma_sq: 0.0,
            // ∇ℓ(z; θ′) = g(θ′ − G(θ)) for z ∼ D(θ)
            l_sq: self.loss.curvature * self.loss.curvature,
        }
    }

    fn param_dim(&self) -> usize {
        1
    }

    fn sample_dim(&self) -> usize {
        1
    }

    fn loss(&self) -> &dyn Loss {
        &self.loss
    }

    fn capabilities(&self) -> Capabilities {
        let strongly_convex = self.loss.curvature > 0.0;
        Capabilities {
            closed_form_g: strongly_convex,
            closed_form_stable_point: self.stable_point().is_some(),
            closed_form_population_gradient: true,
        }
    }

    fn sample(&self, theta: &ParamVector, _rng: &mut SimRng) -> Result<Sample> {
        theta.check_dim(1)?;
        Ok(Sample::unlabelled(vec![self.location(theta[0])]))
    }

    fn decoupled_minimizer(&self, theta: &ParamVector) -> Option<ParamVector> {
        let LinearQuadraticLoss { coupling, curvature } = self.loss;
        (curvature > 0.0).then(|| ParamVector::scalar(coupling * self.location(theta[0]) / curvature))
    }

    /// θ_PS = (b/g) / (1 − εb/g), defined when g > 0 and ε ≠ g/b.
    fn stable_point(&self) -> Option<ParamVector> {
        let LinearQuadraticLoss { coupling, curvature } = self.loss;
        if curvature <= 0.0 {
            return None;
        }
        let kappa = coupling / curvature;
        let denom = 1.0 - self.epsilon * kappa;
        (denom != 0.0).then(|| ParamVector::scalar(kappa / denom))
    }

    fn exact_population_gradient(&self, theta: &ParamVector) -> Option<ParamVector> {
        let LinearQuadraticLoss { coupling, curvature } = self.loss;
        Some(ParamVector::scalar(
            (curvature - self.epsilon * coupling) * theta[0] - coupling,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{performative_risk, population_gradient};
    use crate::rng::seeded;

    #[test]
    fn samples_are_identical() {
        let env = PointMassEnv::new(0.5, 2.0, 1.0).unwrap();
        let mut rng = seeded(1);
        let theta = ParamVector::scalar(3.0);
        let a = env.sample(&theta, &mut rng).unwrap();
        let b = env.sample(&theta, &mut rng).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.features[0], 2.5);
    }

    #[test]
    fn performative_risk_is_exact() {
        let env = PointMassEnv::new(0.5, 2.0, 1.0).unwrap();
        let theta = ParamVector::scalar(3.0);
        // z = 2.5: −2·2.5·3 + ½·9
        let expected = -15.0 + 4.5;
        for seed in 0..3 {
            let pr = performative_risk(&env, &theta, 7, &mut seeded(seed)).unwrap();
            assert_eq!(pr, expected);
        }
    }

    #[test]
    fn stable_point_is_fixed_point_of_g() {
        let env = PointMassEnv::new(0.2, 2.0, 1.0).unwrap();
        let ps = env.stable_point().unwrap();
        assert!((ps[0] - 2.0 / 0.6).abs() < 1e-12);
        let g = env.decoupled_minimizer(&ps).unwrap();
        assert!((g[0] - ps[0]).abs() < 1e-12);
        let grad = population_gradient(&env, &ps, 0, &mut seeded(0)).unwrap();
        assert!(grad[0].abs() < 1e-12);
    }

    #[test]
    fn no_stable_point_at_threshold_or_without_curvature() {
        assert!(PointMassEnv::new(0.5, 2.0, 1.0).unwrap().stable_point().is_none());
        assert!(PointMassEnv::new(1.0, 1.0, 0.0).unwrap().stable_point().is_none());
        assert!(PointMassEnv::new(1.0, 1.0, 0.0).unwrap().decoupled_minimizer(&ParamVector::scalar(0.0)).is_none());
    }

    #[test]
    fn rejects_curvature_above_coupling() {
        assert!(PointMassEnv::new(0.1, 1.0, 2.0).is_err());
        assert!(PointMassEnv::new(0.1, 0.0, 0.0).is_err());
    }
}
