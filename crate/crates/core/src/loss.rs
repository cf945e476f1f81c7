//! Per-sample losses ℓ(z; θ) and their parameter gradients.

use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::params::{dot, ParamVector};
use crate::problem::Sample;

pub trait Loss: Debug + Send + Sync {
    /// Validates that `z` and `theta` have the shapes this loss expects.
    fn check(&self, z: &Sample, theta: &ParamVector) -> Result<()>;

    fn value(&self, z: &Sample, theta: &ParamVector) -> f64;

    /// Writes ∇_θ ℓ(z; θ) into `out` (overwriting it). Shapes are assumed checked.
    fn grad_into(&self, z: &Sample, theta: &ParamVector, out: &mut [f64]);
}

/// Gradient of `loss` at (`z`, `theta`) with shape and finiteness checks.
pub fn loss_grad(loss: &dyn Loss, z: &Sample, theta: &ParamVector) -> Result<ParamVector> {
    loss.check(z, theta)?;
    let mut g = ParamVector::zeros(theta.dim());
    loss.grad_into(z, theta, g.as_mut_slice());
    if g.is_finite() {
        Ok(g)
    } else {
        Err(Error::NonFinite)
    }
}

fn require_label(z: &Sample) -> Result<f64> {
    z.label
        .ok_or_else(|| Error::InvalidParameter("loss requires a labelled sample".into()))
}

fn require_dim(found: usize, expected: usize) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// ℓ(z; θ) = ½‖z − θ‖², with z the feature vector.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SquaredLoss;

impl Loss for SquaredLoss {
    fn check(&self, z: &Sample, theta: &ParamVector) -> Result<()> {
        require_dim(z.features.len(), theta.dim())
    }

    fn value(&self, z: &Sample, theta: &ParamVector) -> f64 {
        0.5 * crate::params::dist_sq(&z.features, theta.as_slice())
    }

    fn grad_into(&self, z: &Sample, theta: &ParamVector, out: &mut [f64]) {
        for ((o, t), x) in out.iter_mut().zip(theta.as_slice()).zip(&z.features) {
            *o = t - x;
        }
    }
}

/// Least squares with an intercept: ℓ((x, y); θ) = ½(y − θ[..d]·x − θ[d])².
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LinearSquaredLoss;

impl LinearSquaredLoss {
    fn residual(z: &Sample, theta: &ParamVector) -> f64 {
        let t = theta.as_slice();
        let d = z.features.len();
        z.label.unwrap_or(f64::NAN) - dot(&t[..d], &z.features) - t[d]
    }
}

impl Loss for LinearSquaredLoss {
    fn check(&self, z: &Sample, theta: &ParamVector) -> Result<()> {
        require_label(z)?;
        require_dim(theta.dim(), z.features.len() + 1)
    }

    fn value(&self, z: &Sample, theta: &ParamVector) -> f64 {
        let r = Self::residual(z, theta);
        0.5 * r * r
    }

    fn grad_into(&self, z: &Sample, theta: &ParamVector, out: &mut [f64]) {
        let r = Self::residual(z, theta);
        let d = z.features.len();
        for (o, x) in out[..d].iter_mut().zip(&z.features) {
            *o = -r * x;
        }
        out[d] = -r;
    }
}

/// ℓ(z; θ) = −b·z·θ + (g/2)·θ², scalar z and θ.
///
/// Convex for g = 0, g-strongly convex otherwise, and b-jointly smooth when b ≥ g.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearQuadraticLoss {
    pub coupling: f64,
    pub curvature: f64,
}

impl Loss for LinearQuadraticLoss {
    fn check(&self, z: &Sample, theta: &ParamVector) -> Result<()> {
        require_dim(z.features.len(), 1)?;
        require_dim(theta.dim(), 1)
    }

    fn value(&self, z: &Sample, theta: &ParamVector) -> f64 {
        let t = theta[0];
        -self.coupling * z.features[0] * t + 0.5 * self.curvature * t * t
    }

    fn grad_into(&self, z: &Sample, theta: &ParamVector, out: &mut [f64]) {
        out[0] = -self.coupling * z.features[0] + self.curvature * theta[0];
    }
}

/// ℓ2-regularized logistic loss without intercept:
/// ℓ((x, y); θ) = log(1 + exp(xᵀθ)) − y·xᵀθ + (λ/2)‖θ‖².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogisticLoss {
    pub lambda: f64,
}

/// log(1 + eᵗ) without overflow.
pub(crate) fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl Loss for LogisticLoss {
    fn check(&self, z: &Sample, theta: &ParamVector) -> Result<()> {
        require_label(z)?;
        require_dim(z.features.len(), theta.dim())
    }

    fn value(&self, z: &Sample, theta: &ParamVector) -> f64 {
        let y = z.label.unwrap_or(f64::NAN);
        let t = dot(&z.features, theta.as_slice());
        softplus(t) - y * t + 0.5 * self.lambda * theta.norm_sq()
    }

    fn grad_into(&self, z: &Sample, theta: &ParamVector, out: &mut [f64]) {
        let y = z.label.unwrap_or(f64::NAN);
        let s = sigmoid(dot(&z.features, theta.as_slice())) - y;
        for ((o, x), t) in out.iter_mut().zip(&z.features).zip(theta.as_slice()) {
            *o = s * x + self.lambda * t;
        }
    }
}
