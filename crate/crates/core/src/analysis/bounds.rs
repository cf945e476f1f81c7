use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::ProblemConstants;

/// Constants of the greedy and lazy convergence guarantees for one problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundParams {
    pub constants: ProblemConstants,
    /// ‖θ₁ − θ_PS‖².
    pub initial_dist_sq: f64,
    /// M = max{2σ², 8L²‖θ₁ − θ_PS‖²}.
    pub m_greedy: f64,
    pub n0: f64,
    pub alpha0: f64,
    /// Lazy contraction constant c; the lazy guarantee needs c < 1.
    pub c_lazy: f64,
    /// 3(σ + γ)² / (γ²(1 − c)); infinite when c ≥ 1.
    pub m_lazy: f64,
}

impl BoundParams {
    pub fn new(constants: ProblemConstants, initial_dist_sq: f64, n0: f64, alpha0: f64) -> Result<Self> {
        constants.validate()?;
        if !(initial_dist_sq >= 0.0) || !initial_dist_sq.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "initial squared distance must be finite and >= 0, got {initial_dist_sq}"
            )));
        }
        let c_lazy = lazy_contraction_constant(&constants, n0, alpha0)?;
        Ok(BoundParams {
            constants,
            initial_dist_sq,
            m_greedy: greedy_constant(&constants, initial_dist_sq),
            n0,
            alpha0,
            c_lazy,
            m_lazy: lazy_constant(&constants, c_lazy),
        })
    }

    pub fn lazy_valid(&self) -> bool {
        self.c_lazy < 1.0
    }
}

pub fn greedy_constant(c: &ProblemConstants, initial_dist_sq: f64) -> f64 {
    (2.0 * c.sigma_sq).max(8.0 * c.l_sq * initial_dist_sq)
}

pub fn lazy_constant(c: &ProblemConstants, c_lazy: f64) -> f64 {
    if c_lazy >= 1.0 || c.gamma <= 0.0 {
        return f64::INFINITY;
    }
    let s = c.sigma_sq.sqrt() + c.gamma;
    3.0 * s * s / (c.gamma * c.gamma * (1.0 - c_lazy))
}

/// Greedy-deploy guarantee E‖θ_{k+1} − θ_PS‖² ≤ M / ((γ − εβ)²k + 8L²).
pub fn greedy_bound(k: u64, p: &BoundParams) -> Result<f64> {
    let c = &p.constants;
    c.require_regime()?;
    let eff = c.effective_strong_convexity();
    let denom = eff * eff * k as f64 + 8.0 * c.l_sq;
    if denom <= 0.0 {
        return Err(Error::InvalidParameter(
            "greedy bound is undefined at k = 0 when L² = 0".into(),
        ));
    }
    Ok(p.m_greedy / denom)
}

/// Lazy-deploy contraction constant
/// c = 32L²/(γ²n₀) + 24εβL/(γ²√n₀) + 1.1σεβ/(γ²n₀^{1−α₀}) + (εβ/γ)².
pub fn lazy_contraction_constant(c: &ProblemConstants, n0: f64, alpha0: f64) -> Result<f64> {
    if !(n0 >= 1.0) || !n0.is_finite() {
        return Err(Error::InvalidParameter(format!("n0 must be >= 1, got {n0}")));
    }
    if !(alpha0 > 0.0 && alpha0 < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha0 must lie in (0, 1), got {alpha0}")));
    }
    if c.gamma <= 0.0 {
        return Err(Error::InvalidParameter(
            "lazy contraction constant needs gamma > 0".into(),
        ));
    }
    let g2 = c.gamma * c.gamma;
    let eb = c.epsilon * c.beta;
    let l = c.l_sq.sqrt();
    let sigma = c.sigma_sq.sqrt();
    Ok(32.0 * c.l_sq / (g2 * n0)
        + 24.0 * eb * l / (g2 * n0.sqrt())
        + 1.1 * sigma * eb / (g2 * n0.powf(1.0 - alpha0))
        + (eb / c.gamma).powi(2))
}

/// One-step greedy recursion bound on E‖θ_{k+1} − θ_PS‖² given d² = ‖θ_k − θ_PS‖²:
/// (1 − 2η(γ − εβ) + η²L²(1 + εβ/γ)²)d² + η²σ².
pub fn greedy_recursion_rhs(dist_sq: f64, eta: f64, c: &ProblemConstants) -> f64 {
    let eff = c.effective_strong_convexity();
    let amp = 1.0 + c.epsilon * c.beta / c.gamma;
    (1.0 - 2.0 * eta * eff + eta * eta * c.l_sq * amp * amp) * dist_sq + eta * eta * c.sigma_sq
}

/// One-step bound for SGD on a fixed distribution, in terms of the error
/// e² = ‖φ − G(θ)‖²: (1 − 2ηγ + η²L²)e² + η²σ².
pub fn offline_recursion_rhs(err_sq: f64, eta: f64, c: &ProblemConstants) -> f64 {
    (1.0 - 2.0 * eta * c.gamma + eta * eta * c.l_sq) * err_sq + eta * eta * c.sigma_sq
}
