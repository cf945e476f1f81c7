use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::ProblemConstants;

/// Lazy-deploy round lengths n(k) = ⌈n₀·k^α⌉, k ≥ 1.
///
/// α = 0 is accepted and gives constant rounds of ⌈n₀⌉ samples; the lazy
/// convergence guarantee needs α > 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeploymentSchedule {
    n0: f64,
    alpha: f64,
}

impl DeploymentSchedule {
    pub fn new(n0: f64, alpha: f64) -> Result<Self> {
        if !(n0 >= 1.0) || !n0.is_finite() {
            return Err(Error::InvalidParameter(format!("n0 must be >= 1, got {n0}")));
        }
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
        }
        Ok(DeploymentSchedule { n0, alpha })
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// n(k). Values within 1e-12 (relative) of an integer are not rounded up,
    /// so e.g. n₀ = 1, α = 2 gives exactly k².
    pub fn samples_in_round(&self, k: u64) -> u64 {
        debug_assert!(k >= 1);
        let v = self.n0 * (k as f64).powf(self.alpha);
        let r = v.round();
        let n = if (v - r).abs() <= 1e-12 * v { r } else { v.ceil() };
        (n as u64).max(1)
    }

    /// Number of complete rounds that fit in `samples`, and the samples they use.
    pub fn rounds_within(&self, samples: u64) -> (u64, u64) {
        let mut used = 0u64;
        let mut k = 0u64;
        loop {
            let next = self.samples_in_round(k + 1);
            if used + next > samples {
                return (k, used);
            }
            used += next;
            k += 1;
        }
    }

    /// Total samples consumed after `rounds` complete rounds.
    pub fn samples_after(&self, rounds: u64) -> u64 {
        (1..=rounds).map(|k| self.samples_in_round(k)).sum()
    }
}

/// Which step-size rule a [`StepSchedule`] follows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum StepVariant {
    /// η_k = ((γ − εβ)k + 8L²/(γ − εβ))⁻¹; requires ε < γ/β.
    GreedyTheorem,
    /// η_j = (γj + 8L²/γ)⁻¹; independent of ε.
    LazyTheorem,
    /// η_k = (factor/γ) / (k + 8L²/γ²), ignoring ε.
    Override { factor: f64 },
    Constant { eta: f64 },
}

/// A positive, nonincreasing step-size sequence indexed from 1.
///
/// Harmonic variants are stored as η(i) = scale / (i + offset).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    variant: StepVariant,
    scale: f64,
    offset: f64,
}

impl StepSchedule {
    pub fn greedy_theorem(c: &ProblemConstants) -> Result<Self> {
        c.require_regime()?;
        let eff = c.effective_strong_convexity();
        Ok(StepSchedule {
            variant: StepVariant::GreedyTheorem,
            scale: 1.0 / eff,
            offset: 8.0 * c.l_sq / (eff * eff),
        })
    }

    pub fn lazy_theorem(c: &ProblemConstants) -> Result<Self> {
        Self::require_curvature(c)?;
        Ok(StepSchedule {
            variant: StepVariant::LazyTheorem,
            scale: 1.0 / c.gamma,
            offset: 8.0 * c.l_sq / (c.gamma * c.gamma),
        })
    }

    pub fn epsilon_free(c: &ProblemConstants, factor: f64) -> Result<Self> {
        Self::require_curvature(c)?;
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "override factor must be > 0, got {factor}"
            )));
        }
        Ok(StepSchedule {
            variant: StepVariant::Override { factor },
            scale: factor / c.gamma,
            offset: 8.0 * c.l_sq / (c.gamma * c.gamma),
        })
    }

    pub fn constant(eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidParameter(format!("step size must be > 0, got {eta}")));
        }
        Ok(StepSchedule {
            variant: StepVariant::Constant { eta },
            scale: eta,
            offset: 0.0,
        })
    }

    pub fn from_variant(variant: StepVariant, c: &ProblemConstants) -> Result<Self> {
        match variant {
            StepVariant::GreedyTheorem => Self::greedy_theorem(c),
            StepVariant::LazyTheorem => Self::lazy_theorem(c),
            StepVariant::Override { factor } => Self::epsilon_free(c, factor),
            StepVariant::Constant { eta } => Self::constant(eta),
        }
    }

    fn require_curvature(c: &ProblemConstants) -> Result<()> {
        if c.gamma > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "step schedule needs a strongly convex loss (gamma > 0)".into(),
            ))
        }
    }

    pub fn variant(&self) -> StepVariant {
        self.variant
    }

    /// c_η in η(i) = c_η / (i + k₀).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// k₀ in η(i) = c_η / (i + k₀).
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Step size for index `i` ≥ 1.
    #[inline]
    pub fn eta(&self, i: u64) -> f64 {
        match self.variant {
            StepVariant::Constant { eta } => eta,
            _ => self.scale / (i as f64 + self.offset),
        }
    }
}

/// Greedy-deploy step size η_k under the theorem schedule.
pub fn greedy_step_size(k: u64, c: &ProblemConstants) -> Result<f64> {
    check_index(k)?;
    Ok(StepSchedule::greedy_theorem(c)?.eta(k))
}

/// Lazy-deploy inner step size η_{k,j}; depends only on j.
pub fn lazy_step_size(j: u64, c: &ProblemConstants) -> Result<f64> {
    check_index(j)?;
    Ok(StepSchedule::lazy_theorem(c)?.eta(j))
}

fn check_index(i: u64) -> Result<()> {
    if i == 0 {
        Err(Error::InvalidParameter("step index starts at 1".into()))
    } else {
        Ok(())
    }
}
