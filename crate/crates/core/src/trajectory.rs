use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::params::ParamVector;

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    /// Outer step index: SGD update for greedy deploy, deployment round for
    /// lazy deploy, iteration for RGD and RRM. Index 0 is the initial model.
    pub step: u64,
    pub samples: u64,
    pub deployments: u64,
    pub theta: ParamVector,
    pub dist_sq: Option<f64>,
    pub perf_risk: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    /// An iterate became non-finite or left the ‖θ‖ ≤ 10¹² ball at this step.
    Diverged { step: u64 },
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::Completed => "ok",
            RunStatus::Diverged { .. } => "diverged",
        }
    }

    pub fn is_diverged(&self) -> bool {
        matches!(self, RunStatus::Diverged { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    pub status: RunStatus,
}

impl Default for Trajectory {
    fn default() -> Self {
        Self::new()
    }
}

impl Trajectory {
    pub fn new() -> Self {
        Trajectory {
            records: Vec::new(),
            status: RunStatus::Completed,
        }
    }

    /// Appends a record.
    ///
    /// # Panics
    /// If the step index does not increase or a counter decreases.
    pub fn push(&mut self, record: TrajectoryRecord) {
        if let Some(last) = self.records.last() {
            assert!(
                record.step > last.step
                    && record.samples >= last.samples
                    && record.deployments >= last.deployments,
                "trajectory counters must be monotone"
            );
        }
        self.records.push(record);
    }

    pub fn last(&self) -> Option<&TrajectoryRecord> {
        self.records.last()
    }

    pub fn final_theta(&self) -> Option<&ParamVector> {
        self.records.last().map(|r| &r.theta)
    }

    pub fn dist_sq_trace(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.dist_sq).collect()
    }

    pub fn record_at(&self, step: u64) -> Option<&TrajectoryRecord> {
        self.records
            .binary_search_by_key(&step, |r| r.step)
            .ok()
            .map(|i| &self.records[i])
    }
}

/// Which outer steps get a trajectory record. The initial model (step 0) and
/// the final step are always recorded.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum RecordPolicy {
    #[default]
    EveryStep,
    Checkpoints(BTreeSet<u64>),
}

impl RecordPolicy {
    pub fn checkpoints<I: IntoIterator<Item = u64>>(steps: I) -> Self {
        RecordPolicy::Checkpoints(steps.into_iter().collect())
    }

    pub fn wants(&self, step: u64, last_step: u64) -> bool {
        step == 0
            || step == last_step
            || match self {
                RecordPolicy::EveryStep => true,
                RecordPolicy::Checkpoints(set) => set.contains(&step),
            }
    }
}
