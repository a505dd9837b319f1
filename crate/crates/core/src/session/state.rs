use super::{JobError, Phase};
use serde::{Deserialize, Serialize};
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobFailure {
    pub code: String,
    pub message: String,
}

/// Externally visible state of one job. Phases and mutant counts only move
/// forward; updates that would move them back are ignored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobState {
    pub id: u64,
    pub test_name: String,
    pub phase: Phase,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<JobFailure>,
    pub mutants_done: usize,
    pub mutants_total: usize,
    /// Milliseconds since the Unix epoch.
    pub started_ms: Option<u64>,
    pub finished_ms: Option<u64>,
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

impl JobState {
    pub fn queued(id: u64, test_name: impl Into<String>) -> Self {
        JobState {
            id,
            test_name: test_name.into(),
            phase: Phase::Queued,
            error: None,
            mutants_done: 0,
            mutants_total: 0,
            started_ms: None,
            finished_ms: None,
        }
    }

    pub fn advance(&mut self, phase: Phase) {
        if self.phase.is_terminal() || phase < self.phase {
            return;
        }
        if self.started_ms.is_none() && phase > Phase::Queued {
            self.started_ms = Some(now_ms());
        }
        if phase.is_terminal() {
            self.finished_ms = Some(now_ms());
        }
        // the planned total is an upper bound; points with small variant pools
        // finish early
        if phase == Phase::Done {
            self.mutants_done = self.mutants_total;
        }
        self.phase = phase;
    }

    pub fn progress(&mut self, done: usize, total: usize) {
        if self.phase.is_terminal() {
            return;
        }
        self.mutants_total = self.mutants_total.max(total);
        self.mutants_done = self.mutants_done.max(done).min(self.mutants_total);
    }

    pub fn fail(&mut self, error: &JobError) {
        if self.phase == Phase::Done {
            return;
        }
        self.error.get_or_insert_with(|| JobFailure { code: error.code().to_string(), message: error.to_string() });
        if self.phase != Phase::Error {
            self.advance(Phase::Error);
        }
    }
}
