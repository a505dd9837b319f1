//! End-to-end amplification jobs, persisted reports, and review decisions.

mod report;
mod review;
mod state;

pub use report::{
    load_report, save_report, write_atomic, JobSummary, Report, ReportCandidate, ReportError, Status, REPORT_SCHEMA,
};
pub use review::{accept, ignore, ReviewError};
pub use state::{JobFailure, JobState};

use crate::amp::{
    generate, verify, AmpError, AmplifyConfig, DEFAULT_MAX_ASSERTS_PER_MUTANT, DEFAULT_MAX_MUTANTS, DEFAULT_SEED,
    DEFAULT_VARIANTS_PER_POINT,
};
use crate::interp::{run_test_indexed, suite_coverage, Outcome, SiteIndex, DEFAULT_BUDGET};
use crate::select::{select, DEFAULT_MAX_RESULTS};
use crate::syntax::{parse_source_file, parse_tests_file, print_test, ParseError};
use serde::{Deserialize, Serialize};
use std::ops::ControlFlow;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobConfig {
    pub src_path: PathBuf,
    pub tests_path: PathBuf,
    pub test_name: String,
    pub seed: u64,
    pub step_budget: u64,
    pub variants_per_point: usize,
    pub max_mutants: usize,
    pub max_asserts_per_mutant: usize,
    pub max_results: usize,
}

impl JobConfig {
    pub fn new(src_path: impl Into<PathBuf>, tests_path: impl Into<PathBuf>, test_name: impl Into<String>) -> Self {
        JobConfig {
            src_path: src_path.into(),
            tests_path: tests_path.into(),
            test_name: test_name.into(),
            seed: DEFAULT_SEED,
            step_budget: DEFAULT_BUDGET,
            variants_per_point: DEFAULT_VARIANTS_PER_POINT,
            max_mutants: DEFAULT_MAX_MUTANTS,
            max_asserts_per_mutant: DEFAULT_MAX_ASSERTS_PER_MUTANT,
            max_results: DEFAULT_MAX_RESULTS,
        }
    }

    pub fn validate(&self) -> Result<(), JobError> {
        let counts = [
            ("step_budget", self.step_budget as usize),
            ("variants_per_point", self.variants_per_point),
            ("max_mutants", self.max_mutants),
            ("max_asserts_per_mutant", self.max_asserts_per_mutant),
            ("max_results", self.max_results),
        ];
        match counts.iter().find(|(_, v)| *v == 0) {
            Some((name, _)) => Err(JobError::InvalidConfig { message: format!("{name} must be at least 1") }),
            None => Ok(()),
        }
    }

    fn amplify(&self) -> AmplifyConfig {
        AmplifyConfig {
            budget: self.step_budget,
            variants_per_point: self.variants_per_point,
            max_mutants: self.max_mutants,
            max_asserts_per_mutant: self.max_asserts_per_mutant,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    Queued,
    Parsing,
    Baseline,
    Mutating,
    Observing,
    Selecting,
    Done,
    Error,
}

impl Phase {
    pub fn is_terminal(self) -> bool {
        matches!(self, Phase::Done | Phase::Error)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum JobError {
    #[error("invalid configuration: {message}")]
    InvalidConfig { message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {error}")]
    Parse { path: String, error: ParseError },
    #[error("no test named `{name}` in {path}")]
    UnknownTest { name: String, path: String },
    #[error("original test `{name}` does not pass: {outcome:?}")]
    OriginalTestFailed { name: String, outcome: Outcome },
    #[error(transparent)]
    Amp(#[from] AmpError),
    #[error("aborted")]
    Cancelled,
    #[error("internal error: {message}")]
    Internal { message: String },
}

impl JobError {
    pub fn code(&self) -> &'static str {
        match self {
            JobError::InvalidConfig { .. } => "invalid_config",
            JobError::Io { .. } => "io",
            JobError::Parse { .. } => "parse",
            JobError::UnknownTest { .. } => "unknown_test",
            JobError::OriginalTestFailed { .. } => "original_test_failed",
            JobError::Amp(_) => "amplification",
            JobError::Cancelled => "aborted",
            JobError::Internal { .. } => "internal",
        }
    }
}

/// Receives phase changes and per-mutant progress; may request cancellation.
pub trait ProgressSink {
    fn phase(&mut self, _phase: Phase) {}
    fn mutants(&mut self, _done: usize, _total: usize) {}
    fn cancelled(&self) -> bool {
        false
    }
}

/// Discards all progress.
pub struct NoProgress;

impl ProgressSink for NoProgress {}

fn read(path: &Path) -> Result<String, JobError> {
    std::fs::read_to_string(path).map_err(|e| JobError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn file_label(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

/// FNV-1a over the inputs; stable across runs and platforms.
fn digest(parts: &[&str]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for b in part.bytes().chain([0xff]) {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}

/// Runs the whole pipeline: parse, baseline, mutate and observe, verify,
/// select. Errors (including panics) are reported as `JobError` after the sink
/// has seen `Phase::Error`.
pub fn run_job(config: &JobConfig, sink: &mut dyn ProgressSink) -> Result<Report, JobError> {
    let result = catch_unwind(AssertUnwindSafe(|| run_pipeline(config, sink))).unwrap_or_else(|panic| {
        let message = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(JobError::Internal { message })
    });
    match &result {
        Ok(_) => sink.phase(Phase::Done),
        Err(_) => sink.phase(Phase::Error),
    }
    result
}

fn run_pipeline(config: &JobConfig, sink: &mut dyn ProgressSink) -> Result<Report, JobError> {
    config.validate()?;
    sink.phase(Phase::Parsing);
    let src_text = read(&config.src_path)?;
    let tests_text = read(&config.tests_path)?;
    let parse_err = |path: &Path| {
        let path = path.display().to_string();
        move |error| JobError::Parse { path, error }
    };
    let program = parse_source_file(&file_label(&config.src_path), &src_text).map_err(parse_err(&config.src_path))?;
    let suite = parse_tests_file(&file_label(&config.tests_path), &tests_text).map_err(parse_err(&config.tests_path))?;
    let original = suite.test(&config.test_name).ok_or_else(|| JobError::UnknownTest {
        name: config.test_name.clone(),
        path: config.tests_path.display().to_string(),
    })?;

    sink.phase(Phase::Baseline);
    let index = SiteIndex::new(&program);
    let outcome = run_test_indexed(&program, &index, original, config.step_budget).outcome;
    if !outcome.is_passed() {
        return Err(JobError::OriginalTestFailed { name: original.name.clone(), outcome });
    }
    let baseline = suite_coverage(&program, &suite, config.step_budget);

    sink.phase(Phase::Mutating);
    let mut cancelled = false;
    let mut generation = generate(&program, original, &config.amplify(), &mut |done, total| {
        sink.mutants(done, total);
        if sink.cancelled() {
            cancelled = true;
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    if cancelled {
        return Err(JobError::Cancelled);
    }

    sink.phase(Phase::Observing);
    for c in &mut generation.candidates {
        if sink.cancelled() {
            return Err(JobError::Cancelled);
        }
        verify(&program, &index, c, config.step_budget);
    }

    sink.phase(Phase::Selecting);
    let mut selection = select(generation.candidates, &baseline, &index, config.max_results);
    selection.rejected.failed += generation.setup_failed;
    selection.rejected.no_changed_value = generation.unchanged;

    let config_json = serde_json::to_string(config).expect("config serializes");
    let candidates = selection
        .selected
        .into_iter()
        .map(|s| ReportCandidate {
            name: s.candidate.name.clone(),
            code: s.candidate.code(),
            added_site_count: s.added_sites.len(),
            added_sites: s.added_sites.into_iter().collect(),
            added_coverage: s.added_coverage,
            mutation: s.candidate.mutation,
            assertion: s.candidate.assertion,
            status: Status::Proposed,
            written_name: None,
        })
        .collect();
    Ok(Report {
        schema: REPORT_SCHEMA.to_string(),
        original_test: original.name.clone(),
        original_code: print_test(original),
        job: JobSummary { id: digest(&[&config_json, &src_text, &tests_text]), phase: Phase::Done },
        config: config.clone(),
        baseline,
        candidates,
        rejected: selection.rejected,
    })
}
