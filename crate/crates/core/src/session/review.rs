use super::report::{write_atomic, Report, Status};
use crate::syntax::{parse_test_case, parse_tests_file, print_suite};
use std::collections::HashSet;
use std::path::Path;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReviewError {
    #[error("no candidate named `{name}`")]
    NotFound { name: String },
    #[error("candidate `{name}` is already {status}")]
    AlreadyDecided { name: String, status: Status },
    #[error("conflict: {message}")]
    Conflict { message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl ReviewError {
    pub fn code(&self) -> &'static str {
        match self {
            ReviewError::NotFound { .. } => "not_found",
            ReviewError::AlreadyDecided { .. } => "already_decided",
            ReviewError::Conflict { .. } => "conflict",
            ReviewError::Io { .. } => "io",
        }
    }
}

fn check_proposed(report: &Report, name: &str) -> Result<(), ReviewError> {
    let c = report.candidate(name).ok_or_else(|| ReviewError::NotFound { name: name.to_string() })?;
    if c.status != Status::Proposed {
        return Err(ReviewError::AlreadyDecided { name: name.to_string(), status: c.status });
    }
    Ok(())
}

/// Writes the candidate into the test file right after the original test (and
/// after candidates accepted earlier from the same report), renaming it with a
/// `_2`, `_3`, ... suffix if its name is taken. Returns the written name.
pub fn accept(report: &mut Report, name: &str, tests_path: &Path) -> Result<String, ReviewError> {
    check_proposed(report, name)?;
    let io = |e: std::io::Error| ReviewError::Io { path: tests_path.display().to_string(), message: e.to_string() };
    let text = std::fs::read_to_string(tests_path).map_err(io)?;
    let label = tests_path.display().to_string();
    let mut suite = parse_tests_file(&label, &text)
        .map_err(|e| ReviewError::Conflict { message: format!("test file no longer parses: {e}") })?;
    let Some(original) = suite.tests.iter().position(|t| t.name == report.original_test) else {
        return Err(ReviewError::Conflict { message: format!("original test `{}` is gone", report.original_test) });
    };

    let ours: HashSet<&str> = report.candidates.iter().filter_map(|c| c.written_name.as_deref()).collect();
    let at = suite
        .tests
        .iter()
        .enumerate()
        .skip(original + 1)
        .filter(|(_, t)| ours.contains(t.name.as_str()))
        .map(|(i, _)| i)
        .max()
        .unwrap_or(original)
        + 1;

    let candidate = report.candidate(name).expect("checked above");
    let mut test = parse_test_case(&candidate.code)
        .map_err(|e| ReviewError::Conflict { message: format!("candidate code does not parse: {e}") })?;
    let taken: HashSet<&str> = suite.tests.iter().map(|t| t.name.as_str()).collect();
    let mut written = name.to_string();
    let mut n = 2;
    while taken.contains(written.as_str()) {
        written = format!("{name}_{n}");
        n += 1;
    }
    test.name = written.clone();
    suite.tests.insert(at, test);
    write_atomic(tests_path, &print_suite(&suite)).map_err(io)?;

    let c = report.candidate_mut(name).expect("checked above");
    c.status = Status::Accepted;
    c.written_name = Some(written.clone());
    Ok(written)
}

/// Marks a proposed candidate ignored; no file I/O.
pub fn ignore(report: &mut Report, name: &str) -> Result<(), ReviewError> {
    check_proposed(report, name)?;
    report.candidate_mut(name).expect("checked above").status = Status::Ignored;
    Ok(())
}
