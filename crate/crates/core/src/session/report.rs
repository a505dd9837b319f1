use super::{JobConfig, Phase};
use crate::amp::{AssertionSpec, MutationRecord};
use crate::interp::CoverageMap;
use crate::select::{AddedCoverageEntry, CandidateCoverage, CoverageReport, RejectedCounts};
use crate::syntax::SiteId;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

pub const REPORT_SCHEMA: &str = "amplikit-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Proposed,
    Accepted,
    Ignored,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Proposed => "proposed",
            Status::Accepted => "accepted",
            Status::Ignored => "ignored",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportCandidate {
    pub name: String,
    pub code: String,
    pub mutation: MutationRecord,
    pub assertion: AssertionSpec,
    pub added_coverage: Vec<AddedCoverageEntry>,
    pub added_site_count: usize,
    pub added_sites: Vec<SiteId>,
    pub status: Status,
    /// Name the test was written under, once accepted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub written_name: Option<String>,
}

impl ReportCandidate {
    pub fn coverage(&self) -> CandidateCoverage {
        CandidateCoverage {
            name: self.name.clone(),
            added_coverage: self.added_coverage.clone(),
            added_site_count: self.added_site_count,
        }
    }

    /// Distinct production lines this candidate newly covers, ascending.
    pub fn highlighted_lines(&self) -> Vec<u32> {
        let mut lines: Vec<u32> = self.added_coverage.iter().map(|e| e.line).collect();
        lines.sort_unstable();
        lines.dedup();
        lines
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobSummary {
    /// Digest of the configuration and input files.
    pub id: String,
    pub phase: Phase,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub original_test: String,
    pub original_code: String,
    pub config: JobConfig,
    pub job: JobSummary,
    pub baseline: CoverageMap,
    pub candidates: Vec<ReportCandidate>,
    pub rejected: RejectedCounts,
}

impl Report {
    pub fn candidate(&self, name: &str) -> Option<&ReportCandidate> {
        self.candidates.iter().find(|c| c.name == name)
    }

    pub fn candidate_mut(&mut self, name: &str) -> Option<&mut ReportCandidate> {
        self.candidates.iter_mut().find(|c| c.name == name)
    }

    pub fn coverage_report(&self) -> CoverageReport {
        CoverageReport { candidates: self.candidates.iter().map(ReportCandidate::coverage).collect() }
    }

    /// The text shown to a reviewer: one block per candidate.
    pub fn text(&self) -> String {
        self.coverage_report().text()
    }

    pub fn count(&self, status: Status) -> usize {
        self.candidates.iter().filter(|c| c.status == status).count()
    }

    /// Canonical serialization, shared by files and the HTTP API.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Report, ReportError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ReportError::Malformed { message: e.to_string() })?;
        match value.get("schema").and_then(|s| s.as_str()) {
            Some(REPORT_SCHEMA) => {}
            Some(other) => return Err(ReportError::SchemaVersionMismatch { found: other.to_string() }),
            None => return Err(ReportError::Malformed { message: "missing schema".into() }),
        }
        serde_json::from_value(value).map_err(|e| ReportError::Malformed { message: e.to_string() })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed report: {message}")]
    Malformed { message: String },
    #[error("unsupported report schema `{found}` (expected `{REPORT_SCHEMA}`)")]
    SchemaVersionMismatch { found: String },
}

/// Writes to a sibling temporary file, then renames over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn save_report(report: &Report, path: &Path) -> Result<(), ReportError> {
    write_atomic(path, &report.to_json())
        .map_err(|e| ReportError::Io { path: path.display().to_string(), message: e.to_string() })
}

pub fn load_report(path: &Path) -> Result<Report, ReportError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ReportError::Io { path: path.display().to_string(), message: e.to_string() })?;
    Report::from_json(&text)
}
