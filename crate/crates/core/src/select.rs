//! Keeps candidates that cover production sites the original suite does not,
//! deduplicates and ranks them, and renders the added-coverage report.

use crate::amp::AmplifiedCandidate;
use crate::interp::{CoverageMap, SiteIndex};
use crate::syntax::{print_body, SiteId};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write;

pub const DEFAULT_MAX_RESULTS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AddedCoverageEntry {
    pub class: String,
    pub method: String,
    pub line: u32,
    pub new_instr: u32,
}

#[derive(Clone, Debug)]
pub struct SelectedCandidate {
    pub candidate: AmplifiedCandidate,
    pub added_sites: BTreeSet<SiteId>,
    /// Sorted by class, method, line.
    pub added_coverage: Vec<AddedCoverageEntry>,
}

impl SelectedCandidate {
    pub fn added_site_count(&self) -> usize {
        self.added_sites.len()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedCounts {
    pub no_new_coverage: usize,
    pub duplicate: usize,
    pub failed: usize,
    /// Mutants whose observations all stayed the same, so no assertion was generated.
    #[serde(default)]
    pub no_changed_value: usize,
}

#[derive(Clone, Debug, Default)]
pub struct SelectionResult {
    pub selected: Vec<SelectedCandidate>,
    pub rejected: RejectedCounts,
}

/// `candidate \ baseline`.
pub fn added_sites(candidate: &CoverageMap, baseline: &CoverageMap) -> BTreeSet<SiteId> {
    candidate.covered().difference(baseline.covered()).copied().collect()
}

/// Groups sites by (class, method, line).
pub fn coverage_entries(index: &SiteIndex, sites: &BTreeSet<SiteId>) -> Vec<AddedCoverageEntry> {
    let mut groups: BTreeMap<(String, String, u32), u32> = BTreeMap::new();
    for id in sites {
        let info = index.info(*id);
        *groups.entry((info.class.clone(), info.method.clone(), info.span.line)).or_insert(0) += 1;
    }
    groups
        .into_iter()
        .map(|((class, method, line), new_instr)| AddedCoverageEntry { class, method, line, new_instr })
        .collect()
}

/// Filters, deduplicates and ranks candidates against the original suite's coverage.
/// Candidates without a passing execution count as failed.
pub fn select(
    candidates: Vec<AmplifiedCandidate>,
    baseline: &CoverageMap,
    index: &SiteIndex,
    max_results: usize,
) -> SelectionResult {
    let mut result = SelectionResult::default();
    let mut seen = HashSet::new();
    let mut kept = Vec::new();
    for candidate in candidates {
        let Some(exec) = candidate.execution.as_ref().filter(|e| e.outcome.is_passed()) else {
            result.rejected.failed += 1;
            continue;
        };
        let added = added_sites(&exec.coverage, baseline);
        if added.is_empty() {
            result.rejected.no_new_coverage += 1;
            continue;
        }
        let body = print_body(&candidate.test.body, false);
        if !seen.insert(body.clone()) {
            result.rejected.duplicate += 1;
            continue;
        }
        let added_coverage = coverage_entries(index, &added);
        kept.push((body.len(), SelectedCandidate { candidate, added_sites: added, added_coverage }));
    }
    kept.sort_by(|(la, a), (lb, b)| {
        b.added_site_count()
            .cmp(&a.added_site_count())
            .then(la.cmp(lb))
            .then_with(|| a.candidate.name.cmp(&b.candidate.name))
    });
    result.selected = kept.into_iter().take(max_results).map(|(_, s)| s).collect();
    result
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateCoverage {
    pub name: String,
    pub added_coverage: Vec<AddedCoverageEntry>,
    pub added_site_count: usize,
}

/// Per-candidate added coverage; renders as text or JSON with the same content.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub candidates: Vec<CandidateCoverage>,
}

impl CoverageReport {
    pub fn from_selection(result: &SelectionResult) -> Self {
        CoverageReport {
            candidates: result
                .selected
                .iter()
                .map(|s| CandidateCoverage {
                    name: s.candidate.name.clone(),
                    added_coverage: s.added_coverage.clone(),
                    added_site_count: s.added_site_count(),
                })
                .collect(),
        }
    }

    /// One block per candidate, blank-line separated.
    pub fn text(&self) -> String {
        let blocks: Vec<String> = self.candidates.iter().map(candidate_block).collect();
        blocks.join("\n")
    }

    pub fn json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// ```text
/// Amplified test case 'html_strlit6_a2'
/// This test case improves the coverage in these classes/methods/lines:
/// Attr:
/// escape
/// L. 36 +4 instr.
/// ```
pub fn candidate_block(c: &CandidateCoverage) -> String {
    let mut entries = c.added_coverage.clone();
    entries.sort();
    let mut out = String::new();
    let _ = writeln!(out, "Amplified test case '{}'", c.name);
    out.push_str("This test case improves the coverage in these classes/methods/lines:\n");
    let mut class: Option<&str> = None;
    let mut method: Option<&str> = None;
    for e in &entries {
        if class != Some(&e.class) {
            let _ = writeln!(out, "{}:", e.class);
            class = Some(&e.class);
            method = None;
        }
        if method != Some(&e.method) {
            let _ = writeln!(out, "{}", e.method);
            method = Some(&e.method);
        }
        let _ = writeln!(out, "L. {} +{} instr.", e.line, e.new_instr);
    }
    out
}
