//! Property checks shared by the core tests and the acceptance suite. Each
//! returns `Err(description)` on the first violation.

use amplikit_core::amp::{strip_assertions, AmplifiedCandidate, MAX_GENERATED_STR_CHARS};
use amplikit_core::interp::{observe, run_test, suite_coverage, ObsKey, SiteIndex, DEFAULT_BUDGET};
use amplikit_core::session::{accept, ignore, run_job, JobConfig, NoProgress, Report, Status};
use amplikit_core::syntax::{
    parse_source_file, parse_test_case, parse_tests_file, print_body, print_test, ExprKind, Program, SiteId,
    TestCase, TestSuite,
};
use super::reference::{reference_run, reference_suite, RefOutcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Every fixture program with the test that gets amplified.
pub const FIXTURES: [(&str, &str); 6] = [
    ("attr", "html"),
    ("counter", "addWithinLimit"),
    ("stack", "pushPop"),
    ("account", "depositAndWithdraw"),
    ("grader", "midScore"),
    ("text", "countWords"),
];

/// Per-line gains of driving each escape branch of `Attr.escape`, computed
/// with the reference walker: (attribute value, line, new sites).
pub const ESCAPE_GOLDEN: [(&str, u32, usize); 3] = [("&", 36, 4), ("<", 39, 4), ("\\u00A0", 42, 4)];

/// Top candidate of the attr fixture at seed 42 and its single gain.
pub const ATTR_TOP_GOLDEN: (&str, u32, u32) = ("html_strlit6_a2", 36, 4);

/// Sites a test adds over the suite, per program line, computed with the
/// reference walker.
pub fn reference_added_by_line(program: &Program, suite: &TestSuite, test: &str) -> BTreeMap<u32, usize> {
    let base = reference_suite(program, &suite.tests, DEFAULT_BUDGET);
    let run = reference_run(program, &parse_test_case(test).unwrap(), DEFAULT_BUDGET);
    assert_eq!(run.outcome, RefOutcome::Passed, "{test}");
    let index = SiteIndex::new(program);
    let mut lines = BTreeMap::new();
    for s in run.covered.difference(&base) {
        *lines.entry(index.info(SiteId(*s)).span.line).or_default() += 1;
    }
    lines
}

pub fn load(name: &str) -> (Program, TestSuite) {
    let dir = super::fixtures_dir();
    let src = std::fs::read_to_string(dir.join(format!("{name}.mts"))).unwrap();
    let tests = std::fs::read_to_string(dir.join(format!("{name}_test.mtt"))).unwrap();
    (
        parse_source_file(&format!("{name}.mts"), &src).unwrap(),
        parse_tests_file(&format!("{name}_test.mtt"), &tests).unwrap(),
    )
}

pub fn config(name: &str, test: &str, seed: u64) -> JobConfig {
    let dir = super::fixtures_dir();
    let mut c = JobConfig::new(dir.join(format!("{name}.mts")), dir.join(format!("{name}_test.mtt")), test);
    c.seed = seed;
    c
}

fn covered(program: &Program, suite: &TestSuite, budget: u64) -> BTreeSet<u32> {
    suite_coverage(program, suite, budget).covered().iter().map(|s| s.0).collect()
}

/// Re-executes every reported candidate from its code and recomputes its
/// coverage gain against the suite.
pub fn selection_sound(report: &Report, program: &Program, suite: &TestSuite) -> Result<(), String> {
    let budget = report.config.step_budget;
    let base = covered(program, suite, budget);
    let recorded_base: BTreeSet<u32> = report.baseline.covered().iter().map(|s| s.0).collect();
    if base != recorded_base {
        return Err("baseline differs from recomputed suite coverage".into());
    }
    for c in &report.candidates {
        let test = parse_test_case(&c.code).map_err(|e| format!("{}: code does not parse: {e}", c.name))?;
        let exec = run_test(program, &test, budget);
        if !exec.outcome.is_passed() {
            return Err(format!("{}: fails on re-execution: {:?}", c.name, exec.outcome));
        }
        let mine: BTreeSet<u32> = exec.coverage.covered().iter().map(|s| s.0).collect();
        let added: BTreeSet<u32> = mine.difference(&base).copied().collect();
        let recorded: BTreeSet<u32> = c.added_sites.iter().map(|s| s.0).collect();
        if added.is_empty() || added != recorded {
            return Err(format!("{}: added sites {added:?}, recorded {recorded:?}", c.name));
        }
        let mut grown = suite.clone();
        grown.tests.push(test);
        let after = covered(program, &grown, budget);
        if after.len() != base.len() + c.added_site_count {
            return Err(format!(
                "{}: suite grows by {}, recorded {}",
                c.name,
                after.len() - base.len(),
                c.added_site_count
            ));
        }
    }
    Ok(())
}

fn without_assertions(t: &TestCase) -> String {
    print_body(&strip_assertions(t).body, false)
}

/// The candidate minus its assertion and comment must differ from the stripped
/// original by exactly one edit: one of its reversions gives the original back.
pub fn reverted(candidate: &AmplifiedCandidate, stripped: &TestCase) -> Result<TestCase, String> {
    let want = print_body(&stripped.body, false);
    if print_body(&candidate.test.body, false) == want {
        return Err(format!("{}: body is unchanged", candidate.name));
    }
    candidate
        .reversions()
        .into_iter()
        .find(|b| print_body(b, false) == want)
        .map(|body| TestCase { body, ..stripped.clone() })
        .ok_or_else(|| format!("{}: no single-edit reversion gives the original", candidate.name))
}

/// Undoing the mutation and observing again must not reproduce the asserted
/// value.
pub fn assertion_needs_mutation(
    candidate: &AmplifiedCandidate,
    stripped: &TestCase,
    program: &Program,
    budget: u64,
) -> Result<(), String> {
    let base = reverted(candidate, stripped)?;
    let obs = observe(program, &base, budget).map_err(|e| format!("{}: base fails: {e:?}", candidate.name))?;
    let key = ObsKey::new(candidate.assertion.anchor.clone(), candidate.assertion.observer.clone());
    match obs.get(&key) {
        Some(v) if *v == candidate.assertion.expected => {
            Err(format!("{}: {key:?} already equals {v:?} without the mutation", candidate.name))
        }
        _ => Ok(()),
    }
}

/// Shape of a candidate body: the original statements with one edit, one
/// comment naming the mutation, one trailing assertion.
pub fn candidate_shape(candidate: &AmplifiedCandidate, original: &TestCase) -> Result<(), String> {
    let body = &candidate.test.body;
    let last = body.stmts.last().ok_or("empty candidate")?;
    if !last.is_assertion() || body.stmts.iter().filter(|s| s.is_assertion()).count() != 1 {
        return Err(format!("{}: expected exactly one, trailing assertion", candidate.name));
    }
    let stripped = strip_assertions(original);
    let mutation_comments = body.comments.iter().filter(|c| c.text == candidate.mutation.comment()).count();
    if mutation_comments != 1 || body.comments.len() != stripped.body.comments.len() + 1 {
        return Err(format!("{}: expected exactly one added comment naming the mutation", candidate.name));
    }
    reverted(candidate, &stripped)?;
    if without_assertions(&candidate.test) == without_assertions(original) {
        return Err(format!("{}: no mutation", candidate.name));
    }
    Ok(())
}

/// String literals that were not already in the original test stay within the
/// generation bound.
pub fn fresh_strings_bounded(candidate: &AmplifiedCandidate, original: &TestCase) -> Result<(), String> {
    let strings = |t: &TestCase| {
        let mut out = Vec::new();
        for s in &t.body.stmts {
            s.walk_exprs(&mut |e| {
                if let ExprKind::Str(v) = &e.kind {
                    out.push(v.clone());
                }
            });
        }
        out
    };
    let before: BTreeSet<String> = strings(original).into_iter().collect();
    // the assertion's expected value is an observation, not a generated literal
    let mut body = candidate.test.clone();
    body.body.stmts.pop();
    for s in strings(&body) {
        if !before.contains(&s) && s.chars().count() > MAX_GENERATED_STR_CHARS {
            return Err(format!("{}: literal {s:?} is longer than {MAX_GENERATED_STR_CHARS}", candidate.name));
        }
    }
    Ok(())
}

/// One random review session on a scratch copy of a fixture test file: two
/// reports from different seeds are reviewed against the same file in an
/// interleaved random order. After every step the file must parse and every
/// test that existed beforehand must print exactly as it did.
pub fn accept_sequence(seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (name, test) = FIXTURES[rng.random_range(0..FIXTURES.len())];
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let tests_path = dir.path().join(format!("{name}_test.mtt"));
    std::fs::copy(super::fixtures_dir().join(format!("{name}_test.mtt")), &tests_path).map_err(|e| e.to_string())?;
    let original_text = std::fs::read_to_string(&tests_path).unwrap();
    let before = parse_tests_file("t.mtt", &original_text).map_err(|e| e.to_string())?;
    let canonical: HashMap<String, String> = before.tests.iter().map(|t| (t.name.clone(), print_test(t))).collect();

    let mut reports = Vec::new();
    for s in [seed, seed + 10_000] {
        let mut cfg = config(name, test, s);
        cfg.tests_path = tests_path.clone();
        reports.push(run_job(&cfg, &mut NoProgress).map_err(|e| e.to_string())?);
    }
    let mut pending: Vec<(usize, String)> = reports
        .iter()
        .enumerate()
        .flat_map(|(r, rep)| rep.candidates.iter().map(move |c| (r, c.name.clone())))
        .collect();
    let mut steps = 0;
    while !pending.is_empty() {
        let (r, cand) = pending.remove(rng.random_range(0..pending.len()));
        let report = &mut reports[r];
        let code = report.candidate(&cand).unwrap().code.clone();
        if rng.random_bool(0.6) {
            let written = accept(report, &cand, &tests_path).map_err(|e| format!("accept {cand}: {e}"))?;
            let text = std::fs::read_to_string(&tests_path).unwrap();
            let suite = parse_tests_file("t.mtt", &text).map_err(|e| format!("file no longer parses: {e}"))?;
            let got = suite.test(&written).ok_or(format!("{written} missing from file"))?;
            let mut want = parse_test_case(&code).unwrap();
            want.name = written.clone();
            if print_test(got) != print_test(&want) {
                return Err(format!("{written} written differently from its code"));
            }
        } else {
            ignore(report, &cand).map_err(|e| format!("ignore {cand}: {e}"))?;
        }
        // deciding twice is refused and leaves everything as it was
        if accept(report, &cand, &tests_path).is_ok() || ignore(report, &cand).is_ok() {
            return Err(format!("{cand} decided twice"));
        }
        let text = std::fs::read_to_string(&tests_path).unwrap();
        let suite = parse_tests_file("t.mtt", &text).map_err(|e| format!("file no longer parses: {e}"))?;
        for (n, printed) in &canonical {
            match suite.test(n) {
                Some(t) if print_test(t) == *printed => {}
                _ => return Err(format!("pre-existing test {n} changed or vanished")),
            }
        }
        let order: Vec<&str> = suite.tests.iter().map(|t| t.name.as_str()).filter(|n| canonical.contains_key(*n)).collect();
        let original_order: Vec<&str> = before.tests.iter().map(|t| t.name.as_str()).collect();
        if order != original_order {
            return Err("pre-existing tests reordered".into());
        }
        steps += 1;
    }
    for report in &reports {
        if report.count(Status::Proposed) != 0 {
            return Err("undecided candidate left".into());
        }
    }
    Ok(steps)
}
