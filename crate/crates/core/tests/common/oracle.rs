//! Differential check of the interpreter against the reference walker.

use super::gen::generate;
use super::reference::{reference_run, RefOutcome};
use amplikit_core::interp::run_test;
use amplikit_core::syntax::{parse_source, parse_test_case, Program, TestCase};
use std::collections::{BTreeMap, BTreeSet};

fn site_count(p: &Program, t: &TestCase) -> usize {
    let mut n = p.site_count();
    t.body.visit_sites(&mut |_| n += 1);
    n
}

fn compare(p: &Program, t: &TestCase, budget: u64, what: &str) -> Result<RefOutcome, String> {
    let exec = run_test(p, t, budget);
    let reference = reference_run(p, t, budget);
    let got = RefOutcome::project(&exec.outcome);
    if got != reference.outcome {
        return Err(format!("{what}: outcome {got:?}, reference {:?}", reference.outcome));
    }
    let covered: BTreeSet<u32> = exec.coverage.covered().iter().map(|s| s.0).collect();
    if covered != reference.covered {
        return Err(format!("{what}: covered {covered:?}, reference {:?}", reference.covered));
    }
    if exec.steps_used != reference.steps {
        return Err(format!("{what}: {} steps, reference {}", exec.steps_used, reference.steps));
    }
    Ok(reference.outcome)
}

fn label(o: RefOutcome) -> String {
    match o {
        RefOutcome::Error { kind, .. } => kind,
        other => format!("{other:?}").split('(').next().unwrap().to_string(),
    }
}

/// Runs `count` generated programs of at most `node_limit` sites at `budget`
/// (and again at half of the steps each one needs) through both
/// interpreters. Returns how often each outcome occurred.
pub fn random_programs_agree(count: usize, node_limit: usize, budget: u64) -> Result<BTreeMap<String, usize>, String> {
    let mut mix = BTreeMap::new();
    let mut checked = 0;
    let mut seed = 0u64;
    while checked < count {
        seed += 1;
        let g = generate(seed, 120);
        let (Ok(p), Ok(t)) = (parse_source(&g.source), parse_test_case(&g.test)) else {
            return Err(format!("seed {seed}: generated code does not parse"));
        };
        if site_count(&p, &t) > node_limit {
            continue;
        }
        checked += 1;
        let full = compare(&p, &t, budget, &format!("seed {seed}"))?;
        let half = reference_run(&p, &t, budget).steps / 2;
        let cut = compare(&p, &t, half, &format!("seed {seed} at budget {half}"))?;
        *mix.entry(label(full)).or_default() += 1;
        *mix.entry(format!("{} (half budget)", label(cut))).or_default() += 1;
    }
    Ok(mix)
}
