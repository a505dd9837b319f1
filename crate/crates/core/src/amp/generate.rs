use super::assertion::{changed_observations, AssertionSpec};
use super::candidate::{build_candidate, candidate_name, AmplifiedCandidate};
use super::operators::apply_operator;
use super::points::mutation_points;
use super::strip::strip_assertions;
use super::AmpError;
use crate::interp::{observe, run_test_indexed, SiteIndex, DEFAULT_BUDGET};
use crate::syntax::{Program, TestCase};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::ops::ControlFlow;

pub const DEFAULT_VARIANTS_PER_POINT: usize = 3;
pub const DEFAULT_MAX_MUTANTS: usize = 200;
pub const DEFAULT_MAX_ASSERTS_PER_MUTANT: usize = 3;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AmplifyConfig {
    pub budget: u64,
    pub variants_per_point: usize,
    pub max_mutants: usize,
    pub max_asserts_per_mutant: usize,
    pub seed: u64,
}

impl Default for AmplifyConfig {
    fn default() -> Self {
        AmplifyConfig {
            budget: DEFAULT_BUDGET,
            variants_per_point: DEFAULT_VARIANTS_PER_POINT,
            max_mutants: DEFAULT_MAX_MUTANTS,
            max_asserts_per_mutant: DEFAULT_MAX_ASSERTS_PER_MUTANT,
            seed: DEFAULT_SEED,
        }
    }
}

/// Everything generation produced for one original test.
#[derive(Clone, Debug)]
pub struct Generation {
    pub stripped: TestCase,
    pub points: usize,
    pub mutants: usize,
    /// Mutants whose setup did not run to completion.
    pub setup_failed: usize,
    /// Mutants that changed no observable value.
    pub unchanged: usize,
    /// Candidates in generation order, not yet executed.
    pub candidates: Vec<AmplifiedCandidate>,
}

/// Strips the original, mutates one point at a time, and turns every changed
/// observation into a candidate. `on_mutant` sees the running mutant count and
/// may stop generation early.
pub fn generate(
    program: &Program,
    original: &TestCase,
    config: &AmplifyConfig,
    on_mutant: &mut dyn FnMut(usize, usize) -> ControlFlow<()>,
) -> Result<Generation, AmpError> {
    let stripped = strip_assertions(original);
    let base = observe(program, &stripped, config.budget)
        .map_err(|f| AmpError::StrippedSetupFailed { outcome: f.outcome })?;
    let points = mutation_points(&stripped, program);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = Generation {
        stripped: stripped.clone(),
        points: points.len(),
        mutants: 0,
        setup_failed: 0,
        unchanged: 0,
        candidates: Vec::new(),
    };
    let planned = (points.len() * config.variants_per_point).min(config.max_mutants);

    'points: for point in &points {
        let variants = match apply_operator(point, &stripped, program, &mut rng, config.variants_per_point) {
            Ok(v) => v,
            Err(AmpError::EmptyVariantPool { .. }) => continue,
            Err(e) => return Err(e),
        };
        for (mutated, record) in variants {
            if out.mutants == config.max_mutants {
                break 'points;
            }
            out.mutants += 1;
            let k = out.mutants;
            match observe(program, &mutated, config.budget) {
                Err(_) => out.setup_failed += 1,
                Ok(obs) => {
                    let deltas = changed_observations(&base, &obs);
                    if deltas.is_empty() {
                        out.unchanged += 1;
                    }
                    for (j, delta) in deltas.iter().take(config.max_asserts_per_mutant).enumerate() {
                        let name = candidate_name(&original.name, point.kind, k, j + 1);
                        out.candidates.push(build_candidate(
                            &mutated,
                            record.clone(),
                            AssertionSpec::from_delta(delta),
                            &name,
                        ));
                    }
                }
            }
            if on_mutant(out.mutants, planned).is_break() {
                break 'points;
            }
        }
    }
    Ok(out)
}

/// Runs a finished candidate and records its outcome and coverage.
pub fn verify(program: &Program, index: &SiteIndex, candidate: &mut AmplifiedCandidate, budget: u64) {
    candidate.execution = Some(run_test_indexed(program, index, &candidate.test, budget));
}
