//! Test amplification: strip assertions, mutate inputs one edit at a time,
//! and regenerate a single assertion per changed observation.

mod assertion;
mod candidate;
mod generate;
mod operators;
mod points;
mod strip;

pub use assertion::{changed_observations, render_assertion, AssertionSpec, ObservationDelta};
pub use candidate::{build_candidate, candidate_name, AmplifiedCandidate};
pub use generate::{
    generate, verify, AmplifyConfig, Generation, DEFAULT_MAX_ASSERTS_PER_MUTANT, DEFAULT_MAX_MUTANTS, DEFAULT_SEED,
    DEFAULT_VARIANTS_PER_POINT,
};
pub use operators::{apply_operator, MutationRecord, MAX_ARG_STR_CHARS, MAX_GENERATED_STR_CHARS, SPECIAL_CHARS};
pub use points::{mutation_points, Anchor, MutationKind, MutationPoint, MAX_ADDED_CALL_PARAMS};
pub use strip::strip_assertions;

use crate::interp::Outcome;
use crate::syntax::SiteId;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AmpError {
    #[error("no legal {kind} variant at site {}", site.0)]
    EmptyVariantPool { kind: MutationKind, site: SiteId },
    #[error("the assertion-free setup does not complete: {outcome:?}")]
    StrippedSetupFailed { outcome: Outcome },
}
