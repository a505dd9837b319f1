//! Deterministic tree-walking execution of MTS tests with per-site coverage
//! and post-setup value observation.

mod coverage;
mod machine;
mod observe;
mod value;

pub use coverage::{CoverageMap, LineKey, SiteIndex, SiteInfo};
pub use machine::{
    run_test, run_test_indexed, string_method, suite_coverage, ErrorSite, Execution, Outcome, RuntimeErrorKind, Unit,
    DEFAULT_BUDGET, MAX_CALL_DEPTH,
};
pub use observe::{observe, ObsKey, ObservationSet, ObserveFailure, MAX_OBSERVED_STR_CHARS, VALUE_OBSERVER};
pub use value::{deep_equal, Heap, ObjId, Object, Primitive, Value};
