//! Developer-centric test amplification.
//!
//! A selected test is stripped of its assertions, its setup is mutated one edit
//! at a time, a single assertion is regenerated over a value the edit changed,
//! and only candidates covering additional instruction sites are kept.

pub mod syntax;
pub mod interp;
pub mod amp;
pub mod select;
pub mod session;
