//! Front ends for amplikit: the `amplikit` command line and the HTTP service
//! it hosts with `amplikit serve`.

pub mod commands;
pub mod service;

pub use commands::{main_with, ExitCode};
