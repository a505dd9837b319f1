#![allow(dead_code)]

pub mod checks;
pub mod corpus;
pub mod gen;
pub mod oracle;
pub mod reference;

use std::path::PathBuf;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Runs `f` on a thread with a large stack; deep recursion in debug builds
/// would otherwise overflow the default test thread.
pub fn with_big_stack<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    std::thread::Builder::new().stack_size(256 << 20).spawn(f).unwrap().join().unwrap()
}
