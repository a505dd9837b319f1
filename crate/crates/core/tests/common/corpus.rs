//! The round-trip corpus: every fixture plus `fixtures/corpus`.

use amplikit_core::syntax::{
    parse_source_file, parse_tests_file, print_program, print_suite, Block, Program, Span, TestSuite,
};
use std::path::PathBuf;

pub const ESCAPES: [&str; 6] = ["\\n", "\\t", "\\\"", "\\\\", "\\u00A0", "\\uD83D\\uDE00"];

pub fn files() -> Vec<PathBuf> {
    let dir = super::fixtures_dir();
    let mut files = Vec::new();
    for d in [dir.clone(), dir.join("corpus")] {
        for entry in std::fs::read_dir(d).unwrap() {
            let p = entry.unwrap().path();
            if matches!(p.extension().and_then(|e| e.to_str()), Some("mts" | "mtt")) {
                files.push(p);
            }
        }
    }
    files.sort();
    files
}

fn erase_block(b: &mut Block) {
    b.visit_sites_mut(&mut |s| s.span = Span::default());
}

/// Drops source positions, keeping everything else (site ids included).
pub fn erase_program(mut p: Program) -> Program {
    for c in &mut p.classes {
        c.span = Span::default();
        for m in &mut c.methods {
            m.span = Span::default();
            erase_block(&mut m.body);
        }
    }
    p
}

pub fn erase_suite(mut s: TestSuite) -> TestSuite {
    for t in &mut s.tests {
        t.span = Span::default();
        erase_block(&mut t.body);
    }
    s
}

/// Checks print(parse(print(parse(T)))) == print(parse(T)) byte for byte and
/// structural equality of the two parses, for text `text` named `path`.
pub fn round_trips(path: &str, text: &str) -> Result<(), String> {
    if path.ends_with(".mts") {
        let first = parse_source_file(path, text).map_err(|e| format!("{path}: {e}"))?;
        let printed = print_program(&first);
        let second = parse_source_file(path, &printed).map_err(|e| format!("{path}: reparse: {e}"))?;
        if print_program(&second) != printed {
            return Err(format!("{path}: second print differs"));
        }
        if erase_program(first) != erase_program(second) {
            return Err(format!("{path}: reparse differs structurally"));
        }
    } else {
        let first = parse_tests_file(path, text).map_err(|e| format!("{path}: {e}"))?;
        let printed = print_suite(&first);
        let second = parse_tests_file(path, &printed).map_err(|e| format!("{path}: reparse: {e}"))?;
        if print_suite(&second) != printed {
            return Err(format!("{path}: second print differs"));
        }
        if erase_suite(first) != erase_suite(second) {
            return Err(format!("{path}: reparse differs structurally"));
        }
    }
    Ok(())
}

/// Round-trips the whole corpus after checking its size and escape coverage;
/// returns the number of files.
pub fn check_corpus() -> Result<usize, String> {
    let files = files();
    if files.len() < 20 {
        return Err(format!("only {} corpus files", files.len()));
    }
    let mut all = String::new();
    for f in &files {
        let text = std::fs::read_to_string(f).map_err(|e| e.to_string())?;
        round_trips(f.file_name().unwrap().to_str().unwrap(), &text)?;
        all.push_str(&text);
    }
    if let Some(esc) = ESCAPES.iter().find(|e| !all.contains(*e)) {
        return Err(format!("corpus lacks {esc}"));
    }
    if all.is_ascii() {
        return Err("corpus lacks raw non-ASCII text".into());
    }
    Ok(files.len())
}
