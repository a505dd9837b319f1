use super::assertion::AssertionSpec;
use super::operators::{renumber, MutationRecord};
use super::points::MutationKind;
use crate::interp::Execution;
use crate::syntax::{parse_test_case, print_test, stmt_to_string, Block, Stmt, TestCase};

/// A stripped original plus one mutation, its comment, and one trailing assertion.
#[derive(Clone, Debug)]
pub struct AmplifiedCandidate {
    pub name: String,
    pub test: TestCase,
    pub mutation: MutationRecord,
    pub assertion: AssertionSpec,
    /// Result of re-running the finished candidate; `None` until verified.
    pub execution: Option<Execution>,
}

impl AmplifiedCandidate {
    pub fn code(&self) -> String {
        print_test(&self.test)
    }

    /// Bodies obtained by dropping the assertion and comment and undoing the
    /// mutation. Literal edits are undone textually, so when the new text
    /// occurs more than once in the statement every possibility is returned.
    pub fn reversions(&self) -> Vec<Block> {
        let mut body = self.test.body.clone();
        body.stmts.pop();
        let comment = self.mutation.comment();
        if let Some(pos) = body.comments.iter().position(|c| c.text == comment) {
            body.comments.remove(pos);
        }
        let at = self.mutation.statement;
        match self.mutation.operator {
            MutationKind::MethodRemove => {
                let Some(stmt) = parse_stmt(&self.mutation.before) else { return Vec::new() };
                body.stmts.insert(at, stmt);
                for c in &mut body.comments {
                    if c.index > at {
                        c.index += 1;
                    }
                }
                vec![body]
            }
            MutationKind::MethodDup | MutationKind::MethodAdd => {
                body.remove_stmt(at);
                vec![body]
            }
            _ => {
                let text = stmt_to_string(&body.stmts[at]);
                let after = &self.mutation.after;
                text.match_indices(after.as_str())
                    .filter_map(|(i, _)| {
                        let reverted = format!("{}{}{}", &text[..i], self.mutation.before, &text[i + after.len()..]);
                        let stmt = parse_stmt(&reverted)?;
                        let mut b = body.clone();
                        b.stmts[at] = stmt;
                        Some(b)
                    })
                    .collect()
            }
        }
    }
}

fn parse_stmt(text: &str) -> Option<Stmt> {
    let mut t = parse_test_case(&format!("test t {{\n{text}\n}}")).ok()?;
    (t.body.stmts.len() == 1).then(|| t.body.stmts.remove(0))
}

/// Appends the assertion to a mutated test and renames it.
pub fn build_candidate(mutated: &TestCase, mutation: MutationRecord, assertion: AssertionSpec, name: &str) -> AmplifiedCandidate {
    let mut test = mutated.clone();
    test.name = name.to_string();
    test.body.stmts.push(assertion.to_stmt());
    AmplifiedCandidate { name: name.to_string(), test: renumber(&test), mutation, assertion, execution: None }
}

/// `<original>_<tag><k>_a<j>`, e.g. `html_strlit3_a1`.
pub fn candidate_name(original: &str, kind: MutationKind, mutant: usize, assertion: usize) -> String {
    format!("{original}_{}{mutant}_a{assertion}", kind.tag().to_ascii_lowercase())
}
