use crate::syntax::{Block, TestCase};

/// Deletes every assertion statement, including any calls nested in its
/// arguments. Comments anchored to a deleted assertion go with it.
pub fn strip_assertions(test: &TestCase) -> TestCase {
    let mut out = test.clone();
    strip_block(&mut out.body);
    out
}

fn strip_block(block: &mut Block) {
    let mut i = 0;
    while i < block.stmts.len() {
        if block.stmts[i].is_assertion() {
            block.remove_stmt(i);
            continue;
        }
        match &mut block.stmts[i].kind {
            crate::syntax::StmtKind::If { then_block, else_block, .. } => {
                strip_block(then_block);
                if let Some(b) = else_block {
                    strip_block(b);
                }
            }
            crate::syntax::StmtKind::While { body, .. } => strip_block(body),
            _ => {}
        }
        i += 1;
    }
}
