//! Canonical source rendering: 4-space indent, one statement per line,
//! comments on their own line above the statement they anchor to.

use super::ast::*;
use super::lexer::escape_string;
use std::fmt::Write;

const INDENT: &str = "    ";

pub fn print_program(program: &Program) -> String {
    let mut out = String::new();
    for (i, class) in program.classes.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_class(&mut out, class);
    }
    out
}

fn print_class(out: &mut String, class: &ClassDecl) {
    if class.fields.is_empty() && class.methods.is_empty() {
        let _ = writeln!(out, "class {} {{}}", class.name);
        return;
    }
    let _ = writeln!(out, "class {} {{", class.name);
    for field in &class.fields {
        let _ = writeln!(out, "{INDENT}field {field};");
    }
    for (i, method) in class.methods.iter().enumerate() {
        if i > 0 || !class.fields.is_empty() {
            out.push('\n');
        }
        let _ = write!(out, "{INDENT}fn {}({}) ", method.name, method.params.join(", "));
        print_block(out, &method.body, 1);
        out.push('\n');
    }
    out.push_str("}\n");
}

pub fn print_suite(suite: &TestSuite) -> String {
    let mut out = String::new();
    for (i, test) in suite.tests.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&print_test(test));
    }
    out
}

pub fn print_test(test: &TestCase) -> String {
    let mut out = format!("test {} ", test.name);
    print_block(&mut out, &test.body, 0);
    out.push('\n');
    out
}

/// Statements of a block at the given depth, without braces. Used for body comparisons.
pub fn print_body(block: &Block, with_comments: bool) -> String {
    let mut out = String::new();
    if with_comments {
        print_block_lines(&mut out, block, 0);
    } else {
        let bare = Block { stmts: block.stmts.clone(), comments: Vec::new() };
        print_block_lines(&mut out, &bare, 0);
    }
    out
}

/// Writes `{ ... }` where the opening brace continues the current line and the
/// closing brace sits at `depth`.
fn print_block(out: &mut String, block: &Block, depth: usize) {
    if block.stmts.is_empty() && block.comments.is_empty() {
        out.push_str("{}");
        return;
    }
    out.push_str("{\n");
    print_block_lines(out, block, depth + 1);
    indent(out, depth);
    out.push('}');
}

fn print_block_lines(out: &mut String, block: &Block, depth: usize) {
    for (i, stmt) in block.stmts.iter().enumerate() {
        print_comments(out, block, i, depth);
        indent(out, depth);
        print_stmt(out, stmt, depth);
        out.push('\n');
    }
    print_comments(out, block, block.stmts.len(), depth);
}

fn print_comments(out: &mut String, block: &Block, index: usize, depth: usize) {
    for c in block.comments_at(index) {
        indent(out, depth);
        if c.text.is_empty() {
            out.push_str("//\n");
        } else {
            let _ = writeln!(out, "// {}", c.text);
        }
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
}

pub fn stmt_to_string(stmt: &Stmt) -> String {
    let mut out = String::new();
    print_stmt(&mut out, stmt, 0);
    out
}

fn print_stmt(out: &mut String, stmt: &Stmt, depth: usize) {
    match &stmt.kind {
        StmtKind::Let { name, value } => {
            let _ = write!(out, "let {name} = {};", expr_to_string(value));
        }
        StmtKind::Assign { name, value } => {
            let _ = write!(out, "{name} = {};", expr_to_string(value));
        }
        StmtKind::SetField { field, value } => {
            let _ = write!(out, "this.{field} = {};", expr_to_string(value));
        }
        StmtKind::Expr(e) => {
            let _ = write!(out, "{};", expr_to_string(e));
        }
        StmtKind::If { cond, then_block, else_block } => {
            let _ = write!(out, "if ({}) ", expr_to_string(cond));
            print_block(out, then_block, depth);
            if let Some(else_block) = else_block {
                out.push_str(" else ");
                print_block(out, else_block, depth);
            }
        }
        StmtKind::While { cond, body } => {
            let _ = write!(out, "while ({}) ", expr_to_string(cond));
            print_block(out, body, depth);
        }
        StmtKind::Return(None) => out.push_str("return;"),
        StmtKind::Return(Some(e)) => {
            let _ = write!(out, "return {};", expr_to_string(e));
        }
        StmtKind::Assert { kind, args } => {
            let _ = write!(out, "{}({});", kind.keyword(), join_args(args));
        }
    }
}

fn join_args(args: &[Expr]) -> String {
    args.iter().map(expr_to_string).collect::<Vec<_>>().join(", ")
}

const UNARY_PREC: u8 = 7;
const POSTFIX_PREC: u8 = 8;

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary { op, .. } => op.precedence(),
        ExprKind::Unary { .. } => UNARY_PREC,
        // a negative literal lexes as `-` INT, so it binds like a unary
        ExprKind::Int(v) if *v < 0 => UNARY_PREC,
        _ => POSTFIX_PREC,
    }
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut out = String::new();
    print_expr(&mut out, e);
    out
}

fn print_wrapped(out: &mut String, e: &Expr, parens: bool) {
    if parens {
        out.push('(');
        print_expr(out, e);
        out.push(')');
    } else {
        print_expr(out, e);
    }
}

fn print_expr(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Int(v) => {
            let _ = write!(out, "{v}");
        }
        ExprKind::Str(s) => out.push_str(&escape_string(s)),
        ExprKind::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        ExprKind::Null => out.push_str("null"),
        ExprKind::Var(name) => out.push_str(name),
        ExprKind::This => out.push_str("this"),
        ExprKind::Field(name) => {
            let _ = write!(out, "this.{name}");
        }
        ExprKind::New { class, args } => {
            let _ = write!(out, "new {class}({})", join_args(args));
        }
        ExprKind::Call { receiver, method, args } => {
            print_wrapped(out, receiver, prec(receiver) < POSTFIX_PREC);
            let _ = write!(out, ".{method}({})", join_args(args));
        }
        ExprKind::Unary { op, operand } => {
            out.push(match op {
                UnaryOp::Not => '!',
                UnaryOp::Neg => '-',
            });
            // `-(5)` must not collapse into the literal `-5`
            let literal_int = *op == UnaryOp::Neg && matches!(operand.kind, ExprKind::Int(v) if v >= 0);
            print_wrapped(out, operand, prec(operand) < UNARY_PREC || literal_int);
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            print_wrapped(out, lhs, prec(lhs) < p);
            let _ = write!(out, " {} ", op.symbol());
            print_wrapped(out, rhs, prec(rhs) <= p);
        }
    }
}
