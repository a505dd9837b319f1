use super::points::{MutationKind, MutationPoint};
use super::AmpError;
use crate::syntax::{
    expr_to_string, parse_test_case, print_test, stmt_to_string, Block, ClassDecl, Expr, ExprKind, Program, SiteId, Stmt,
    StmtKind, TestCase,
};
use rand::seq::index;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

/// Characters that trigger escaping paths in typical production code; drawn
/// with the same total weight as all of printable ASCII.
pub const SPECIAL_CHARS: [char; 5] = ['\n', '\u{00A0}', '&', '<', '"'];

/// Upper bound on generated string lengths, in characters.
pub const MAX_GENERATED_STR_CHARS: usize = 12;

/// Maximum literal length for MethodAdd / ArgNew string arguments.
pub const MAX_ARG_STR_CHARS: usize = 4;

const METHOD_ADD_DRAWS: usize = 4;
const ARG_NEW_DRAWS_PER_CLASS: usize = 2;

/// One applied input mutation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationRecord {
    pub operator: MutationKind,
    /// Target site in the stripped test.
    pub site: SiteId,
    pub line: u32,
    /// Top-level statement index of the edit in the mutated test; the comment sits here.
    pub statement: usize,
    pub before: String,
    pub after: String,
    pub description: String,
    pub rng_draws: u32,
}

impl MutationRecord {
    pub fn comment(&self) -> String {
        format!("{}: {}", self.operator.tag(), self.description)
    }
}

/// Counts the 32/64-bit words drawn from the wrapped generator.
struct Counting<'a, R: ?Sized> {
    inner: &'a mut R,
    draws: u32,
}

impl<R: RngCore + ?Sized> RngCore for Counting<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.draws += 1;
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.draws += 1;
        self.inner.fill_bytes(dst)
    }
}

fn draw_char(rng: &mut impl Rng) -> char {
    if rng.random_bool(0.5) {
        SPECIAL_CHARS[rng.random_range(0..SPECIAL_CHARS.len())]
    } else {
        char::from(rng.random_range(0x20u8..=0x7E))
    }
}

fn fresh_string(rng: &mut impl Rng, min: usize, max: usize) -> String {
    let len = rng.random_range(min..=max);
    (0..len).map(|_| draw_char(rng)).collect()
}

fn draw_literal(rng: &mut impl Rng) -> ExprKind {
    match rng.random_range(0..3) {
        0 => ExprKind::Int(rng.random_range(-10..=10)),
        1 => ExprKind::Str(fresh_string(rng, 0, MAX_ARG_STR_CHARS)),
        _ => ExprKind::Bool(rng.random_bool(0.5)),
    }
}

fn draw_args(rng: &mut impl Rng, n: usize) -> Vec<Expr> {
    (0..n).map(|_| Expr::synthetic(draw_literal(rng))).collect()
}

fn int_pool(v: i64, rng: &mut impl Rng) -> Vec<ExprKind> {
    let r = rng.random_range(-100..=100);
    [v.checked_add(1), v.checked_sub(1), Some(0), v.checked_mul(2), Some(r)]
        .into_iter()
        .flatten()
        .map(ExprKind::Int)
        .collect()
}

fn str_pool(s: &str, rng: &mut impl Rng) -> Vec<ExprKind> {
    let chars: Vec<char> = s.chars().collect();
    let mut pool = Vec::new();
    if chars.len() < MAX_GENERATED_STR_CHARS {
        let at = rng.random_range(0..=chars.len());
        let mut v = chars.clone();
        v.insert(at, draw_char(rng));
        pool.push(v.into_iter().collect());
    }
    if !chars.is_empty() {
        let at = rng.random_range(0..chars.len());
        let mut v = chars.clone();
        v.remove(at);
        pool.push(v.into_iter().collect());

        let at = rng.random_range(0..chars.len());
        let mut v = chars.clone();
        v[at] = draw_char(rng);
        pool.push(v.into_iter().collect());
    }
    pool.push(fresh_string(rng, 1, MAX_GENERATED_STR_CHARS));
    pool.into_iter().map(ExprKind::Str).collect()
}

/// Classes constructed anywhere in the body, in order of first appearance.
fn instantiated_classes<'p>(body: &Block, program: &'p Program) -> Vec<&'p ClassDecl> {
    let mut out: Vec<&ClassDecl> = Vec::new();
    for stmt in &body.stmts {
        stmt.walk_exprs(&mut |e| {
            if let ExprKind::New { class, .. } = &e.kind {
                if let Some(c) = program.class(class) {
                    if !out.iter().any(|o| o.name == c.name) {
                        out.push(c);
                    }
                }
            }
        });
    }
    out
}

fn find_expr(stmt: &Stmt, site: SiteId) -> Option<&Expr> {
    let mut found = None;
    stmt.walk_exprs(&mut |e| {
        if found.is_none() && e.site.id == site {
            found = Some(e);
        }
    });
    found
}

fn replace_expr(stmt: &mut Stmt, site: SiteId, kind: &ExprKind) {
    let mut done = false;
    stmt.walk_exprs_mut(&mut |e| {
        if !done && e.site.id == site {
            e.kind = kind.clone();
            done = true;
        }
    });
    assert!(done, "mutation target {site:?} not in statement");
}

enum Edit {
    Replace(ExprKind),
    Remove,
    Dup,
    Insert(Stmt),
}

/// Drops duplicates (by printed text) and anything printing like the original.
fn dedupe<T>(items: Vec<T>, original: &str, text: impl Fn(&T) -> String) -> Vec<(T, String)> {
    let mut out: Vec<(T, String)> = Vec::new();
    for item in items {
        let t = text(&item);
        if t != original && !out.iter().any(|(_, o)| *o == t) {
            out.push((item, t));
        }
    }
    out
}

fn call_text(stmt: &Stmt) -> String {
    match &stmt.kind {
        StmtKind::Expr(e) => expr_to_string(e),
        _ => stmt_to_string(stmt),
    }
}

fn expr_text(kind: &ExprKind) -> String {
    expr_to_string(&Expr::synthetic(kind.clone()))
}

/// Index just past the last top-level statement that mentions `var`.
fn after_last_use(body: &Block, var: &str) -> usize {
    body.stmts.iter().rposition(|s| s.mentions_var(var)).map_or(body.stmts.len(), |i| i + 1)
}

/// Applies one operator at one point, returning up to `variants` distinct
/// single-edit mutants, each with its explanatory comment attached.
pub fn apply_operator<R: RngCore + ?Sized>(
    point: &MutationPoint,
    stripped: &TestCase,
    program: &Program,
    rng: &mut R,
    variants: usize,
) -> Result<Vec<(TestCase, MutationRecord)>, AmpError> {
    let mut rng = Counting { inner: rng, draws: 0 };
    let stmt = &stripped.body.stmts[point.statement];
    let empty = || AmpError::EmptyVariantPool { kind: point.kind, site: point.target };

    // (edit, before, after, description, statement index of the edit, line)
    let mut pool: Vec<(Edit, String, String, String, usize, u32)> = Vec::new();
    match point.kind {
        MutationKind::IntLit | MutationKind::BoolLit | MutationKind::StrLit | MutationKind::ArgNew => {
            let target = find_expr(stmt, point.target).ok_or_else(empty)?;
            let before = expr_to_string(target);
            let line = target.site.span.line;
            let kinds = match (&point.kind, &target.kind) {
                (MutationKind::IntLit, ExprKind::Int(v)) => int_pool(*v, &mut rng),
                (MutationKind::BoolLit, ExprKind::Bool(b)) => vec![ExprKind::Bool(!b)],
                (MutationKind::StrLit, ExprKind::Str(s)) => str_pool(s, &mut rng),
                (MutationKind::ArgNew, _) => {
                    let mut kinds = Vec::new();
                    for class in instantiated_classes(&stripped.body, program) {
                        let arity = class.constructor().map_or(0, |m| m.params.len());
                        for _ in 0..ARG_NEW_DRAWS_PER_CLASS {
                            kinds.push(ExprKind::New { class: class.name.clone(), args: draw_args(&mut rng, arity) });
                        }
                    }
                    kinds
                }
                _ => return Err(empty()),
            };
            for (kind, after) in dedupe(kinds, &before, expr_text) {
                let description = match point.kind {
                    MutationKind::IntLit => format!("change integer from {before} to {after}"),
                    MutationKind::BoolLit => format!("change boolean from {before} to {after}"),
                    MutationKind::StrLit => format!("change string from {before} to {after}"),
                    _ => format!("replace argument {before} with {after}"),
                };
                pool.push((Edit::Replace(kind), before.clone(), after, description, point.statement, line));
            }
        }
        MutationKind::MethodRemove => {
            let text = stmt_to_string(stmt);
            let description = format!("remove call {}", call_text(stmt));
            pool.push((Edit::Remove, text, String::new(), description, point.statement, stmt.site.span.line));
        }
        MutationKind::MethodDup => {
            let text = stmt_to_string(stmt);
            let description = format!("duplicate call {}", call_text(stmt));
            pool.push((Edit::Dup, text.clone(), text, description, point.statement + 1, stmt.site.span.line));
        }
        MutationKind::MethodAdd => {
            let (Some(anchor), Some(method)) = (&point.anchor, &point.method) else { return Err(empty()) };
            let arity = program
                .class(&anchor.class)
                .and_then(|c| c.method(method))
                .map(|m| m.params.len())
                .ok_or_else(empty)?;
            let draws = if arity == 0 { 1 } else { METHOD_ADD_DRAWS };
            let calls: Vec<Stmt> = (0..draws)
                .map(|_| {
                    Stmt::synthetic(StmtKind::Expr(Expr::synthetic(ExprKind::Call {
                        receiver: Box::new(Expr::synthetic(ExprKind::Var(anchor.var.clone()))),
                        method: method.clone(),
                        args: draw_args(&mut rng, arity),
                    })))
                })
                .collect();
            let at = after_last_use(&stripped.body, &anchor.var);
            for (call, after) in dedupe(calls, "", stmt_to_string) {
                let description = format!("add call {}", call_text(&call));
                pool.push((Edit::Insert(call), String::new(), after, description, at, stmt.site.span.line));
            }
        }
    }

    if pool.is_empty() {
        return Err(empty());
    }
    let mut picked = index::sample(&mut rng, pool.len(), variants.min(pool.len())).into_vec();
    picked.sort_unstable();
    let draws = rng.draws;

    let mut slots: Vec<Option<_>> = pool.into_iter().map(Some).collect();
    let mut out = Vec::with_capacity(picked.len());
    for i in picked {
        let (edit, before, after, description, at, line) = slots[i].take().expect("indices are distinct");
        let mut test = stripped.clone();
        let body = &mut test.body;
        match edit {
            Edit::Replace(kind) => replace_expr(&mut body.stmts[point.statement], point.target, &kind),
            Edit::Remove => {
                // keep the removed statement's own comments where they were
                body.stmts.remove(point.statement);
                for c in &mut body.comments {
                    if c.index > point.statement {
                        c.index -= 1;
                    }
                }
            }
            Edit::Dup => {
                let copy = body.stmts[point.statement].clone();
                body.insert_stmt(at, copy);
            }
            Edit::Insert(stmt) => body.insert_stmt(at, stmt),
        }
        let record = MutationRecord {
            operator: point.kind,
            site: point.target,
            line,
            statement: at,
            before,
            after,
            description,
            rng_draws: draws,
        };
        body.attach_comment(at, record.comment());
        out.push((renumber(&test), record));
    }
    Ok(out)
}

/// Round-trips through the printer so synthesized nodes get real sites.
pub(crate) fn renumber(test: &TestCase) -> TestCase {
    let mut t = parse_test_case(&print_test(test)).expect("printed tests reparse");
    t.span = test.span;
    t
}
