use crate::syntax::{ExprKind, Program, SiteId, Stmt, StmtKind, TestCase};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Input mutation operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MutationKind {
    IntLit,
    BoolLit,
    StrLit,
    MethodRemove,
    MethodDup,
    MethodAdd,
    ArgNew,
}

impl MutationKind {
    pub fn tag(self) -> &'static str {
        match self {
            MutationKind::IntLit => "IntLit",
            MutationKind::BoolLit => "BoolLit",
            MutationKind::StrLit => "StrLit",
            MutationKind::MethodRemove => "MethodRemove",
            MutationKind::MethodDup => "MethodDup",
            MutationKind::MethodAdd => "MethodAdd",
            MutationKind::ArgNew => "ArgNew",
        }
    }
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A variable initialized by `let name = new Class(...)` at the top level of the test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Anchor {
    pub var: String,
    pub class: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MutationPoint {
    pub kind: MutationKind,
    /// Literal, argument, or statement site in the stripped test.
    pub target: SiteId,
    /// Index of the enclosing top-level statement.
    pub statement: usize,
    pub anchor: Option<Anchor>,
    /// Method to add, for [`MutationKind::MethodAdd`].
    pub method: Option<String>,
}

/// Maximum parameter count for methods the MethodAdd operator will call.
pub const MAX_ADDED_CALL_PARAMS: usize = 2;

fn anchor_of(stmt: &Stmt, program: &Program) -> Option<Anchor> {
    match &stmt.kind {
        StmtKind::Let { name, value } => match &value.kind {
            ExprKind::New { class, .. } if program.class(class).is_some() => {
                Some(Anchor { var: name.clone(), class: class.clone() })
            }
            _ => None,
        },
        _ => None,
    }
}

/// Enumerates mutation points in source order. Within one top-level statement
/// the order is: literals, call removal, call duplication, call additions, and
/// argument replacements.
pub fn mutation_points(stripped: &TestCase, program: &Program) -> Vec<MutationPoint> {
    let mut points = Vec::new();
    let mut anchors: Vec<Anchor> = Vec::new();
    let has_classes = !program.classes.is_empty();
    for (index, stmt) in stripped.body.stmts.iter().enumerate() {
        let point = |kind, target, anchor: Option<&Anchor>, method: Option<&str>| MutationPoint {
            kind,
            target,
            statement: index,
            anchor: anchor.cloned(),
            method: method.map(str::to_string),
        };

        stmt.walk_exprs(&mut |e| {
            let kind = match e.kind {
                ExprKind::Int(_) => MutationKind::IntLit,
                ExprKind::Bool(_) => MutationKind::BoolLit,
                ExprKind::Str(_) => MutationKind::StrLit,
                _ => return,
            };
            points.push(point(kind, e.site.id, None, None));
        });

        if let StmtKind::Expr(e) = &stmt.kind {
            if let ExprKind::Call { receiver, .. } = &e.kind {
                if let ExprKind::Var(v) = &receiver.kind {
                    if let Some(a) = anchors.iter().find(|a| &a.var == v) {
                        points.push(point(MutationKind::MethodRemove, stmt.site.id, Some(a), None));
                        points.push(point(MutationKind::MethodDup, stmt.site.id, Some(a), None));
                    }
                }
            }
        }

        if let Some(anchor) = anchor_of(stmt, program) {
            let class = program.class(&anchor.class).expect("anchors name declared classes");
            for m in &class.methods {
                if m.name != "init" && m.params.len() <= MAX_ADDED_CALL_PARAMS {
                    points.push(point(MutationKind::MethodAdd, stmt.site.id, Some(&anchor), Some(&m.name)));
                }
            }
            anchors.retain(|a| a.var != anchor.var);
            anchors.push(anchor);
        }

        if has_classes {
            stmt.walk_exprs(&mut |e| {
                if let ExprKind::New { args, .. } | ExprKind::Call { args, .. } = &e.kind {
                    for arg in args {
                        points.push(point(MutationKind::ArgNew, arg.site.id, None, None));
                    }
                }
            });
        }
    }
    points
}
