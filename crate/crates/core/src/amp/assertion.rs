use crate::interp::{ObsKey, ObservationSet, Primitive, VALUE_OBSERVER};
use crate::syntax::{AssertKind, Expr, ExprKind, Stmt, StmtKind};
use serde::{Deserialize, Serialize};

/// An observation whose value the mutation changed, or made newly observable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationDelta {
    pub key: ObsKey,
    /// `None` when the key was not observable before the mutation.
    pub base: Option<Primitive>,
    pub mutated: Primitive,
}

/// Keys present in both with different values, plus keys only in `mutated`,
/// in `mutated` order.
pub fn changed_observations(base: &ObservationSet, mutated: &ObservationSet) -> Vec<ObservationDelta> {
    mutated
        .entries
        .iter()
        .filter_map(|(key, value)| match base.get(key) {
            Some(b) if b == value => None,
            b => Some(ObservationDelta { key: key.clone(), base: b.cloned(), mutated: value.clone() }),
        })
        .collect()
}

/// What a generated assertion checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssertionSpec {
    pub anchor: String,
    pub observer: String,
    pub kind: AssertKind,
    pub expected: Primitive,
}

impl AssertionSpec {
    pub fn from_delta(delta: &ObservationDelta) -> Self {
        let kind = match delta.mutated {
            Primitive::Bool(true) => AssertKind::True,
            Primitive::Bool(false) => AssertKind::False,
            _ => AssertKind::Equals,
        };
        AssertionSpec {
            anchor: delta.key.anchor.clone(),
            observer: delta.key.observer.clone(),
            kind,
            expected: delta.mutated.clone(),
        }
    }

    fn target(&self) -> Expr {
        let var = Expr::synthetic(ExprKind::Var(self.anchor.clone()));
        if self.observer == VALUE_OBSERVER {
            var
        } else {
            Expr::synthetic(ExprKind::Call { receiver: Box::new(var), method: self.observer.clone(), args: Vec::new() })
        }
    }

    pub fn to_stmt(&self) -> Stmt {
        let args = match self.kind {
            AssertKind::True | AssertKind::False => vec![self.target()],
            _ => vec![Expr::synthetic(literal(&self.expected)), self.target()],
        };
        Stmt::synthetic(StmtKind::Assert { kind: self.kind, args })
    }
}

fn literal(p: &Primitive) -> ExprKind {
    match p {
        Primitive::Int(i) => ExprKind::Int(*i),
        Primitive::Bool(b) => ExprKind::Bool(*b),
        Primitive::Str(s) => ExprKind::Str(s.clone()),
        Primitive::Null => ExprKind::Null,
    }
}

/// Renders the single inline assertion for a delta.
pub fn render_assertion(delta: &ObservationDelta) -> Stmt {
    AssertionSpec::from_delta(delta).to_stmt()
}
