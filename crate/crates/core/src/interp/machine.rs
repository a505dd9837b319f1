use super::coverage::{CoverageMap, SiteIndex};
use super::value::{deep_equal, Heap, ObjId, Object, Value};
use crate::syntax::*;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

/// Default per-execution step budget.
pub const DEFAULT_BUDGET: u64 = 100_000;

/// Nested method calls deeper than this fail with [`RuntimeErrorKind::StackOverflow`].
pub const MAX_CALL_DEPTH: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuntimeErrorKind {
    UnknownClass,
    UnknownMethod,
    UnknownField,
    UnboundVariable,
    ArityMismatch,
    TypeError,
    DivByZero,
    Overflow,
    NullReceiver,
    IndexOutOfBounds,
    StackOverflow,
}

/// Which parsed file a site id belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Program,
    Test,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ErrorSite {
    pub unit: Unit,
    pub site: SiteId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum Outcome {
    Passed,
    AssertionFailed { site: SiteId, expected: String, actual: String },
    RuntimeError { site: ErrorSite, kind: RuntimeErrorKind },
    Timeout,
}

impl Outcome {
    pub fn is_passed(&self) -> bool {
        matches!(self, Outcome::Passed)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Passed => f.write_str("passed"),
            Outcome::AssertionFailed { expected, actual, .. } => {
                write!(f, "assertion failed: expected {expected}, actual {actual}")
            }
            Outcome::RuntimeError { site, kind } => write!(f, "runtime error {kind:?} at {:?} {}", site.unit, site.site),
            Outcome::Timeout => f.write_str("step budget exhausted"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Execution {
    pub outcome: Outcome,
    /// Production sites only.
    pub coverage: CoverageMap,
    pub steps_used: u64,
}

/// Why evaluation stopped early.
#[derive(Debug)]
pub(crate) enum Halt {
    Error(ErrorSite, RuntimeErrorKind),
    AssertFailed { site: SiteId, expected: String, actual: String },
    Timeout,
}

impl From<Halt> for Outcome {
    fn from(h: Halt) -> Self {
        match h {
            Halt::Error(site, kind) => Outcome::RuntimeError { site, kind },
            Halt::AssertFailed { site, expected, actual } => Outcome::AssertionFailed { site, expected, actual },
            Halt::Timeout => Outcome::Timeout,
        }
    }
}

type Eval<T> = Result<T, Halt>;

enum Flow {
    Next,
    Return(Value),
}

#[derive(Default)]
pub(crate) struct Frame {
    pub locals: IndexMap<String, Value>,
    this: Option<ObjId>,
}

/// One interpreter instance: owns its heap, step counter and coverage bitmap.
pub(crate) struct Machine<'p> {
    classes: HashMap<&'p str, &'p ClassDecl>,
    pub heap: Heap,
    steps: u64,
    budget: u64,
    covered: Vec<bool>,
    depth: usize,
}

impl<'p> Machine<'p> {
    pub fn new(program: &'p Program, budget: u64) -> Self {
        Self::with_heap(program, budget, Heap::default())
    }

    pub fn with_heap(program: &'p Program, budget: u64, heap: Heap) -> Self {
        Machine {
            classes: program.classes.iter().map(|c| (c.name.as_str(), c)).collect(),
            heap,
            steps: 0,
            budget,
            covered: vec![false; program.site_count()],
            depth: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn coverage(&self, index: &SiteIndex) -> CoverageMap {
        let sites = self.covered.iter().enumerate().filter(|(_, c)| **c).map(|(i, _)| SiteId(i as u32));
        CoverageMap::from_sites(index, sites)
    }

    pub fn class(&self, name: &str) -> Option<&'p ClassDecl> {
        self.classes.get(name).copied()
    }

    fn tick(&mut self, site: Site, unit: Unit) -> Eval<()> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(Halt::Timeout);
        }
        if unit == Unit::Program {
            self.covered[site.id.index()] = true;
        }
        Ok(())
    }

    /// Runs a test body in a fresh frame and returns that frame.
    pub fn run_body(&mut self, body: &Block) -> (Frame, Eval<()>) {
        let mut frame = Frame::default();
        let result = self.exec_block(body, &mut frame, Unit::Test).map(|_| ());
        (frame, result)
    }

    fn exec_block(&mut self, block: &Block, frame: &mut Frame, unit: Unit) -> Eval<Flow> {
        for stmt in &block.stmts {
            if let Flow::Return(v) = self.exec_stmt(stmt, frame, unit)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Next)
    }

    fn condition(&mut self, cond: &Expr, frame: &mut Frame, unit: Unit, site: ErrorSite) -> Eval<bool> {
        match self.eval(cond, frame, unit)? {
            Value::Bool(b) => Ok(b),
            _ => Err(Halt::Error(site, RuntimeErrorKind::TypeError)),
        }
    }

    fn exec_stmt(&mut self, stmt: &Stmt, frame: &mut Frame, unit: Unit) -> Eval<Flow> {
        self.tick(stmt.site, unit)?;
        let here = ErrorSite { unit, site: stmt.site.id };
        match &stmt.kind {
            StmtKind::Let { name, value } => {
                let v = self.eval(value, frame, unit)?;
                frame.locals.insert(name.clone(), v);
            }
            StmtKind::Assign { name, value } => {
                let v = self.eval(value, frame, unit)?;
                match frame.locals.get_mut(name) {
                    Some(slot) => *slot = v,
                    None => return Err(Halt::Error(here, RuntimeErrorKind::UnboundVariable)),
                }
            }
            StmtKind::SetField { field, value } => {
                let v = self.eval(value, frame, unit)?;
                let this = frame.this.ok_or(Halt::Error(here, RuntimeErrorKind::UnboundVariable))?;
                match self.heap.get_mut(this).fields.get_mut(field) {
                    Some(slot) => *slot = v,
                    None => return Err(Halt::Error(here, RuntimeErrorKind::UnknownField)),
                }
            }
            StmtKind::Expr(e) => {
                self.eval(e, frame, unit)?;
            }
            StmtKind::If { cond, then_block, else_block } => {
                if self.condition(cond, frame, unit, here)? {
                    return self.exec_block(then_block, frame, unit);
                } else if let Some(else_block) = else_block {
                    return self.exec_block(else_block, frame, unit);
                }
            }
            StmtKind::While { cond, body } => {
                while self.condition(cond, frame, unit, here)? {
                    if let Flow::Return(v) = self.exec_block(body, frame, unit)? {
                        return Ok(Flow::Return(v));
                    }
                }
            }
            StmtKind::Return(value) => {
                let v = match value {
                    Some(e) => self.eval(e, frame, unit)?,
                    None => Value::Null,
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::Assert { kind, args } => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a, frame, unit)?);
                }
                let failed = |expected: String, actual: String| Halt::AssertFailed { site: stmt.site.id, expected, actual };
                match kind {
                    AssertKind::Equals | AssertKind::NotEquals => {
                        let equal = deep_equal(&self.heap, &vals[0], &vals[1]);
                        if equal != (*kind == AssertKind::Equals) {
                            let expected = if equal {
                                format!("not {}", self.heap.render(&vals[0]))
                            } else {
                                self.heap.render(&vals[0])
                            };
                            return Err(failed(expected, self.heap.render(&vals[1])));
                        }
                    }
                    AssertKind::True | AssertKind::False => {
                        let want = *kind == AssertKind::True;
                        match vals[0] {
                            Value::Bool(b) if b == want => {}
                            Value::Bool(b) => return Err(failed(want.to_string(), b.to_string())),
                            _ => return Err(Halt::Error(here, RuntimeErrorKind::TypeError)),
                        }
                    }
                }
            }
        }
        Ok(Flow::Next)
    }

    fn eval(&mut self, e: &Expr, frame: &mut Frame, unit: Unit) -> Eval<Value> {
        use RuntimeErrorKind::*;
        self.tick(e.site, unit)?;
        let here = ErrorSite { unit, site: e.site.id };
        let err = |kind| Halt::Error(here, kind);
        Ok(match &e.kind {
            ExprKind::Int(v) => Value::Int(*v),
            ExprKind::Str(s) => Value::Str(s.clone()),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::Null => Value::Null,
            ExprKind::Var(name) => frame.locals.get(name).cloned().ok_or(err(UnboundVariable))?,
            ExprKind::This => Value::Obj(frame.this.ok_or(err(UnboundVariable))?),
            ExprKind::Field(name) => {
                let this = frame.this.ok_or(err(UnboundVariable))?;
                self.heap.get(this).fields.get(name).cloned().ok_or(err(UnknownField))?
            }
            ExprKind::New { class, args } => {
                let decl = self.class(class).ok_or(err(UnknownClass))?;
                let vals = self.eval_args(args, frame, unit)?;
                let expected = decl.constructor().map_or(0, |m| m.params.len());
                if vals.len() != expected {
                    return Err(err(ArityMismatch));
                }
                let fields = decl.fields.iter().map(|f| (f.clone(), Value::Null)).collect();
                let id = self.heap.alloc(Object { class: decl.name.clone(), fields });
                if let Some(init) = decl.constructor() {
                    self.invoke(init, id, vals, here)?;
                }
                Value::Obj(id)
            }
            ExprKind::Call { receiver, method, args } => {
                let recv = self.eval(receiver, frame, unit)?;
                let vals = self.eval_args(args, frame, unit)?;
                match recv {
                    Value::Null => return Err(err(NullReceiver)),
                    Value::Str(s) => string_method(&s, method, &vals).map_err(err)?,
                    Value::Int(_) | Value::Bool(_) => return Err(err(TypeError)),
                    Value::Obj(id) => {
                        let class = self.class(&self.heap.get(id).class).expect("objects have declared classes");
                        let decl = class.method(method).ok_or(err(UnknownMethod))?;
                        if decl.params.len() != vals.len() {
                            return Err(err(ArityMismatch));
                        }
                        self.invoke(decl, id, vals, here)?
                    }
                }
            }
            ExprKind::Unary { op, operand } => match (op, self.eval(operand, frame, unit)?) {
                (UnaryOp::Not, Value::Bool(b)) => Value::Bool(!b),
                (UnaryOp::Neg, Value::Int(i)) => Value::Int(i.checked_neg().ok_or(err(Overflow))?),
                _ => return Err(err(TypeError)),
            },
            ExprKind::Binary { op, lhs, rhs } => {
                let l = self.eval(lhs, frame, unit)?;
                if matches!(op, BinaryOp::And | BinaryOp::Or) {
                    let Value::Bool(lb) = l else { return Err(err(TypeError)) };
                    if lb == (*op == BinaryOp::Or) {
                        return Ok(Value::Bool(lb));
                    }
                    return match self.eval(rhs, frame, unit)? {
                        Value::Bool(rb) => Ok(Value::Bool(rb)),
                        _ => Err(err(TypeError)),
                    };
                }
                let r = self.eval(rhs, frame, unit)?;
                binary(*op, l, r).map_err(err)?
            }
        })
    }

    fn eval_args(&mut self, args: &[Expr], frame: &mut Frame, unit: Unit) -> Eval<Vec<Value>> {
        args.iter().map(|a| self.eval(a, frame, unit)).collect()
    }

    fn invoke(&mut self, method: &MethodDecl, this: ObjId, args: Vec<Value>, call_site: ErrorSite) -> Eval<Value> {
        if self.depth >= MAX_CALL_DEPTH {
            return Err(Halt::Error(call_site, RuntimeErrorKind::StackOverflow));
        }
        let mut frame = Frame { locals: method.params.iter().cloned().zip(args).collect(), this: Some(this) };
        self.depth += 1;
        let flow = stacker::maybe_grow(64 * 1024, 1024 * 1024, || self.exec_block(&method.body, &mut frame, Unit::Program));
        self.depth -= 1;
        Ok(match flow? {
            Flow::Return(v) => v,
            Flow::Next => Value::Null,
        })
    }

    /// Calls a zero-argument method on `target` from outside any frame.
    pub fn call_method(&mut self, target: ObjId, method: &MethodDecl) -> Eval<Value> {
        let site = ErrorSite { unit: Unit::Test, site: SiteId(0) };
        self.invoke(method, target, Vec::new(), site)
    }
}

fn binary(op: BinaryOp, l: Value, r: Value) -> Result<Value, RuntimeErrorKind> {
    use RuntimeErrorKind::*;
    use Value::{Bool, Int, Str};
    Ok(match (op, l, r) {
        (BinaryOp::Eq, l, r) => Bool(identical(&l, &r)),
        (BinaryOp::Ne, l, r) => Bool(!identical(&l, &r)),
        (BinaryOp::Add, Str(a), Str(b)) => Str(a + &b),
        (BinaryOp::Add, Int(a), Int(b)) => Int(a.checked_add(b).ok_or(Overflow)?),
        (BinaryOp::Sub, Int(a), Int(b)) => Int(a.checked_sub(b).ok_or(Overflow)?),
        (BinaryOp::Mul, Int(a), Int(b)) => Int(a.checked_mul(b).ok_or(Overflow)?),
        (BinaryOp::Div | BinaryOp::Rem, Int(_), Int(0)) => return Err(DivByZero),
        (BinaryOp::Div, Int(a), Int(b)) => Int(a.checked_div(b).ok_or(Overflow)?),
        (BinaryOp::Rem, Int(a), Int(b)) => Int(a.checked_rem(b).ok_or(Overflow)?),
        (BinaryOp::Lt, Int(a), Int(b)) => Bool(a < b),
        (BinaryOp::Le, Int(a), Int(b)) => Bool(a <= b),
        (BinaryOp::Gt, Int(a), Int(b)) => Bool(a > b),
        (BinaryOp::Ge, Int(a), Int(b)) => Bool(a >= b),
        _ => return Err(TypeError),
    })
}

/// In-language `==`: primitives by value, objects by identity.
fn identical(l: &Value, r: &Value) -> bool {
    l == r
}

/// Built-in methods on strings. Indices count Unicode scalar values.
pub fn string_method(s: &str, method: &str, args: &[Value]) -> Result<Value, RuntimeErrorKind> {
    use RuntimeErrorKind::*;
    let arity = match method {
        "length" => 0,
        "charAt" | "indexOf" | "contains" => 1,
        "substring" => 2,
        _ => return Err(UnknownMethod),
    };
    if args.len() != arity {
        return Err(ArityMismatch);
    }
    let chars: Vec<char> = s.chars().collect();
    let index = |v: &Value| -> Result<usize, RuntimeErrorKind> {
        match v {
            Value::Int(i) => usize::try_from(*i).map_err(|_| IndexOutOfBounds),
            _ => Err(TypeError),
        }
    };
    Ok(match method {
        "length" => Value::Int(chars.len() as i64),
        "charAt" => {
            let i = index(&args[0])?;
            Value::Str(chars.get(i).ok_or(IndexOutOfBounds)?.to_string())
        }
        "substring" => {
            let (a, b) = (index(&args[0])?, index(&args[1])?);
            if a > b || b > chars.len() {
                return Err(IndexOutOfBounds);
            }
            Value::Str(chars[a..b].iter().collect())
        }
        "indexOf" | "contains" => {
            let Value::Str(needle) = &args[0] else { return Err(TypeError) };
            let found = s.find(needle.as_str()).map(|byte| s[..byte].chars().count() as i64);
            if method == "contains" {
                Value::Bool(found.is_some())
            } else {
                Value::Int(found.unwrap_or(-1))
            }
        }
        _ => unreachable!("arity table covers every method"),
    })
}

/// Executes one test against `program`, tracking production-site coverage.
pub fn run_test(program: &Program, test: &TestCase, budget: u64) -> Execution {
    run_test_indexed(program, &SiteIndex::new(program), test, budget)
}

pub fn run_test_indexed(program: &Program, index: &SiteIndex, test: &TestCase, budget: u64) -> Execution {
    let mut machine = Machine::new(program, budget);
    let (_, result) = machine.run_body(&test.body);
    Execution {
        outcome: result.map_or_else(Outcome::from, |_| Outcome::Passed),
        coverage: machine.coverage(index),
        steps_used: machine.steps(),
    }
}

/// Union of per-test coverage. Failing tests still contribute what they executed.
pub fn suite_coverage(program: &Program, suite: &TestSuite, budget: u64) -> CoverageMap {
    let index = SiteIndex::new(program);
    let mut total = CoverageMap::default();
    for test in &suite.tests {
        total.union_with(&index, &run_test_indexed(program, &index, test, budget).coverage);
    }
    total
}
