//! A deliberately naive evaluator used as an oracle for the interpreter:
//! association-list environments, a vector heap, string-coded errors, and
//! recursive structural equality with an assumption list.

use amplikit_core::interp::{Outcome, Unit};
use amplikit_core::syntax::{
    AssertKind, BinaryOp, Block, ClassDecl, Expr, ExprKind, MethodDecl, Program, Stmt, StmtKind, TestCase, UnaryOp,
};
use std::collections::BTreeSet;

const DEPTH_LIMIT: usize = 256;

#[derive(Clone, Debug, PartialEq)]
enum V {
    I(i64),
    B(bool),
    S(String),
    Nil,
    Ref(usize),
}

/// Outcome in a shape both evaluators can be projected onto.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefOutcome {
    Passed,
    AssertFailed(u32),
    Error { in_test: bool, site: u32, kind: String },
    Timeout,
}

impl RefOutcome {
    pub fn project(o: &Outcome) -> RefOutcome {
        match o {
            Outcome::Passed => RefOutcome::Passed,
            Outcome::AssertionFailed { site, .. } => RefOutcome::AssertFailed(site.0),
            Outcome::RuntimeError { site, kind } => {
                RefOutcome::Error { in_test: site.unit == Unit::Test, site: site.site.0, kind: format!("{kind:?}") }
            }
            Outcome::Timeout => RefOutcome::Timeout,
        }
    }
}

enum Stop {
    Fail(u32),
    Err(bool, u32, &'static str),
    Timeout,
}

enum Ctl {
    Go,
    Ret(V),
}

struct Env {
    vars: Vec<(String, V)>,
    this: Option<usize>,
    in_test: bool,
}

impl Env {
    fn lookup(&self, name: &str) -> Option<V> {
        self.vars.iter().find(|(n, _)| n == name).map(|(_, v)| v.clone())
    }

    fn slot(&mut self, name: &str) -> Option<&mut V> {
        self.vars.iter_mut().find(|(n, _)| n == name).map(|(_, v)| v)
    }
}

struct Walker<'a> {
    classes: &'a [ClassDecl],
    heap: Vec<(String, Vec<(String, V)>)>,
    steps: u64,
    budget: u64,
    covered: BTreeSet<u32>,
    depth: usize,
}

pub struct RefRun {
    pub outcome: RefOutcome,
    pub covered: BTreeSet<u32>,
    pub steps: u64,
}

pub fn reference_run(program: &Program, test: &TestCase, budget: u64) -> RefRun {
    let mut w = Walker { classes: &program.classes, heap: Vec::new(), steps: 0, budget, covered: BTreeSet::new(), depth: 0 };
    let mut env = Env { vars: Vec::new(), this: None, in_test: true };
    let outcome = match w.block(&test.body, &mut env) {
        Ok(_) => RefOutcome::Passed,
        Err(Stop::Fail(s)) => RefOutcome::AssertFailed(s),
        Err(Stop::Err(t, s, k)) => RefOutcome::Error { in_test: t, site: s, kind: k.to_string() },
        Err(Stop::Timeout) => RefOutcome::Timeout,
    };
    RefRun { outcome, covered: w.covered, steps: w.steps }
}

/// Union of the sites covered by every test.
pub fn reference_suite(program: &Program, tests: &[TestCase], budget: u64) -> BTreeSet<u32> {
    let mut all = BTreeSet::new();
    for t in tests {
        all.extend(reference_run(program, t, budget).covered);
    }
    all
}

impl<'a> Walker<'a> {
    fn class(&self, name: &str) -> Option<&'a ClassDecl> {
        self.classes.iter().find(|c| c.name == name)
    }

    fn method(class: &'a ClassDecl, name: &str) -> Option<&'a MethodDecl> {
        class.methods.iter().find(|m| m.name == name)
    }

    fn count(&mut self, site: u32, env: &Env) -> Result<(), Stop> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(Stop::Timeout);
        }
        if !env.in_test {
            self.covered.insert(site);
        }
        Ok(())
    }

    fn block(&mut self, b: &Block, env: &mut Env) -> Result<Ctl, Stop> {
        for s in &b.stmts {
            if let Ctl::Ret(v) = self.stmt(s, env)? {
                return Ok(Ctl::Ret(v));
            }
        }
        Ok(Ctl::Go)
    }

    fn truth(&mut self, cond: &Expr, env: &mut Env, stmt_site: u32) -> Result<bool, Stop> {
        match self.expr(cond, env)? {
            V::B(b) => Ok(b),
            _ => Err(Stop::Err(env.in_test, stmt_site, "TypeError")),
        }
    }

    fn stmt(&mut self, s: &Stmt, env: &mut Env) -> Result<Ctl, Stop> {
        let site = s.site.id.0;
        self.count(site, env)?;
        let fail = |env: &Env, k| Stop::Err(env.in_test, site, k);
        match &s.kind {
            StmtKind::Let { name, value } => {
                let v = self.expr(value, env)?;
                match env.slot(name) {
                    Some(slot) => *slot = v,
                    None => env.vars.push((name.clone(), v)),
                }
            }
            StmtKind::Assign { name, value } => {
                let v = self.expr(value, env)?;
                match env.slot(name) {
                    Some(slot) => *slot = v,
                    None => return Err(fail(env, "UnboundVariable")),
                }
            }
            StmtKind::SetField { field, value } => {
                let v = self.expr(value, env)?;
                let Some(obj) = env.this else { return Err(fail(env, "UnboundVariable")) };
                match self.heap[obj].1.iter_mut().find(|(n, _)| n == field) {
                    Some((_, slot)) => *slot = v,
                    None => return Err(fail(env, "UnknownField")),
                }
            }
            StmtKind::Expr(e) => {
                self.expr(e, env)?;
            }
            StmtKind::If { cond, then_block, else_block } => {
                if self.truth(cond, env, site)? {
                    return self.block(then_block, env);
                }
                if let Some(b) = else_block {
                    return self.block(b, env);
                }
            }
            StmtKind::While { cond, body } => loop {
                if !self.truth(cond, env, site)? {
                    break;
                }
                if let Ctl::Ret(v) = self.block(body, env)? {
                    return Ok(Ctl::Ret(v));
                }
            },
            StmtKind::Return(value) => {
                let v = match value {
                    Some(e) => self.expr(e, env)?,
                    None => V::Nil,
                };
                return Ok(Ctl::Ret(v));
            }
            StmtKind::Assert { kind, args } => {
                let mut vals = Vec::new();
                for a in args {
                    vals.push(self.expr(a, env)?);
                }
                match kind {
                    AssertKind::Equals | AssertKind::NotEquals => {
                        let same = self.same(&vals[0], &vals[1], &mut Vec::new());
                        if same != (*kind == AssertKind::Equals) {
                            return Err(Stop::Fail(site));
                        }
                    }
                    AssertKind::True | AssertKind::False => match vals[0] {
                        V::B(b) if b == (*kind == AssertKind::True) => {}
                        V::B(_) => return Err(Stop::Fail(site)),
                        _ => return Err(fail(env, "TypeError")),
                    },
                }
            }
        }
        Ok(Ctl::Go)
    }

    /// Coinductive structural equality.
    fn same(&self, a: &V, b: &V, assumed: &mut Vec<(usize, usize)>) -> bool {
        match (a, b) {
            (V::Ref(i), V::Ref(j)) => {
                if i == j || assumed.contains(&(*i, *j)) {
                    return true;
                }
                assumed.push((*i, *j));
                let (ci, fi) = &self.heap[*i];
                let (cj, fj) = &self.heap[*j];
                ci == cj
                    && fi.len() == fj.len()
                    && fi.iter().zip(fj).all(|((ni, vi), (nj, vj))| ni == nj && self.same(vi, vj, assumed))
            }
            (V::Ref(_), _) | (_, V::Ref(_)) => false,
            _ => a == b,
        }
    }

    fn args(&mut self, args: &[Expr], env: &mut Env) -> Result<Vec<V>, Stop> {
        let mut out = Vec::new();
        for a in args {
            out.push(self.expr(a, env)?);
        }
        Ok(out)
    }

    fn call(&mut self, m: &'a MethodDecl, obj: usize, args: Vec<V>, caller_test: bool, site: u32) -> Result<V, Stop> {
        if self.depth >= DEPTH_LIMIT {
            return Err(Stop::Err(caller_test, site, "StackOverflow"));
        }
        let mut env = Env { vars: m.params.iter().cloned().zip(args).collect(), this: Some(obj), in_test: false };
        self.depth += 1;
        let r = self.block(&m.body, &mut env);
        self.depth -= 1;
        Ok(match r? {
            Ctl::Ret(v) => v,
            Ctl::Go => V::Nil,
        })
    }

    fn expr(&mut self, e: &Expr, env: &mut Env) -> Result<V, Stop> {
        let site = e.site.id.0;
        self.count(site, env)?;
        let t = env.in_test;
        let fail = move |k| Stop::Err(t, site, k);
        Ok(match &e.kind {
            ExprKind::Int(i) => V::I(*i),
            ExprKind::Str(s) => V::S(s.clone()),
            ExprKind::Bool(b) => V::B(*b),
            ExprKind::Null => V::Nil,
            ExprKind::Var(n) => env.lookup(n).ok_or(fail("UnboundVariable"))?,
            ExprKind::This => V::Ref(env.this.ok_or(fail("UnboundVariable"))?),
            ExprKind::Field(f) => {
                let obj = env.this.ok_or(fail("UnboundVariable"))?;
                self.heap[obj].1.iter().find(|(n, _)| n == f).map(|(_, v)| v.clone()).ok_or(fail("UnknownField"))?
            }
            ExprKind::New { class, args } => {
                let c = self.class(class).ok_or(fail("UnknownClass"))?;
                let vals = self.args(args, env)?;
                let init = Self::method(c, "init");
                if vals.len() != init.map(|m| m.params.len()).unwrap_or(0) {
                    return Err(fail("ArityMismatch"));
                }
                self.heap.push((c.name.clone(), c.fields.iter().map(|f| (f.clone(), V::Nil)).collect()));
                let obj = self.heap.len() - 1;
                if let Some(m) = init {
                    self.call(m, obj, vals, t, site)?;
                }
                V::Ref(obj)
            }
            ExprKind::Call { receiver, method, args } => {
                let r = self.expr(receiver, env)?;
                let vals = self.args(args, env)?;
                match r {
                    V::Nil => return Err(fail("NullReceiver")),
                    V::I(_) | V::B(_) => return Err(fail("TypeError")),
                    V::S(s) => str_builtin(&s, method, &vals).map_err(fail)?,
                    V::Ref(obj) => {
                        let c = self.class(&self.heap[obj].0).expect("heap objects have classes");
                        let m = Self::method(c, method).ok_or(fail("UnknownMethod"))?;
                        if m.params.len() != vals.len() {
                            return Err(fail("ArityMismatch"));
                        }
                        self.call(m, obj, vals, t, site)?
                    }
                }
            }
            ExprKind::Unary { op, operand } => {
                let v = self.expr(operand, env)?;
                match (op, v) {
                    (UnaryOp::Not, V::B(b)) => V::B(!b),
                    (UnaryOp::Neg, V::I(i)) => V::I(i.checked_neg().ok_or(fail("Overflow"))?),
                    _ => return Err(fail("TypeError")),
                }
            }
            ExprKind::Binary { op: op @ (BinaryOp::And | BinaryOp::Or), lhs, rhs } => {
                let V::B(l) = self.expr(lhs, env)? else { return Err(fail("TypeError")) };
                let short = if *op == BinaryOp::And { !l } else { l };
                if short {
                    V::B(l)
                } else {
                    match self.expr(rhs, env)? {
                        V::B(r) => V::B(r),
                        _ => return Err(fail("TypeError")),
                    }
                }
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let l = self.expr(lhs, env)?;
                let r = self.expr(rhs, env)?;
                arith(*op, l, r).map_err(fail)?
            }
        })
    }
}

fn arith(op: BinaryOp, l: V, r: V) -> Result<V, &'static str> {
    let ints = match (&l, &r) {
        (V::I(a), V::I(b)) => Some((*a, *b)),
        _ => None,
    };
    let checked = |x: Option<i64>| x.map(V::I).ok_or("Overflow");
    match op {
        BinaryOp::Eq => Ok(V::B(l == r)),
        BinaryOp::Ne => Ok(V::B(l != r)),
        BinaryOp::Add => match (l, r) {
            (V::S(a), V::S(b)) => Ok(V::S(format!("{a}{b}"))),
            (V::I(a), V::I(b)) => checked(a.checked_add(b)),
            _ => Err("TypeError"),
        },
        _ => {
            let (a, b) = ints.ok_or("TypeError")?;
            match op {
                BinaryOp::Sub => checked(a.checked_sub(b)),
                BinaryOp::Mul => checked(a.checked_mul(b)),
                BinaryOp::Div | BinaryOp::Rem if b == 0 => Err("DivByZero"),
                BinaryOp::Div => checked(a.checked_div(b)),
                BinaryOp::Rem => checked(a.checked_rem(b)),
                BinaryOp::Lt => Ok(V::B(a < b)),
                BinaryOp::Le => Ok(V::B(a <= b)),
                BinaryOp::Gt => Ok(V::B(a > b)),
                BinaryOp::Ge => Ok(V::B(a >= b)),
                _ => unreachable!(),
            }
        }
    }
}

fn str_builtin(s: &str, m: &str, args: &[V]) -> Result<V, &'static str> {
    let want = match m {
        "length" => 0,
        "charAt" | "indexOf" | "contains" => 1,
        "substring" => 2,
        _ => return Err("UnknownMethod"),
    };
    if args.len() != want {
        return Err("ArityMismatch");
    }
    let cs: Vec<char> = s.chars().collect();
    let idx = |v: &V| match v {
        V::I(i) if *i >= 0 => Ok(*i as usize),
        V::I(_) => Err("IndexOutOfBounds"),
        _ => Err("TypeError"),
    };
    match m {
        "length" => Ok(V::I(cs.len() as i64)),
        "charAt" => {
            let i = idx(&args[0])?;
            cs.get(i).map(|c| V::S(c.to_string())).ok_or("IndexOutOfBounds")
        }
        "substring" => {
            let a = idx(&args[0])?;
            let b = idx(&args[1])?;
            if a > b || b > cs.len() {
                return Err("IndexOutOfBounds");
            }
            Ok(V::S(cs[a..b].iter().collect()))
        }
        _ => {
            let V::S(needle) = &args[0] else { return Err("TypeError") };
            let n: Vec<char> = needle.chars().collect();
            let pos = (0..=cs.len()).find(|&i| i + n.len() <= cs.len() && cs[i..i + n.len()] == n[..]);
            Ok(if m == "contains" { V::B(pos.is_some()) } else { V::I(pos.map_or(-1, |p| p as i64)) })
        }
    }
}
