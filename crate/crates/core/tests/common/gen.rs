//! Seeded generator of small MTS programs and tests.
//!
//! Most of the generated code is well typed, so runs get deep into the
//! program; a steady fraction is not (wrong operand types, unbound names,
//! arity mismatches, null receivers, unbounded loops and recursion), so the
//! failure paths get exercised too.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STR_POOL: [&str; 8] = ["", "a", "ab&", "x<y", "\\n", "\\u00A0z", "hello world", "\\\"q\\\""];
const INT_POOL: [&str; 8] = ["0", "1", "2", "-1", "7", "100", "9223372036854775807", "-9223372036854775808"];
const SMALL_INTS: [&str; 7] = ["0", "1", "2", "3", "5", "-2", "10"];

/// Rough type wanted at an expression position.
#[derive(Clone, Copy, PartialEq)]
enum Hint {
    Any,
    Int,
    Bool,
    Str,
}

struct ClassShape {
    name: String,
    fields: Vec<String>,
    init_params: usize,
    methods: Vec<(String, usize)>,
}

pub struct Generated {
    pub source: String,
    pub test: String,
}

#[derive(Clone, Default)]
struct Scope {
    vars: Vec<String>,
    /// Variables holding an instance of the class with that index.
    objects: Vec<(String, usize)>,
    /// Enclosing class, inside a method.
    class: Option<usize>,
    fields: Vec<String>,
}

struct Gen {
    rng: ChaCha8Rng,
    classes: Vec<ClassShape>,
    /// Rough count of emitted nodes; once over budget only leaves are produced.
    nodes: usize,
    limit: usize,
    names: usize,
}

impl Gen {
    fn fresh(&mut self, prefix: &str) -> String {
        self.names += 1;
        format!("{prefix}{}", self.names)
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[self.rng.random_range(0..xs.len())]
    }

    /// Classes callable from `scope`. Methods normally call into later classes
    /// only, which keeps recursion rare.
    fn callable(&mut self, scope: &Scope) -> Vec<usize> {
        match scope.class {
            Some(c) if !self.chance(0.05) => (c + 1..self.classes.len()).collect(),
            _ => (0..self.classes.len()).collect(),
        }
    }

    fn leaf(&mut self, hint: Hint, scope: &Scope) -> String {
        self.nodes += 1;
        if self.chance(0.97) {
            match hint {
                Hint::Int => {
                    if !scope.vars.is_empty() && self.chance(0.4) {
                        return self.pick(&scope.vars).clone();
                    }
                    if !scope.fields.is_empty() && self.chance(0.3) {
                        return format!("this.{}", self.pick(&scope.fields));
                    }
                    return self.pick(&SMALL_INTS).to_string();
                }
                Hint::Bool => return if self.chance(0.5) { "true".into() } else { "false".into() },
                Hint::Str => return format!("\"{}\"", self.pick(&STR_POOL)),
                Hint::Any => {}
            }
        }
        match self.rng.random_range(0..10) {
            0..=2 => self.pick(&INT_POOL).to_string(),
            3 => format!("\"{}\"", self.pick(&STR_POOL)),
            4 => if self.chance(0.5) { "true".into() } else { "false".into() },
            5 => "null".into(),
            6 if scope.class.is_some() && !scope.fields.is_empty() => format!("this.{}", self.pick(&scope.fields)),
            6 if scope.class.is_some() => "this".into(),
            _ if !scope.vars.is_empty() && self.chance(0.95) => self.pick(&scope.vars).clone(),
            _ if self.chance(0.2) => "undefinedVar".into(),
            _ => self.pick(&INT_POOL).to_string(),
        }
    }

    fn args(&mut self, n: usize, scope: &Scope, depth: usize) -> String {
        let n = if self.chance(0.015) { n + 1 } else { n };
        (0..n).map(|_| self.expr(Hint::Int, scope, depth + 1)).collect::<Vec<_>>().join(", ")
    }

    fn construct(&mut self, class: usize, scope: &Scope, depth: usize) -> String {
        let (name, n) = (self.classes[class].name.clone(), self.classes[class].init_params);
        format!("new {name}({})", self.args(n, scope, depth))
    }

    fn receiver(&mut self, class: usize, scope: &Scope, depth: usize) -> String {
        let known: Vec<String> = scope.objects.iter().filter(|(_, c)| *c == class).map(|(v, _)| v.clone()).collect();
        if !known.is_empty() && self.chance(0.75) {
            self.pick(&known).clone()
        } else if self.chance(0.9) {
            self.construct(class, scope, depth)
        } else {
            self.leaf(Hint::Any, scope)
        }
    }

    fn call(&mut self, scope: &Scope, depth: usize) -> Option<String> {
        let targets = self.callable(scope);
        if targets.is_empty() {
            return None;
        }
        let c = *self.pick(&targets);
        let methods = self.classes[c].methods.clone();
        let (m, n) = if self.chance(0.02) { ("missing".to_string(), 0) } else { self.pick(&methods).clone() };
        let recv = self.receiver(c, scope, depth);
        Some(format!("{recv}.{m}({})", self.args(n, scope, depth)))
    }

    fn expr(&mut self, hint: Hint, scope: &Scope, depth: usize) -> String {
        // the odd untyped position keeps type errors in the mix
        let hint = if self.chance(0.98) { hint } else { Hint::Any };
        if depth >= 3 || self.nodes >= self.limit || self.chance(0.35) {
            return self.leaf(hint, scope);
        }
        self.nodes += 1;
        match self.rng.random_range(0..8) {
            0 | 1 => {
                let (op, operand) = match hint {
                    Hint::Int => (*self.pick(&["+", "-", "*", "/", "%"]), Hint::Int),
                    Hint::Bool => match self.rng.random_range(0..4) {
                        0 => (*self.pick(&["&&", "||"]), Hint::Bool),
                        1 => (*self.pick(&["==", "!="]), Hint::Any),
                        _ => (*self.pick(&["<", "<=", ">", ">="]), Hint::Int),
                    },
                    Hint::Str => ("+", Hint::Str),
                    Hint::Any => {
                        let op = *self.pick(&["+", "-", "*", "/", "%", "<", "<=", ">", ">=", "==", "!=", "&&", "||"]);
                        let operand = match op {
                            "&&" | "||" => Hint::Bool,
                            "==" | "!=" => Hint::Any,
                            _ => Hint::Int,
                        };
                        (op, operand)
                    }
                };
                let l = self.expr(operand, scope, depth + 1);
                let r = self.expr(operand, scope, depth + 1);
                format!("({l} {op} {r})")
            }
            2 => {
                let (op, operand) = match hint {
                    Hint::Bool => ("!", Hint::Bool),
                    Hint::Int => ("-", Hint::Int),
                    _ => *self.pick(&[("!", Hint::Bool), ("-", Hint::Int)]),
                };
                format!("{op}({})", self.expr(operand, scope, depth + 1))
            }
            3 if hint != Hint::Bool => {
                let (m, arg, n) = match hint {
                    Hint::Int => *self.pick(&[("length", Hint::Any, 0), ("indexOf", Hint::Str, 1)]),
                    Hint::Str => *self.pick(&[("charAt", Hint::Int, 1), ("substring", Hint::Int, 2)]),
                    _ => *self.pick(&[
                        ("length", Hint::Any, 0),
                        ("charAt", Hint::Int, 1),
                        ("substring", Hint::Int, 2),
                        ("indexOf", Hint::Str, 1),
                        ("contains", Hint::Str, 1),
                    ]),
                };
                let recv = self.leaf(Hint::Str, scope);
                let n = if self.chance(0.015) { n + 1 } else { n };
                let args: Vec<String> = (0..n).map(|_| self.expr(arg, scope, depth + 1)).collect();
                format!("{recv}.{m}({})", args.join(", "))
            }
            4 if hint == Hint::Any => {
                let targets = self.callable(scope);
                if targets.is_empty() {
                    return self.leaf(hint, scope);
                }
                let c = *self.pick(&targets);
                self.construct(c, scope, depth)
            }
            // calls return ints, or null from a method without a return
            _ if matches!(hint, Hint::Any | Hint::Int) => {
                self.call(scope, depth).unwrap_or_else(|| self.leaf(hint, scope))
            }
            _ => self.leaf(hint, scope),
        }
    }

    fn block(&mut self, scope: &mut Scope, depth: usize, out: &mut String, test: bool) {
        let n = self.rng.random_range(1..=if depth == 0 { 5 } else { 3 });
        for _ in 0..n {
            if self.nodes >= self.limit {
                break;
            }
            self.nodes += 1;
            let stmt = match self.rng.random_range(0..11) {
                0..=2 => {
                    let name = self.fresh("v");
                    let hint = *self.pick(&[Hint::Int, Hint::Int, Hint::Any, Hint::Str]);
                    let e = self.expr(hint, scope, 0);
                    // names that may not hold an int mostly stay out of int positions
                    if hint == Hint::Int || self.chance(0.15) {
                        scope.vars.push(name.clone());
                    }
                    format!("let {name} = {e};")
                }
                3 if !scope.vars.is_empty() => {
                    let name = self.pick(&scope.vars).clone();
                    format!("{name} = {};", self.expr(Hint::Int, scope, 0))
                }
                4 if scope.class.is_some() && !scope.fields.is_empty() => {
                    let f = self.pick(&scope.fields).clone();
                    format!("this.{f} = {};", self.expr(Hint::Int, scope, 0))
                }
                5 if depth < 2 => {
                    let cond = self.expr(Hint::Bool, scope, 1);
                    let mut body = String::new();
                    self.block(&mut scope.clone(), depth + 1, &mut body, test);
                    if self.chance(0.5) {
                        let mut other = String::new();
                        self.block(&mut scope.clone(), depth + 1, &mut other, test);
                        format!("if ({cond}) {{ {body} }} else {{ {other} }}")
                    } else {
                        format!("if ({cond}) {{ {body} }}")
                    }
                }
                6 if depth < 2 => {
                    // mostly counted loops; a few never end on their own
                    let name = self.fresh("w");
                    let bound = self.rng.random_range(0..6);
                    let mut inner = scope.clone();
                    inner.vars.push(name.clone());
                    let mut body = String::new();
                    self.block(&mut inner, depth + 1, &mut body, test);
                    let stmt = match self.rng.random_range(0..20) {
                        0 => format!("let {name} = 0; while ({name} >= 0) {{ {name} = {name} + 1; }}"),
                        1 => format!("let {name} = 0; while (true) {{ {body} }}"),
                        2 => format!("let {name} = 0; while ({}) {{ {body} }}", self.expr(Hint::Bool, scope, 1)),
                        _ => format!("let {name} = 0; while ({name} < {bound}) {{ {body} {name} = {name} + 1; }}"),
                    };
                    scope.vars.push(name);
                    stmt
                }
                7 | 8 if test => match self.rng.random_range(0..4) {
                    k @ (0 | 1) => {
                        let a = self.expr(Hint::Any, scope, 1);
                        let b = self.expr(Hint::Any, scope, 1);
                        let which = if k == 0 { "assertEquals" } else { "assertNotEquals" };
                        format!("{which}({a}, {b});")
                    }
                    k => {
                        let a = self.expr(Hint::Bool, scope, 1);
                        let which = if k == 2 { "assertTrue" } else { "assertFalse" };
                        format!("{which}({a});")
                    }
                },
                8 if scope.class.is_some() => format!("return {};", self.expr(Hint::Int, scope, 0)),
                9 | 10 => match self.call(scope, 0) {
                    Some(call) => format!("{call};"),
                    None => format!("{};", self.expr(Hint::Any, scope, 0)),
                },
                _ => format!("{};", self.expr(Hint::Any, scope, 0)),
            };
            out.push_str(&stmt);
            out.push(' ');
        }
    }
}

/// Generates a program (1–3 classes) and one test from `seed`.
pub fn generate(seed: u64, node_limit: usize) -> Generated {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let class_count = rng.random_range(1..=3);
    let mut classes = Vec::new();
    for c in 0..class_count {
        let fields = (0..rng.random_range(0..=2)).map(|i| format!("f{i}")).collect();
        let init_params = rng.random_range(0..=2);
        let methods = (0..rng.random_range(1..=3)).map(|i| (format!("m{i}"), rng.random_range(0..=2))).collect();
        classes.push(ClassShape { name: format!("C{c}"), fields, init_params, methods });
    }
    let mut g = Gen { rng, classes, nodes: 0, limit: node_limit, names: 0 };
    let mut source = String::new();
    for i in 0..g.classes.len() {
        let name = g.classes[i].name.clone();
        let fields = g.classes[i].fields.clone();
        source.push_str(&format!("class {name} {{ "));
        for f in &fields {
            source.push_str(&format!("field {f}; "));
        }
        let mut methods: Vec<(String, usize)> = vec![("init".into(), g.classes[i].init_params)];
        methods.extend(g.classes[i].methods.clone());
        for (m, n) in methods {
            let params: Vec<String> = (0..n).map(|p| format!("p{p}")).collect();
            let mut scope = Scope { vars: params.clone(), class: Some(i), fields: fields.clone(), ..Scope::default() };
            let mut body = String::new();
            if m == "init" {
                for f in &fields {
                    body.push_str(&format!("this.{f} = {}; ", params.first().map_or("0", String::as_str)));
                }
                // constructors stay short so objects usually come into being
                if g.chance(0.3) {
                    g.block(&mut scope, 1, &mut body, false);
                }
            } else {
                g.block(&mut scope, 0, &mut body, false);
                if g.chance(0.9) {
                    let e = g.expr(Hint::Int, &scope, 1);
                    body.push_str(&format!("return {e}; "));
                }
            }
            source.push_str(&format!("fn {m}({}) {{ {body}}} ", params.join(", ")));
        }
        source.push_str("}\n");
    }
    // the test gets a node budget of its own so it is never starved by the classes
    g.nodes = 0;
    let mut scope = Scope::default();
    let mut body = String::new();
    for c in 0..g.classes.len() {
        if g.chance(0.8) {
            let obj = format!("o{c}");
            let ctor = g.construct(c, &scope, 0);
            body.push_str(&format!("let {obj} = {ctor}; "));
            scope.objects.push((obj, c));
        }
    }
    let prefix = body.len();
    while body.len() == prefix || g.chance(0.2) {
        g.block(&mut scope, 0, &mut body, true);
    }
    Generated { source, test: format!("test t {{ {body}}}") }
}
