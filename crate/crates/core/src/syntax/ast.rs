use serde::{Deserialize, Serialize};
use std::fmt;

/// Start position of a node, 1-based.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        debug_assert!(line >= 1 && col >= 1);
        Span { line, col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Identity of an executable node. Assigned densely in pre-order at parse time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SiteId(pub u32);

impl SiteId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Site {
    pub id: SiteId,
    pub span: Span,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    /// Path used when reporting per-line coverage.
    pub file: String,
    pub classes: Vec<ClassDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: String,
    pub span: Span,
    pub fields: Vec<String>,
    pub methods: Vec<MethodDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MethodDecl {
    pub name: String,
    pub span: Span,
    pub params: Vec<String>,
    pub body: Block,
}

/// Statement list plus line comments anchored to statement positions.
///
/// A comment with `index == stmts.len()` trails the block.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub comments: Vec<Comment>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub index: usize,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub site: Site,
    pub kind: StmtKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Let { name: String, value: Expr },
    Assign { name: String, value: Expr },
    SetField { field: String, value: Expr },
    Expr(Expr),
    If { cond: Expr, then_block: Block, else_block: Option<Block> },
    While { cond: Expr, body: Block },
    Return(Option<Expr>),
    Assert { kind: AssertKind, args: Vec<Expr> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AssertKind {
    #[serde(rename = "assertEquals")]
    Equals,
    #[serde(rename = "assertNotEquals")]
    NotEquals,
    #[serde(rename = "assertTrue")]
    True,
    #[serde(rename = "assertFalse")]
    False,
}

impl AssertKind {
    pub fn keyword(self) -> &'static str {
        match self {
            AssertKind::Equals => "assertEquals",
            AssertKind::NotEquals => "assertNotEquals",
            AssertKind::True => "assertTrue",
            AssertKind::False => "assertFalse",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Some(match s {
            "assertEquals" => AssertKind::Equals,
            "assertNotEquals" => AssertKind::NotEquals,
            "assertTrue" => AssertKind::True,
            "assertFalse" => AssertKind::False,
            _ => return None,
        })
    }

    pub fn arity(self) -> usize {
        match self {
            AssertKind::Equals | AssertKind::NotEquals => 2,
            AssertKind::True | AssertKind::False => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub site: Site,
    pub kind: ExprKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Int(i64),
    Str(String),
    Bool(bool),
    Null,
    Var(String),
    This,
    /// `this.name`
    Field(String),
    New { class: String, args: Vec<Expr> },
    Call { receiver: Box<Expr>, method: String, args: Vec<Expr> },
    Unary { op: UnaryOp, operand: Box<Expr> },
    Binary { op: BinaryOp, lhs: Box<Expr>, rhs: Box<Expr> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl BinaryOp {
    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Eq | BinaryOp::Ne => 3,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 4,
            BinaryOp::Add | BinaryOp::Sub => 5,
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem => 6,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Or => "||",
            BinaryOp::And => "&&",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Rem => "%",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TestSuite {
    pub path: String,
    pub tests: Vec<TestCase>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestCase {
    pub name: String,
    pub span: Span,
    pub body: Block,
}

impl Expr {
    /// Expression with a placeholder site, for nodes synthesized outside the parser.
    pub fn synthetic(kind: ExprKind) -> Self {
        Expr { site: Site::default(), kind }
    }

    pub fn is_literal(&self) -> bool {
        matches!(
            self.kind,
            ExprKind::Int(_) | ExprKind::Str(_) | ExprKind::Bool(_) | ExprKind::Null
        )
    }

    /// Direct children in evaluation (and site-numbering) order.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::New { args, .. } => args.iter().collect(),
            ExprKind::Call { receiver, args, .. } => {
                std::iter::once(receiver.as_ref()).chain(args.iter()).collect()
            }
            ExprKind::Unary { operand, .. } => vec![operand],
            ExprKind::Binary { lhs, rhs, .. } => vec![lhs, rhs],
            _ => Vec::new(),
        }
    }

    fn children_mut(&mut self) -> Vec<&mut Expr> {
        match &mut self.kind {
            ExprKind::New { args, .. } => args.iter_mut().collect(),
            ExprKind::Call { receiver, args, .. } => {
                std::iter::once(receiver.as_mut()).chain(args.iter_mut()).collect()
            }
            ExprKind::Unary { operand, .. } => vec![operand.as_mut()],
            ExprKind::Binary { lhs, rhs, .. } => vec![lhs.as_mut(), rhs.as_mut()],
            _ => Vec::new(),
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        for child in self.children() {
            child.walk(f);
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Expr)) {
        f(self);
        for child in self.children_mut() {
            child.walk_mut(f);
        }
    }

    pub fn mentions_var(&self, name: &str) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if matches!(&e.kind, ExprKind::Var(v) if v == name) {
                found = true;
            }
        });
        found
    }
}

impl Stmt {
    pub fn synthetic(kind: StmtKind) -> Self {
        Stmt { site: Site::default(), kind }
    }

    /// Expressions directly owned by this statement, in evaluation order.
    pub fn exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::Let { value, .. }
            | StmtKind::Assign { value, .. }
            | StmtKind::SetField { value, .. }
            | StmtKind::Expr(value) => vec![value],
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => vec![cond],
            StmtKind::Return(value) => value.iter().collect(),
            StmtKind::Assert { args, .. } => args.iter().collect(),
        }
    }

    fn exprs_mut(&mut self) -> Vec<&mut Expr> {
        match &mut self.kind {
            StmtKind::Let { value, .. }
            | StmtKind::Assign { value, .. }
            | StmtKind::SetField { value, .. }
            | StmtKind::Expr(value) => vec![value],
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => vec![cond],
            StmtKind::Return(value) => value.iter_mut().collect(),
            StmtKind::Assert { args, .. } => args.iter_mut().collect(),
        }
    }

    pub fn blocks(&self) -> Vec<&Block> {
        match &self.kind {
            StmtKind::If { then_block, else_block, .. } => {
                std::iter::once(then_block).chain(else_block.iter()).collect()
            }
            StmtKind::While { body, .. } => vec![body],
            _ => Vec::new(),
        }
    }

    fn blocks_mut(&mut self) -> Vec<&mut Block> {
        match &mut self.kind {
            StmtKind::If { then_block, else_block, .. } => {
                std::iter::once(then_block).chain(else_block.iter_mut()).collect()
            }
            StmtKind::While { body, .. } => vec![body],
            _ => Vec::new(),
        }
    }

    /// Pre-order traversal over every expression reachable from this statement,
    /// including nested blocks.
    pub fn walk_exprs<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        for e in self.exprs() {
            e.walk(f);
        }
        for b in self.blocks() {
            for s in &b.stmts {
                s.walk_exprs(f);
            }
        }
    }

    pub fn walk_exprs_mut(&mut self, f: &mut impl FnMut(&mut Expr)) {
        for e in self.exprs_mut() {
            e.walk_mut(f);
        }
        for b in self.blocks_mut() {
            for s in &mut b.stmts {
                s.walk_exprs_mut(f);
            }
        }
    }

    pub fn is_assertion(&self) -> bool {
        matches!(self.kind, StmtKind::Assert { .. })
    }

    pub fn mentions_var(&self, name: &str) -> bool {
        let direct = match &self.kind {
            StmtKind::Let { name: n, .. } | StmtKind::Assign { name: n, .. } => n == name,
            _ => false,
        };
        let mut found = direct;
        self.walk_exprs(&mut |e| {
            if matches!(&e.kind, ExprKind::Var(v) if v == name) {
                found = true;
            }
        });
        found
    }
}

impl Block {
    pub fn new(stmts: Vec<Stmt>) -> Self {
        Block { stmts, comments: Vec::new() }
    }

    /// Every site in this block, statements before their expressions, in pre-order.
    pub fn visit_sites(&self, f: &mut impl FnMut(Site)) {
        for stmt in &self.stmts {
            visit_stmt_sites(stmt, f);
        }
    }

    pub fn visit_sites_mut(&mut self, f: &mut impl FnMut(&mut Site)) {
        for stmt in &mut self.stmts {
            visit_stmt_sites_mut(stmt, f);
        }
    }

    pub fn comments_at(&self, index: usize) -> impl Iterator<Item = &Comment> {
        self.comments.iter().filter(move |c| c.index == index)
    }

    /// Removes the statement at `index` along with its comments; later comments shift up.
    pub fn remove_stmt(&mut self, index: usize) -> Stmt {
        let stmt = self.stmts.remove(index);
        self.comments.retain(|c| c.index != index);
        for c in &mut self.comments {
            if c.index > index {
                c.index -= 1;
            }
        }
        stmt
    }

    /// Inserts a statement at `index`; comments anchored at or after it shift down.
    pub fn insert_stmt(&mut self, index: usize, stmt: Stmt) {
        self.stmts.insert(index, stmt);
        for c in &mut self.comments {
            if c.index >= index {
                c.index += 1;
            }
        }
    }

    pub fn attach_comment(&mut self, index: usize, text: impl Into<String>) {
        let comment = Comment { index, text: text.into() };
        // keep comments ordered by anchor; stable for equal anchors
        let pos = self.comments.iter().position(|c| c.index > index).unwrap_or(self.comments.len());
        self.comments.insert(pos, comment);
    }
}

fn visit_stmt_sites(stmt: &Stmt, f: &mut impl FnMut(Site)) {
    f(stmt.site);
    for e in stmt.exprs() {
        e.walk(&mut |e| f(e.site));
    }
    for b in stmt.blocks() {
        b.visit_sites(f);
    }
}

fn visit_stmt_sites_mut(stmt: &mut Stmt, f: &mut impl FnMut(&mut Site)) {
    f(&mut stmt.site);
    for e in stmt.exprs_mut() {
        e.walk_mut(&mut |e| f(&mut e.site));
    }
    for b in stmt.blocks_mut() {
        b.visit_sites_mut(f);
    }
}

impl Program {
    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.classes.iter().find(|c| c.name == name)
    }

    /// Number of sites; ids are dense so this is also `max id + 1`.
    pub fn site_count(&self) -> usize {
        let mut n = 0;
        self.visit_sites(&mut |_| n += 1);
        n
    }

    pub fn visit_sites(&self, f: &mut impl FnMut(Site)) {
        for class in &self.classes {
            for method in &class.methods {
                method.body.visit_sites(f);
            }
        }
    }

    /// Copy with every site zeroed, for structural comparison.
    pub fn erased(&self) -> Program {
        let mut p = self.clone();
        p.file.clear();
        for class in &mut p.classes {
            class.span = Span::default();
            for method in &mut class.methods {
                method.span = Span::default();
                method.body.visit_sites_mut(&mut |s| *s = Site::default());
            }
        }
        p
    }
}

impl ClassDecl {
    pub fn method(&self, name: &str) -> Option<&MethodDecl> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn constructor(&self) -> Option<&MethodDecl> {
        self.method("init")
    }

    pub fn has_field(&self, name: &str) -> bool {
        self.fields.iter().any(|f| f == name)
    }
}

impl TestSuite {
    pub fn test(&self, name: &str) -> Option<&TestCase> {
        self.tests.iter().find(|t| t.name == name)
    }

    pub fn erased(&self) -> TestSuite {
        TestSuite {
            path: String::new(),
            tests: self.tests.iter().map(TestCase::erased).collect(),
        }
    }
}

impl TestCase {
    pub fn erased(&self) -> TestCase {
        let mut t = self.clone();
        t.span = Span::default();
        t.body.visit_sites_mut(&mut |s| *s = Site::default());
        t
    }

    pub fn assertion_count(&self) -> usize {
        fn count(block: &Block) -> usize {
            block
                .stmts
                .iter()
                .map(|s| usize::from(s.is_assertion()) + s.blocks().into_iter().map(count).sum::<usize>())
                .sum()
        }
        count(&self.body)
    }
}
