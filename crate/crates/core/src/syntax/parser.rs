use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::{NameKind, ParseError};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Source,
    Tests,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    mode: Mode,
}

/// Parses a production (`.mts`) file.
pub fn parse_source(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(text, Mode::Source)?;
    let mut classes: Vec<ClassDecl> = Vec::new();
    while p.peek() != &Tok::Eof {
        let class = p.class_decl()?;
        if classes.iter().any(|c| c.name == class.name) {
            return Err(ParseError::duplicate(NameKind::Class, &class.name, class.span));
        }
        classes.push(class);
    }
    let mut program = Program { file: String::new(), classes };
    let mut next = 0u32;
    for class in &mut program.classes {
        for method in &mut class.methods {
            method.body.visit_sites_mut(&mut |s| {
                s.id = SiteId(next);
                next += 1;
            });
        }
    }
    Ok(program)
}

/// Parses a test (`.mtt`) file.
pub fn parse_tests(text: &str) -> Result<TestSuite, ParseError> {
    let mut p = Parser::new(text, Mode::Tests)?;
    let mut tests: Vec<TestCase> = Vec::new();
    while p.peek() != &Tok::Eof {
        let span = p.span();
        match p.peek() {
            Tok::Ident(w) if w == "test" => {
                p.bump();
            }
            other => return Err(ParseError::syntax(span, format!("expected `test`, found {}", other.describe()))),
        }
        let (name, name_span) = p.ident()?;
        if tests.iter().any(|t| t.name == name) {
            return Err(ParseError::duplicate(NameKind::Test, &name, name_span));
        }
        let body = p.block()?;
        tests.push(TestCase { name, span, body });
    }
    let mut next = 0u32;
    for test in &mut tests {
        test.body.visit_sites_mut(&mut |s| {
            s.id = SiteId(next);
            next += 1;
        });
    }
    Ok(TestSuite { path: String::new(), tests })
}

/// Parses a file expected to hold exactly one test.
pub fn parse_test_case(text: &str) -> Result<TestCase, ParseError> {
    let suite = parse_tests(text)?;
    let n = suite.tests.len();
    let mut tests = suite.tests.into_iter();
    match (tests.next(), n) {
        (Some(t), 1) => Ok(t),
        _ => Err(ParseError::syntax(Span::new(1, 1), format!("expected exactly one test, found {n}"))),
    }
}

impl Parser {
    fn new(text: &str, mode: Mode) -> Result<Self, ParseError> {
        Ok(Parser { toks: tokenize(text)?, pos: 0, mode })
    }

    /// Comments outside statement blocks carry no anchor and are dropped.
    fn skip_comments(&mut self) {
        while matches!(self.toks[self.pos].tok, Tok::Comment(_)) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> &Tok {
        self.skip_comments();
        &self.toks[self.pos].tok
    }

    fn peek_at(&mut self, ahead: usize) -> &Tok {
        self.skip_comments();
        let mut i = self.pos;
        let mut seen = 0;
        loop {
            if i >= self.toks.len() - 1 {
                return &self.toks[self.toks.len() - 1].tok;
            }
            if !matches!(self.toks[i].tok, Tok::Comment(_)) {
                if seen == ahead {
                    return &self.toks[i].tok;
                }
                seen += 1;
            }
            i += 1;
        }
    }

    fn span(&mut self) -> Span {
        self.skip_comments();
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        self.skip_comments();
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Span, ParseError> {
        let span = self.span();
        if *self.peek() == want {
            self.bump();
            Ok(span)
        } else {
            let found = self.peek().describe();
            Err(ParseError::syntax(span, format!("expected {}, found {found}", want.describe())))
        }
    }

    fn eat(&mut self, want: &Tok) -> bool {
        if self.peek() == want {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<(String, Span), ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok((name, span))
            }
            other => Err(ParseError::syntax(span, format!("expected identifier, found {}", other.describe()))),
        }
    }

    fn class_decl(&mut self) -> Result<ClassDecl, ParseError> {
        let span = self.expect(Tok::Class)?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut fields: Vec<String> = Vec::new();
        let mut methods: Vec<MethodDecl> = Vec::new();
        loop {
            let at = self.span();
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Field => {
                    self.bump();
                    let (field, fspan) = self.ident()?;
                    if fields.contains(&field) {
                        return Err(ParseError::duplicate(NameKind::Field, &field, fspan));
                    }
                    self.expect(Tok::Semi)?;
                    fields.push(field);
                }
                Tok::Fn => {
                    let method = self.method_decl()?;
                    if methods.iter().any(|m| m.name == method.name) {
                        return Err(ParseError::duplicate(NameKind::Method, &method.name, method.span));
                    }
                    methods.push(method);
                }
                other => {
                    let found = other.describe();
                    return Err(ParseError::syntax(at, format!("expected `field`, `fn` or `}}`, found {found}")));
                }
            }
        }
        Ok(ClassDecl { name, span, fields, methods })
    }

    fn method_decl(&mut self) -> Result<MethodDecl, ParseError> {
        let span = self.expect(Tok::Fn)?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut params: Vec<String> = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                let (param, pspan) = self.ident()?;
                if params.contains(&param) {
                    return Err(ParseError::duplicate(NameKind::Parameter, &param, pspan));
                }
                params.push(param);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        let body = self.block()?;
        Ok(MethodDecl { name, span, params, body })
    }

    fn block(&mut self) -> Result<Block, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut block = Block::default();
        loop {
            // comments directly in a block anchor to the statement that follows
            while let Tok::Comment(text) = &self.toks[self.pos].tok {
                block.comments.push(Comment { index: block.stmts.len(), text: text.clone() });
                self.pos += 1;
            }
            if self.eat(&Tok::RBrace) {
                return Ok(block);
            }
            if *self.peek() == Tok::Eof {
                let span = self.span();
                return Err(ParseError::syntax(span, "expected `}`, found end of input"));
            }
            block.stmts.push(self.stmt()?);
        }
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::Let => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect(Tok::Assign)?;
                let value = self.expr()?;
                self.expect(Tok::Semi)?;
                StmtKind::Let { name, value }
            }
            Tok::If => {
                self.bump();
                self.expect(Tok::LParen)?;
                let cond = self.expr()?;
                self.expect(Tok::RParen)?;
                let then_block = self.block()?;
                // raw lookahead: a comment after `}` belongs to the next statement
                let else_block = if self.toks[self.pos].tok == Tok::Else {
                    self.pos += 1;
                    Some(self.block()?)
                } else {
                    None
                };
                StmtKind::If { cond, then_block, else_block }
            }
            Tok::While => {
                self.bump();
                self.expect(Tok::LParen)?;
                let cond = self.expr()?;
                self.expect(Tok::RParen)?;
                let body = self.block()?;
                StmtKind::While { cond, body }
            }
            Tok::Return => {
                self.bump();
                let value = if *self.peek() == Tok::Semi { None } else { Some(self.expr()?) };
                self.expect(Tok::Semi)?;
                StmtKind::Return(value)
            }
            Tok::This if *self.peek_at(1) == Tok::Dot && *self.peek_at(3) == Tok::Assign => {
                self.bump();
                self.bump();
                let (field, _) = self.ident()?;
                self.expect(Tok::Assign)?;
                let value = self.expr()?;
                self.expect(Tok::Semi)?;
                StmtKind::SetField { field, value }
            }
            Tok::Ident(name) if *self.peek_at(1) == Tok::Assign => {
                self.bump();
                self.bump();
                let value = self.expr()?;
                self.expect(Tok::Semi)?;
                StmtKind::Assign { name, value }
            }
            Tok::Ident(name)
                if self.mode == Mode::Tests
                    && *self.peek_at(1) == Tok::LParen
                    && AssertKind::from_keyword(&name).is_some() =>
            {
                let kind = AssertKind::from_keyword(&name).expect("checked above");
                self.bump();
                self.expect(Tok::LParen)?;
                let args = self.args()?;
                if args.len() != kind.arity() {
                    return Err(ParseError::syntax(
                        span,
                        format!("{} takes {} argument(s), found {}", kind.keyword(), kind.arity(), args.len()),
                    ));
                }
                self.expect(Tok::Semi)?;
                StmtKind::Assert { kind, args }
            }
            _ => {
                let value = self.expr()?;
                self.expect(Tok::Semi)?;
                StmtKind::Expr(value)
            }
        };
        Ok(Stmt { site: Site { id: SiteId(0), span }, kind })
    }

    /// Arguments after an already consumed `(`, through the closing `)`.
    fn args(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut args = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat(&Tok::RParen) {
                return Ok(args);
            }
            self.expect(Tok::Comma)?;
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.binary(1)
    }

    fn binary_op(&mut self) -> Option<BinaryOp> {
        Some(match self.peek() {
            Tok::OrOr => BinaryOp::Or,
            Tok::AndAnd => BinaryOp::And,
            Tok::EqEq => BinaryOp::Eq,
            Tok::NotEq => BinaryOp::Ne,
            Tok::Lt => BinaryOp::Lt,
            Tok::Le => BinaryOp::Le,
            Tok::Gt => BinaryOp::Gt,
            Tok::Ge => BinaryOp::Ge,
            Tok::Plus => BinaryOp::Add,
            Tok::Minus => BinaryOp::Sub,
            Tok::Star => BinaryOp::Mul,
            Tok::Slash => BinaryOp::Div,
            Tok::Percent => BinaryOp::Rem,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op().filter(|op| op.precedence() >= min_prec) {
            self.bump();
            let rhs = self.binary(op.precedence() + 1)?;
            let site = Site { id: SiteId(0), span: lhs.site.span };
            lhs = Expr { site, kind: ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) } };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        let op = match self.peek() {
            Tok::Bang => UnaryOp::Not,
            Tok::Minus => UnaryOp::Neg,
            _ => return self.postfix(),
        };
        self.bump();
        if op == UnaryOp::Neg {
            // `-` directly before an integer token is a negative literal
            if let Tok::Int(mag) = *self.peek() {
                self.bump();
                let value = -(mag as i128);
                let lit = Expr { site: Site { id: SiteId(0), span }, kind: ExprKind::Int(value as i64) };
                return self.postfix_from(lit);
            }
        }
        let operand = self.unary()?;
        Ok(Expr { site: Site { id: SiteId(0), span }, kind: ExprKind::Unary { op, operand: Box::new(operand) } })
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        self.postfix_from(base)
    }

    fn postfix_from(&mut self, mut base: Expr) -> Result<Expr, ParseError> {
        while *self.peek() == Tok::Dot {
            self.bump();
            let (method, mspan) = self.ident()?;
            if method == "init" {
                return Err(ParseError::syntax(mspan, "constructor `init` cannot be called directly"));
            }
            self.expect(Tok::LParen)?;
            let args = self.args()?;
            let site = Site { id: SiteId(0), span: base.site.span };
            base = Expr { site, kind: ExprKind::Call { receiver: Box::new(base), method, args } };
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        let site = Site { id: SiteId(0), span };
        let kind = match self.bump().tok {
            Tok::Int(mag) => match i64::try_from(mag) {
                Ok(v) => ExprKind::Int(v),
                Err(_) => return Err(ParseError::syntax(span, "integer literal out of 64-bit range")),
            },
            Tok::Str(s) => ExprKind::Str(s),
            Tok::True => ExprKind::Bool(true),
            Tok::False => ExprKind::Bool(false),
            Tok::Null => ExprKind::Null,
            Tok::Ident(name) => ExprKind::Var(name),
            Tok::This => {
                if *self.peek() == Tok::Dot && *self.peek_at(2) != Tok::LParen {
                    self.bump();
                    let (field, _) = self.ident()?;
                    ExprKind::Field(field)
                } else {
                    ExprKind::This
                }
            }
            Tok::New => {
                let (class, _) = self.ident()?;
                self.expect(Tok::LParen)?;
                ExprKind::New { class, args: self.args()? }
            }
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                return Ok(inner);
            }
            other => return Err(ParseError::syntax(span, format!("expected expression, found {}", other.describe()))),
        };
        Ok(Expr { site, kind })
    }
}
