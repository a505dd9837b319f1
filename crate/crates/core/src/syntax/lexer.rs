use super::ast::Span;
use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// Magnitude only; `9223372036854775808` is legal solely as the operand of unary minus.
    Int(u64),
    Str(String),
    Comment(String),
    Class,
    Field,
    Fn,
    Let,
    If,
    Else,
    While,
    Return,
    True,
    False,
    Null,
    New,
    This,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Dot,
    Assign,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Bang,
    AndAnd,
    OrOr,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::Comment(_) => "comment".to_string(),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Class => "class",
            Tok::Field => "field",
            Tok::Fn => "fn",
            Tok::Let => "let",
            Tok::If => "if",
            Tok::Else => "else",
            Tok::While => "while",
            Tok::Return => "return",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Null => "null",
            Tok::New => "new",
            Tok::This => "this",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Dot => ".",
            Tok::Assign => "=",
            Tok::EqEq => "==",
            Tok::NotEq => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::Bang => "!",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            _ => "",
        }
    }
}

pub const KEYWORDS: &[&str] = &[
    "class", "field", "fn", "let", "if", "else", "while", "return", "true", "false", "null", "new", "this",
];

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "class" => Tok::Class,
        "field" => Tok::Field,
        "fn" => Tok::Fn,
        "let" => Tok::Let,
        "if" => Tok::If,
        "else" => Tok::Else,
        "while" => Tok::While,
        "return" => Tok::Return,
        "true" => Tok::True,
        "false" => Tok::False,
        "null" => Tok::Null,
        "new" => Tok::New,
        "this" => Tok::This,
        _ => return None,
    })
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span(&self) -> Span {
        Span::new(self.line, self.col)
    }
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor { chars: text.chars().peekable(), line: 1, col: 1 };
    let mut out = Vec::new();
    loop {
        while cur.peek().is_some_and(char::is_whitespace) {
            cur.bump();
        }
        let span = cur.span();
        let Some(c) = cur.bump() else {
            out.push(Token { tok: Tok::Eof, span });
            return Ok(out);
        };
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '.' => Tok::Dot,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '%' => Tok::Percent,
            '/' => {
                if cur.peek() == Some('/') {
                    cur.bump();
                    let mut body = String::new();
                    while let Some(c) = cur.peek() {
                        if c == '\n' {
                            break;
                        }
                        body.push(c);
                        cur.bump();
                    }
                    Tok::Comment(body.trim().to_string())
                } else {
                    Tok::Slash
                }
            }
            '=' => pair(&mut cur, '=', Tok::EqEq, Tok::Assign),
            '!' => pair(&mut cur, '=', Tok::NotEq, Tok::Bang),
            '<' => pair(&mut cur, '=', Tok::Le, Tok::Lt),
            '>' => pair(&mut cur, '=', Tok::Ge, Tok::Gt),
            '&' => {
                if cur.bump() != Some('&') {
                    return Err(ParseError::syntax(span, "expected `&&`"));
                }
                Tok::AndAnd
            }
            '|' => {
                if cur.bump() != Some('|') {
                    return Err(ParseError::syntax(span, "expected `||`"));
                }
                Tok::OrOr
            }
            '"' => Tok::Str(string_body(&mut cur, span)?),
            c if c.is_ascii_digit() => {
                let mut digits = String::from(c);
                while let Some(d) = cur.peek().filter(char::is_ascii_digit) {
                    digits.push(d);
                    cur.bump();
                }
                if cur.peek().is_some_and(|c| c.is_alphabetic() || c == '_') {
                    return Err(ParseError::syntax(cur.span(), "identifier directly after number"));
                }
                match digits.parse::<u64>() {
                    Ok(v) if v <= 1u64 << 63 => Tok::Int(v),
                    _ => return Err(ParseError::syntax(span, "integer literal out of 64-bit range")),
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut word = String::from(c);
                while let Some(d) = cur.peek().filter(|c| c.is_alphanumeric() || *c == '_') {
                    word.push(d);
                    cur.bump();
                }
                keyword(&word).unwrap_or(Tok::Ident(word))
            }
            other => {
                return Err(ParseError::syntax(span, format!("unexpected character {other:?}")));
            }
        };
        out.push(Token { tok, span });
    }
}

fn pair(cur: &mut Cursor<'_>, next: char, yes: Tok, no: Tok) -> Tok {
    if cur.peek() == Some(next) {
        cur.bump();
        yes
    } else {
        no
    }
}

fn string_body(cur: &mut Cursor<'_>, start: Span) -> Result<String, ParseError> {
    let mut out = String::new();
    loop {
        let here = cur.span();
        match cur.bump() {
            None | Some('\n') => return Err(ParseError::syntax(start, "unterminated string literal")),
            Some('"') => return Ok(out),
            Some('\\') => match cur.bump() {
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some('"') => out.push('"'),
                Some('\\') => out.push('\\'),
                Some('u') => {
                    let unit = hex4(cur, here)?;
                    if (0xD800..0xDC00).contains(&unit) {
                        // high surrogate: must be followed by an escaped low surrogate
                        let low_at = cur.span();
                        if cur.bump() != Some('\\') || cur.bump() != Some('u') {
                            return Err(ParseError::syntax(low_at, "unpaired surrogate escape"));
                        }
                        let low = hex4(cur, low_at)?;
                        if !(0xDC00..0xE000).contains(&low) {
                            return Err(ParseError::syntax(low_at, "unpaired surrogate escape"));
                        }
                        let cp = 0x10000 + ((unit - 0xD800) << 10) + (low - 0xDC00);
                        out.push(char::from_u32(cp).expect("valid supplementary code point"));
                    } else {
                        match char::from_u32(unit) {
                            Some(c) => out.push(c),
                            None => return Err(ParseError::syntax(here, "unpaired surrogate escape")),
                        }
                    }
                }
                _ => return Err(ParseError::syntax(here, "unknown escape sequence")),
            },
            Some(c) => out.push(c),
        }
    }
}

fn hex4(cur: &mut Cursor<'_>, at: Span) -> Result<u32, ParseError> {
    let mut v = 0u32;
    for _ in 0..4 {
        let d = cur
            .bump()
            .and_then(|c| c.to_digit(16))
            .ok_or_else(|| ParseError::syntax(at, "expected four hex digits after \\u"))?;
        v = v * 16 + d;
    }
    Ok(v)
}

/// Canonical string literal, quotes included.
pub fn escape_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            ' '..='~' => out.push(c),
            _ => {
                let mut units = [0u16; 2];
                for unit in c.encode_utf16(&mut units) {
                    out.push_str(&format!("\\u{:04X}", unit));
                }
            }
        }
    }
    out.push('"');
    out
}
