//! Scalar expressions over the four chart coordinates `x0..x3`.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | 'x0' | 'x1' | 'x2' | 'x3' | func '(' expr ')' | '(' expr ')'
//! func    := exp | ln | sin | cos | sinh | cosh | sqrt
//! number  := digits ['.' digits] [('e' | 'E') ['+' | '-'] digits]
//! ```
//!
//! `^` is right associative and binds tighter than unary minus, so `-x0^2`
//! is `-(x0^2)` and `x0^-2` is `x0^(-2)`. Exponents that contain no
//! coordinate are folded to a constant; any other exponent `f^g` is
//! rewritten as `exp(g*ln(f))`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Exp,
    Ln,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Sqrt,
}

impl UnaryOp {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => UnaryOp::Exp,
            "ln" => UnaryOp::Ln,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "sinh" => UnaryOp::Sinh,
            "cosh" => UnaryOp::Cosh,
            "sqrt" => UnaryOp::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Sinh => "sinh",
            UnaryOp::Cosh => "cosh",
            UnaryOp::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Expression tree. Coordinates are indices into a 4-point.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarExpr {
    Const(f64),
    Coord(usize),
    Unary(UnaryOp, Box<ScalarExpr>),
    Binary(BinaryOp, Box<ScalarExpr>, Box<ScalarExpr>),
    /// Power with a constant exponent.
    Pow(Box<ScalarExpr>, f64),
}

impl ScalarExpr {
    pub fn constant(value: f64) -> Self {
        ScalarExpr::Const(value)
    }

    pub fn coord(index: usize) -> Result<Self> {
        if index < 4 {
            Ok(ScalarExpr::Coord(index))
        } else {
            Err(Error::Index(format!(
                "coordinate index {index} outside 0..3"
            )))
        }
    }

    pub fn zero() -> Self {
        ScalarExpr::Const(0.0)
    }

    pub fn unary(op: UnaryOp, arg: ScalarExpr) -> Self {
        ScalarExpr::Unary(op, Box::new(arg))
    }

    pub fn binary(op: BinaryOp, lhs: ScalarExpr, rhs: ScalarExpr) -> Self {
        ScalarExpr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn powf(base: ScalarExpr, exponent: f64) -> Self {
        ScalarExpr::Pow(Box::new(base), exponent)
    }

    pub fn add(self, rhs: ScalarExpr) -> Self {
        Self::binary(BinaryOp::Add, self, rhs)
    }

    pub fn sub(self, rhs: ScalarExpr) -> Self {
        Self::binary(BinaryOp::Sub, self, rhs)
    }

    pub fn mul(self, rhs: ScalarExpr) -> Self {
        Self::binary(BinaryOp::Mul, self, rhs)
    }

    pub fn div(self, rhs: ScalarExpr) -> Self {
        Self::binary(BinaryOp::Div, self, rhs)
    }

    /// True when the expression is the literal constant zero.
    pub fn is_zero(&self) -> bool {
        matches!(self, ScalarExpr::Const(c) if *c == 0.0)
    }

    pub fn depends_on_coordinates(&self) -> bool {
        match self {
            ScalarExpr::Const(_) => false,
            ScalarExpr::Coord(_) => true,
            ScalarExpr::Unary(_, a) | ScalarExpr::Pow(a, _) => a.depends_on_coordinates(),
            ScalarExpr::Binary(_, a, b) => a.depends_on_coordinates() || b.depends_on_coordinates(),
        }
    }

    /// Plain value evaluation. Shares no code with the jet evaluator.
    pub fn eval(&self, p: &[f64; 4]) -> Result<f64> {
        Ok(match self {
            ScalarExpr::Const(c) => *c,
            ScalarExpr::Coord(i) => p[*i],
            ScalarExpr::Unary(op, a) => {
                let x = a.eval(p)?;
                match op {
                    UnaryOp::Neg => -x,
                    UnaryOp::Exp => x.exp(),
                    UnaryOp::Ln => {
                        if x <= 0.0 {
                            return Err(Error::Domain(format!("ln of non-positive value {x}")));
                        }
                        x.ln()
                    }
                    UnaryOp::Sin => x.sin(),
                    UnaryOp::Cos => x.cos(),
                    UnaryOp::Sinh => x.sinh(),
                    UnaryOp::Cosh => x.cosh(),
                    UnaryOp::Sqrt => {
                        if x <= 0.0 {
                            return Err(Error::Domain(format!("sqrt of non-positive value {x}")));
                        }
                        x.sqrt()
                    }
                }
            }
            ScalarExpr::Binary(op, a, b) => {
                let (x, y) = (a.eval(p)?, b.eval(p)?);
                match op {
                    BinaryOp::Add => x + y,
                    BinaryOp::Sub => x - y,
                    BinaryOp::Mul => x * y,
                    BinaryOp::Div => {
                        if y == 0.0 {
                            return Err(Error::Domain("division by zero".into()));
                        }
                        x / y
                    }
                }
            }
            ScalarExpr::Pow(a, c) => {
                let x = a.eval(p)?;
                check_pow_domain(x, *c)?;
                if let Some(n) = integer_exponent(*c) {
                    x.powi(n)
                } else {
                    x.powf(*c)
                }
            }
        })
    }
}

pub(crate) fn integer_exponent(c: f64) -> Option<i32> {
    if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 {
        Some(c as i32)
    } else {
        None
    }
}

pub(crate) fn check_pow_domain(x: f64, c: f64) -> Result<()> {
    match integer_exponent(c) {
        Some(n) if n < 0 && x == 0.0 => {
            Err(Error::Domain("zero raised to a negative power".into()))
        }
        Some(_) => Ok(()),
        None if x <= 0.0 => Err(Error::Domain(format!(
            "non-positive base {x} raised to non-integer power {c}"
        ))),
        None => Ok(()),
    }
}

fn fmt_number(f: &mut fmt::Formatter<'_>, value: f64) -> fmt::Result {
    if value < 0.0 || (value == 0.0 && value.is_sign_negative()) {
        write!(f, "(-{:?})", -value)
    } else {
        write!(f, "{value:?}")
    }
}

/// Fully parenthesized output that reparses to an identical tree.
impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarExpr::Const(c) => fmt_number(f, *c),
            ScalarExpr::Coord(i) => write!(f, "x{i}"),
            ScalarExpr::Unary(UnaryOp::Neg, a) if matches!(**a, ScalarExpr::Const(_)) => {
                write!(f, "(-({a}))")
            }
            ScalarExpr::Unary(UnaryOp::Neg, a) => write!(f, "(-{a})"),
            ScalarExpr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            ScalarExpr::Binary(op, a, b) => {
                let sym = match op {
                    BinaryOp::Add => '+',
                    BinaryOp::Sub => '-',
                    BinaryOp::Mul => '*',
                    BinaryOp::Div => '/',
                };
                write!(f, "({a} {sym} {b})")
            }
            ScalarExpr::Pow(a, c) => {
                write!(f, "({a})^")?;
                if *c < 0.0 {
                    fmt_number(f, *c)
                } else {
                    write!(f, "({c:?})")
                }
            }
        }
    }
}

impl FromStr for ScalarExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_expr(s)
    }
}

/// Parses the metric-file expression grammar.
pub fn parse_expr(text: &str) -> Result<ScalarExpr> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let expr = parser.expr()?;
    if let Some(tok) = parser.peek() {
        return Err(Error::parse(tok.offset, format!("unexpected {}", tok.kind)));
    }
    Ok(expr)
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Number(v) => write!(f, "number {v}"),
            TokenKind::Ident(s) => write!(f, "identifier '{s}'"),
            TokenKind::Op(c) => write!(f, "operator '{c}'"),
            TokenKind::LParen => f.write_str("'('"),
            TokenKind::RParen => f.write_str("')'"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                tokens.push(Token {
                    kind: TokenKind::Op(c as char),
                    offset: start,
                });
                i += 1;
            }
            b'(' => {
                tokens.push(Token {
                    kind: TokenKind::LParen,
                    offset: start,
                });
                i += 1;
            }
            b')' => {
                tokens.push(Token {
                    kind: TokenKind::RParen,
                    offset: start,
                });
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lexeme = &text[start..i];
                let value: f64 = lexeme
                    .parse()
                    .map_err(|_| Error::parse(start, format!("malformed number '{lexeme}'")))?;
                tokens.push(Token {
                    kind: TokenKind::Number(value),
                    offset: start,
                });
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(text[start..i].to_string()),
                    offset: start,
                });
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(Error::parse(start, format!("unexpected character '{ch}'")));
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_op(&self) -> Option<char> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Op(c),
                ..
            }) => Some(*c),
            _ => None,
        }
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn expr(&mut self) -> Result<ScalarExpr> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if op == '+' {
                BinaryOp::Add
            } else {
                BinaryOp::Sub
            };
            lhs = ScalarExpr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<ScalarExpr> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if op == '*' {
                BinaryOp::Mul
            } else {
                BinaryOp::Div
            };
            lhs = ScalarExpr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ScalarExpr> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            let literal = matches!(
                self.peek(),
                Some(Token {
                    kind: TokenKind::Number(_),
                    ..
                })
            );
            let inner = self.unary()?;
            // `-2` is a literal, `-(2)` a negation
            return Ok(match inner {
                ScalarExpr::Const(c) if literal => ScalarExpr::Const(-c),
                other => ScalarExpr::unary(UnaryOp::Neg, other),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<ScalarExpr> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exponent = self.unary()?;
            if exponent.depends_on_coordinates() {
                let log = ScalarExpr::unary(UnaryOp::Ln, base);
                return Ok(ScalarExpr::unary(UnaryOp::Exp, exponent.mul(log)));
            }
            let value = exponent.eval(&[0.0; 4]).map_err(|e| match e {
                Error::Domain(msg) => {
                    Error::parse(self.offset(), format!("constant exponent: {msg}"))
                }
                other => other,
            })?;
            return Ok(ScalarExpr::powf(base, value));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ScalarExpr> {
        let offset = self.offset();
        let Some(tok) = self.peek().cloned() else {
            return Err(Error::parse(offset, "unexpected end of input"));
        };
        self.pos += 1;
        match tok.kind {
            TokenKind::Number(v) => Ok(ScalarExpr::Const(v)),
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                if let Some(index) = coordinate_index(&name) {
                    return Ok(ScalarExpr::Coord(index));
                }
                let Some(op) = UnaryOp::from_name(&name) else {
                    return Err(Error::parse(
                        tok.offset,
                        format!("unknown identifier '{name}'"),
                    ));
                };
                match self.peek() {
                    Some(Token {
                        kind: TokenKind::LParen,
                        ..
                    }) => self.pos += 1,
                    _ => {
                        return Err(Error::parse(
                            self.offset(),
                            format!("expected '(' after '{name}'"),
                        ))
                    }
                }
                let arg = self.expr()?;
                self.expect_rparen()?;
                Ok(ScalarExpr::unary(op, arg))
            }
            kind => Err(Error::parse(tok.offset, format!("unexpected {kind}"))),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::RParen,
                ..
            }) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(Error::parse(self.offset(), "expected ')'")),
        }
    }
}

fn coordinate_index(name: &str) -> Option<usize> {
    match name {
        "x0" => Some(0),
        "x1" => Some(1),
        "x2" => Some(2),
        "x3" => Some(3),
        _ => None,
    }
}
