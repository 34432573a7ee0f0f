//! Expression DSL for scalar functions of one real variable `x`.
//!
//! Grammar (whitespace insignificant between tokens, ASCII only):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := unary ('^' factor)?
//! unary   := '-' unary | primary
//! primary := number | 'x' | ident '(' args ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and unary minus binds tighter than the base of
//! `^`, so `-x^2` is `(-x)^2`.

use std::fmt;

use thiserror::Error;

/// Binary operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

/// The fixed set of callable builtins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Exp,
    Log,
    Sqrt,
    Abs,
    Tanh,
    Sinh,
    Atan,
    Min,
    Max,
    Pow,
}

impl Builtin {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Builtin::Exp,
            "log" => Builtin::Log,
            "sqrt" => Builtin::Sqrt,
            "abs" => Builtin::Abs,
            "tanh" => Builtin::Tanh,
            "sinh" => Builtin::Sinh,
            "atan" => Builtin::Atan,
            "min" => Builtin::Min,
            "max" => Builtin::Max,
            "pow" => Builtin::Pow,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Exp => "exp",
            Builtin::Log => "log",
            Builtin::Sqrt => "sqrt",
            Builtin::Abs => "abs",
            Builtin::Tanh => "tanh",
            Builtin::Sinh => "sinh",
            Builtin::Atan => "atan",
            Builtin::Min => "min",
            Builtin::Max => "max",
            Builtin::Pow => "pow",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Builtin::Min | Builtin::Max | Builtin::Pow => 2,
            _ => 1,
        }
    }
}

/// Parsed abstract syntax tree.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprNode {
    Const(f64),
    Var,
    Neg(Box<ExprNode>),
    Binary(BinOp, Box<ExprNode>, Box<ExprNode>),
    Call(Builtin, Vec<ExprNode>),
}

impl ExprNode {
    pub fn constant(value: f64) -> Self {
        ExprNode::Const(value)
    }

    pub fn binary(op: BinOp, lhs: ExprNode, rhs: ExprNode) -> Self {
        ExprNode::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// `slope * x`.
    pub fn linear(slope: f64) -> Self {
        Self::binary(BinOp::Mul, ExprNode::Const(slope), ExprNode::Var)
    }

    /// Evaluate at `x`. See [`eval_expr`].
    pub fn eval(&self, x: f64) -> Result<f64, DomainError> {
        eval_expr(self, x)
    }

    // Binding strength used by the printer: 1 = sum, 2 = product,
    // 3 = power, 4 = unary / primary.
    fn precedence(&self) -> u8 {
        match self {
            ExprNode::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            ExprNode::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            ExprNode::Binary(BinOp::Pow, ..) => 3,
            ExprNode::Const(_) | ExprNode::Var | ExprNode::Neg(_) | ExprNode::Call(..) => 4,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, node: &ExprNode, min_prec: u8) -> fmt::Result {
    if node.precedence() < min_prec {
        write!(f, "({node})")
    } else {
        write!(f, "{node}")
    }
}

/// Prints the tree with the fewest parentheses that re-parse to the same
/// structure. Constants are printed with the shortest round-trip
/// representation.
impl fmt::Display for ExprNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprNode::Const(c) => {
                let repr = format!("{c:?}");
                f.write_str(repr.strip_suffix(".0").unwrap_or(&repr))
            }
            ExprNode::Var => f.write_str("x"),
            ExprNode::Neg(child) => {
                f.write_str("-")?;
                write_child(f, child, 4)
            }
            ExprNode::Binary(op, lhs, rhs) => {
                let (left_min, right_min) = match op {
                    BinOp::Add | BinOp::Sub => (1, 2),
                    BinOp::Mul | BinOp::Div => (2, 3),
                    BinOp::Pow => (4, 3),
                };
                write_child(f, lhs, left_min)?;
                match op {
                    BinOp::Pow => f.write_str("^")?,
                    _ => write!(f, " {} ", op.symbol())?,
                }
                write_child(f, rhs, right_min)
            }
            ExprNode::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{arg}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at offset {offset}: {message} (expected {expected})")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain error at x = {x}: {message}")]
pub struct DomainError {
    pub x: f64,
    pub message: String,
}

impl DomainError {
    pub fn new(x: f64, message: impl Into<String>) -> Self {
        DomainError {
            x,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push((start, Tok::Op(c as char)));
                i += 1;
            }
            b'(' => {
                out.push((start, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((start, Tok::RParen));
                i += 1;
            }
            b',' => {
                out.push((start, Tok::Comma));
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
                let lit = &text[start..i];
                let value: f64 = lit.parse().map_err(|_| ParseError {
                    offset: start,
                    expected: "number".into(),
                    message: format!("malformed number literal `{lit}`"),
                })?;
                out.push((start, Tok::Num(value)));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
            }
            _ => {
                return Err(ParseError {
                    offset: start,
                    expected: "token".into(),
                    message: format!("unexpected character `{}`", text[start..].chars().next().unwrap_or('?')),
                })
            }
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError {
            offset: self.offset(),
            expected: expected.into(),
            message: format!("unexpected {}", self.peek().describe()),
        }
    }

    fn expr(&mut self) -> Result<ExprNode, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = ExprNode::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<ExprNode, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = ExprNode::binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<ExprNode, ParseError> {
        let base = self.unary()?;
        if let Tok::Op('^') = self.peek() {
            self.bump();
            let exponent = self.factor()?;
            return Ok(ExprNode::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<ExprNode, ParseError> {
        if let Tok::Op('-') = self.peek() {
            self.bump();
            return Ok(ExprNode::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<ExprNode, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(ExprNode::Const(v))
            }
            Tok::Ident(name) if name == "x" => {
                self.bump();
                Ok(ExprNode::Var)
            }
            Tok::Ident(name) => {
                let func = Builtin::from_name(&name).ok_or_else(|| ParseError {
                    offset,
                    expected: "`x` or a builtin function".into(),
                    message: format!("unknown identifier `{name}`"),
                })?;
                self.bump();
                if *self.peek() != Tok::LParen {
                    return Err(self.error("`(`"));
                }
                self.bump();
                let mut args = vec![self.expr()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.expr()?);
                }
                if *self.peek() != Tok::RParen {
                    return Err(self.error("`,` or `)`"));
                }
                self.bump();
                if args.len() != func.arity() {
                    return Err(ParseError {
                        offset,
                        expected: format!("{} argument(s)", func.arity()),
                        message: format!("`{}` called with {} argument(s)", func.name(), args.len()),
                    });
                }
                Ok(ExprNode::Call(func, args))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error("`)`"));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.error("primary")),
        }
    }
}

/// Parse `text` into an expression tree.
pub fn parse_expr(text: &str) -> Result<ExprNode, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError {
            offset: text.len(),
            expected: "primary".into(),
            message: "empty expression".into(),
        });
    }
    let mut parser = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    let node = parser.expr()?;
    if *parser.peek() != Tok::End {
        return Err(parser.error("operator or end of input"));
    }
    Ok(node)
}

fn finite(x: f64, value: f64, what: &str) -> Result<f64, DomainError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(DomainError::new(x, format!("{what} produced a non-finite value")))
    }
}

/// Evaluate `node` at `x`.
pub fn eval_expr(node: &ExprNode, x: f64) -> Result<f64, DomainError> {
    if !x.is_finite() {
        return Err(DomainError::new(x, "argument is not finite"));
    }
    eval_at(node, x)
}

fn eval_at(node: &ExprNode, x: f64) -> Result<f64, DomainError> {
    match node {
        ExprNode::Const(c) => Ok(*c),
        ExprNode::Var => Ok(x),
        ExprNode::Neg(child) => Ok(-eval_at(child, x)?),
        ExprNode::Binary(op, lhs, rhs) => {
            let a = eval_at(lhs, x)?;
            let b = eval_at(rhs, x)?;
            let value = match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a / b,
                BinOp::Pow => a.powf(b),
            };
            finite(x, value, op.symbol())
        }
        ExprNode::Call(func, args) => {
            let a = eval_at(&args[0], x)?;
            let value = match func {
                Builtin::Exp => a.exp(),
                Builtin::Log => {
                    if a <= 0.0 {
                        return Err(DomainError::new(x, format!("log of non-positive value {a}")));
                    }
                    a.ln()
                }
                Builtin::Sqrt => {
                    if a < 0.0 {
                        return Err(DomainError::new(x, format!("sqrt of negative value {a}")));
                    }
                    a.sqrt()
                }
                Builtin::Abs => a.abs(),
                Builtin::Tanh => a.tanh(),
                Builtin::Sinh => a.sinh(),
                Builtin::Atan => a.atan(),
                Builtin::Min => a.min(eval_at(&args[1], x)?),
                Builtin::Max => a.max(eval_at(&args[1], x)?),
                Builtin::Pow => a.powf(eval_at(&args[1], x)?),
            };
            finite(x, value, func.name())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> ExprNode {
        ExprNode::Const(v)
    }

    #[test]
    fn parses_variable() {
        assert_eq!(parse_expr("x").unwrap(), ExprNode::Var);
    }

    #[test]
    fn parses_power() {
        assert_eq!(
            parse_expr("x^2").unwrap(),
            ExprNode::binary(BinOp::Pow, ExprNode::Var, c(2.0))
        );
    }

    #[test]
    fn dangling_operator_reports_offset() {
        let err = parse_expr("x +").unwrap_err();
        assert_eq!(err.offset, 3);
        assert_eq!(err.expected, "primary");
    }

    #[test]
    fn power_is_right_associative() {
        let node = parse_expr("2^3^2").unwrap();
        assert_eq!(
            node,
            ExprNode::binary(BinOp::Pow, c(2.0), ExprNode::binary(BinOp::Pow, c(3.0), c(2.0)))
        );
        assert_eq!(node.eval(0.0).unwrap(), 512.0);
    }

    #[test]
    fn unary_minus_binds_tighter_than_power_base() {
        let node = parse_expr("-x^2").unwrap();
        assert_eq!(
            node,
            ExprNode::binary(BinOp::Pow, ExprNode::Neg(Box::new(ExprNode::Var)), c(2.0))
        );
        assert_eq!(node.eval(3.0).unwrap(), 9.0);
        assert_eq!(parse_expr("-(x^2)").unwrap().eval(3.0).unwrap(), -9.0);
        assert_eq!(parse_expr("x^-1").unwrap().eval(4.0).unwrap(), 0.25);
    }

    #[test]
    fn number_literals() {
        assert_eq!(parse_expr("1e-6").unwrap(), c(1e-6));
        assert_eq!(parse_expr("2.5E+3").unwrap(), c(2500.0));
        assert_eq!(parse_expr(".5").unwrap(), c(0.5));
        assert_eq!(parse_expr("0.1").unwrap(), c(0.1));
    }

    #[test]
    fn error_paths() {
        let unknown = parse_expr("foo(x)").unwrap_err();
        assert_eq!(unknown.offset, 0);
        assert!(unknown.message.contains("unknown identifier"));

        let arity = parse_expr("min(x)").unwrap_err();
        assert!(arity.message.contains("1 argument"));
        assert!(parse_expr("exp(x, 1)").is_err());

        let open = parse_expr("(x + 1").unwrap_err();
        assert_eq!(open.offset, 6);
        assert!(parse_expr("x + 1)").is_err());
        let trailing = parse_expr("x 2").unwrap_err();
        assert_eq!(trailing.offset, 2);
        assert!(parse_expr("").is_err());
        assert!(parse_expr("y").is_err());
        assert!(parse_expr("x # 1").is_err());
    }

    #[test]
    fn parse_error_offsets_stay_in_bounds() {
        for text in ["x +", "(", "sqrt(", "x *", "min(x,", "   "] {
            let err = parse_expr(text).unwrap_err();
            assert!(err.offset <= text.len() + 1, "{text:?} -> {err:?}");
        }
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(parse_expr("x^2").unwrap().eval(3.0).unwrap(), 9.0);
        assert_eq!(parse_expr("exp(x)-1").unwrap().eval(0.0).unwrap(), 0.0);
        assert!(parse_expr("sqrt(x)").unwrap().eval(-1.0).is_err());
        assert!(parse_expr("log(x)").unwrap().eval(0.0).is_err());
        assert!(parse_expr("1/x").unwrap().eval(0.0).is_err());
        assert!(parse_expr("x^0.5").unwrap().eval(-4.0).is_err());
        assert!(parse_expr("exp(x)").unwrap().eval(1000.0).is_err());
        assert!(parse_expr("x").unwrap().eval(f64::NAN).is_err());
    }

    #[test]
    fn printer_uses_minimal_parentheses() {
        for (src, printed) in [
            ("x^2", "x^2"),
            ("-x^2", "-x^2"),
            ("-(x^2)", "-(x^2)"),
            ("(x+1)*(x-1)", "(x + 1) * (x - 1)"),
            ("x - (x - 1)", "x - (x - 1)"),
            ("(x^2)^3", "(x^2)^3"),
            ("2^3^2", "2^3^2"),
            ("min(x, -x)", "min(x, -x)"),
            ("1e-6*x", "1e-6 * x"),
        ] {
            assert_eq!(parse_expr(src).unwrap().to_string(), printed, "{src}");
        }
    }
}
