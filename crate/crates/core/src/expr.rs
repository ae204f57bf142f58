//! A small arithmetic language for the scalar fields of a model file.
//!
//! Literals, `+ - * / ^`, unary minus, the constants `pi` and `e`, the functions
//! `sin cos tan exp ln sqrt abs sinh cosh tanh`, and the coordinates `t x y z`
//! (indices 0 to 3). Expressions can be differentiated symbolically with respect
//! to any coordinate.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("expression `{source_text}`, column {column}: {message}")]
pub struct ExprError {
    pub source_text: String,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Sinh,
    Cosh,
    Tanh,
    /// Derivative of `abs`.
    Sign,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "sign" => Func::Sign,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sign => "sign",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Ln => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
            Func::Tanh => v.tanh(),
            Func::Sign => {
                if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

pub const VARIABLES: [&str; 4] = ["t", "x", "y", "z"];

impl Node {
    pub fn eval(&self, point: &[f64]) -> f64 {
        match self {
            Node::Const(c) => *c,
            Node::Var(i) => point.get(*i).copied().unwrap_or(f64::NAN),
            Node::Neg(a) => -a.eval(point),
            Node::Add(a, b) => a.eval(point) + b.eval(point),
            Node::Sub(a, b) => a.eval(point) - b.eval(point),
            Node::Mul(a, b) => a.eval(point) * b.eval(point),
            Node::Div(a, b) => a.eval(point) / b.eval(point),
            Node::Pow(a, b) => {
                let base = a.eval(point);
                match **b {
                    Node::Const(e) if e == e.trunc() && e.abs() <= 64.0 => base.powi(e as i32),
                    _ => base.powf(b.eval(point)),
                }
            }
            Node::Call(f, a) => f.apply(a.eval(point)),
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) | Node::Call(_, a) => a.max_var(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
        }
    }

    pub fn derivative(&self, var: usize) -> Node {
        use Node::*;
        let d = |n: &Node| n.derivative(var);
        let simplified = match self {
            Const(_) => Const(0.0),
            Var(i) => Const(if *i == var { 1.0 } else { 0.0 }),
            Neg(a) => neg(d(a)),
            Add(a, b) => add(d(a), d(b)),
            Sub(a, b) => sub(d(a), d(b)),
            Mul(a, b) => add(mul(d(a), (**b).clone()), mul((**a).clone(), d(b))),
            Div(a, b) => div(
                sub(mul(d(a), (**b).clone()), mul((**a).clone(), d(b))),
                mul((**b).clone(), (**b).clone()),
            ),
            Pow(a, b) => match **b {
                Const(e) => mul(
                    mul(Const(e), pow((**a).clone(), Const(e - 1.0))),
                    d(a),
                ),
                _ => mul(
                    self.clone(),
                    add(
                        mul(d(b), call(Func::Ln, (**a).clone())),
                        div(mul((**b).clone(), d(a)), (**a).clone()),
                    ),
                ),
            },
            Call(f, a) => {
                let inner = (**a).clone();
                let outer = match f {
                    Func::Sin => call(Func::Cos, inner),
                    Func::Cos => neg(call(Func::Sin, inner)),
                    Func::Tan => div(
                        Const(1.0),
                        pow(call(Func::Cos, inner), Const(2.0)),
                    ),
                    Func::Exp => call(Func::Exp, inner),
                    Func::Ln => div(Const(1.0), inner),
                    Func::Sqrt => div(Const(0.5), call(Func::Sqrt, inner)),
                    Func::Abs => call(Func::Sign, inner),
                    Func::Sinh => call(Func::Cosh, inner),
                    Func::Cosh => call(Func::Sinh, inner),
                    Func::Tanh => div(
                        Const(1.0),
                        pow(call(Func::Cosh, inner), Const(2.0)),
                    ),
                    Func::Sign => Const(0.0),
                };
                mul(outer, d(a))
            }
        };
        simplified
    }
}

fn is_const(n: &Node, v: f64) -> bool {
    matches!(n, Node::Const(c) if *c == v)
}

fn neg(a: Node) -> Node {
    match a {
        Node::Const(c) => Node::Const(-c),
        a => Node::Neg(Box::new(a)),
    }
}

fn add(a: Node, b: Node) -> Node {
    match (a, b) {
        (Node::Const(x), Node::Const(y)) => Node::Const(x + y),
        (a, b) if is_const(&a, 0.0) => b,
        (a, b) if is_const(&b, 0.0) => a,
        (a, b) => Node::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Node, b: Node) -> Node {
    match (a, b) {
        (Node::Const(x), Node::Const(y)) => Node::Const(x - y),
        (a, b) if is_const(&b, 0.0) => a,
        (a, b) if is_const(&a, 0.0) => neg(b),
        (a, b) => Node::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Node, b: Node) -> Node {
    match (a, b) {
        (Node::Const(x), Node::Const(y)) => Node::Const(x * y),
        (a, _) if is_const(&a, 0.0) => Node::Const(0.0),
        (_, b) if is_const(&b, 0.0) => Node::Const(0.0),
        (a, b) if is_const(&a, 1.0) => b,
        (a, b) if is_const(&b, 1.0) => a,
        (a, b) => Node::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Node, b: Node) -> Node {
    match (a, b) {
        (a, _) if is_const(&a, 0.0) => Node::Const(0.0),
        (a, b) if is_const(&b, 1.0) => a,
        (a, b) => Node::Div(Box::new(a), Box::new(b)),
    }
}

fn pow(a: Node, b: Node) -> Node {
    match (a, b) {
        (_, b) if is_const(&b, 0.0) => Node::Const(1.0),
        (a, b) if is_const(&b, 1.0) => a,
        (a, b) => Node::Pow(Box::new(a), Box::new(b)),
    }
}

fn call(f: Func, a: Node) -> Node {
    match a {
        Node::Const(c) => Node::Const(f.apply(c)),
        a => Node::Call(f, Box::new(a)),
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => {
                if *c < 0.0 {
                    write!(f, "({c:?})")
                } else {
                    write!(f, "{c:?}")
                }
            }
            Node::Var(i) => f.write_str(VARIABLES.get(*i).copied().unwrap_or("?")),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// A parsed expression that remembers its source text.
#[derive(Debug, Clone)]
pub struct Expr {
    source: String,
    root: Node,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

impl Expr {
    pub fn parse(source: &str) -> Result<Expr, ExprError> {
        let tokens = tokenize(source)?;
        let mut parser = Parser {
            source,
            tokens,
            pos: 0,
        };
        let root = parser.expr()?;
        if let Some(tok) = parser.tokens.get(parser.pos) {
            return Err(parser.error(tok.column, "unexpected trailing input"));
        }
        Ok(Expr {
            source: source.to_string(),
            root,
        })
    }

    pub fn constant(value: f64) -> Expr {
        Expr {
            source: format!("{value:?}"),
            root: Node::Const(value),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    #[inline]
    pub fn eval(&self, point: &[f64]) -> f64 {
        self.root.eval(point)
    }

    /// Number of coordinates the expression refers to (highest index + 1).
    pub fn arity(&self) -> usize {
        self.root.max_var().map_or(0, |i| i + 1)
    }

    /// `Some(value)` when the expression does not depend on any coordinate.
    pub fn constant_value(&self) -> Option<f64> {
        match self.root.max_var() {
            None => Some(self.root.eval(&[])),
            Some(_) => None,
        }
    }

    pub fn derivative(&self, var: usize) -> Expr {
        let root = self.root.derivative(var);
        Expr {
            source: root.to_string(),
            root,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    column: usize,
}

fn tokenize(source: &str) -> Result<Vec<Token>, ExprError> {
    let err = |column: usize, message: String| ExprError {
        source_text: source.to_string(),
        column,
        message,
    };
    let chars: Vec<char> = source.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value = text
                .parse::<f64>()
                .map_err(|_| err(column, format!("malformed number `{text}`")))?;
            out.push(Token {
                tok: Tok::Num(value),
                column,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                column,
            });
        } else if "+-*/^()".contains(c) {
            out.push(Token {
                tok: Tok::Op(c),
                column,
            });
            i += 1;
        } else {
            return Err(err(column, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    source: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, column: usize, message: &str) -> ExprError {
        ExprError {
            source_text: self.source.to_string(),
            column,
            message: message.to_string(),
        }
    }

    fn end_column(&self) -> usize {
        self.source.chars().count() + 1
    }

    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token { tok: Tok::Op(c), .. }) => Some(*c),
            _ => None,
        }
    }

    fn expect_op(&mut self, op: char) -> Result<(), ExprError> {
        if self.peek_op() == Some(op) {
            self.pos += 1;
            Ok(())
        } else {
            let column = self
                .tokens
                .get(self.pos)
                .map_or(self.end_column(), |t| t.column);
            Err(self.error(column, &format!("expected `{op}`")))
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Node::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            // right associative, binds tighter than unary minus on the left
            let exponent = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let Some(token) = self.tokens.get(self.pos).cloned() else {
            return Err(self.error(self.end_column(), "unexpected end of expression"));
        };
        self.pos += 1;
        match token.tok {
            Tok::Num(v) => Ok(Node::Const(v)),
            Tok::Op('(') => {
                let inner = self.expr()?;
                self.expect_op(')')?;
                Ok(inner)
            }
            Tok::Op(c) => Err(self.error(token.column, &format!("unexpected `{c}`"))),
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    self.expect_op('(')?;
                    let arg = self.expr()?;
                    self.expect_op(')')?;
                    return Ok(Node::Call(func, Box::new(arg)));
                }
                match name.as_str() {
                    "pi" => Ok(Node::Const(std::f64::consts::PI)),
                    "e" => Ok(Node::Const(std::f64::consts::E)),
                    _ => match VARIABLES.iter().position(|v| *v == name) {
                        Some(i) => Ok(Node::Var(i)),
                        None => Err(self.error(token.column, &format!("unknown identifier `{name}`"))),
                    },
                }
            }
        }
    }
}
