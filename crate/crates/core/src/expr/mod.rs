//! Univariate real expressions: parsing, printing, evaluation and symbolic
//! differentiation.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("-" | "+") unary | power ;
//! power   = atom [ "^" unary ] ;             (* exponent must fold to a rational constant *)
//! atom    = number | "x" | "pi" | "e" | "sqrt2"
//!         | func "(" expr ")"
//!         | "kurepa_deriv" "(" integer "," expr ")"
//!         | "(" expr ")" ;
//! func    = "sqrt" | "exp" | "log" | "ln" | "sin" | "cos"
//!         | "arcsin" | "asin" | "arctan" | "atan" | "kurepa" ;
//! number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;
//! ```
//!
//! Numeric literals are kept as exact rationals and constant subtrees built
//! from them are folded. The canonical printer emits fully parenthesized text
//! that parses back to the identical tree.

mod diff;
mod eval;
mod parse;

use std::fmt;

use rug::Rational;

pub use diff::DiffError;
pub(crate) use eval::eval_pow;
pub use eval::{EvalContext, EvalError};
pub use parse::ParseError;

/// Named transcendental constants kept symbolic until evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedConst {
    Pi,
    E,
    Sqrt2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Arcsin,
    Arctan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Expression tree node.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(Rational),
    Var,
    Named(NamedConst),
    Unary(UnaryOp, Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    /// Power with a constant rational exponent.
    Pow(Box<Node>, Rational),
    /// `order = 0` is the Kurepa function itself, `order = k` its k-th derivative.
    Kurepa {
        order: u32,
        arg: Box<Node>,
    },
}

impl NamedConst {
    fn name(self) -> &'static str {
        match self {
            NamedConst::Pi => "pi",
            NamedConst::E => "e",
            NamedConst::Sqrt2 => "sqrt2",
        }
    }
}

impl UnaryOp {
    fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Arcsin => "arcsin",
            UnaryOp::Arctan => "arctan",
        }
    }
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
        }
    }
}

// Smart constructors: fold constants and drop additive/multiplicative identities.
/// Smart constructors folding constant operands.
#[allow(clippy::should_implement_trait)]
impl Node {
    pub fn constant(value: impl Into<Rational>) -> Node {
        Node::Const(value.into())
    }

    fn as_const(&self) -> Option<&Rational> {
        match self {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    fn is_const_value(&self, v: i32) -> bool {
        self.as_const().is_some_and(|c| *c == v)
    }

    pub fn neg(u: Node) -> Node {
        match u {
            Node::Const(c) => Node::Const(-c),
            Node::Unary(UnaryOp::Neg, inner) => *inner,
            other => Node::Unary(UnaryOp::Neg, Box::new(other)),
        }
    }

    pub fn unary(op: UnaryOp, u: Node) -> Node {
        match op {
            UnaryOp::Neg => Node::neg(u),
            _ => Node::Unary(op, Box::new(u)),
        }
    }

    pub fn add(l: Node, r: Node) -> Node {
        if let (Some(x), Some(y)) = (l.as_const(), r.as_const()) {
            return Node::Const(Rational::from(x + y));
        }
        if l.is_const_value(0) {
            return r;
        }
        if r.is_const_value(0) {
            return l;
        }
        Node::Binary(BinaryOp::Add, Box::new(l), Box::new(r))
    }

    pub fn sub(l: Node, r: Node) -> Node {
        if let (Some(x), Some(y)) = (l.as_const(), r.as_const()) {
            return Node::Const(Rational::from(x - y));
        }
        if r.is_const_value(0) {
            return l;
        }
        if l.is_const_value(0) {
            return Node::neg(r);
        }
        Node::Binary(BinaryOp::Sub, Box::new(l), Box::new(r))
    }

    pub fn mul(l: Node, r: Node) -> Node {
        if let (Some(x), Some(y)) = (l.as_const(), r.as_const()) {
            return Node::Const(Rational::from(x * y));
        }
        if l.is_const_value(0) || r.is_const_value(0) {
            return Node::constant(0);
        }
        if l.is_const_value(1) {
            return r;
        }
        if r.is_const_value(1) {
            return l;
        }
        Node::Binary(BinaryOp::Mul, Box::new(l), Box::new(r))
    }

    pub fn div(l: Node, r: Node) -> Node {
        if let (Some(x), Some(y)) = (l.as_const(), r.as_const()) {
            if *y != 0 {
                return Node::Const(Rational::from(x / y));
            }
        }
        if r.is_const_value(1) {
            return l;
        }
        if l.is_const_value(0) && r.as_const().is_none_or(|c| *c != 0) {
            return Node::constant(0);
        }
        Node::Binary(BinaryOp::Div, Box::new(l), Box::new(r))
    }

    pub fn pow(base: Node, exponent: Rational) -> Node {
        if exponent == 0 {
            return Node::constant(1);
        }
        if exponent == 1 {
            return base;
        }
        if let Some(c) = base.as_const() {
            if exponent.denom() == &1u32 {
                if let Some(e) = exponent.numer().to_i32() {
                    if *c != 0 || e > 0 {
                        return Node::Const(pow_rational(c, e));
                    }
                }
            }
        }
        Node::Pow(Box::new(base), exponent)
    }

    pub fn kurepa(order: u32, arg: Node) -> Node {
        Node::Kurepa {
            order,
            arg: Box::new(arg),
        }
    }

    /// True when the subtree does not depend on `x`.
    pub fn is_constant(&self) -> bool {
        match self {
            Node::Const(_) | Node::Named(_) => true,
            Node::Var => false,
            Node::Unary(_, u) => u.is_constant(),
            Node::Binary(_, l, r) => l.is_constant() && r.is_constant(),
            Node::Pow(b, _) => b.is_constant(),
            Node::Kurepa { arg, .. } => arg.is_constant(),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Node::Const(_) | Node::Var | Node::Named(_) => 1,
            Node::Unary(_, u) | Node::Pow(u, _) | Node::Kurepa { arg: u, .. } => 1 + u.size(),
            Node::Binary(_, l, r) => 1 + l.size() + r.size(),
        }
    }
}

fn pow_rational(c: &Rational, e: i32) -> Rational {
    let mut acc = Rational::from(1);
    let base = if e < 0 {
        Rational::from(c.recip_ref())
    } else {
        c.clone()
    };
    for _ in 0..e.unsigned_abs() {
        acc *= &base;
    }
    acc
}

fn write_rational(f: &mut fmt::Formatter<'_>, c: &Rational) -> fmt::Result {
    if c.denom() == &1u32 {
        if *c < 0 {
            write!(f, "({})", c.numer())
        } else {
            write!(f, "{}", c.numer())
        }
    } else {
        write!(f, "({}/{})", c.numer(), c.denom())
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => write_rational(f, c),
            Node::Var => write!(f, "x"),
            Node::Named(n) => write!(f, "{}", n.name()),
            Node::Unary(UnaryOp::Neg, u) => write!(f, "(-{u})"),
            Node::Unary(op, u) => write!(f, "{}({u})", op.name()),
            Node::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Node::Pow(b, e) => {
                write!(f, "({b} ^ ")?;
                write_rational(f, e)?;
                write!(f, ")")
            }
            Node::Kurepa { order: 0, arg } => write!(f, "kurepa({arg})"),
            Node::Kurepa { order, arg } => write!(f, "kurepa_deriv({order}, {arg})"),
        }
    }
}

/// A parsed univariate expression in the variable `x`.
#[derive(Debug, Clone)]
pub struct Expression {
    root: Node,
    source_text: String,
}

impl PartialEq for Expression {
    /// Structural equality of the trees; the source text is not compared.
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

impl Expression {
    pub fn parse(source: &str) -> Result<Expression, ParseError> {
        let root = parse::parse(source)?;
        Ok(Expression {
            root,
            source_text: source.to_string(),
        })
    }

    pub fn from_node(root: Node) -> Expression {
        let source_text = root.to_string();
        Expression { root, source_text }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn source_text(&self) -> &str {
        &self.source_text
    }

    /// Fully parenthesized canonical form.
    pub fn canonical(&self) -> String {
        self.root.to_string()
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

/// Parses `source` into an expression.
pub fn parse(source: &str) -> Result<Expression, ParseError> {
    Expression::parse(source)
}
