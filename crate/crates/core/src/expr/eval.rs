use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Rational};
use thiserror::Error;

use super::{BinaryOp, Expression, NamedConst, Node, UnaryOp};
use crate::precision::Precision;
use crate::quad::{self, QuadConfig, QuadError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] QuadError),
}

fn domain(op: &'static str, detail: impl Into<String>) -> EvalError {
    EvalError::Domain {
        op,
        detail: detail.into(),
    }
}

/// Precision and quadrature settings shared by one evaluation run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalContext {
    pub precision: Precision,
    pub quad: QuadConfig,
}

impl EvalContext {
    pub fn new(precision: Precision) -> Self {
        EvalContext {
            precision,
            quad: QuadConfig::default(),
        }
    }
}

impl Expression {
    /// Evaluates at `x` with the default quadrature configuration.
    pub fn evaluate(&self, x: &Float, precision: Precision) -> Result<Float, EvalError> {
        self.evaluate_with(x, &EvalContext::new(precision))
    }

    pub fn evaluate_with(&self, x: &Float, ctx: &EvalContext) -> Result<Float, EvalError> {
        let x = Float::with_val(ctx.precision.bits(), x);
        eval_node(&self.root, &x, ctx)
    }
}

fn eval_node(node: &Node, x: &Float, ctx: &EvalContext) -> Result<Float, EvalError> {
    let bits = ctx.precision.bits();
    Ok(match node {
        Node::Const(c) => Float::with_val(bits, c),
        Node::Var => x.clone(),
        Node::Named(NamedConst::Pi) => Float::with_val(bits, Constant::Pi),
        Node::Named(NamedConst::E) => Float::with_val(bits, 1).exp(),
        Node::Named(NamedConst::Sqrt2) => Float::with_val(bits, 2).sqrt(),
        Node::Unary(op, u) => {
            let v = eval_node(u, x, ctx)?;
            eval_unary(*op, v)?
        }
        Node::Binary(op, l, r) => {
            let lv = eval_node(l, x, ctx)?;
            let rv = eval_node(r, x, ctx)?;
            match op {
                BinaryOp::Add => lv + rv,
                BinaryOp::Sub => lv - rv,
                BinaryOp::Mul => lv * rv,
                BinaryOp::Div => {
                    if rv.is_zero() {
                        return Err(domain("division", "division by zero"));
                    }
                    lv / rv
                }
            }
        }
        Node::Pow(base, exponent) => {
            let v = eval_node(base, x, ctx)?;
            eval_pow(v, exponent)?
        }
        Node::Kurepa { order, arg } => {
            let v = eval_node(arg, x, ctx)?;
            if v.is_sign_negative() && !v.is_zero() {
                return Err(domain("kurepa", "argument must be non-negative"));
            }
            let result = quad::kurepa_family(&v, *order, ctx.precision, &ctx.quad)?;
            Float::with_val(bits, &result.value)
        }
    })
}

fn eval_unary(op: UnaryOp, v: Float) -> Result<Float, EvalError> {
    Ok(match op {
        UnaryOp::Neg => -v,
        UnaryOp::Sqrt => {
            if v.is_sign_negative() && !v.is_zero() {
                return Err(domain("sqrt", "negative argument"));
            }
            v.abs().sqrt()
        }
        UnaryOp::Exp => v.exp(),
        UnaryOp::Log => {
            if v.is_zero() || v.is_sign_negative() {
                return Err(domain("log", "non-positive argument"));
            }
            v.ln()
        }
        UnaryOp::Sin => v.sin(),
        UnaryOp::Cos => v.cos(),
        UnaryOp::Arcsin => {
            if v.clone().abs() > 1 {
                return Err(domain("arcsin", "argument outside [-1, 1]"));
            }
            v.asin()
        }
        UnaryOp::Arctan => v.atan(),
    })
}

pub(crate) fn eval_pow(v: Float, exponent: &Rational) -> Result<Float, EvalError> {
    let bits = v.prec();
    if exponent.denom() == &1u32 {
        let e = exponent
            .numer()
            .to_i32()
            .ok_or_else(|| domain("pow", "integer exponent out of range"))?;
        if v.is_zero() && e < 0 {
            return Err(domain("pow", "zero raised to a negative power"));
        }
        return Ok(Float::with_val(bits, v.pow(e)));
    }
    if v.is_sign_negative() && !v.is_zero() {
        return Err(domain("pow", "negative base with non-integer exponent"));
    }
    if v.is_zero() {
        if *exponent < 0 {
            return Err(domain("pow", "zero raised to a negative power"));
        }
        return Ok(Float::new(bits));
    }
    let q = exponent
        .denom()
        .to_u32()
        .ok_or_else(|| domain("pow", "exponent denominator out of range"))?;
    let num = exponent
        .numer()
        .to_i32()
        .ok_or_else(|| domain("pow", "exponent numerator out of range"))?;
    // base^(p/q) = root_q(base)^p keeps exact cases exact.
    let root = Float::with_val(bits + 32, &v).root(q);
    Ok(Float::with_val(bits, root.pow(num)))
}
