use rug::Rational;
use thiserror::Error;

use super::{BinaryOp, Expression, Node, UnaryOp};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiffError {
    #[error("derivative order must be at least 1")]
    ZeroOrder,
}

impl Expression {
    /// Symbolic derivative of the given order.
    pub fn differentiate(&self, order: u32) -> Result<Expression, DiffError> {
        if order == 0 {
            return Err(DiffError::ZeroOrder);
        }
        let mut node = self.root.clone();
        for _ in 0..order {
            node = derivative(&node);
        }
        Ok(Expression::from_node(node))
    }
}

fn square(u: &Node) -> Node {
    Node::pow(u.clone(), Rational::from(2))
}

fn derivative(node: &Node) -> Node {
    match node {
        Node::Const(_) | Node::Named(_) => Node::constant(0),
        Node::Var => Node::constant(1),
        Node::Unary(op, u) => {
            let du = derivative(u);
            let u = (**u).clone();
            match op {
                UnaryOp::Neg => Node::neg(du),
                UnaryOp::Sqrt => Node::div(
                    du,
                    Node::mul(Node::constant(2), Node::unary(UnaryOp::Sqrt, u)),
                ),
                UnaryOp::Exp => Node::mul(Node::unary(UnaryOp::Exp, u), du),
                UnaryOp::Log => Node::div(du, u),
                UnaryOp::Sin => Node::mul(Node::unary(UnaryOp::Cos, u), du),
                UnaryOp::Cos => Node::mul(Node::neg(Node::unary(UnaryOp::Sin, u)), du),
                UnaryOp::Arcsin => Node::div(
                    du,
                    Node::unary(UnaryOp::Sqrt, Node::sub(Node::constant(1), square(&u))),
                ),
                UnaryOp::Arctan => Node::div(du, Node::add(Node::constant(1), square(&u))),
            }
        }
        Node::Binary(op, l, r) => {
            let dl = derivative(l);
            let dr = derivative(r);
            let (l, r) = ((**l).clone(), (**r).clone());
            match op {
                BinaryOp::Add => Node::add(dl, dr),
                BinaryOp::Sub => Node::sub(dl, dr),
                BinaryOp::Mul => Node::add(Node::mul(dl, r), Node::mul(l, dr)),
                BinaryOp::Div => Node::div(
                    Node::sub(Node::mul(dl, r.clone()), Node::mul(l, dr)),
                    square(&r),
                ),
            }
        }
        Node::Pow(base, exponent) => {
            let db = derivative(base);
            let lowered = Rational::from(exponent - 1u32);
            Node::mul(
                Node::mul(
                    Node::Const(exponent.clone()),
                    Node::pow((**base).clone(), lowered),
                ),
                db,
            )
        }
        Node::Kurepa { order, arg } => {
            let da = derivative(arg);
            Node::mul(Node::kurepa(order + 1, (**arg).clone()), da)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::Precision;
    use rug::Float;

    #[test]
    fn arcsin_derivative_shape() {
        let d = Expression::parse("arcsin(x)")
            .unwrap()
            .differentiate(1)
            .unwrap();
        let expected = Expression::parse("1/sqrt(1 - x^2)").unwrap();
        assert_eq!(d, expected);
    }

    #[test]
    fn second_derivative_of_square_is_two() {
        let d = Expression::parse("x*x").unwrap().differentiate(2).unwrap();
        assert_eq!(d.root(), &Node::constant(2));
    }

    #[test]
    fn kurepa_chain_rule() {
        let d = Expression::parse("kurepa(x)")
            .unwrap()
            .differentiate(1)
            .unwrap();
        assert_eq!(d.canonical(), "kurepa_deriv(1, x)");
        let d2 = Expression::parse("kurepa(2*x)")
            .unwrap()
            .differentiate(1)
            .unwrap();
        assert_eq!(d2.canonical(), "(kurepa_deriv(1, (2 * x)) * 2)");
        // Constant Kurepa subterms differentiate to zero.
        let d3 = Expression::parse("kurepa_deriv(1, 0)*x - kurepa(x)")
            .unwrap()
            .differentiate(1)
            .unwrap();
        assert_eq!(d3.canonical(), "(kurepa_deriv(1, 0) - kurepa_deriv(1, x))");
    }

    #[test]
    fn zero_order_is_rejected() {
        let e = Expression::parse("x").unwrap();
        assert_eq!(e.differentiate(0), Err(DiffError::ZeroOrder));
    }

    #[test]
    fn kurepa_derivative_at_zero() {
        let p = Precision::default();
        let d = Expression::parse("kurepa(x)")
            .unwrap()
            .differentiate(1)
            .unwrap();
        let v = d.evaluate(&p.float(0), p).unwrap();
        let paper = p.parse_decimal("1.432205735").unwrap();
        assert!(Float::with_val(p.bits(), &v - &paper).abs() < 5e-10);
    }
}
