use rug::{Integer, Rational};
use thiserror::Error;

use super::{NamedConst, Node, UnaryOp};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier {name:?} at position {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("exponent at position {position} is not a rational constant")]
    NonConstantExponent { position: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

/// Token plus its 0-based character offset in the source.
struct Lexed {
    token: Token,
    position: usize,
}

fn syntax(position: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        position,
        message: message.into(),
    }
}

fn lex(source: &str) -> Result<Vec<Lexed>, ParseError> {
    let chars: Vec<char> = source.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let token = match c {
            '+' => Token::Plus,
            // U+2212 minus sign is accepted alongside ASCII hyphen.
            '-' | '\u{2212}' => Token::Minus,
            '*' | '\u{00B7}' => Token::Star,
            '/' => Token::Slash,
            '^' => Token::Caret,
            '(' => Token::LParen,
            ')' => Token::RParen,
            ',' => Token::Comma,
            _ if c.is_ascii_digit() || c == '.' => {
                let (value, next) = lex_number(&chars, i)?;
                out.push(Lexed {
                    token: Token::Number(value),
                    position: start,
                });
                i = next;
                continue;
            }
            _ if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let name: String = chars[i..j].iter().collect();
                out.push(Lexed {
                    token: Token::Ident(name),
                    position: start,
                });
                i = j;
                continue;
            }
            other => return Err(syntax(start, format!("unexpected character {other:?}"))),
        };
        out.push(Lexed {
            token,
            position: start,
        });
        i += 1;
    }
    out.push(Lexed {
        token: Token::End,
        position: chars.len(),
    });
    Ok(out)
}

fn lex_number(chars: &[char], start: usize) -> Result<(Rational, usize), ParseError> {
    let mut i = start;
    let mut int_digits = String::new();
    let mut frac_digits = String::new();
    while i < chars.len() && chars[i].is_ascii_digit() {
        int_digits.push(chars[i]);
        i += 1;
    }
    if i < chars.len() && chars[i] == '.' {
        i += 1;
        while i < chars.len() && chars[i].is_ascii_digit() {
            frac_digits.push(chars[i]);
            i += 1;
        }
    }
    if int_digits.is_empty() && frac_digits.is_empty() {
        return Err(syntax(start, "malformed number"));
    }
    let mut exponent: i64 = 0;
    if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
        // Only treat as an exponent when digits follow; otherwise `e` is an identifier.
        let mut j = i + 1;
        let mut negative = false;
        if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
            negative = chars[j] == '-';
            j += 1;
        }
        let exp_start = j;
        while j < chars.len() && chars[j].is_ascii_digit() {
            j += 1;
        }
        if j > exp_start {
            let text: String = chars[exp_start..j].iter().collect();
            exponent = text
                .parse::<i64>()
                .map_err(|_| syntax(i, "exponent out of range"))?;
            if negative {
                exponent = -exponent;
            }
            i = j;
        }
    }
    let digits = format!("{int_digits}{frac_digits}");
    let mantissa: Integer = digits
        .parse()
        .map_err(|_| syntax(start, "malformed number"))?;
    let scale = exponent - frac_digits.len() as i64;
    if scale.unsigned_abs() > 10_000 {
        return Err(syntax(start, "exponent out of range"));
    }
    let ten_pow = Integer::from(Integer::u_pow_u(10, scale.unsigned_abs() as u32));
    let value = if scale >= 0 {
        Rational::from(mantissa * ten_pow)
    } else {
        Rational::from((mantissa, ten_pow))
    };
    Ok((value, i))
}

struct Parser {
    tokens: Vec<Lexed>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].token
    }

    fn position(&self) -> usize {
        self.tokens[self.pos].position
    }

    fn advance(&mut self) -> &Lexed {
        let t = &self.tokens[self.pos];
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, expected: Token, what: &str) -> Result<(), ParseError> {
        if *self.peek() == expected {
            self.advance();
            Ok(())
        } else {
            Err(syntax(self.position(), format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Token::Plus => {
                    self.advance();
                    lhs = Node::add(lhs, self.term()?);
                }
                Token::Minus => {
                    self.advance();
                    lhs = Node::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Token::Star => {
                    self.advance();
                    lhs = Node::mul(lhs, self.unary()?);
                }
                Token::Slash => {
                    self.advance();
                    lhs = Node::div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            Token::Minus => {
                self.advance();
                Ok(Node::neg(self.unary()?))
            }
            Token::Plus => {
                self.advance();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Token::Caret {
            return Ok(base);
        }
        self.advance();
        let exp_pos = self.position();
        let exponent = self.unary()?;
        match exponent {
            Node::Const(r) => Ok(Node::pow(base, r)),
            _ => Err(ParseError::NonConstantExponent { position: exp_pos }),
        }
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let position = self.position();
        match self.peek().clone() {
            Token::Number(value) => {
                self.advance();
                Ok(Node::Const(value))
            }
            Token::LParen => {
                self.advance();
                let inner = self.expr()?;
                self.expect(Token::RParen, "')'")?;
                Ok(inner)
            }
            Token::Ident(name) => {
                self.advance();
                self.identifier(&name, position)
            }
            Token::End => Err(syntax(position, "unexpected end of input")),
            other => Err(syntax(position, format!("unexpected token {other:?}"))),
        }
    }

    fn identifier(&mut self, name: &str, position: usize) -> Result<Node, ParseError> {
        match name {
            "x" => return Ok(Node::Var),
            "pi" => return Ok(Node::Named(NamedConst::Pi)),
            "e" => return Ok(Node::Named(NamedConst::E)),
            "sqrt2" => return Ok(Node::Named(NamedConst::Sqrt2)),
            _ => {}
        }
        let op = match name {
            "sqrt" => Some(UnaryOp::Sqrt),
            "exp" => Some(UnaryOp::Exp),
            "log" | "ln" => Some(UnaryOp::Log),
            "sin" => Some(UnaryOp::Sin),
            "cos" => Some(UnaryOp::Cos),
            "arcsin" | "asin" => Some(UnaryOp::Arcsin),
            "arctan" | "atan" => Some(UnaryOp::Arctan),
            _ => None,
        };
        if let Some(op) = op {
            let arg = self.call_args(1)?.pop().expect("one argument");
            return Ok(Node::unary(op, arg));
        }
        match name {
            "kurepa" => {
                let arg = self.call_args(1)?.pop().expect("one argument");
                Ok(Node::kurepa(0, arg))
            }
            "kurepa_deriv" => {
                let order_pos = self
                    .tokens
                    .get(self.pos + 1)
                    .map_or(position, |t| t.position);
                let mut args = self.call_args(2)?;
                let arg = args.pop().expect("two arguments");
                let order = match args.pop().expect("two arguments") {
                    Node::Const(r) if r.denom() == &1u32 && r >= 1 => {
                        r.numer().to_u32().filter(|o| *o <= 16)
                    }
                    _ => None,
                }
                .ok_or_else(|| {
                    syntax(order_pos, "derivative order must be an integer in 1..=16")
                })?;
                Ok(Node::kurepa(order, arg))
            }
            _ => Err(ParseError::UnknownIdentifier {
                name: name.to_string(),
                position,
            }),
        }
    }

    fn call_args(&mut self, count: usize) -> Result<Vec<Node>, ParseError> {
        self.expect(Token::LParen, "'(' after function name")?;
        let mut args = Vec::with_capacity(count);
        for i in 0..count {
            if i > 0 {
                self.expect(Token::Comma, "','")?;
            }
            args.push(self.expr()?);
        }
        self.expect(Token::RParen, "')'")?;
        Ok(args)
    }
}

pub(super) fn parse(source: &str) -> Result<Node, ParseError> {
    if source.trim().is_empty() {
        return Err(syntax(0, "empty expression"));
    }
    let tokens = lex(source)?;
    let mut parser = Parser { tokens, pos: 0 };
    let node = parser.expr()?;
    if *parser.peek() != Token::End {
        return Err(syntax(parser.position(), "unexpected trailing input"));
    }
    Ok(node)
}
