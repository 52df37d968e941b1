//! Minimal arithmetic expression parser for radial weight profiles.
//!
//! Grammar (recursive descent, usual precedence):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := unary ('^' factor)?            // right-associative power
//! unary  := '-' unary | primary
//! primary:= number | 'r' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//! func   := log | exp | sqrt | abs
//! ```
//!
//! `log` is the natural logarithm. The single free variable is the radius
//! `r`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Radius,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Log(Box<Node>),
    Exp(Box<Node>),
    Sqrt(Box<Node>),
    Abs(Box<Node>),
}

/// A parsed radial expression, evaluable at any r > 0.
#[derive(Debug, Clone)]
pub struct RadialExpr {
    root: Node,
    source: String,
}

impl RadialExpr {
    pub fn parse(source: &str) -> Result<Self> {
        let tokens = tokenize(source)?;
        let mut parser = Parser { tokens, pos: 0, source };
        let root = parser.expr()?;
        if parser.pos != parser.tokens.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(RadialExpr { root, source: source.to_string() })
    }

    pub fn eval(&self, r: f64) -> f64 {
        eval_node(&self.root, r)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

fn eval_node(node: &Node, r: f64) -> f64 {
    match node {
        Node::Const(c) => *c,
        Node::Radius => r,
        Node::Neg(a) => -eval_node(a, r),
        Node::Add(a, b) => eval_node(a, r) + eval_node(b, r),
        Node::Sub(a, b) => eval_node(a, r) - eval_node(b, r),
        Node::Mul(a, b) => eval_node(a, r) * eval_node(b, r),
        Node::Div(a, b) => eval_node(a, r) / eval_node(b, r),
        Node::Pow(a, b) => eval_node(a, r).powf(eval_node(b, r)),
        Node::Log(a) => eval_node(a, r).ln(),
        Node::Exp(a) => eval_node(a, r).exp(),
        Node::Sqrt(a) => eval_node(a, r).sqrt(),
        Node::Abs(a) => eval_node(a, r).abs(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(source: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = source.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => { tokens.push(Token::Plus); i += 1; }
            '-' => { tokens.push(Token::Minus); i += 1; }
            '*' => { tokens.push(Token::Star); i += 1; }
            '/' => { tokens.push(Token::Slash); i += 1; }
            '^' => { tokens.push(Token::Caret); i += 1; }
            '(' => { tokens.push(Token::LParen); i += 1; }
            ')' => { tokens.push(Token::RParen); i += 1; }
            _ if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_digit()
                        || chars[i] == '.'
                        || chars[i] == 'e'
                        || chars[i] == 'E'
                        || ((chars[i] == '+' || chars[i] == '-')
                            && i > start
                            && (chars[i - 1] == 'e' || chars[i - 1] == 'E')))
                {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let value = text.parse::<f64>().map_err(|_| Error::Config {
                    location: format!("expression '{source}' column {start}"),
                    message: format!("invalid number '{text}'"),
                })?;
                tokens.push(Token::Num(value));
            }
            _ if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                tokens.push(Token::Ident(chars[start..i].iter().collect()));
            }
            _ => {
                return Err(Error::Config {
                    location: format!("expression '{source}' column {i}"),
                    message: format!("unexpected character '{c}'"),
                })
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    source: &'a str,
}

impl<'a> Parser<'a> {
    fn error(&self, message: &str) -> Error {
        Error::Config {
            location: format!("expression '{}' token {}", self.source, self.pos),
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Node> {
        let mut node = self.term()?;
        while let Some(op) = self.peek().cloned() {
            match op {
                Token::Plus => {
                    self.bump();
                    node = Node::Add(Box::new(node), Box::new(self.term()?));
                }
                Token::Minus => {
                    self.bump();
                    node = Node::Sub(Box::new(node), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(node)
    }

    fn term(&mut self) -> Result<Node> {
        let mut node = self.factor()?;
        while let Some(op) = self.peek().cloned() {
            match op {
                Token::Star => {
                    self.bump();
                    node = Node::Mul(Box::new(node), Box::new(self.factor()?));
                }
                Token::Slash => {
                    self.bump();
                    node = Node::Div(Box::new(node), Box::new(self.factor()?));
                }
                _ => break,
            }
        }
        Ok(node)
    }

    fn factor(&mut self) -> Result<Node> {
        let base = self.unary()?;
        if let Some(Token::Caret) = self.peek() {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Node> {
        if let Some(Token::Minus) = self.peek() {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Node> {
        match self.bump() {
            Some(Token::Num(v)) => Ok(Node::Const(v)),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Token::RParen) => Ok(inner),
                    _ => Err(self.error("expected ')'")),
                }
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "r" => Ok(Node::Radius),
                "pi" => Ok(Node::Const(std::f64::consts::PI)),
                "e" => Ok(Node::Const(std::f64::consts::E)),
                "log" | "exp" | "sqrt" | "abs" => {
                    match self.bump() {
                        Some(Token::LParen) => {}
                        _ => return Err(self.error("expected '(' after function name")),
                    }
                    let arg = self.expr()?;
                    match self.bump() {
                        Some(Token::RParen) => {}
                        _ => return Err(self.error("expected ')'")),
                    }
                    let boxed = Box::new(arg);
                    Ok(match name.as_str() {
                        "log" => Node::Log(boxed),
                        "exp" => Node::Exp(boxed),
                        "sqrt" => Node::Sqrt(boxed),
                        _ => Node::Abs(boxed),
                    })
                }
                other => Err(self.error(&format!("unknown identifier '{other}'"))),
            },
            _ => Err(self.error("expected a value")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_evaluates() {
        let e = RadialExpr::parse("2*r^2 + 1").unwrap();
        assert_eq!(e.eval(3.0), 19.0);

        let e = RadialExpr::parse("log(1/r)").unwrap();
        assert!((e.eval(0.1) - (10.0f64).ln()).abs() < 1e-14);

        let e = RadialExpr::parse(" sqrt(abs(-r)) * pi").unwrap();
        assert!((e.eval(4.0) - 2.0 * std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn power_is_right_associative() {
        let e = RadialExpr::parse("r^2^3").unwrap();
        assert_eq!(e.eval(2.0), 256.0); // 2^(2^3)
    }

    #[test]
    fn rejects_garbage() {
        assert!(RadialExpr::parse("r +").is_err());
        assert!(RadialExpr::parse("foo(r)").is_err());
        assert!(RadialExpr::parse("r $ 2").is_err());
        assert!(RadialExpr::parse("(r").is_err());
    }
}
