//! Minimal arithmetic expressions over `x1..xn` and `t`, used for variable
//! coefficients. Grammar: `+ - * /`, parentheses, unary sign, numeric
//! literals and the variables `x1`, ..., `xn`, `t`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Time,
    Coord(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
}

/// A parsed coefficient expression. Keeps the source text for display and
/// serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    /// Parses `source` for a system with `n` spatial variables.
    pub fn parse(source: &str, n: usize) -> Result<Expr> {
        let mut p = Parser {
            chars: source.chars().collect(),
            pos: 0,
            n,
        };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.chars.len() {
            return Err(Error::input(format!(
                "trailing input at byte {} in expression '{source}'",
                p.pos
            )));
        }
        Ok(Expr {
            source: source.to_string(),
            root,
        })
    }

    /// Constant expression.
    pub fn constant(v: f64) -> Expr {
        Expr {
            source: format!("{v}"),
            root: Node::Const(v),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        eval_node(&self.root, x, t)
    }

    pub fn mentions_t(&self) -> bool {
        mentions(&self.root, &|n| matches!(n, Node::Time))
    }

    pub fn mentions_x(&self) -> bool {
        mentions(&self.root, &|n| matches!(n, Node::Coord(_)))
    }
}

fn eval_node(node: &Node, x: &[f64], t: f64) -> f64 {
    match node {
        Node::Const(v) => *v,
        Node::Time => t,
        Node::Coord(i) => x[*i],
        Node::Neg(a) => -eval_node(a, x, t),
        Node::Add(a, b) => eval_node(a, x, t) + eval_node(b, x, t),
        Node::Sub(a, b) => eval_node(a, x, t) - eval_node(b, x, t),
        Node::Mul(a, b) => eval_node(a, x, t) * eval_node(b, x, t),
        Node::Div(a, b) => eval_node(a, x, t) / eval_node(b, x, t),
    }
}

fn mentions(node: &Node, pred: &dyn Fn(&Node) -> bool) -> bool {
    if pred(node) {
        return true;
    }
    match node {
        Node::Neg(a) => mentions(a, pred),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
            mentions(a, pred) || mentions(b, pred)
        }
        _ => false,
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut node = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    node = Node::Add(Box::new(node), Box::new(self.term()?));
                }
                Some('-') => {
                    self.pos += 1;
                    node = Node::Sub(Box::new(node), Box::new(self.term()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut node = self.factor()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    node = Node::Mul(Box::new(node), Box::new(self.factor()?));
                }
                Some('/') => {
                    self.pos += 1;
                    node = Node::Div(Box::new(node), Box::new(self.factor()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn factor(&mut self) -> Result<Node> {
        self.skip_ws();
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.factor()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.factor()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Node> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let node = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(')') {
                    return Err(Error::input("unbalanced parenthesis in expression"));
                }
                self.pos += 1;
                Ok(node)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            other => Err(Error::input(format!(
                "unexpected token {other:?} in expression"
            ))),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        // Scientific notation: 1e-3, 2.5E+4.
        if matches!(self.peek(), Some('e') | Some('E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+') | Some('-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = mark;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>()
            .map(Node::Const)
            .map_err(|_| Error::input(format!("invalid numeric literal '{text}'")))
    }

    fn ident(&mut self) -> Result<Node> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        if text == "t" {
            return Ok(Node::Time);
        }
        if let Some(rest) = text.strip_prefix('x') {
            if let Ok(idx) = rest.parse::<usize>() {
                if idx >= 1 && idx <= self.n {
                    return Ok(Node::Coord(idx - 1));
                }
                return Err(Error::input(format!(
                    "variable '{text}' out of range for n = {}",
                    self.n
                )));
            }
        }
        Err(Error::input(format!("unknown identifier '{text}'")))
    }
}
