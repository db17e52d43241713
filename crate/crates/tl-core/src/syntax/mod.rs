//! Concrete and abstract syntax.
//!
//! A program is a run of variable declarations followed by a run of
//! assignment statements. Expression operators come in two shapes: infix
//! binary operators (`+ - * /` element-wise, `#` outer product) and postfix
//! index-pair operators (`. [m n]` contraction, `^ [m n]` transposition).
//! There is no precedence: a chain of operators associates to the left, with
//! postfix operators applying to everything parsed so far. Parentheses are
//! kept in the tree so that printing a program reproduces its shape.

mod lexer;
mod parser;
mod pretty;

pub use lexer::tokenize;
pub use parser::{parse, parse_program};
pub use pretty::pretty_print;

use std::fmt;

use thiserror::Error;

/// A 1-based source position. Synthetic nodes (built in memory, not parsed)
/// carry line 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Pos {
        Pos { line, col }
    }

    pub fn synthetic() -> Pos {
        Pos { line: 0, col: 0 }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntaxErrorKind {
    Lex,
    Parse,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{} error at {pos}: {message}", self.kind_str())]
pub struct SyntaxError {
    pub kind: SyntaxErrorKind,
    pub pos: Pos,
    pub message: String,
}

impl SyntaxError {
    pub fn kind_str(&self) -> &'static str {
        match self.kind {
            SyntaxErrorKind::Lex => "lex",
            SyntaxErrorKind::Parse => "parse",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    KwVar,
    KwInput,
    KwOutput,
    Ident(String),
    Int(usize),
    Colon,
    Equals,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Plus,
    Minus,
    Star,
    Slash,
    Hash,
    Dot,
    Caret,
    Eof,
}

impl TokenKind {
    /// How the token reads in an error message.
    pub fn describe(&self) -> String {
        match self {
            TokenKind::KwVar => "'var'".into(),
            TokenKind::KwInput => "'input'".into(),
            TokenKind::KwOutput => "'output'".into(),
            TokenKind::Ident(name) => format!("identifier '{name}'"),
            TokenKind::Int(n) => format!("integer {n}"),
            TokenKind::Colon => "':'".into(),
            TokenKind::Equals => "'='".into(),
            TokenKind::LParen => "'('".into(),
            TokenKind::RParen => "')'".into(),
            TokenKind::LBracket => "'['".into(),
            TokenKind::RBracket => "']'".into(),
            TokenKind::Plus => "'+'".into(),
            TokenKind::Minus => "'-'".into(),
            TokenKind::Star => "'*'".into(),
            TokenKind::Slash => "'/'".into(),
            TokenKind::Hash => "'#'".into(),
            TokenKind::Dot => "'.'".into(),
            TokenKind::Caret => "'^'".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Qualifier {
    #[default]
    None,
    Input,
    Output,
}

/// `var [input|output] name : [d1 ... dk]`. Extents here are raw parsed
/// integers; the parser rejects zeros, and the typechecker guards again for
/// trees built in memory.
#[derive(Debug, Clone)]
pub struct Declaration {
    pub name: String,
    pub qualifier: Qualifier,
    pub extents: Vec<usize>,
    pub pos: Pos,
}

impl PartialEq for Declaration {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.qualifier == other.qualifier
            && self.extents == other.extents
    }
}

impl Eq for Declaration {}

#[derive(Debug, Clone)]
pub struct Statement {
    pub lhs: String,
    pub rhs: Expr,
    pub pos: Pos,
}

impl PartialEq for Statement {
    fn eq(&self, other: &Self) -> bool {
        self.lhs == other.lhs && self.rhs == other.rhs
    }
}

impl Eq for Statement {}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub declarations: Vec<Declaration>,
    pub statements: Vec<Statement>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// The `[m n]` argument of a contraction or transposition. Both positions
/// are 1-based and at least 1; order is kept as written. Whether the
/// positions fit the operand's rank is the typechecker's business.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexPair {
    m: usize,
    n: usize,
}

impl IndexPair {
    pub fn new(m: usize, n: usize) -> Result<IndexPair, String> {
        if m == 0 || n == 0 {
            return Err("index positions are 1-based and must be >= 1".into());
        }
        Ok(IndexPair { m, n })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The pair as (smaller, larger). Equal positions only ever reach this
    /// after the typechecker has rejected them, so no care is needed here.
    pub fn sorted(&self) -> (usize, usize) {
        (self.m.min(self.n), self.m.max(self.n))
    }
}

impl fmt::Display for IndexPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} {}]", self.m, self.n)
    }
}

/// Expression tree. Equality ignores source positions so that a program
/// and its pretty-printed reparse compare equal.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Var(String),
    Paren(Box<Expr>),
    Elem(BinOp, Box<Expr>, Box<Expr>),
    OuterProduct(Box<Expr>, Box<Expr>),
    Contract(Box<Expr>, IndexPair),
    Transpose(Box<Expr>, IndexPair),
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Expr {}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr { kind: ExprKind::Var(name.into()), pos: Pos::synthetic() }
    }

    pub fn paren(inner: Expr) -> Expr {
        Expr { kind: ExprKind::Paren(Box::new(inner)), pos: Pos::synthetic() }
    }

    pub fn elem(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr {
            kind: ExprKind::Elem(op, Box::new(lhs), Box::new(rhs)),
            pos: Pos::synthetic(),
        }
    }

    pub fn outer(lhs: Expr, rhs: Expr) -> Expr {
        Expr {
            kind: ExprKind::OuterProduct(Box::new(lhs), Box::new(rhs)),
            pos: Pos::synthetic(),
        }
    }

    /// Panics if `m` or `n` is zero.
    pub fn contract(operand: Expr, m: usize, n: usize) -> Expr {
        Expr {
            kind: ExprKind::Contract(Box::new(operand), IndexPair::new(m, n).unwrap()),
            pos: Pos::synthetic(),
        }
    }

    /// Panics if `m` or `n` is zero.
    pub fn transpose(operand: Expr, m: usize, n: usize) -> Expr {
        Expr {
            kind: ExprKind::Transpose(Box::new(operand), IndexPair::new(m, n).unwrap()),
            pos: Pos::synthetic(),
        }
    }

    /// Variable names read by this expression, in syntactic order, with
    /// repeats.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables<'a>(&'a self, out: &mut Vec<&'a str>) {
        match &self.kind {
            ExprKind::Var(name) => out.push(name),
            ExprKind::Paren(inner) => inner.collect_variables(out),
            ExprKind::Elem(_, lhs, rhs) | ExprKind::OuterProduct(lhs, rhs) => {
                lhs.collect_variables(out);
                rhs.collect_variables(out);
            }
            ExprKind::Contract(operand, _) | ExprKind::Transpose(operand, _) => {
                operand.collect_variables(out)
            }
        }
    }
}
