//! Recursive-descent parser.
//!
//! The grammar needs no precedence climbing: all infix operators bind
//! equally and associate to the left, and the postfix index-pair operators
//! extend the same chain. Statement boundaries need no separator either,
//! because an identifier can never directly follow a complete expression;
//! the next `name =` therefore starts a new statement unambiguously.

use super::{
    tokenize, BinOp, Declaration, Expr, ExprKind, IndexPair, Pos, Program, Qualifier, Statement,
    SyntaxError, SyntaxErrorKind, Token, TokenKind,
};

/// Convenience entry point: tokenize and parse in one step.
pub fn parse_program(text: &str) -> Result<Program, SyntaxError> {
    parse(&tokenize(text)?)
}

/// Parses a token stream produced by [`tokenize`].
pub fn parse(tokens: &[Token]) -> Result<Program, SyntaxError> {
    let mut parser = Parser { tokens, position: 0 };
    parser.program()
}

struct Parser<'a> {
    tokens: &'a [Token],
    position: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        // The token stream ends with Eof, which is never consumed.
        &self.tokens[self.position.min(self.tokens.len() - 1)]
    }

    fn advance(&mut self) -> &Token {
        let tok = &self.tokens[self.position.min(self.tokens.len() - 1)];
        if self.position < self.tokens.len() - 1 {
            self.position += 1;
        }
        tok
    }

    fn error(&self, pos: Pos, message: impl Into<String>) -> SyntaxError {
        SyntaxError { kind: SyntaxErrorKind::Parse, pos, message: message.into() }
    }

    fn unexpected(&self, expected: &str) -> SyntaxError {
        let tok = self.peek();
        self.error(tok.pos, format!("expected {expected}, found {}", tok.kind.describe()))
    }

    fn expect(&mut self, kind: &TokenKind, expected: &str) -> Result<Pos, SyntaxError> {
        if &self.peek().kind == kind {
            Ok(self.advance().pos)
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn program(&mut self) -> Result<Program, SyntaxError> {
        let mut declarations = Vec::new();
        while self.peek().kind == TokenKind::KwVar {
            declarations.push(self.declaration()?);
        }
        let mut statements = Vec::new();
        loop {
            match &self.peek().kind {
                TokenKind::Eof => break,
                TokenKind::KwVar => {
                    return Err(self.error(
                        self.peek().pos,
                        "declarations must precede all statements",
                    ));
                }
                TokenKind::Ident(_) => statements.push(self.statement()?),
                _ => {
                    let what = if statements.is_empty() && declarations.is_empty() {
                        "'var' or an identifier"
                    } else {
                        "an identifier starting a statement"
                    };
                    return Err(self.unexpected(what));
                }
            }
        }
        Ok(Program { declarations, statements })
    }

    fn declaration(&mut self) -> Result<Declaration, SyntaxError> {
        let pos = self.expect(&TokenKind::KwVar, "'var'")?;
        let qualifier = match self.peek().kind {
            TokenKind::KwInput => {
                self.advance();
                Qualifier::Input
            }
            TokenKind::KwOutput => {
                self.advance();
                Qualifier::Output
            }
            _ => Qualifier::None,
        };
        let name = self.identifier("a variable name")?;
        self.expect(&TokenKind::Colon, "':'")?;
        self.expect(&TokenKind::LBracket, "'['")?;
        let mut extents = Vec::new();
        loop {
            match self.peek().kind {
                TokenKind::Int(n) => {
                    let pos = self.advance().pos;
                    if n == 0 {
                        return Err(self.error(pos, "tensor extent must be positive"));
                    }
                    extents.push(n);
                }
                TokenKind::RBracket => {
                    self.advance();
                    break;
                }
                _ => return Err(self.unexpected("a tensor extent or ']'")),
            }
        }
        Ok(Declaration { name, qualifier, extents, pos })
    }

    fn statement(&mut self) -> Result<Statement, SyntaxError> {
        let pos = self.peek().pos;
        let lhs = self.identifier("an identifier")?;
        self.expect(&TokenKind::Equals, "'='")?;
        let rhs = self.expr()?;
        Ok(Statement { lhs, rhs, pos })
    }

    fn identifier(&mut self, expected: &str) -> Result<String, SyntaxError> {
        match &self.peek().kind {
            TokenKind::Ident(name) => {
                let name = name.clone();
                self.advance();
                Ok(name)
            }
            _ => Err(self.unexpected(expected)),
        }
    }

    /// One operator chain: `operand (infix operand | postfix [m n])*`.
    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut acc = self.operand()?;
        loop {
            let pos = self.peek().pos;
            let infix = match self.peek().kind {
                TokenKind::Plus => Some(BinOp::Add),
                TokenKind::Minus => Some(BinOp::Sub),
                TokenKind::Star => Some(BinOp::Mul),
                TokenKind::Slash => Some(BinOp::Div),
                _ => None,
            };
            if let Some(op) = infix {
                self.advance();
                let rhs = self.operand()?;
                acc = Expr { kind: ExprKind::Elem(op, Box::new(acc), Box::new(rhs)), pos };
                continue;
            }
            match self.peek().kind {
                TokenKind::Hash => {
                    self.advance();
                    let rhs = self.operand()?;
                    acc = Expr {
                        kind: ExprKind::OuterProduct(Box::new(acc), Box::new(rhs)),
                        pos,
                    };
                }
                TokenKind::Dot => {
                    self.advance();
                    let pair = self.index_pair()?;
                    acc = Expr { kind: ExprKind::Contract(Box::new(acc), pair), pos };
                }
                TokenKind::Caret => {
                    self.advance();
                    let pair = self.index_pair()?;
                    acc = Expr { kind: ExprKind::Transpose(Box::new(acc), pair), pos };
                }
                _ => return Ok(acc),
            }
        }
    }

    fn operand(&mut self) -> Result<Expr, SyntaxError> {
        let pos = self.peek().pos;
        match &self.peek().kind {
            TokenKind::Ident(name) => {
                let name = name.clone();
                self.advance();
                Ok(Expr { kind: ExprKind::Var(name), pos })
            }
            TokenKind::LParen => {
                self.advance();
                let inner = self.expr()?;
                self.expect(&TokenKind::RParen, "')'")?;
                Ok(Expr { kind: ExprKind::Paren(Box::new(inner)), pos })
            }
            _ => Err(self.unexpected("an identifier or '('")),
        }
    }

    fn index_pair(&mut self) -> Result<IndexPair, SyntaxError> {
        self.expect(&TokenKind::LBracket, "'['")?;
        let m = self.pair_component()?;
        let n = self.pair_component()?;
        self.expect(&TokenKind::RBracket, "']'")?;
        Ok(IndexPair::new(m, n).expect("components checked positive"))
    }

    fn pair_component(&mut self) -> Result<usize, SyntaxError> {
        match self.peek().kind {
            TokenKind::Int(n) => {
                let pos = self.advance().pos;
                if n == 0 {
                    return Err(self.error(pos, "index positions are 1-based and must be >= 1"));
                }
                Ok(n)
            }
            _ => Err(self.unexpected("an index position")),
        }
    }
}
