//! Tokenizer.

use super::{Pos, SyntaxError, SyntaxErrorKind, Token, TokenKind};

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { chars: text.chars().peekable(), line: 1, col: 1 }
    }

    fn pos(&self) -> Pos {
        Pos::new(self.line, self.col)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, pos: Pos, message: impl Into<String>) -> SyntaxError {
        SyntaxError { kind: SyntaxErrorKind::Lex, pos, message: message.into() }
    }
}

/// Splits source text into tokens. The token stream always ends with an
/// `Eof` token carrying the position just past the input.
pub fn tokenize(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut lx = Lexer::new(text);
    let mut tokens = Vec::new();
    loop {
        // Skip whitespace and `//` line comments.
        match lx.chars.peek() {
            Some(c) if c.is_whitespace() => {
                lx.bump();
                continue;
            }
            Some('/') => {
                // Needs a second character of lookahead: `//` starts a
                // comment, a lone `/` is the division operator.
                let mut probe = lx.chars.clone();
                probe.next();
                if probe.peek() == Some(&'/') {
                    while let Some(&c) = lx.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        lx.bump();
                    }
                    continue;
                }
            }
            _ => {}
        }

        let pos = lx.pos();
        let Some(c) = lx.bump() else {
            tokens.push(Token { kind: TokenKind::Eof, pos });
            return Ok(tokens);
        };
        let kind = match c {
            ':' => TokenKind::Colon,
            '=' => TokenKind::Equals,
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            '[' => TokenKind::LBracket,
            ']' => TokenKind::RBracket,
            '+' => TokenKind::Plus,
            '-' => TokenKind::Minus,
            '*' => TokenKind::Star,
            '/' => TokenKind::Slash,
            '#' => TokenKind::Hash,
            '.' => TokenKind::Dot,
            '^' => TokenKind::Caret,
            c if c.is_ascii_digit() => {
                let mut digits = String::from(c);
                while let Some(&d) = lx.chars.peek() {
                    if d.is_ascii_digit() {
                        digits.push(d);
                        lx.bump();
                    } else {
                        break;
                    }
                }
                let n: usize = digits
                    .parse()
                    .map_err(|_| lx.error(pos, format!("integer literal '{digits}' is too large")))?;
                TokenKind::Int(n)
            }
            c if c.is_ascii_alphabetic() => {
                let mut name = String::from(c);
                while let Some(&d) = lx.chars.peek() {
                    if d.is_ascii_alphanumeric() {
                        name.push(d);
                        lx.bump();
                    } else {
                        break;
                    }
                }
                match name.as_str() {
                    "var" => TokenKind::KwVar,
                    "input" => TokenKind::KwInput,
                    "output" => TokenKind::KwOutput,
                    _ => TokenKind::Ident(name),
                }
            }
            other => return Err(lx.error(pos, format!("unexpected character '{other}'"))),
        };
        tokens.push(Token { kind, pos });
    }
}
