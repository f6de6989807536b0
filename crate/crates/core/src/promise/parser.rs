//! Recursive-descent parser for the promise-function language.
//!
//! ```text
//! fnspec   := "constant" "(" bit ")"
//!           | "piecewise" "{" piece ("," piece)* "}" [ "else" "->" bit ]
//! piece    := interval "->" bit
//! interval := ("[" | "(") bound "," bound (")" | "]")
//! bound    := decimal | "-inf" | "inf"
//! bit      := "0" | "1"
//! ```
//!
//! Whitespace, including newlines, is allowed between tokens.

use crate::error::{DslError, DslErrorKind, Position};

use super::{IntervalPiece, PromiseFunction};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Number(String),
    NegInf,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Arrow,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::NegInf => "`-inf`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Position,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.chars().peekable(),
            pos: Position { line: 1, column: 1 },
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn take_while(&mut self, buf: &mut String, pred: impl Fn(char) -> bool) {
        while let Some(&c) = self.chars.peek() {
            if !pred(c) {
                break;
            }
            buf.push(c);
            self.bump();
        }
    }

    fn number(&mut self, start: Position, mut text: String) -> Result<Tok, DslError> {
        self.take_while(&mut text, |c| c.is_ascii_digit());
        if self.chars.peek() == Some(&'.') {
            text.push('.');
            self.bump();
            self.take_while(&mut text, |c| c.is_ascii_digit());
        }
        if !text.chars().any(|c| c.is_ascii_digit()) {
            return Err(DslError::new(
                DslErrorKind::Syntax,
                start,
                format!("malformed number `{text}`"),
            ));
        }
        if matches!(self.chars.peek(), Some('e' | 'E')) {
            text.push('e');
            self.bump();
            if let Some(&s @ ('+' | '-')) = self.chars.peek() {
                text.push(s);
                self.bump();
            }
            let before = text.len();
            self.take_while(&mut text, |c| c.is_ascii_digit());
            if text.len() == before {
                return Err(DslError::new(
                    DslErrorKind::Syntax,
                    start,
                    format!("malformed exponent in `{text}`"),
                ));
            }
        }
        Ok(Tok::Number(text))
    }

    fn next_token(&mut self) -> Result<(Tok, Position), DslError> {
        while matches!(self.chars.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
        let start = self.pos;
        let Some(c) = self.bump() else {
            return Ok((Tok::Eof, start));
        };
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            ',' => Tok::Comma,
            '-' => match self.chars.peek() {
                Some('>') => {
                    self.bump();
                    Tok::Arrow
                }
                Some('i') => {
                    let mut w = String::new();
                    self.take_while(&mut w, |c| c.is_ascii_alphabetic());
                    if w != "inf" {
                        return Err(DslError::new(
                            DslErrorKind::Syntax,
                            start,
                            format!("unexpected `-{w}`"),
                        ));
                    }
                    Tok::NegInf
                }
                _ => self.number(start, "-".into())?,
            },
            '+' => self.number(start, "+".into())?,
            c if c.is_ascii_digit() || c == '.' => self.number(start, c.to_string())?,
            c if c.is_ascii_alphabetic() => {
                let mut w = c.to_string();
                self.take_while(&mut w, |c| c.is_ascii_alphanumeric() || c == '_');
                Tok::Word(w)
            }
            other => {
                return Err(DslError::new(
                    DslErrorKind::Syntax,
                    start,
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        Ok((tok, start))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    pos: Position,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, DslError> {
        let mut lexer = Lexer::new(src);
        let (tok, pos) = lexer.next_token()?;
        Ok(Parser { lexer, tok, pos })
    }

    fn advance(&mut self) -> Result<(), DslError> {
        let (tok, pos) = self.lexer.next_token()?;
        self.tok = tok;
        self.pos = pos;
        Ok(())
    }

    fn unexpected(&self, wanted: &str) -> DslError {
        DslError::new(
            DslErrorKind::Syntax,
            self.pos,
            format!("expected {wanted}, found {}", self.tok.describe()),
        )
    }

    fn expect(&mut self, tok: Tok) -> Result<(), DslError> {
        if self.tok != tok {
            return Err(self.unexpected(&tok.describe()));
        }
        self.advance()
    }

    fn bit(&mut self) -> Result<u8, DslError> {
        let value = match &self.tok {
            Tok::Number(s) if s == "0" => 0,
            Tok::Number(s) if s == "1" => 1,
            Tok::Number(s) => {
                return Err(DslError::new(
                    DslErrorKind::InvalidBit,
                    self.pos,
                    format!("function value `{s}` is not 0 or 1"),
                ))
            }
            Tok::NegInf | Tok::Word(_) => {
                return Err(DslError::new(
                    DslErrorKind::InvalidBit,
                    self.pos,
                    format!("function value {} is not 0 or 1", self.tok.describe()),
                ))
            }
            _ => return Err(self.unexpected("bit `0` or `1`")),
        };
        self.advance()?;
        Ok(value)
    }

    fn bound(&mut self) -> Result<f64, DslError> {
        let value = match &self.tok {
            Tok::NegInf => f64::NEG_INFINITY,
            Tok::Word(w) if w == "inf" => f64::INFINITY,
            Tok::Number(s) => {
                let v: f64 = s.parse().map_err(|_| {
                    DslError::new(DslErrorKind::Syntax, self.pos, format!("bad number `{s}`"))
                })?;
                if !v.is_finite() {
                    return Err(DslError::new(
                        DslErrorKind::Syntax,
                        self.pos,
                        format!("number `{s}` overflows"),
                    ));
                }
                v
            }
            _ => return Err(self.unexpected("a bound (decimal, `-inf` or `inf`)")),
        };
        self.advance()?;
        Ok(value)
    }

    fn piece(&mut self) -> Result<(IntervalPiece, Position), DslError> {
        let start = self.pos;
        let lo_closed = match self.tok {
            Tok::LBracket => true,
            Tok::LParen => false,
            _ => return Err(self.unexpected("`[` or `(`")),
        };
        self.advance()?;
        let lo = self.bound()?;
        self.expect(Tok::Comma)?;
        let hi = self.bound()?;
        let hi_closed = match self.tok {
            Tok::RBracket => true,
            Tok::RParen => false,
            _ => return Err(self.unexpected("`]` or `)`")),
        };
        self.advance()?;
        self.expect(Tok::Arrow)?;
        let value = self.bit()?;
        let piece = IntervalPiece {
            lo,
            hi,
            lo_closed,
            hi_closed,
            value,
        };
        piece
            .validate()
            .map_err(|msg| DslError::new(DslErrorKind::InvalidInterval, start, msg))?;
        Ok((piece, start))
    }

    fn fnspec(&mut self, source: &str) -> Result<PromiseFunction, DslError> {
        let keyword = match &self.tok {
            Tok::Word(w) => w.clone(),
            _ => return Err(self.unexpected("`constant` or `piecewise`")),
        };
        let f = match keyword.as_str() {
            "constant" => {
                self.advance()?;
                self.expect(Tok::LParen)?;
                let b = self.bit()?;
                self.expect(Tok::RParen)?;
                PromiseFunction::constant_with_source(b, source.to_string())
            }
            "piecewise" => {
                self.advance()?;
                self.expect(Tok::LBrace)?;
                let mut pieces = Vec::new();
                let mut spans = Vec::new();
                loop {
                    let (p, pos) = self.piece()?;
                    pieces.push(p);
                    spans.push(pos);
                    match self.tok {
                        Tok::Comma => self.advance()?,
                        Tok::RBrace => break,
                        _ => return Err(self.unexpected("`,` or `}`")),
                    }
                }
                let end = self.pos;
                self.advance()?;
                let else_value = if self.tok == Tok::Word("else".into()) {
                    self.advance()?;
                    self.expect(Tok::Arrow)?;
                    Some(self.bit()?)
                } else {
                    None
                };
                PromiseFunction::piecewise_with_spans(
                    pieces,
                    else_value,
                    source.to_string(),
                    spans,
                    end,
                )?
            }
            _ => return Err(self.unexpected("`constant` or `piecewise`")),
        };
        if self.tok != Tok::Eof {
            return Err(self.unexpected("end of input"));
        }
        Ok(f)
    }
}

/// Parses a function spec. The result's declared class is `Unknown`.
pub fn parse_fnspec(text: &str) -> Result<PromiseFunction, DslError> {
    Parser::new(text)?.fnspec(text)
}
