use std::fmt;

use serde::Serialize;

use super::ast::CompOp;
use super::Position;
use crate::error::LexError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Keyword {
    Select,
    From,
    Where,
    And,
    Having,
    Order,
    By,
    Limit,
    Asc,
    Desc,
    Between,
}

impl Keyword {
    const ALL: [Keyword; 11] = [
        Keyword::Select,
        Keyword::From,
        Keyword::Where,
        Keyword::And,
        Keyword::Having,
        Keyword::Order,
        Keyword::By,
        Keyword::Limit,
        Keyword::Asc,
        Keyword::Desc,
        Keyword::Between,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Select => "SELECT",
            Keyword::From => "FROM",
            Keyword::Where => "WHERE",
            Keyword::And => "AND",
            Keyword::Having => "HAVING",
            Keyword::Order => "ORDER",
            Keyword::By => "BY",
            Keyword::Limit => "LIMIT",
            Keyword::Asc => "ASC",
            Keyword::Desc => "DESC",
            Keyword::Between => "BETWEEN",
        }
    }

    fn lookup(word: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str().eq_ignore_ascii_case(word))
    }
}

impl fmt::Display for Keyword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TokenKind {
    Keyword(Keyword),
    Ident,
    Number,
    Op(CompOp),
    Dot,
    Comma,
    End,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub position: Position,
}

impl Token {
    pub(crate) fn describe(&self) -> String {
        match self.kind {
            TokenKind::End => "end of input".to_string(),
            _ => format!("`{}`", self.text),
        }
    }
}

struct Cursor<'a> {
    src: &'a str,
    offset: usize,
    line: u32,
    column: u32,
}

impl<'a> Cursor<'a> {
    fn position(&self) -> Position {
        Position {
            line: self.line,
            column: self.column,
            offset: self.offset,
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.offset..].chars().next()
    }

    fn peek_second(&self) -> Option<char> {
        let mut it = self.src[self.offset..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat_while(&mut self, pred: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&pred) {
            self.bump();
        }
    }
}

/// Splits OQL source into tokens. The result always ends with an `End` token.
/// `--` starts a comment that runs to the end of the line.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor {
        src: source,
        offset: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();

    loop {
        cur.eat_while(char::is_whitespace);
        let start = cur.position();
        let Some(c) = cur.peek() else {
            tokens.push(Token {
                kind: TokenKind::End,
                text: String::new(),
                position: start,
            });
            return Ok(tokens);
        };

        let kind = match c {
            '-' if cur.peek_second() == Some('-') => {
                cur.eat_while(|c| c != '\n');
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                cur.eat_while(|c| c.is_ascii_alphanumeric() || c == '_');
                match Keyword::lookup(&source[start.offset..cur.offset]) {
                    Some(kw) => TokenKind::Keyword(kw),
                    None => TokenKind::Ident,
                }
            }
            '+' | '-' if cur.peek_second().is_some_and(|c| c.is_ascii_digit()) => {
                cur.bump();
                lex_number(&mut cur)?;
                TokenKind::Number
            }
            c if c.is_ascii_digit() => {
                lex_number(&mut cur)?;
                TokenKind::Number
            }
            '.' => {
                cur.bump();
                TokenKind::Dot
            }
            ',' => {
                cur.bump();
                TokenKind::Comma
            }
            '=' | '~' => {
                cur.bump();
                TokenKind::Op(if c == '=' { CompOp::Eq } else { CompOp::Approx })
            }
            '<' | '>' => {
                cur.bump();
                let with_eq = cur.peek() == Some('=');
                if with_eq {
                    cur.bump();
                }
                TokenKind::Op(match (c, with_eq) {
                    ('<', false) => CompOp::Lt,
                    ('<', true) => CompOp::Le,
                    ('>', false) => CompOp::Gt,
                    _ => CompOp::Ge,
                })
            }
            '!' if cur.peek_second() == Some('=') => {
                cur.bump();
                cur.bump();
                TokenKind::Op(CompOp::Ne)
            }
            other => {
                return Err(LexError {
                    message: format!("unexpected character `{}`", other.escape_default()),
                    position: start,
                })
            }
        };

        tokens.push(Token {
            kind,
            text: source[start.offset..cur.offset].to_string(),
            position: start,
        });
    }
}

fn lex_number(cur: &mut Cursor<'_>) -> Result<(), LexError> {
    cur.eat_while(|c| c.is_ascii_digit());
    if cur.peek() == Some('.') && cur.peek_second().is_some_and(|c| c.is_ascii_digit()) {
        cur.bump();
        cur.eat_while(|c| c.is_ascii_digit());
    }
    // `30abc` is not a number followed by an identifier.
    match cur.peek() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => Err(LexError {
            message: format!("malformed number: unexpected `{c}`"),
            position: cur.position(),
        }),
        _ => Ok(()),
    }
}
