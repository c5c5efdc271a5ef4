use std::fmt;

use thiserror::Error;

use super::ast::Position;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Keyword {
    Select,
    From,
    Where,
    Group,
    Order,
    By,
    As,
    Start,
    Connect,
    Stop,
    With,
    No,
    Cycle,
    Unique,
    Memorize,
    Maximum,
    If,
    And,
    Or,
    Not,
    This,
    True,
    False,
    None,
}

impl Keyword {
    pub const ALL: [Keyword; 24] = [
        Keyword::Select,
        Keyword::From,
        Keyword::Where,
        Keyword::Group,
        Keyword::Order,
        Keyword::By,
        Keyword::As,
        Keyword::Start,
        Keyword::Connect,
        Keyword::Stop,
        Keyword::With,
        Keyword::No,
        Keyword::Cycle,
        Keyword::Unique,
        Keyword::Memorize,
        Keyword::Maximum,
        Keyword::If,
        Keyword::And,
        Keyword::Or,
        Keyword::Not,
        Keyword::This,
        Keyword::True,
        Keyword::False,
        Keyword::None,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Select => "SELECT",
            Keyword::From => "FROM",
            Keyword::Where => "WHERE",
            Keyword::Group => "GROUP",
            Keyword::Order => "ORDER",
            Keyword::By => "BY",
            Keyword::As => "AS",
            Keyword::Start => "START",
            Keyword::Connect => "CONNECT",
            Keyword::Stop => "STOP",
            Keyword::With => "WITH",
            Keyword::No => "NO",
            Keyword::Cycle => "CYCLE",
            Keyword::Unique => "UNIQUE",
            Keyword::Memorize => "MEMORIZE",
            Keyword::Maximum => "MAXIMUM",
            Keyword::If => "IF",
            Keyword::And => "AND",
            Keyword::Or => "OR",
            Keyword::Not => "NOT",
            Keyword::This => "this",
            Keyword::True => "true",
            Keyword::False => "false",
            Keyword::None => "none",
        }
    }

    pub fn lookup(word: &str) -> Option<Keyword> {
        Keyword::ALL
            .iter()
            .copied()
            .find(|k| k.as_str().eq_ignore_ascii_case(word))
    }
}

/// True if `word` is reserved, in any letter case.
pub fn is_reserved(word: &str) -> bool {
    Keyword::lookup(word).is_some()
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Keyword(Keyword),
    Ident(String),
    Int(i64),
    Float(f64),
    Str(String),
    /// Operators and punctuation: `+ - * / == != < <= > >= = ( ) [ ] { } , ; .`
    Symbol(&'static str),
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Keyword(k) => write!(f, "`{}`", k.as_str()),
            TokenKind::Ident(name) => write!(f, "identifier `{name}`"),
            TokenKind::Int(i) => write!(f, "integer {i}"),
            TokenKind::Float(x) => write!(f, "number {x}"),
            TokenKind::Str(_) => write!(f, "string literal"),
            TokenKind::Symbol(s) => write!(f, "`{s}`"),
            TokenKind::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Source text of the token, verbatim.
    pub text: String,
    pub pos: Position,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{pos}: {message}")]
pub struct LexError {
    pub pos: Position,
    pub message: String,
}

const SYMBOLS: [&str; 20] = [
    "==", "!=", "<=", ">=", "+", "-", "*", "/", "<", ">", "=", "(", ")", "[", "]", "{", "}", ",",
    ";", ".",
];

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn offset(&mut self) -> usize {
        self.chars.peek().map_or(self.src.len(), |&(i, _)| i)
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Position {
        Position {
            line: self.line,
            column: self.column,
        }
    }
}

/// Splits source text into tokens. A trailing `Eof` token is always present.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor {
        chars: source.char_indices().peekable(),
        src: source,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();

    loop {
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else if c == '#' {
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            } else {
                break;
            }
        }

        let pos = cur.pos();
        let start = cur.offset();
        let Some(c) = cur.peek() else {
            tokens.push(Token {
                kind: TokenKind::Eof,
                text: String::new(),
                pos,
            });
            return Ok(tokens);
        };

        let kind = if c.is_ascii_alphabetic() || c == '_' {
            while matches!(cur.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                cur.bump();
            }
            let word = &source[start..cur.offset()];
            match Keyword::lookup(word) {
                Some(k) => TokenKind::Keyword(k),
                None => TokenKind::Ident(word.to_string()),
            }
        } else if c.is_ascii_digit() {
            lex_number(&mut cur, pos)?
        } else if c == '"' || c == '\'' {
            lex_string(&mut cur, pos)?
        } else {
            let rest = &source[start..];
            let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) else {
                return Err(LexError {
                    pos,
                    message: format!("unexpected character `{c}`"),
                });
            };
            for _ in 0..sym.len() {
                cur.bump();
            }
            TokenKind::Symbol(sym)
        };

        let end = cur.offset();
        tokens.push(Token {
            kind,
            text: source[start..end].to_string(),
            pos,
        });
    }
}

fn lex_number(cur: &mut Cursor<'_>, pos: Position) -> Result<TokenKind, LexError> {
    let start = cur.offset();
    let mut is_float = false;
    while matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
        cur.bump();
    }
    // A fraction needs a digit after the dot, so `m1.this` style access and
    // list punctuation are never swallowed.
    if cur.peek() == Some('.') {
        let rest = &cur.src[cur.offset() + 1..];
        if rest.starts_with(|c: char| c.is_ascii_digit()) {
            is_float = true;
            cur.bump();
            while matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
                cur.bump();
            }
        }
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        let rest = &cur.src[cur.offset() + 1..];
        let digits = rest.strip_prefix(['+', '-']).unwrap_or(rest);
        if digits.starts_with(|c: char| c.is_ascii_digit()) {
            is_float = true;
            cur.bump();
            if matches!(cur.peek(), Some('+' | '-')) {
                cur.bump();
            }
            while matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
                cur.bump();
            }
        }
    }
    let text = &cur.src[start..cur.offset()];
    if is_float {
        text.parse::<f64>().map(TokenKind::Float).map_err(|e| LexError {
            pos,
            message: format!("invalid number `{text}`: {e}"),
        })
    } else {
        text.parse::<i64>().map(TokenKind::Int).map_err(|_| LexError {
            pos,
            message: format!("integer literal `{text}` out of range"),
        })
    }
}

fn lex_string(cur: &mut Cursor<'_>, pos: Position) -> Result<TokenKind, LexError> {
    let quote = cur.bump().unwrap();
    let mut out = String::new();
    loop {
        let Some(c) = cur.bump() else {
            return Err(LexError {
                pos,
                message: "unterminated string literal".into(),
            });
        };
        match c {
            c if c == quote => return Ok(TokenKind::Str(out)),
            '\\' => {
                let esc_pos = cur.pos();
                let Some(e) = cur.bump() else {
                    return Err(LexError {
                        pos,
                        message: "unterminated string literal".into(),
                    });
                };
                match e {
                    'n' => out.push('\n'),
                    't' => out.push('\t'),
                    'r' => out.push('\r'),
                    '0' => out.push('\0'),
                    '\\' | '"' | '\'' => out.push(e),
                    'u' => out.push(lex_unicode_escape(cur, esc_pos)?),
                    other => {
                        return Err(LexError {
                            pos: esc_pos,
                            message: format!("unknown escape `\\{other}`"),
                        })
                    }
                }
            }
            c => out.push(c),
        }
    }
}

// `\u{XXXX}`
fn lex_unicode_escape(cur: &mut Cursor<'_>, pos: Position) -> Result<char, LexError> {
    let bad = || LexError {
        pos,
        message: "malformed unicode escape".into(),
    };
    if cur.bump() != Some('{') {
        return Err(bad());
    }
    let mut hex = String::new();
    loop {
        match cur.bump() {
            Some('}') => break,
            Some(c) if c.is_ascii_hexdigit() && hex.len() < 6 => hex.push(c),
            _ => return Err(bad()),
        }
    }
    u32::from_str_radix(&hex, 16)
        .ok()
        .and_then(char::from_u32)
        .ok_or_else(bad)
}
