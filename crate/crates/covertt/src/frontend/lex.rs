//! Tokenizer for `.ctt` source. Comments run from `--` to end of line.

use super::{Diagnostic, Severity, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    KwData,
    KwDef,
    KwMatch,
    KwTo,
    KwType,
    KwPi,
    KwRefl,
    KwEq,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    ColonEq,
    Dot,
    Pipe,
    FatArrow,
    Backslash,
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Tok::Ident(n) => return write!(f, "identifier {n}"),
            Tok::KwData => "data",
            Tok::KwDef => "def",
            Tok::KwMatch => "match",
            Tok::KwTo => "to",
            Tok::KwType => "Type",
            Tok::KwPi => "Pi",
            Tok::KwRefl => "refl",
            Tok::KwEq => "Eq",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::ColonEq => ":=",
            Tok::Dot => ".",
            Tok::Pipe => "|",
            Tok::FatArrow => "=>",
            Tok::Backslash => "\\",
            Tok::Eof => "end of input",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

pub fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = text[i..].chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if c == '-' && text[i..].starts_with("--") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = match c {
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            '{' => {
                i += 1;
                Tok::LBrace
            }
            '}' => {
                i += 1;
                Tok::RBrace
            }
            ',' => {
                i += 1;
                Tok::Comma
            }
            ';' => {
                i += 1;
                Tok::Semi
            }
            '|' => {
                i += 1;
                Tok::Pipe
            }
            '\\' => {
                i += 1;
                Tok::Backslash
            }
            '.' => {
                i += 1;
                Tok::Dot
            }
            ':' => {
                if text[i..].starts_with(":=") {
                    i += 2;
                    Tok::ColonEq
                } else {
                    i += 1;
                    Tok::Colon
                }
            }
            '=' => {
                if text[i..].starts_with("=>") {
                    i += 2;
                    Tok::FatArrow
                } else {
                    return Err(Diagnostic {
                        severity: Severity::Error,
                        message: "expected => (bare = is not an operator)".into(),
                        span: Span {
                            start,
                            end: start + 1,
                        },
                        rule: None,
                    });
                }
            }
            c if is_ident_start(c) => {
                let mut j = i;
                while j < bytes.len() {
                    let ch = text[j..].chars().next().unwrap();
                    if is_ident_char(ch) {
                        j += ch.len_utf8();
                    } else {
                        break;
                    }
                }
                let word = &text[i..j];
                i = j;
                match word {
                    "data" => Tok::KwData,
                    "def" => Tok::KwDef,
                    "match" => Tok::KwMatch,
                    "to" => Tok::KwTo,
                    "Type" => Tok::KwType,
                    "Pi" => Tok::KwPi,
                    "refl" => Tok::KwRefl,
                    "Eq" => Tok::KwEq,
                    _ => Tok::Ident(word.to_string()),
                }
            }
            other => {
                return Err(Diagnostic {
                    severity: Severity::Error,
                    message: format!("unexpected character {other:?}"),
                    span: Span {
                        start,
                        end: start + other.len_utf8(),
                    },
                    rule: None,
                })
            }
        };
        out.push(Token {
            tok,
            span: Span { start, end: i },
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span {
            start: bytes.len(),
            end: bytes.len(),
        },
    });
    Ok(out)
}
