//! Tokenizer for rule expressions and predicate heads.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    LParen,
    RParen,
    Comma,
    Implies,
    Not,
    And,
    Or,
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Number(s) => write!(f, "number `{s}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Implies => f.write_str("`=>`"),
            Tok::Not => f.write_str("`not`"),
            Tok::And => f.write_str("`and`"),
            Tok::Or => f.write_str("`or`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

/// A token with its character span `[start, end)` (0-based char offsets).
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub start: usize,
    pub end: usize,
}

/// Lexing failure: 0-based char offset plus a description of the offending input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LexError {
    pub offset: usize,
    pub expected: String,
    pub found: String,
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

pub(crate) fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
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
            ',' => {
                i += 1;
                Tok::Comma
            }
            '+' => {
                i += 1;
                Tok::Plus
            }
            '-' => {
                i += 1;
                Tok::Minus
            }
            '*' => {
                i += 1;
                Tok::Star
            }
            '/' => {
                i += 1;
                Tok::Slash
            }
            '¬' => {
                i += 1;
                Tok::Not
            }
            '∧' => {
                i += 1;
                Tok::And
            }
            '∨' => {
                i += 1;
                Tok::Or
            }
            '⇒' => {
                i += 1;
                Tok::Implies
            }
            '=' => {
                if chars.get(i + 1) == Some(&'>') {
                    i += 2;
                    Tok::Implies
                } else {
                    return Err(LexError {
                        offset: i,
                        expected: "`=>`".into(),
                        found: "`=`".into(),
                    });
                }
            }
            '"' | '\'' => {
                let quote = c;
                i += 1;
                let mut text = String::new();
                loop {
                    match chars.get(i) {
                        None => {
                            return Err(LexError {
                                offset: start,
                                expected: format!("closing {quote}"),
                                found: "end of input".into(),
                            })
                        }
                        Some('\\') => match chars.get(i + 1) {
                            Some(&e) if e == quote || e == '\\' => {
                                text.push(e);
                                i += 2;
                            }
                            _ => {
                                return Err(LexError {
                                    offset: i,
                                    expected: format!("escape `\\{quote}` or `\\\\`"),
                                    found: "`\\`".into(),
                                })
                            }
                        },
                        Some(&ch) if ch == quote => {
                            i += 1;
                            break;
                        }
                        Some(&ch) => {
                            text.push(ch);
                            i += 1;
                        }
                    }
                }
                Tok::Str(text)
            }
            c if c.is_ascii_digit() => {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if chars.get(i) == Some(&'.') {
                    if !chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                        return Err(LexError {
                            offset: i + 1,
                            expected: "digit after decimal point".into(),
                            found: describe(chars.get(i + 1)),
                        });
                    }
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if chars.get(i).is_some_and(|&d| is_ident_continue(d)) {
                    return Err(LexError {
                        offset: i,
                        expected: "delimiter after number".into(),
                        found: describe(chars.get(i)),
                    });
                }
                Tok::Number(chars[start..i].iter().collect())
            }
            c if is_ident_start(c) => {
                while i < chars.len() && is_ident_continue(chars[i]) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                match word.as_str() {
                    "not" => Tok::Not,
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    _ => Tok::Ident(word),
                }
            }
            other => {
                return Err(LexError {
                    offset: i,
                    expected: "a token".into(),
                    found: describe(Some(&other)),
                })
            }
        };
        out.push(Token { tok, start, end: i });
    }
    out.push(Token {
        tok: Tok::Eof,
        start: chars.len(),
        end: chars.len(),
    });
    Ok(out)
}

fn describe(c: Option<&char>) -> String {
    match c {
        None => "end of input".into(),
        Some(c) => format!("{c:?}"),
    }
}
