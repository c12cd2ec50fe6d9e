//! Token scanner for the OpenQASM 2 subset, with line/column tracking.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Real(f64),
    Str(String),
    Openqasm,
    Pi,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Arrow,
    EqEq,
    Plus,
    Minus,
    Star,
    Slash,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Int(v) => write!(f, "{v}"),
            Tok::Real(v) => write!(f, "{v}"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Openqasm => write!(f, "OPENQASM"),
            Tok::Pi => write!(f, "pi"),
            Tok::LBrace => write!(f, "{{"),
            Tok::RBrace => write!(f, "}}"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::LBracket => write!(f, "["),
            Tok::RBracket => write!(f, "]"),
            Tok::Semi => write!(f, ";"),
            Tok::Comma => write!(f, ","),
            Tok::Arrow => write!(f, "->"),
            Tok::EqEq => write!(f, "=="),
            Tok::Plus => write!(f, "+"),
            Tok::Minus => write!(f, "-"),
            Tok::Star => write!(f, "*"),
            Tok::Slash => write!(f, "/"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone)]
pub struct Spanned {
    pub tok: Tok,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexError {
    pub pos: Pos,
    pub message: String,
}

/// A `// @name args...` comment, kept out of the token stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Pragma {
    pub name: String,
    pub args: Vec<String>,
    pub pos: Pos,
}

pub struct LexOutput {
    pub tokens: Vec<Spanned>,
    pub pragmas: Vec<Pragma>,
}

pub fn lex(src: &str) -> Result<LexOutput, LexError> {
    let mut tokens = Vec::new();
    let mut pragmas = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! advance {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        match c {
            ' ' | '\t' | '\r' | '\n' => advance!(),
            '/' if chars.get(i + 1) == Some(&'/') => {
                let start = i + 2;
                let mut end = start;
                while end < chars.len() && chars[end] != '\n' {
                    end += 1;
                }
                let comment: String = chars[start..end].iter().collect();
                let trimmed = comment.trim();
                if let Some(rest) = trimmed.strip_prefix('@') {
                    let mut parts = rest.split_whitespace();
                    if let Some(name) = parts.next() {
                        pragmas.push(Pragma {
                            name: name.to_string(),
                            args: parts.map(str::to_string).collect(),
                            pos,
                        });
                    }
                }
                while i < end {
                    advance!();
                }
            }
            '{' => {
                tokens.push(Spanned { tok: Tok::LBrace, pos });
                advance!();
            }
            '}' => {
                tokens.push(Spanned { tok: Tok::RBrace, pos });
                advance!();
            }
            '(' => {
                tokens.push(Spanned { tok: Tok::LParen, pos });
                advance!();
            }
            ')' => {
                tokens.push(Spanned { tok: Tok::RParen, pos });
                advance!();
            }
            '[' => {
                tokens.push(Spanned { tok: Tok::LBracket, pos });
                advance!();
            }
            ']' => {
                tokens.push(Spanned { tok: Tok::RBracket, pos });
                advance!();
            }
            ';' => {
                tokens.push(Spanned { tok: Tok::Semi, pos });
                advance!();
            }
            ',' => {
                tokens.push(Spanned { tok: Tok::Comma, pos });
                advance!();
            }
            '+' => {
                tokens.push(Spanned { tok: Tok::Plus, pos });
                advance!();
            }
            '*' => {
                tokens.push(Spanned { tok: Tok::Star, pos });
                advance!();
            }
            '/' => {
                tokens.push(Spanned { tok: Tok::Slash, pos });
                advance!();
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    tokens.push(Spanned { tok: Tok::Arrow, pos });
                    advance!();
                    advance!();
                } else {
                    tokens.push(Spanned { tok: Tok::Minus, pos });
                    advance!();
                }
            }
            '=' => {
                if chars.get(i + 1) == Some(&'=') {
                    tokens.push(Spanned { tok: Tok::EqEq, pos });
                    advance!();
                    advance!();
                } else {
                    return Err(LexError { pos, message: "expected '=='".into() });
                }
            }
            '"' => {
                advance!();
                let start = i;
                while i < chars.len() && chars[i] != '"' {
                    advance!();
                }
                if i >= chars.len() {
                    return Err(LexError { pos, message: "unterminated string".into() });
                }
                let s: String = chars[start..i].iter().collect();
                advance!();
                tokens.push(Spanned { tok: Tok::Str(s), pos });
            }
            '0'..='9' | '.' => {
                let start = i;
                let mut is_real = false;
                while i < chars.len() {
                    match chars[i] {
                        '0'..='9' => advance!(),
                        '.' if !is_real => {
                            is_real = true;
                            advance!();
                        }
                        'e' | 'E' => {
                            is_real = true;
                            advance!();
                            if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                                advance!();
                            }
                        }
                        _ => break,
                    }
                }
                let text: String = chars[start..i].iter().collect();
                if is_real {
                    let v = text
                        .parse::<f64>()
                        .map_err(|_| LexError { pos, message: format!("bad real literal '{text}'") })?;
                    tokens.push(Spanned { tok: Tok::Real(v), pos });
                } else {
                    let v = text
                        .parse::<i64>()
                        .map_err(|_| LexError { pos, message: format!("bad integer literal '{text}'") })?;
                    tokens.push(Spanned { tok: Tok::Int(v), pos });
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    advance!();
                }
                let word: String = chars[start..i].iter().collect();
                let tok = match word.as_str() {
                    "OPENQASM" => Tok::Openqasm,
                    "pi" => Tok::Pi,
                    _ => Tok::Ident(word),
                };
                tokens.push(Spanned { tok, pos });
            }
            other => {
                return Err(LexError { pos, message: format!("unexpected character '{other}'") });
            }
        }
    }
    Ok(LexOutput { tokens, pragmas })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenises_a_statement() {
        let out = lex("rz(3*pi/32) q[0];").unwrap();
        let kinds: Vec<String> = out.tokens.iter().map(|t| t.tok.to_string()).collect();
        assert_eq!(kinds, vec!["rz", "(", "3", "*", "pi", "/", "32", ")", "q", "[", "0", "]", ";"]);
    }

    #[test]
    fn captures_pragmas_and_skips_comments() {
        let out = lex("// plain comment\n// @discard q[0] q[1]\nh q[0]; // trailing\n").unwrap();
        assert_eq!(out.pragmas.len(), 1);
        assert_eq!(out.pragmas[0].name, "discard");
        assert_eq!(out.pragmas[0].args, vec!["q[0]", "q[1]"]);
        assert_eq!(out.tokens.len(), 6);
    }

    #[test]
    fn positions_are_tracked() {
        let out = lex("h q[0];\nmeasure q[0] -> c[0];").unwrap();
        let measure = out.tokens.iter().find(|t| t.tok == Tok::Ident("measure".into())).unwrap();
        assert_eq!(measure.pos, Pos { line: 2, col: 1 });
    }

    #[test]
    fn real_and_scientific_literals() {
        let out = lex("rz(0.2945243112740431) q[0]; rz(1e-3) q[1];").unwrap();
        assert!(matches!(out.tokens[2].tok, Tok::Real(v) if (v - 0.2945243112740431).abs() < 1e-18));
    }
}
