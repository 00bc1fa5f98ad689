use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::expr::Rational;
use crate::float::parse_decimal;

#[derive(Clone, Debug, PartialEq)]
pub(super) enum Tok {
    Number(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eof,
}

#[derive(Clone, Debug)]
pub(super) struct Token {
    pub tok: Tok,
    /// Character offset of the first character.
    pub pos: usize,
    pub text: String,
}

pub(super) struct LexError {
    pub pos: usize,
    pub text: String,
    pub message: String,
}

pub(super) fn tokenize(input: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, pos: start, text: c.to_string() });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent only when digits follow
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value = parse_decimal(&text).ok_or_else(|| LexError {
                pos: start,
                text: text.clone(),
                message: alloc::format!("malformed number '{text}'"),
            })?;
            out.push(Token { tok: Tok::Number(value), pos: start, text });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Token { tok: Tok::Ident(text.clone()), pos: start, text });
            continue;
        }
        return Err(LexError {
            pos: start,
            text: c.to_string(),
            message: alloc::format!("unexpected character '{c}'"),
        });
    }
    out.push(Token { tok: Tok::Eof, pos: chars.len(), text: String::new() });
    Ok(out)
}
