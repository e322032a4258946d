use crate::error::{Error, Result};
use num_bigint::BigInt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Int(BigInt),
    Ident(String),
    /// The literal `2N`.
    TwoN,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    At,
    Dot,
    Pipe,
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let is_ident_char = |k: usize| k < chars.len() && (chars[k].is_ascii_alphanumeric() || chars[k] == '_');
            if i < chars.len() && chars[i] == 'N' && !is_ident_char(i + 1) {
                if digits != "2" {
                    return Err(Error::Syntax { line, col, msg: format!("expected 2N, found {digits}N") });
                }
                i += 1;
                Tok::TwoN
            } else if is_ident_char(i) {
                return Err(Error::Syntax { line, col, msg: "identifier cannot start with a digit".into() });
            } else {
                Tok::Int(digits.parse().expect("ascii digits"))
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else {
            i += 1;
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '@' => Tok::At,
                '.' => Tok::Dot,
                '|' => Tok::Pipe,
                _ => return Err(Error::Syntax { line, col, msg: format!("unexpected character {c:?}") }),
            }
        };
        col += i - start;
        out.push(Token { tok, span });
    }
    out.push(Token { tok: Tok::Eof, span: Span { line, col } });
    Ok(out)
}
