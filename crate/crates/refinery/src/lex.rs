//! Tokens of the `.rfn` format.

use std::fmt;

use num_bigint::BigInt;
use refinery_core::error::Loc;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub loc: Loc,
}

/// Longest first, so that `=>` wins over `=`.
const SYMBOLS: &[&str] = &[
    "=>", "->", "&&", "||", "<=", ">=", "!=", "(", ")", "{", "}", "[", "]", ",", ";", ":", "=",
    "@", "|", "+", "-", "*", "/", "<", ">", ".", "_",
];

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at {line}:{col}: expected {expected}, found {found}")]
pub struct SyntaxError {
    pub line: u32,
    pub col: u32,
    pub expected: String,
    pub found: String,
}

impl SyntaxError {
    pub fn new(loc: Loc, expected: impl Into<String>, found: impl Into<String>) -> Self {
        SyntaxError {
            line: loc.line,
            col: loc.col,
            expected: expected.into(),
            found: found.into(),
        }
    }

    pub fn loc(&self) -> Loc {
        Loc::new(self.line, self.col)
    }
}

pub fn lex(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut out = Vec::new();
    let (mut line, mut col) = (1u32, 1u32);
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let loc = Loc::new(line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || (c == '_' && chars.get(i + 1).is_some_and(|d| is_ident(*d))) {
            let start = i;
            while i < chars.len() && is_ident(chars[i]) {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += (i - start) as u32;
            out.push(Token {
                tok: Tok::Ident(s),
                loc,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += (i - start) as u32;
            out.push(Token {
                tok: Tok::Int(s.parse().expect("digits")),
                loc,
            });
            continue;
        }
        let rest = &chars[i..];
        match SYMBOLS
            .iter()
            .find(|s| rest.len() >= s.len() && s.chars().zip(rest).all(|(a, b)| a == *b))
        {
            Some(s) => {
                i += s.len();
                col += s.len() as u32;
                out.push(Token {
                    tok: Tok::Sym(s),
                    loc,
                });
            }
            None => {
                return Err(SyntaxError::new(loc, "a token", format!("character {c:?}")));
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        loc: Loc::new(line, col),
    });
    Ok(out)
}

fn is_ident(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn symbols_and_comments() {
        assert_eq!(
            toks("Nil => 0; -- trailing\nx1 <= n'"),
            vec![
                Tok::Ident("Nil".into()),
                Tok::Sym("=>"),
                Tok::Int(0.into()),
                Tok::Sym(";"),
                Tok::Ident("x1".into()),
                Tok::Sym("<="),
                Tok::Ident("n'".into()),
                Tok::Eof
            ]
        );
        assert_eq!(
            toks("_ _x"),
            vec![Tok::Sym("_"), Tok::Ident("_x".into()), Tok::Eof]
        );
    }

    #[test]
    fn positions() {
        let ts = lex("a\n  b").unwrap();
        assert_eq!((ts[1].loc.line, ts[1].loc.col), (2, 3));
        let e = lex("a\n #").unwrap_err();
        assert_eq!((e.line, e.col), (2, 2));
    }
}
