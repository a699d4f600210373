use num_bigint::BigInt;

use crate::error::{MfError, MfResult};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Int(BigInt),
    /// `3i`
    Imag(BigInt),
    Ident(String),
    Sym(char),
    Newline,
    Eof,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    /// Column just past the token.
    pub end: usize,
}

const SYMBOLS: &str = "+-*/^()[]{},;&=×";

pub fn lex(src: &str) -> MfResult<Vec<Token>> {
    let mut out = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = chars[start..i].iter().collect::<String>().parse().expect("digits");
                let imag = i < chars.len() && chars[i] == 'i' && !chars.get(i + 1).map_or(false, |d| d.is_alphanumeric() || *d == '_');
                let tok = if imag {
                    i += 1;
                    Tok::Imag(n)
                } else {
                    Tok::Int(n)
                };
                out.push(Token { tok, line: ln + 1, col, end: i + 1 });
                continue;
            }
            if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') && chars[i] != '×' {
                    i += 1;
                }
                out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: ln + 1, col, end: i + 1 });
                continue;
            }
            if SYMBOLS.contains(c) {
                i += 1;
                out.push(Token { tok: Tok::Sym(c), line: ln + 1, col, end: i + 1 });
                continue;
            }
            return Err(MfError::SyntaxError { line: ln + 1, col, msg: format!("unexpected character `{}`", c) });
        }
        out.push(Token { tok: Tok::Newline, line: ln + 1, col: chars.len() + 1, end: chars.len() + 1 });
    }
    let last = src.lines().count().max(1);
    out.push(Token { tok: Tok::Eof, line: last, col: 1, end: 1 });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens() {
        let t = lex("f = 2i*t^-1 # note\nx1 × y").unwrap();
        let kinds: Vec<Tok> = t.into_iter().map(|t| t.tok).collect();
        assert_eq!(kinds[2], Tok::Imag(BigInt::from(2)));
        assert!(kinds.contains(&Tok::Sym('×')));
        assert_eq!(kinds.iter().filter(|k| **k == Tok::Newline).count(), 2);
        assert!(matches!(lex("a ? b"), Err(MfError::SyntaxError { line: 1, col: 3, .. })));
    }
}
