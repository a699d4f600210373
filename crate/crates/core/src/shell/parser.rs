use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::ast::{BinOp, Expr, Kind, Line, Script, Stmt};
use super::lexer::{lex, Tok, Token};
use crate::error::{MfError, MfResult};
use crate::valfield::Gamma;

pub const COMMANDS: &[&str] = &[
    "print",
    "integrate",
    "fourier",
    "convolve",
    "verify",
    "weil",
    "limit-set",
    "newton",
    "jacobian",
    "oracle",
    "dist-eval",
    "dist-apply",
    "dist-support",
];

pub const CLAUSES: &[&str] = &["mod", "order", "at", "form"];

const RESERVED: &[&str] = &["t", "i", "e", "x", "y", "all", "w", "option", "mod", "order", "at", "form"];

pub fn is_reserved(name: &str) -> bool {
    RESERVED.contains(&name) || var_index(name).is_some() || COMMANDS.contains(&name) || Kind::from_name(name).is_some()
}

fn var_index(s: &str) -> Option<usize> {
    match s {
        "x" => Some(0),
        "y" => Some(1),
        _ => {
            let d = s.strip_prefix('x')?;
            if d.is_empty() || !d.chars().all(|c| c.is_ascii_digit()) || d.starts_with('0') {
                return None;
            }
            let n: usize = d.parse().ok()?;
            Some(n - 1)
        }
    }
}

fn sym_char(t: &Tok) -> char {
    match t {
        Tok::Sym(c) => *c,
        _ => '?',
    }
}

/// Upper bound on `packet[n]`, `zero[n]`, `x<n>` arities accepted by the parser.
pub const MAX_ARITY: usize = 16;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// Opening brackets not yet closed.
    open: Vec<Token>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Token {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        match t.tok {
            Tok::Sym('(' | '[' | '{') => self.open.push(t.clone()),
            Tok::Sym(')' | ']' | '}') => {
                self.open.pop();
            }
            _ => {}
        }
        t
    }

    fn err<T>(&self, t: &Token, msg: impl Into<String>) -> MfResult<T> {
        if matches!(t.tok, Tok::Newline | Tok::Eof) {
            if let Some(o) = self.open.last() {
                if o.line == t.line {
                    return Err(MfError::SyntaxError { line: o.line, col: o.col, msg: format!("unclosed `{}`", sym_char(&o.tok)) });
                }
            }
        }
        Err(MfError::SyntaxError { line: t.line, col: t.col, msg: msg.into() })
    }

    fn is_sym(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    fn expect_sym(&mut self, c: char) -> MfResult<Token> {
        let t = self.next();
        if t.tok == Tok::Sym(c) {
            Ok(t)
        } else {
            self.err(&t, format!("expected `{}`", c))
        }
    }

    fn ident(&mut self) -> MfResult<String> {
        let t = self.next();
        match t.tok {
            Tok::Ident(s) => Ok(s),
            _ => self.err(&t, "expected a name"),
        }
    }

    /// A name possibly joined by `-` with no spaces, as in `limit-set`.
    fn hyphen_word(&mut self) -> MfResult<String> {
        let mut s = self.ident()?;
        while self.is_sym('-') {
            let dash = self.peek().clone();
            let nxt = self.peek_at(1).clone();
            let prev_end = self.toks[self.pos - 1].end;
            if dash.col == prev_end && nxt.col == dash.end && matches!(nxt.tok, Tok::Ident(_)) && nxt.line == dash.line {
                self.next();
                s.push('-');
                s.push_str(&self.ident()?);
            } else {
                break;
            }
        }
        Ok(s)
    }

    fn at_end(&self) -> bool {
        matches!(self.peek().tok, Tok::Newline | Tok::Eof)
    }

    fn script(&mut self) -> MfResult<Script> {
        let mut lines = Vec::new();
        loop {
            match self.peek().tok {
                Tok::Eof => break,
                Tok::Newline => {
                    self.next();
                }
                _ => {
                    let line = self.peek().line;
                    let stmt = self.stmt()?;
                    if !self.at_end() {
                        let t = self.peek().clone();
                        return self.err(&t, "unexpected token after statement");
                    }
                    lines.push(Line { line, stmt });
                }
            }
        }
        Ok(Script { lines })
    }

    fn stmt(&mut self) -> MfResult<Stmt> {
        let start = self.peek().clone();
        let word = match &start.tok {
            Tok::Ident(_) => self.hyphen_word()?,
            _ => return self.err(&start, "expected a definition or a command"),
        };
        if word == "option" {
            let key = self.ident()?;
            let value = self.expr()?;
            return Ok(Stmt::Option { key, value });
        }
        if let Some(kind) = Kind::from_name(&word) {
            if matches!(self.peek().tok, Tok::Ident(_)) && self.peek_at(1).tok == Tok::Sym('=') {
                let t = self.peek().clone();
                let name = self.ident()?;
                if is_reserved(&name) {
                    return self.err(&t, format!("`{}` is reserved", name));
                }
                self.expect_sym('=')?;
                return Ok(Stmt::Def { kind: Some(kind), name, expr: self.expr()? });
            }
        }
        if self.is_sym('=') {
            if is_reserved(&word) {
                return self.err(&start, format!("`{}` is reserved", word));
            }
            self.next();
            return Ok(Stmt::Def { kind: None, name: word, expr: self.expr()? });
        }
        if !COMMANDS.contains(&word.as_str()) {
            return self.err(&start, format!("unknown command `{}`", word));
        }
        let sub = if word == "verify" { Some(self.hyphen_word()?) } else { None };
        let mut args = Vec::new();
        if !self.at_end() && !self.at_clause() {
            args.push(self.expr()?);
            while self.is_sym(',') {
                self.next();
                args.push(self.expr()?);
            }
        }
        let mut clauses = Vec::new();
        while self.at_clause() {
            let k = self.ident()?;
            clauses.push((k, self.expr()?));
        }
        Ok(Stmt::Cmd { name: word, sub, args, clauses })
    }

    fn at_clause(&self) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if CLAUSES.contains(&s.as_str()))
    }

    pub fn expr(&mut self) -> MfResult<Expr> {
        let mut l = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(l),
            };
            self.next();
            let r = self.term()?;
            l = Expr::Bin(op, Box::new(l), Box::new(r));
        }
    }

    fn term(&mut self) -> MfResult<Expr> {
        let mut l = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                Tok::Sym('×') => BinOp::Tensor,
                _ => return Ok(l),
            };
            self.next();
            let r = self.unary()?;
            l = Expr::Bin(op, Box::new(l), Box::new(r));
        }
    }

    fn unary(&mut self) -> MfResult<Expr> {
        if self.is_sym('-') {
            self.next();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> MfResult<Expr> {
        let base = self.atom()?;
        if self.is_sym('^') {
            self.next();
            let g = if self.is_sym('(') {
                self.next();
                let g = self.gamma()?;
                self.expect_sym(')')?;
                g
            } else {
                self.signed_int()?
            };
            return Ok(Expr::Pow(Box::new(base), g));
        }
        Ok(base)
    }

    fn small_int(&mut self) -> MfResult<i64> {
        let t = self.next();
        match &t.tok {
            Tok::Int(n) => match n.to_i64() {
                Some(k) if k < (1 << 40) => Ok(k),
                _ => self.err(&t, "integer too large"),
            },
            _ => self.err(&t, "expected an integer"),
        }
    }

    fn signed_int(&mut self) -> MfResult<Gamma> {
        let neg = if self.is_sym('-') {
            self.next();
            true
        } else {
            false
        };
        let k = self.small_int()?;
        Ok(Gamma::from_integer(if neg { -k } else { k }))
    }

    /// `-3`, `1/2`, `-5/3`.
    fn gamma(&mut self) -> MfResult<Gamma> {
        let n = self.signed_int()?;
        if self.is_sym('/') {
            let t = self.next();
            let d = self.small_int()?;
            if d == 0 {
                return self.err(&t, "zero denominator");
            }
            return Ok(n / Gamma::from_integer(d));
        }
        Ok(n)
    }

    fn arity(&mut self) -> MfResult<usize> {
        self.expect_sym('[')?;
        let t = self.peek().clone();
        let n = self.small_int()?;
        if n as usize > MAX_ARITY {
            return self.err(&t, "arity too large");
        }
        self.expect_sym(']')?;
        Ok(n as usize)
    }

    fn args(&mut self, close: char) -> MfResult<Vec<Expr>> {
        let mut out = Vec::new();
        if self.is_sym(close) {
            self.next();
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            let t = self.next();
            match t.tok {
                Tok::Sym(',') => continue,
                Tok::Sym(c) if c == close => return Ok(out),
                _ => return self.err(&t, format!("expected `,` or `{}`", close)),
            }
        }
    }

    fn atom(&mut self) -> MfResult<Expr> {
        let t = self.next();
        match t.tok.clone() {
            Tok::Int(n) => Ok(Expr::Int(n)),
            Tok::Imag(n) => Ok(Expr::Imag(n)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Sym('[') => Ok(Expr::List(self.args(']')?)),
            Tok::Ident(s) => self.named(&t, s),
            Tok::Newline | Tok::Eof => self.err(&t, "unexpected end of line"),
            _ => self.err(&t, "expected an expression"),
        }
    }

    fn named(&mut self, t: &Token, s: String) -> MfResult<Expr> {
        match s.as_str() {
            "t" => return Ok(Expr::T),
            "i" => return Ok(Expr::I),
            "e" => return Ok(Expr::E),
            "all" => return Ok(Expr::All),
            "w" => return Ok(Expr::W),
            "O" | "C" if self.is_sym('[') => {
                self.next();
                let g = self.gamma()?;
                self.expect_sym(']')?;
                return Ok(if s == "O" { Expr::O(g) } else { Expr::C(g) });
            }
            "exp" if self.is_sym('{') => {
                self.next();
                let e = self.expr()?;
                self.expect_sym('}')?;
                return Ok(Expr::Exp(Box::new(e)));
            }
            "zero" if self.is_sym('[') => return Ok(Expr::Zero(self.arity()?)),
            "packet" if self.is_sym('[') || self.is_sym('(') => return self.packet(),
            _ => {}
        }
        if let Some(k) = var_index(&s) {
            if k >= MAX_ARITY {
                return self.err(t, "variable index too large");
            }
            return Ok(Expr::Var(k));
        }
        if self.is_sym('(') {
            self.next();
            let args = self.args(')')?;
            return Ok(Expr::Call(s, args));
        }
        Ok(Expr::Name(s))
    }

    fn packet(&mut self) -> MfResult<Expr> {
        let arity = if self.is_sym('[') { Some(self.arity()?) } else { None };
        self.expect_sym('(')?;
        let mut support = Vec::new();
        if matches!(&self.peek().tok, Tok::Ident(s) if s == "all") && self.peek_at(1).tok == Tok::Sym(';') {
            self.next();
        } else {
            loop {
                let t = self.next();
                if t.tok != Tok::Ident("in".into()) {
                    return self.err(&t, "expected `in(form, ball)` or `all`");
                }
                self.expect_sym('(')?;
                let a = self.expr()?;
                self.expect_sym(',')?;
                let b = self.expr()?;
                self.expect_sym(')')?;
                support.push((a, b));
                if self.is_sym('&') {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect_sym(';')?;
        let phase = self.expr()?;
        self.expect_sym(';')?;
        let coeff = self.expr()?;
        self.expect_sym(')')?;
        Ok(Expr::Packet { arity, support, phase: Box::new(phase), coeff: Box::new(coeff) })
    }
}

pub fn parse(src: &str) -> MfResult<Script> {
    let toks = lex(src)?;
    Parser { toks, pos: 0, open: Vec::new() }.script()
}

/// A single expression, the whole input.
pub fn parse_expr(src: &str) -> MfResult<Expr> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, open: Vec::new() };
    while p.peek().tok == Tok::Newline {
        p.next();
    }
    let e = p.expr()?;
    while p.peek().tok == Tok::Newline {
        p.next();
    }
    if p.peek().tok != Tok::Eof {
        let t = p.peek().clone();
        return p.err(&t, "unexpected trailing input");
    }
    Ok(e)
}

pub fn int_value(e: &Expr) -> Option<BigInt> {
    match e {
        Expr::Int(n) => Some(n.clone()),
        Expr::Neg(x) => int_value(x).map(|n| -n),
        _ => None,
    }
}

pub fn is_zero_int(e: &Expr) -> bool {
    int_value(e).map_or(false, |n| n.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(src: &str) {
        let a = parse(src).unwrap();
        let printed = a.to_string();
        let b = parse(&printed).unwrap();
        assert_eq!(a.stmts(), b.stmts(), "{}", printed);
    }

    #[test]
    fn definitions_and_commands() {
        let s = parse("f = chi(oball(0,1)) * expchar(t^-1 * x1)\nverify inversion f").unwrap();
        assert_eq!(s.lines.len(), 2);
        assert!(matches!(&s.lines[1].stmt, Stmt::Cmd { name, sub: Some(v), .. } if name == "verify" && v == "inversion"));
        let e = parse("g = chi(oball(0,1,").unwrap_err();
        assert!(matches!(e, MfError::SyntaxError { line: 1, col: 14, .. }), "{:?}", e);
        assert!(parse("").unwrap().lines.is_empty());
        let l = parse("limit-set x*y - 1").unwrap();
        assert!(matches!(&l.lines[0].stmt, Stmt::Cmd { name, .. } if name == "limit-set"));
    }

    #[test]
    fn precedence() {
        let e = parse_expr("1 + 2 * t^-1 - -x").unwrap();
        assert_eq!(e.to_string(), "1 + 2 * t^-1 - -x1");
        let p = parse_expr("-(a + b) * c ^ 2").unwrap();
        assert_eq!(p.to_string(), "-(a + b) * c^2");
        assert_eq!(parse_expr("a - (b - c)").unwrap().to_string(), "a - (b - c)");
        assert_eq!(parse_expr("(a - b) - c").unwrap().to_string(), "a - b - c");
        assert_eq!(parse_expr("t^(1/2)").unwrap(), Expr::Pow(Box::new(Expr::T), Gamma::new(1, 2)));
    }

    #[test]
    fn round_trips() {
        round_trip("fn f = packet[2](in(x1 - t*x2, oball(0, 1)) & in(x2, cball(0, -1/2)); x1*x2; (O[1]^2*C[-1]*e^-1)*exp{t^-1})");
        round_trip("d = fourier(regular(chi(cball(0, 0))))\ndist-eval d, [1], 2\noption probes 20");
        round_trip("weil [w, u(t), s(t^-1)], f\njacobian [2i*x, y^2], [1, t] # c\nverify poisson f mod cball(0,0) × oball(0,0)");
        round_trip("h = packet[1](all; 0; 1) + zero[1] - 3 * e");
        round_trip("k = packet(in(x2, oball((0+1i)*t^0, 1)); (1/2)*t^-1*x1; 1)");
    }
}
