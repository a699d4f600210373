use std::fmt;

use num_bigint::BigInt;

use crate::valfield::{fmt_gamma, Gamma};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Tensor,
}

impl BinOp {
    fn prec(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            _ => 2,
        }
    }

    fn sym(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Tensor => "×",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(BigInt),
    Imag(BigInt),
    T,
    I,
    E,
    All,
    W,
    /// `x1` is `Var(0)`; `x`, `y` alias `x1`, `x2`.
    Var(usize),
    Name(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Gamma),
    O(Gamma),
    C(Gamma),
    Exp(Box<Expr>),
    Zero(usize),
    Call(String, Vec<Expr>),
    Packet { arity: Option<usize>, support: Vec<(Expr, Expr)>, phase: Box<Expr>, coeff: Box<Expr> },
    List(Vec<Expr>),
}

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Bin(op, _, _) => op.prec(),
            Expr::Neg(_) => 3,
            Expr::Pow(_, _) => 4,
            _ => 5,
        }
    }
}

fn bracket_gamma(g: Gamma) -> String {
    fmt_gamma(g)
}

fn exponent(g: Gamma) -> String {
    if g.is_integer() {
        fmt_gamma(g)
    } else {
        format!("({})", fmt_gamma(g))
    }
}

fn join(xs: &[Expr]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(n) => write!(f, "{}", n),
            Expr::Imag(n) => write!(f, "{}i", n),
            Expr::T => write!(f, "t"),
            Expr::I => write!(f, "i"),
            Expr::E => write!(f, "e"),
            Expr::All => write!(f, "all"),
            Expr::W => write!(f, "w"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Name(s) => write!(f, "{}", s),
            Expr::Neg(x) => {
                if x.prec() < 3 {
                    write!(f, "-({})", x)
                } else {
                    write!(f, "-{}", x)
                }
            }
            Expr::Bin(op, l, r) => {
                let ls = if l.prec() < op.prec() { format!("({})", l) } else { l.to_string() };
                let rs = if r.prec() <= op.prec() { format!("({})", r) } else { r.to_string() };
                write!(f, "{} {} {}", ls, op.sym(), rs)
            }
            Expr::Pow(b, g) => {
                if b.prec() < 5 {
                    write!(f, "({})^{}", b, exponent(*g))
                } else {
                    write!(f, "{}^{}", b, exponent(*g))
                }
            }
            Expr::O(g) => write!(f, "O[{}]", bracket_gamma(*g)),
            Expr::C(g) => write!(f, "C[{}]", bracket_gamma(*g)),
            Expr::Exp(x) => write!(f, "exp{{{}}}", x),
            Expr::Zero(n) => write!(f, "zero[{}]", n),
            Expr::Call(name, args) => write!(f, "{}({})", name, join(args)),
            Expr::Packet { arity, support, phase, coeff } => {
                let sup = if support.is_empty() {
                    "all".to_string()
                } else {
                    support.iter().map(|(a, b)| format!("in({}, {})", a, b)).collect::<Vec<_>>().join(" & ")
                };
                match arity {
                    Some(n) => write!(f, "packet[{}]({}; {}; {})", n, sup, phase, coeff),
                    None => write!(f, "packet({}; {}; {})", sup, phase, coeff),
                }
            }
            Expr::List(xs) => write!(f, "[{}]", join(xs)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Vf,
    Ball,
    Fn,
    Dist,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Vf => "vf",
            Kind::Ball => "ball",
            Kind::Fn => "fn",
            Kind::Dist => "dist",
        }
    }

    pub fn from_name(s: &str) -> Option<Kind> {
        match s {
            "vf" => Some(Kind::Vf),
            "ball" => Some(Kind::Ball),
            "fn" => Some(Kind::Fn),
            "dist" => Some(Kind::Dist),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Def { kind: Option<Kind>, name: String, expr: Expr },
    Option { key: String, value: Expr },
    /// `verify inversion f, g mod H`: `sub` holds the identity name.
    Cmd { name: String, sub: Option<String>, args: Vec<Expr>, clauses: Vec<(String, Expr)> },
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Def { kind, name, expr } => match kind {
                Some(k) => write!(f, "{} {} = {}", k.name(), name, expr),
                None => write!(f, "{} = {}", name, expr),
            },
            Stmt::Option { key, value } => write!(f, "option {} {}", key, value),
            Stmt::Cmd { name, sub, args, clauses } => {
                write!(f, "{}", name)?;
                if let Some(s) = sub {
                    write!(f, " {}", s)?;
                }
                if !args.is_empty() {
                    write!(f, " {}", join(args))?;
                }
                for (k, v) in clauses {
                    write!(f, " {} {}", k, v)?;
                }
                Ok(())
            }
        }
    }
}

/// A statement with its source line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Line {
    pub line: usize,
    pub stmt: Stmt,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Script {
    pub lines: Vec<Line>,
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{}", l.stmt)?;
        }
        Ok(())
    }
}

impl Script {
    /// Statements only, for comparisons that ignore layout.
    pub fn stmts(&self) -> Vec<&Stmt> {
        self.lines.iter().map(|l| &l.stmt).collect()
    }
}
