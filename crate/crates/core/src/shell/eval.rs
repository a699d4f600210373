use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value as Json};

use super::ast::{BinOp, Expr, Kind, Script, Stmt};
use crate::distrib::{support_bound_report, Dist, DistEngine};
use crate::error::{MfError, MfResult};
use crate::fourier::{
    check_convolution, check_inversion, check_plancherel, check_plancherel_classical, check_poisson,
    check_product_convolution, fourier, fourier0, FourierConfig, Group,
};
use crate::geometry::{annihilator, Affine, Ball, Constraint, Polyball};
use crate::integrator::{convolve, convolve_mod, integrate, integrate_with_form, MuFn};
use crate::motvalues::{CElem, MotElem};
use crate::newton::{jacobian, limit_set, newton_polygon, VFPoly};
use crate::padic::{oracle_check, PadicConfig};
use crate::report::{Report, Status};
use crate::valfield::{Gamma, VFElem, QI};
use crate::wavefn::{MotFn, Phase, ProbeConfig};
use crate::weil::{check_nu_convolution, verify_relations, weil_apply, Gen, SL2Word};

/// A runtime value.
#[derive(Clone, Debug)]
pub enum Value {
    /// Polynomials over VF; a constant one is a field element.
    Poly(VFPoly),
    C(CElem),
    /// `None` is all of VF.
    Ball(Option<Ball>),
    Polyball(Polyball),
    /// A flexible function takes its arity from the variables it mentions and
    /// widens to match the other operand.
    Fn { f: MotFn, flexible: bool },
    Dist(Dist),
    Gen(Gen),
    List(Vec<Value>),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Poly(p) if is_constant(p) => "vf",
            Value::Poly(_) => "polynomial",
            Value::C(_) => "value",
            Value::Ball(_) => "ball",
            Value::Polyball(_) => "polyball",
            Value::Fn { .. } => "fn",
            Value::Dist(_) => "dist",
            Value::Gen(_) => "generator",
            Value::List(_) => "list",
        }
    }

    fn vf(a: VFElem) -> Value {
        Value::Poly(VFPoly::constant(0, a))
    }

    fn fixed(f: MotFn) -> Value {
        Value::Fn { f, flexible: false }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Poly(p) => match const_of(p) {
                Some(a) => write!(f, "{}", a),
                None => write!(f, "{}", p),
            },
            Value::C(c) => write!(f, "{}", c),
            Value::Ball(None) => write!(f, "all"),
            Value::Ball(Some(b)) => write!(f, "{}", b),
            Value::Polyball(p) => write!(f, "{}", p),
            Value::Fn { f: g, .. } => write!(f, "{}", g),
            Value::Dist(d) => write!(f, "{}", d),
            Value::Gen(g) => write!(f, "{}", g),
            Value::List(xs) => {
                let s: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
                write!(f, "[{}]", s.join(", "))
            }
        }
    }
}

fn type_err<T>(what: &str, v: &Value) -> MfResult<T> {
    Err(MfError::Type(format!("expected {}, found {}", what, v.type_name())))
}

fn is_constant(p: &VFPoly) -> bool {
    p.terms().all(|(e, _)| e.iter().all(|k| *k == 0))
}

fn const_of(p: &VFPoly) -> Option<VFElem> {
    if !is_constant(p) {
        return None;
    }
    Some(p.terms().next().map(|(_, c)| c.clone()).unwrap_or_else(VFElem::zero))
}

fn poly_degree(p: &VFPoly) -> u32 {
    p.terms().map(|(e, _)| e.iter().sum::<u32>()).max().unwrap_or(0)
}

/// Number of variables actually used.
fn poly_arity(p: &VFPoly) -> usize {
    p.terms()
        .flat_map(|(e, _)| e.iter().enumerate().filter(|(_, k)| **k > 0).map(|(i, _)| i + 1))
        .max()
        .unwrap_or(0)
}

fn to_affine(p: &VFPoly) -> MfResult<Affine> {
    if poly_degree(p) > 1 {
        return Err(MfError::Type(format!("`{}` is not affine", p)));
    }
    let mut a = Affine::constant(VFElem::zero());
    for (e, c) in p.terms() {
        match e.iter().position(|k| *k == 1) {
            Some(i) => a = a.add(&Affine::term(i, c.clone())),
            None => a = a.add(&Affine::constant(c.clone())),
        }
    }
    Ok(a)
}

fn to_phase(p: &VFPoly) -> MfResult<Phase> {
    if poly_degree(p) > 2 {
        return Err(MfError::UnsupportedPhase(format!("degree of `{}` exceeds 2", p)));
    }
    let mut ph = Phase::zero();
    for (e, c) in p.terms() {
        let idx: Vec<usize> = e.iter().enumerate().flat_map(|(i, k)| std::iter::repeat(i).take(*k as usize)).collect();
        match idx.as_slice() {
            [] => ph = ph.add(&Phase::constant(c.clone())),
            [i] => ph.add_linear(*i, c),
            [i, j] if i != j => ph.add_quad(*i, *j, c),
            _ => return Err(MfError::UnsupportedPhase("square term".into())),
        }
    }
    Ok(ph)
}

fn as_vf(v: &Value) -> MfResult<VFElem> {
    match v {
        Value::Poly(p) => const_of(p).map_or_else(|| type_err("vf", v), Ok),
        _ => type_err("vf", v),
    }
}

fn as_gamma(v: &Value) -> MfResult<Gamma> {
    let a = as_vf(v)?;
    let q = a.as_constant().filter(|q| q.im.is_zero()).ok_or_else(|| MfError::Type(format!("`{}` is not rational", a)))?;
    match (q.re.numer().to_i64(), q.re.denom().to_i64()) {
        (Some(n), Some(d)) => Ok(Rational64::new(n, d)),
        _ => Err(MfError::Invalid(format!("`{}` is out of range", a))),
    }
}

fn as_int(v: &Value) -> MfResult<i64> {
    let g = as_gamma(v)?;
    if g.is_integer() {
        Ok(g.to_integer())
    } else {
        Err(MfError::Type(format!("expected an integer, found {}", g)))
    }
}

fn as_c(v: &Value) -> MfResult<CElem> {
    match v {
        Value::C(c) => Ok(c.clone()),
        Value::Poly(_) => {
            let a = as_vf(v)?;
            match a.as_constant().and_then(|q| q.as_integer()) {
                Some(n) => Ok(CElem::from_mot(MotElem::int(1).scale(&n))),
                None => Err(MfError::Type(format!("`{}` is not an integer value", a))),
            }
        }
        _ => type_err("value", v),
    }
}

fn as_fn(v: &Value) -> MfResult<MotFn> {
    match v {
        Value::Fn { f, .. } => Ok(f.clone()),
        _ => type_err("fn", v),
    }
}

fn as_dist(v: &Value) -> MfResult<Dist> {
    match v {
        Value::Dist(d) => Ok(d.clone()),
        Value::Fn { f, .. } => Ok(Dist::regular(f.clone())),
        _ => type_err("dist", v),
    }
}

fn as_ball(v: &Value) -> MfResult<Ball> {
    match v {
        Value::Ball(Some(b)) => Ok(b.clone()),
        _ => type_err("ball", v),
    }
}

fn as_polyball(v: &Value) -> MfResult<Polyball> {
    match v {
        Value::Polyball(p) => Ok(p.clone()),
        Value::Ball(b) => Ok(Polyball(vec![b.clone()])),
        Value::List(xs) => Ok(Polyball(
            xs.iter()
                .map(|x| match x {
                    Value::Ball(b) => Ok(b.clone()),
                    _ => type_err("ball", x),
                })
                .collect::<MfResult<_>>()?,
        )),
        _ => type_err("polyball", v),
    }
}

fn as_point(v: &Value) -> MfResult<Vec<VFElem>> {
    match v {
        Value::List(xs) => xs.iter().map(as_vf).collect(),
        _ => Ok(vec![as_vf(v)?]),
    }
}

fn as_poly(v: &Value) -> MfResult<VFPoly> {
    match v {
        Value::Poly(p) => Ok(p.clone()),
        _ => type_err("polynomial", v),
    }
}

fn as_word(v: &Value) -> MfResult<SL2Word> {
    match v {
        Value::Gen(g) => Ok(SL2Word(vec![g.clone()])),
        Value::List(xs) => Ok(SL2Word(
            xs.iter()
                .map(|x| match x {
                    Value::Gen(g) => Ok(g.clone()),
                    _ => type_err("generator", x),
                })
                .collect::<MfResult<_>>()?,
        )),
        _ => type_err("word", v),
    }
}

fn c_pow(c: &CElem, k: i64) -> MfResult<CElem> {
    let base = if k < 0 {
        let m = c.as_mot().and_then(|m| m.monomial_inverse()).ok_or_else(|| MfError::NonMonomial(c.to_string()))?;
        CElem::from_mot(m)
    } else {
        c.clone()
    };
    let mut acc = CElem::one();
    for _ in 0..k.unsigned_abs() {
        acc = acc.mul(&base);
    }
    Ok(acc)
}

fn vf_pow(a: &VFElem, g: Gamma) -> MfResult<VFElem> {
    if g.is_integer() {
        let k = g.to_integer();
        let base = if k < 0 { a.inverse()? } else { a.clone() };
        let k = u32::try_from(k.unsigned_abs()).map_err(|_| MfError::Invalid("exponent too large".into()))?;
        return Ok(base.pow(k));
    }
    match a.as_monomial() {
        Some((c, v)) if c.is_one() => Ok(VFElem::t_pow(v * g)),
        _ => Err(MfError::Unsupported(format!("fractional power of `{}`", a))),
    }
}

/// Brings two functions to a common arity.
fn unify(a: (&MotFn, bool), b: (&MotFn, bool)) -> MfResult<(MotFn, MotFn, bool)> {
    let (f, ff) = a;
    let (g, gf) = b;
    let n = f.arity.max(g.arity);
    let ok = |h: &MotFn, flex: bool| flex || h.arity == n;
    if !ok(f, ff) || !ok(g, gf) {
        return Err(MfError::ArityMismatch { expected: f.arity, found: g.arity });
    }
    Ok((f.extend_arity(n)?, g.extend_arity(n)?, ff && gf))
}

fn binop(op: BinOp, l: Value, r: Value) -> MfResult<Value> {
    use Value::*;
    match (op, &l, &r) {
        (BinOp::Tensor, _, _) => tensor_values(&l, &r),
        (_, Poly(a), Poly(b)) => match op {
            BinOp::Add => Ok(Poly(a.add(b))),
            BinOp::Sub => Ok(Poly(a.sub(b))),
            BinOp::Mul => Ok(Poly(a.mul(b))),
            _ => {
                let d = as_vf(&r)?.inverse()?;
                Ok(Poly(a.mul(&VFPoly::constant(0, d))))
            }
        },
        (_, Fn { f, flexible: ff }, Fn { f: g, flexible: gf }) => {
            let (f, g, flex) = unify((f, *ff), (g, *gf))?;
            let h = match op {
                BinOp::Add => f.add(&g)?,
                BinOp::Sub => f.sub(&g)?,
                BinOp::Mul => f.mul(&g)?,
                _ => return Err(MfError::Type("functions cannot be divided".into())),
            };
            Ok(Fn { f: h, flexible: flex })
        }
        (_, Fn { f, flexible }, _) => {
            let c = as_c(&r)?;
            let h = match op {
                BinOp::Mul => f.scale(&c),
                BinOp::Div => f.scale(&c_pow(&c, -1)?),
                BinOp::Add => f.add(&MotFn::constant(f.arity, c))?,
                _ => f.sub(&MotFn::constant(f.arity, c))?,
            };
            Ok(Fn { f: h, flexible: *flexible })
        }
        (_, _, Fn { f, flexible }) => {
            let c = as_c(&l)?;
            let h = match op {
                BinOp::Mul => f.scale(&c),
                BinOp::Add => MotFn::constant(f.arity, c).add(f)?,
                BinOp::Sub => MotFn::constant(f.arity, c).sub(f)?,
                _ => return Err(MfError::Type("cannot divide by a function".into())),
            };
            Ok(Fn { f: h, flexible: *flexible })
        }
        _ => {
            let a = as_c(&l)?;
            let b = as_c(&r)?;
            Ok(C(match op {
                BinOp::Add => a.add(&b),
                BinOp::Sub => a.sub(&b),
                BinOp::Mul => a.mul(&b),
                _ => a.mul(&c_pow(&b, -1)?),
            }))
        }
    }
}

fn tensor_values(l: &Value, r: &Value) -> MfResult<Value> {
    match (l, r) {
        (Value::Fn { f, .. }, Value::Fn { f: g, .. }) => Ok(Value::fixed(f.tensor(g))),
        (Value::Dist(_), _) | (_, Value::Dist(_)) => Ok(Value::Dist(Dist::tensor(as_dist(l)?, as_dist(r)?))),
        _ => {
            let mut a = as_polyball(l)?;
            a.0.extend(as_polyball(r)?.0);
            Ok(Value::Polyball(a))
        }
    }
}

fn expect_args(name: &str, args: &[Value], lo: usize, hi: usize) -> MfResult<()> {
    if args.len() < lo || args.len() > hi {
        return Err(MfError::Invalid(format!("`{}` takes {} argument(s), found {}", name, if lo == hi { lo.to_string() } else { format!("{} to {}", lo, hi) }, args.len())));
    }
    Ok(())
}

/// Per-run settings.
#[derive(Clone, Debug)]
pub struct Settings {
    pub probes: ProbeConfig,
    pub p: u64,
    pub level: u32,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { probes: ProbeConfig::default(), p: 5, level: 3 }
    }
}

/// Overrides from the command line; they win over `option` statements.
#[derive(Clone, Debug, Default)]
pub struct RunFlags {
    pub p: Option<u64>,
    pub level: Option<u32>,
    pub probes: Option<usize>,
}

pub struct Session {
    env: BTreeMap<String, Value>,
    pub settings: Settings,
    flags: RunFlags,
    engine: DistEngine,
}

impl Default for Session {
    fn default() -> Self {
        Session::new(RunFlags::default())
    }
}

impl Session {
    pub fn new(flags: RunFlags) -> Session {
        let mut s = Session { env: BTreeMap::new(), settings: Settings::default(), flags, engine: DistEngine::new() };
        s.apply_flags();
        s
    }

    fn apply_flags(&mut self) {
        if let Some(p) = self.flags.p {
            self.settings.p = p;
        }
        if let Some(l) = self.flags.level {
            self.settings.level = l;
        }
        if let Some(n) = self.flags.probes {
            self.settings.probes.count = n;
        }
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.env.get(name)
    }

    fn padic(&self) -> MfResult<PadicConfig> {
        PadicConfig::new(self.settings.p, self.settings.level)
    }

    fn fourier_cfg(&self, h: Option<&Value>) -> MfResult<FourierConfig> {
        let group = match h {
            None => Group::Trivial,
            Some(v) => Group::Polyball(as_polyball(v)?),
        };
        Ok(FourierConfig { group, probes: self.settings.probes })
    }

    pub fn eval(&self, e: &Expr) -> MfResult<Value> {
        Ok(match e {
            Expr::Int(n) => Value::vf(VFElem::constant(QI::new(n.clone().into(), Zero::zero()))),
            Expr::Imag(n) => Value::vf(VFElem::constant(QI::new(Zero::zero(), n.clone().into()))),
            Expr::T => Value::vf(VFElem::t_pow(Gamma::one())),
            Expr::I => Value::vf(VFElem::constant(QI::i())),
            Expr::E => Value::C(CElem::from_mot(MotElem::e())),
            Expr::All => Value::Ball(None),
            Expr::W => Value::Gen(Gen::W),
            Expr::Var(i) => Value::Poly(VFPoly::var(i + 1, *i)),
            Expr::Name(s) => self.env.get(s).cloned().ok_or_else(|| MfError::UndefinedName(s.clone()))?,
            Expr::Neg(x) => match self.eval(x)? {
                Value::Poly(p) => Value::Poly(p.neg()),
                Value::C(c) => Value::C(c.neg()),
                Value::Fn { f, flexible } => Value::Fn { f: f.neg(), flexible },
                v => return type_err("a negatable value", &v),
            },
            Expr::Bin(op, l, r) => binop(*op, self.eval(l)?, self.eval(r)?)?,
            Expr::Pow(b, g) => match self.eval(b)? {
                Value::C(c) if g.is_integer() => Value::C(c_pow(&c, g.to_integer())?),
                Value::Poly(p) => match const_of(&p) {
                    Some(a) => Value::vf(vf_pow(&a, *g)?),
                    None if g.is_integer() && !g.is_negative() => {
                        let k = u32::try_from(g.to_integer()).map_err(|_| MfError::Invalid("exponent too large".into()))?;
                        Value::Poly(p.pow(k))
                    }
                    None => return Err(MfError::Invalid(format!("bad exponent {} for a polynomial", g))),
                },
                v => return type_err("a base for `^`", &v),
            },
            Expr::O(g) => Value::C(CElem::from_mot(MotElem::o(*g))),
            Expr::C(g) => Value::C(CElem::from_mot(MotElem::c(*g))),
            Expr::Exp(x) => Value::C(CElem::exp_vf(&as_vf(&self.eval(x)?)?)),
            Expr::Zero(n) => Value::fixed(MotFn::zero(*n)),
            Expr::List(xs) => Value::List(xs.iter().map(|x| self.eval(x)).collect::<MfResult<_>>()?),
            Expr::Packet { arity, support, phase, coeff } => self.packet(*arity, support, phase, coeff)?,
            Expr::Call(name, args) => {
                let vals: Vec<Value> = args.iter().map(|a| self.eval(a)).collect::<MfResult<_>>()?;
                self.call(name, &vals)?
            }
        })
    }

    fn packet(&self, arity: Option<usize>, support: &[(Expr, Expr)], phase: &Expr, coeff: &Expr) -> MfResult<Value> {
        let mut cs = Vec::new();
        let mut used = 0;
        for (form, ball) in support {
            let p = as_poly(&self.eval(form)?)?;
            used = used.max(poly_arity(&p));
            cs.push(Constraint::new(to_affine(&p)?, &as_ball(&self.eval(ball)?)?));
        }
        let ph = as_poly(&self.eval(phase)?)?;
        used = used.max(poly_arity(&ph));
        let ph = to_phase(&ph)?;
        let c = as_c(&self.eval(coeff)?)?;
        let n = arity.unwrap_or(used);
        if used > n {
            return Err(MfError::ArityMismatch { expected: n, found: used });
        }
        let f = MotFn::from_packets(n, vec![crate::wavefn::WavePacket::new(cs, ph, c)]);
        Ok(Value::Fn { f, flexible: arity.is_none() })
    }

    fn call(&self, name: &str, a: &[Value]) -> MfResult<Value> {
        let n = a.len();
        Ok(match name {
            "oball" | "cball" => {
                expect_args(name, a, 2, 2)?;
                let (c, r) = (as_vf(&a[0])?, as_gamma(&a[1])?);
                Value::Ball(Some(if name == "oball" { Ball::open(c, r) } else { Ball::closed(c, r) }))
            }
            "point" => {
                expect_args(name, a, 1, 1)?;
                Value::Ball(Some(Ball::point(as_vf(&a[0])?)))
            }
            "chi" => {
                expect_args(name, a, 1, 1)?;
                Value::fixed(MotFn::indicator(&as_polyball(&a[0])?))
            }
            "expchar" => {
                expect_args(name, a, 1, 2)?;
                let p = as_poly(&a[0])?;
                let k = if n == 2 { as_int(&a[1])? as usize } else { poly_arity(&p) };
                Value::Fn { f: MotFn::expchar(k, to_phase(&p)?)?, flexible: n == 1 }
            }
            "nu" => {
                expect_args(name, a, 1, 1)?;
                Value::fixed(MotFn::nu(&as_vf(&a[0])?))
            }
            "delta" => {
                expect_args(name, a, 1, 1)?;
                Value::fixed(MotFn::delta(as_int(&a[0])? as usize))
            }
            "one" => {
                expect_args(name, a, 1, 1)?;
                Value::fixed(MotFn::one(as_int(&a[0])? as usize))
            }
            "regular" => {
                expect_args(name, a, 1, 1)?;
                Value::Dist(Dist::regular(as_fn(&a[0])?))
            }
            "fourier" => {
                expect_args(name, a, 1, 2)?;
                match &a[0] {
                    Value::Dist(d) => Value::Dist(Dist::fourier(d.clone())),
                    v => Value::fixed(fourier(&as_fn(v)?, &self.fourier_cfg(a.get(1))?)?),
                }
            }
            "fourier0" => {
                expect_args(name, a, 1, 1)?;
                Value::fixed(fourier0(&as_fn(&a[0])?)?)
            }
            "conv" => {
                expect_args(name, a, 2, 3)?;
                match (&a[0], &a[1]) {
                    (Value::Dist(_), _) | (_, Value::Dist(_)) => Value::Dist(Dist::conv(as_dist(&a[0])?, as_dist(&a[1])?)?),
                    _ => {
                        let (f, g) = (as_fn(&a[0])?, as_fn(&a[1])?);
                        match a.get(2) {
                            Some(h) => Value::fixed(convolve_mod(&f, &g, &as_polyball(h)?)?),
                            None => Value::fixed(convolve(&f, &g)?),
                        }
                    }
                }
            }
            "tensor" => {
                expect_args(name, a, 2, 2)?;
                tensor_values(&a[0], &a[1])?
            }
            "u" | "s" => {
                expect_args(name, a, 1, 1)?;
                let b = as_vf(&a[0])?;
                Value::Gen(if name == "u" { Gen::U(b) } else { Gen::S(b) })
            }
            "translate" => {
                expect_args(name, a, 2, 2)?;
                Value::fixed(as_fn(&a[0])?.translate(&as_point(&a[1])?)?)
            }
            "scale" => {
                expect_args(name, a, 2, 2)?;
                Value::fixed(as_fn(&a[0])?.scale_arg(&as_vf(&a[1])?)?)
            }
            "eval" => {
                expect_args(name, a, 2, 2)?;
                Value::C(as_fn(&a[0])?.eval(&as_point(&a[1])?)?)
            }
            "integrate" => {
                expect_args(name, a, 1, 1)?;
                Value::C(integrate(&as_fn(&a[0])?, None)?)
            }
            "vol" => {
                expect_args(name, a, 1, 1)?;
                Value::C(CElem::from_mot(as_polyball(&a[0])?.volume()?))
            }
            "dual" => {
                expect_args(name, a, 1, 1)?;
                match &a[0] {
                    Value::Ball(Some(b)) => Value::Ball(Some(b.dual()?)),
                    v => Value::Polyball(as_polyball(v)?.dual()?),
                }
            }
            "annihilator" => {
                expect_args(name, a, 1, 1)?;
                Value::Polyball(annihilator(&as_polyball(&a[0])?)?)
            }
            "weil" => {
                expect_args(name, a, 2, 2)?;
                Value::fixed(weil_apply(&as_word(&a[0])?, &MuFn::new(as_fn(&a[1])?))?.f)
            }
            _ => return Err(MfError::UndefinedName(format!("{}(..)", name))),
        })
    }

    fn define(&mut self, kind: Option<Kind>, name: &str, e: &Expr) -> MfResult<()> {
        let v = self.eval(e)?;
        let v = match (kind, v) {
            (None, v) => v,
            (Some(Kind::Vf), v) => Value::vf(as_vf(&v)?),
            (Some(Kind::Ball), v @ (Value::Ball(_) | Value::Polyball(_))) => v,
            (Some(Kind::Fn), v @ Value::Fn { .. }) => v,
            (Some(Kind::Dist), v) => Value::Dist(as_dist(&v)?),
            (Some(k), v) => return type_err(k.name(), &v),
        };
        self.env.insert(name.to_string(), v);
        Ok(())
    }

    /// Runs one definition statement and returns the bound name.
    pub fn exec_def(&mut self, stmt: &Stmt) -> MfResult<String> {
        match stmt {
            Stmt::Def { kind, name, expr } => {
                self.define(*kind, name, expr)?;
                Ok(name.clone())
            }
            _ => Err(MfError::Invalid("not a definition".into())),
        }
    }

    fn set_option(&mut self, key: &str, v: &Expr) -> MfResult<()> {
        let x = as_int(&self.eval(v)?)?;
        let nonneg = |x: i64| u64::try_from(x).map_err(|_| MfError::Invalid(format!("option {} must be nonnegative", key)));
        match key {
            "probes" => self.settings.probes.count = nonneg(x)? as usize,
            "seed" => self.settings.probes.seed = nonneg(x)?,
            "p" => self.settings.p = nonneg(x)?,
            "level" => self.settings.level = u32::try_from(x).map_err(|_| MfError::Invalid("bad level".into()))?,
            _ => return Err(MfError::Invalid(format!("unknown option `{}`", key))),
        }
        self.apply_flags();
        Ok(())
    }

    fn command(&mut self, name: &str, sub: Option<&str>, args: &[Expr], clauses: &[(String, Expr)]) -> MfResult<Outcome> {
        let a: Vec<Value> = args.iter().map(|x| self.eval(x)).collect::<MfResult<_>>()?;
        let mut cl: BTreeMap<&str, Value> = BTreeMap::new();
        for (k, e) in clauses {
            cl.insert(k.as_str(), self.eval(e)?);
        }
        let h = cl.get("mod");
        let fns: Vec<MotFn> = a.iter().filter_map(|v| as_fn(v).ok()).collect();
        let res = (|| -> MfResult<Outcome> {
            match name {
                "print" => {
                    expect_args(name, &a, 1, 1)?;
                    Ok(Outcome::ok(json!({"type": a[0].type_name(), "value": a[0].to_string()})))
                }
                "integrate" => {
                    expect_args(name, &a, 1, 1)?;
                    let f = as_fn(&a[0])?;
                    let order: Option<Vec<usize>> = match cl.get("order") {
                        Some(v) => Some(
                            as_point(v)?
                                .iter()
                                .map(|x| {
                                    let k = as_int(&Value::vf(x.clone()))?;
                                    usize::try_from(k - 1).map_err(|_| MfError::Invalid("variables are numbered from 1".into()))
                                })
                                .collect::<MfResult<_>>()?,
                        ),
                        None => None,
                    };
                    match cl.get("form") {
                        Some(m) => {
                            let mf = MuFn { f, form: as_vf(m)?.rv() };
                            let (v, form) = integrate_with_form(&mf, order.as_deref())?;
                            Ok(Outcome::ok(json!({"value": v.to_string(), "form": form.to_string()})))
                        }
                        None => Ok(Outcome::ok(json!({"value": integrate(&f, order.as_deref())?.to_string()}))),
                    }
                }
                "fourier" => {
                    expect_args(name, &a, 1, 1)?;
                    let g = fourier(&as_fn(&a[0])?, &self.fourier_cfg(h)?)?;
                    Ok(Outcome::ok(json!({"value": g.to_string()})))
                }
                "convolve" => {
                    expect_args(name, &a, 2, 2)?;
                    let (f, g) = (as_fn(&a[0])?, as_fn(&a[1])?);
                    let c = match h {
                        Some(h) => convolve_mod(&f, &g, &as_polyball(h)?)?,
                        None => convolve(&f, &g)?,
                    };
                    Ok(Outcome::ok(json!({"value": c.to_string()})))
                }
                "verify" => self.verify(sub.unwrap_or(""), &a, h),
                "weil" => {
                    expect_args(name, &a, 2, 2)?;
                    let r = weil_apply(&as_word(&a[0])?, &MuFn::new(as_fn(&a[1])?))?;
                    Ok(Outcome::ok(json!({"function": r.f.to_string(), "form": r.form.to_string()})))
                }
                "limit-set" => {
                    expect_args(name, &a, 1, 1)?;
                    let p = as_poly(&a[0])?;
                    if p.nvars > 2 {
                        return Err(MfError::ArityMismatch { expected: 2, found: p.nvars });
                    }
                    Ok(Outcome::ok(json!({"value": limit_set(&p.with_vars(2))?.to_string()})))
                }
                "newton" => {
                    expect_args(name, &a, 1, 2)?;
                    let p = as_poly(&a[0])?;
                    let var = if a.len() == 2 { (as_int(&a[1])? - 1).max(0) as usize } else { p.nvars.max(1) - 1 };
                    let poly = newton_polygon(&p.with_vars(var + 1), var)?;
                    Ok(Outcome::ok(json!({"segments": serde_json::to_value(poly.describe()).expect("serializable")})))
                }
                "jacobian" => {
                    let point = match cl.get("at") {
                        Some(v) => {
                            expect_args(name, &a, 1, 1)?;
                            as_point(v)?
                        }
                        None => {
                            expect_args(name, &a, 2, 2)?;
                            as_point(&a[1])?
                        }
                    };
                    let map: Vec<VFPoly> = match &a[0] {
                        Value::List(xs) => xs.iter().map(as_poly).collect::<MfResult<_>>()?,
                        v => vec![as_poly(v)?],
                    };
                    let n = map.iter().map(|p| p.nvars).max().unwrap_or(0).max(point.len());
                    let map: Vec<VFPoly> = map.iter().map(|p| p.with_vars(n)).collect();
                    Ok(Outcome::ok(json!({"value": jacobian(&map, &point)?.to_string()})))
                }
                "oracle" => {
                    expect_args(name, &a, 1, 1)?;
                    self.oracle(&as_fn(&a[0])?)
                }
                "dist-eval" => {
                    expect_args(name, &a, 3, 3)?;
                    let v = self.engine.eval(&as_dist(&a[0])?, &as_point(&a[1])?, as_gamma(&a[2])?)?;
                    Ok(Outcome::ok(json!({"value": v.to_string()})))
                }
                "dist-apply" => {
                    expect_args(name, &a, 2, 2)?;
                    let v = self.engine.apply(&as_dist(&a[0])?, &as_fn(&a[1])?)?;
                    Ok(Outcome::ok(json!({"value": v.to_string()})))
                }
                "dist-support" => {
                    expect_args(name, &a, 1, 1)?;
                    let s = support_bound_report(&as_dist(&a[0])?)?;
                    Ok(Outcome::ok(json!({"value": serde_json::to_value(s).expect("serializable")})))
                }
                _ => Err(MfError::Invalid(format!("unknown command `{}`", name))),
            }
        })();
        res.map_err(|e| diagnose(e, &fns))
    }

    fn oracle(&self, f: &MotFn) -> MfResult<Outcome> {
        let cfg = self.padic()?;
        let sym = integrate(f, None)?;
        let r = oracle_check(&sym, f, &cfg)?;
        Ok(Outcome::checked(r.status == Status::Pass, json!({"value": sym.to_string(), "report": serde_json::to_value(&r).expect("serializable")})))
    }

    fn verify(&self, which: &str, a: &[Value], h: Option<&Value>) -> MfResult<Outcome> {
        let probes = self.settings.probes;
        let report = |r: Report| Outcome::checked(r.passed(), json!({"report": serde_json::to_value(&r).expect("serializable")}));
        let two = |a: &[Value]| -> MfResult<(MotFn, MotFn)> {
            expect_args(which, a, 2, 2)?;
            Ok((as_fn(&a[0])?, as_fn(&a[1])?))
        };
        Ok(match which {
            "inversion" => {
                expect_args(which, a, 1, 1)?;
                report(check_inversion(&as_fn(&a[0])?, &self.fourier_cfg(h)?)?)
            }
            "plancherel" => {
                let (f, g) = two(a)?;
                report(check_plancherel(&f, &g, &self.fourier_cfg(h)?)?)
            }
            "plancherel-classical" => {
                let (f, g) = two(a)?;
                report(check_plancherel_classical(&f, &g)?)
            }
            "convolution" => {
                let (f, g) = two(a)?;
                report(check_convolution(&f, &g, &self.fourier_cfg(h)?)?)
            }
            "product" => {
                let (f, g) = two(a)?;
                report(check_product_convolution(&f, &g, probes)?)
            }
            "poisson" => {
                expect_args(which, a, 1, 2)?;
                let hv = a.get(1).or(h).ok_or_else(|| MfError::Invalid("poisson needs a subgroup".into()))?;
                report(check_poisson(&as_fn(&a[0])?, &as_polyball(hv)?, probes)?)
            }
            "equal" => {
                expect_args(which, a, 2, 2)?;
                match (&a[0], &a[1]) {
                    (Value::Fn { .. }, _) | (_, Value::Fn { .. }) => {
                        let (f, g) = two(a)?;
                        report(Report::functions("equal", &f, &g, probes)?)
                    }
                    _ => report(Report::values("equal", &as_c(&a[0])?, &as_c(&a[1])?)),
                }
            }
            "coherence" => {
                expect_args(which, a, 4, 4)?;
                let (g1, g2) = (as_gamma(&a[2])?, as_gamma(&a[3])?);
                report(self.engine.check_coherence(&as_dist(&a[0])?, &as_point(&a[1])?, g1, g2)?)
            }
            "dist-fourier" => {
                expect_args(which, a, 2, 2)?;
                report(self.engine.check_fourier(&as_dist(&a[0])?, &as_fn(&a[1])?)?)
            }
            "tensor-fourier" => {
                expect_args(which, a, 4, 4)?;
                report(self.engine.check_tensor_fourier(&as_dist(&a[0])?, &as_dist(&a[1])?, &as_point(&a[2])?, as_gamma(&a[3])?)?)
            }
            "conv-fourier" => {
                expect_args(which, a, 3, 3)?;
                report(self.engine.check_conv_fourier(&as_dist(&a[0])?, &as_dist(&a[1])?, &as_fn(&a[2])?)?)
            }
            "relations" => {
                expect_args(which, a, 1, 2)?;
                let params = match a.get(1) {
                    Some(v) => as_point(v)?,
                    None => vec![VFElem::t_pow(-Gamma::one()), VFElem::t_pow(Gamma::one()), VFElem::constant(QI::i())],
                };
                let rs = verify_relations(&[as_fn(&a[0])?], &params, probes)?;
                let strict = rs.iter().filter(|r| r.strict).count();
                let with_form = rs.iter().filter(|r| r.with_form).count();
                Outcome::checked(
                    with_form == rs.len(),
                    json!({"total": rs.len(), "strict": strict, "with_form": with_form, "reports": serde_json::to_value(&rs).expect("serializable")}),
                )
            }
            "nu-convolution" => {
                expect_args(which, a, 2, 2)?;
                let r = check_nu_convolution(&as_fn(&a[0])?, &as_vf(&a[1])?, probes)?;
                Outcome::checked(r.with_form, json!({"report": serde_json::to_value(&r).expect("serializable")}))
            }
            "oracle" => {
                expect_args(which, a, 1, 1)?;
                self.oracle(&as_fn(&a[0])?)?
            }
            _ => return Err(MfError::Invalid(format!("unknown identity `{}`", which))),
        })
    }
}

/// Adds the offending packet to a non-integrability error.
fn diagnose(e: MfError, fns: &[MotFn]) -> MfError {
    if let MfError::NotIntegrable(k) = &e {
        for f in fns {
            for p in &f.packets {
                let single = MotFn { arity: f.arity, packets: vec![p.clone()] };
                if !single.check().integrable {
                    return MfError::NotIntegrablePacket { var: *k, packet: format!("packet[{}]{}", f.arity, p) };
                }
            }
        }
    }
    e
}

/// Result of one command.
#[derive(Clone, Debug)]
pub struct Outcome {
    /// `None` for commands that only compute.
    pub pass: Option<bool>,
    pub body: Json,
}

impl Outcome {
    fn ok(body: Json) -> Outcome {
        Outcome { pass: None, body }
    }

    fn checked(pass: bool, body: Json) -> Outcome {
        Outcome { pass: Some(pass), body }
    }
}

/// Everything a run produced.
#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub entries: Vec<Json>,
    pub summary: Vec<String>,
    pub exit_code: i32,
}

impl RunOutput {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("serializable")
    }
}

fn collect_names(e: &Expr, out: &mut BTreeSet<String>) {
    match e {
        Expr::Name(s) => {
            out.insert(s.clone());
        }
        Expr::Neg(x) | Expr::Pow(x, _) | Expr::Exp(x) => collect_names(x, out),
        Expr::Bin(_, l, r) => {
            collect_names(l, out);
            collect_names(r, out);
        }
        Expr::Call(_, xs) | Expr::List(xs) => xs.iter().for_each(|x| collect_names(x, out)),
        Expr::Packet { support, phase, coeff, .. } => {
            for (a, b) in support {
                collect_names(a, out);
                collect_names(b, out);
            }
            collect_names(phase, out);
            collect_names(coeff, out);
        }
        _ => {}
    }
}

/// Every referenced name must be defined on an earlier line.
pub fn validate(script: &Script) -> Result<(), (usize, MfError)> {
    let mut defined: BTreeSet<String> = BTreeSet::new();
    for l in &script.lines {
        let mut used = BTreeSet::new();
        match &l.stmt {
            Stmt::Def { expr, .. } => collect_names(expr, &mut used),
            Stmt::Option { value, .. } => collect_names(value, &mut used),
            Stmt::Cmd { args, clauses, .. } => {
                args.iter().for_each(|a| collect_names(a, &mut used));
                clauses.iter().for_each(|(_, e)| collect_names(e, &mut used));
            }
        }
        if let Some(u) = used.iter().find(|u| !defined.contains(*u)) {
            return Err((l.line, MfError::UndefinedName(u.clone())));
        }
        if let Stmt::Def { name, .. } = &l.stmt {
            defined.insert(name.clone());
        }
    }
    Ok(())
}

fn error_entry(line: usize, command: Option<String>, e: &MfError) -> Json {
    let mut m = serde_json::Map::new();
    m.insert("line".into(), json!(line));
    if let Some(c) = command {
        m.insert("command".into(), json!(c));
    }
    m.insert("status".into(), json!("error"));
    m.insert("error".into(), json!(e.to_string()));
    Json::Object(m)
}

fn command_label(name: &str, sub: Option<&str>) -> String {
    match sub {
        Some(s) => format!("{} {}", name, s),
        None => name.to_string(),
    }
}

/// Runs statements in order. Exit code 0 when every verification passes,
/// 1 when one fails, 2 on an error (execution stops there).
pub fn run(script: &Script, flags: RunFlags) -> RunOutput {
    let mut out = RunOutput::default();
    if let Err((line, e)) = validate(script) {
        out.summary.push(format!("line {}: error: {}", line, e));
        out.entries.push(error_entry(line, None, &e));
        out.exit_code = 2;
        return out;
    }
    let mut s = Session::new(flags);
    for l in &script.lines {
        match &l.stmt {
            Stmt::Def { kind, name, expr } => {
                if let Err(e) = s.define(*kind, name, expr) {
                    out.summary.push(format!("line {}: error in `{}`: {}", l.line, name, e));
                    out.entries.push(error_entry(l.line, Some(format!("define {}", name)), &e));
                    out.exit_code = 2;
                    return out;
                }
            }
            Stmt::Option { key, value } => {
                if let Err(e) = s.set_option(key, value) {
                    out.summary.push(format!("line {}: error: {}", l.line, e));
                    out.entries.push(error_entry(l.line, Some(format!("option {}", key)), &e));
                    out.exit_code = 2;
                    return out;
                }
            }
            Stmt::Cmd { name, sub, args, clauses } => {
                let label = command_label(name, sub.as_deref());
                match s.command(name, sub.as_deref(), args, clauses) {
                    Ok(o) => {
                        let status = match o.pass {
                            None => "ok",
                            Some(true) => "pass",
                            Some(false) => "fail",
                        };
                        if o.pass == Some(false) && out.exit_code == 0 {
                            out.exit_code = 1;
                        }
                        let mut m = serde_json::Map::new();
                        m.insert("line".into(), json!(l.line));
                        m.insert("command".into(), json!(label));
                        m.insert("status".into(), json!(status));
                        if let Json::Object(b) = o.body {
                            m.extend(b);
                        }
                        let value = m.get("value").and_then(|v| v.as_str()).map(|v| format!(" = {}", v)).unwrap_or_default();
                        out.summary.push(format!("line {}: {}: {}{}", l.line, label, status, value));
                        out.entries.push(Json::Object(m));
                    }
                    Err(e) => {
                        out.summary.push(format!("line {}: {}: error: {}", l.line, label, e));
                        out.entries.push(error_entry(l.line, Some(label), &e));
                        out.exit_code = 2;
                        return out;
                    }
                }
            }
        }
    }
    out
}

/// Integer scalar helper for callers building values by hand.
pub fn int_value(n: i64) -> Value {
    Value::vf(VFElem::constant(QI::new(BigInt::from(n).into(), Zero::zero())))
}
