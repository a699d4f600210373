//! Specialization to `Q_p` and a numeric oracle.
//!
//! The tautological character becomes `ψ(x) = e^{2πi·frac(x/p)}`, trivial on
//! `pZ_p` and not on `Z_p`. Values live in `Q(ζ_{p^k})`, kept exactly. The
//! oracle integrates a packet function by splitting a bounding box into
//! cosets of `∏ p^{L_i}Z_p` until every packet is constant on each coset.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{MfError, MfResult};
use crate::geometry::BallKind;
use crate::motvalues::{CElem, MotElem};
use crate::valfield::{Gamma, GammaVal, OmegaElem, VFElem, QI};
use crate::wavefn::{MotFn, WavePacket};

/// Prime, character level and the lift of `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicConfig {
    pub p: u64,
    pub level: u32,
    /// Relative precision in digits.
    prec: u32,
    modulus: u64,
    i_lift: u64,
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn inv_mod(a: u64, m: u64) -> u64 {
    let e = (a as i128).extended_gcd(&(m as i128));
    debug_assert_eq!(e.gcd, 1);
    e.x.rem_euclid(m as i128) as u64
}

impl PadicConfig {
    pub fn new(p: u64, level: u32) -> MfResult<Self> {
        if !is_prime(p) || p % 4 != 1 {
            return Err(MfError::BadPrime(p));
        }
        if level == 0 {
            return Err(MfError::InsufficientLevel { level, exponent: 0 });
        }
        let mut prec = 0;
        let mut modulus: u64 = 1;
        while let Some(m) = modulus.checked_mul(p) {
            if m > (1u64 << 62) {
                break;
            }
            modulus = m;
            prec += 1;
        }
        if level > prec {
            return Err(MfError::InsufficientLevel { level, exponent: -(prec as i64) });
        }
        // Hensel lift of a square root of −1
        let mut r = (2..p).find(|r| (r * r + 1) % p == 0).expect("p ≡ 1 mod 4");
        let mut pk = p;
        for _ in 1..prec {
            pk *= p;
            let f = (mulmod(r, r, pk) + 1) % pk;
            let d = inv_mod(2 * r % pk, pk);
            r = (r + pk - mulmod(f, d, pk)) % pk;
        }
        Ok(PadicConfig { p, level, prec, modulus, i_lift: r })
    }

    pub fn i_lift(&self) -> u64 {
        self.i_lift
    }

    /// `p^level`, the order of the character values.
    pub fn order(&self) -> u64 {
        self.p.pow(self.level)
    }

    fn pow_p(&self, e: u32) -> u64 {
        self.p.pow(e)
    }
}

/// `p^v · u` with `u` a unit known modulo `p^prec`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PAdic {
    pub v: i64,
    pub u: u64,
}

const ZERO_V: i64 = i64::MAX;

impl PAdic {
    pub fn zero() -> PAdic {
        PAdic { v: ZERO_V, u: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.v == ZERO_V
    }

    fn normalize(mut v: i64, mut u: u64, cfg: &PadicConfig) -> PAdic {
        if u == 0 {
            return PAdic::zero();
        }
        while u % cfg.p == 0 {
            u /= cfg.p;
            v += 1;
        }
        PAdic { v, u }
    }

    pub fn from_u64(n: u64, cfg: &PadicConfig) -> PAdic {
        PAdic::normalize(0, n % cfg.modulus, cfg)
    }

    fn from_bigint(n: &BigInt, cfg: &PadicConfig) -> PAdic {
        if n.is_zero() {
            return PAdic::zero();
        }
        let p = BigInt::from(cfg.p);
        let mut n = n.clone();
        let mut v = 0;
        while n.is_multiple_of(&p) {
            n /= &p;
            v += 1;
        }
        let u = n.mod_floor(&BigInt::from(cfg.modulus)).to_u64().expect("fits");
        PAdic { v, u }
    }

    pub fn mul(&self, o: &PAdic, cfg: &PadicConfig) -> PAdic {
        if self.is_zero() || o.is_zero() {
            return PAdic::zero();
        }
        PAdic { v: self.v + o.v, u: mulmod(self.u, o.u, cfg.modulus) }
    }

    pub fn inv(&self, cfg: &PadicConfig) -> MfResult<PAdic> {
        if self.is_zero() {
            return Err(MfError::DivideByZero);
        }
        Ok(PAdic { v: -self.v, u: inv_mod(self.u, cfg.modulus) })
    }

    pub fn neg(&self, cfg: &PadicConfig) -> PAdic {
        if self.is_zero() {
            return *self;
        }
        PAdic { v: self.v, u: cfg.modulus - self.u }
    }

    pub fn add(&self, o: &PAdic, cfg: &PadicConfig) -> PAdic {
        if self.is_zero() {
            return *o;
        }
        if o.is_zero() {
            return *self;
        }
        let (a, b) = if self.v <= o.v { (self, o) } else { (o, self) };
        let d = b.v - a.v;
        if d >= cfg.prec as i64 {
            return *a;
        }
        let s = (a.u as u128 + mulmod(b.u, cfg.pow_p(d as u32), cfg.modulus) as u128) % cfg.modulus as u128;
        PAdic::normalize(a.v, s as u64, cfg)
    }

    pub fn shift(&self, k: i64) -> PAdic {
        if self.is_zero() {
            return *self;
        }
        PAdic { v: self.v + k, u: self.u }
    }
}

fn integral(g: Gamma) -> MfResult<i64> {
    if g.is_integer() {
        Ok(g.to_integer())
    } else {
        Err(MfError::NonIntegralGamma(crate::valfield::fmt_gamma(g)))
    }
}

/// `a + b·i ↦ a + b·u`; nonzero coefficients must reduce to units.
pub fn lift_qi(q: &QI, cfg: &PadicConfig) -> MfResult<PAdic> {
    if q.is_zero() {
        return Ok(PAdic::zero());
    }
    let d = q.re.denom().lcm(q.im.denom());
    let a = (&q.re * BigRational::from_integer(d.clone())).to_integer();
    let b = (&q.im * BigRational::from_integer(d.clone())).to_integer();
    let m = BigInt::from(cfg.modulus);
    let num = (a + b * BigInt::from(cfg.i_lift)).mod_floor(&m);
    let n = PAdic::from_bigint(&num, cfg);
    let den = PAdic::from_bigint(&d, cfg);
    let r = n.mul(&den.inv(cfg)?, cfg);
    if r.v != 0 {
        return Err(MfError::BadReduction(format!("{} at p = {}", q, cfg.p)));
    }
    Ok(r)
}

/// `t ↦ p`, `i ↦ u`.
pub fn lift_vf(a: &VFElem, cfg: &PadicConfig) -> MfResult<PAdic> {
    let mut acc = PAdic::zero();
    for (g, c) in a.terms() {
        let e = integral(*g)?;
        acc = acc.add(&lift_qi(c, cfg)?.shift(e), cfg);
    }
    Ok(acc)
}

/// Index `m` with `ψ(x) = ζ_{p^k}^m`.
pub fn psi_index(x: &PAdic, cfg: &PadicConfig) -> MfResult<u64> {
    if x.is_zero() || x.v >= 1 {
        return Ok(0);
    }
    let e = 1 - x.v;
    if e > cfg.level as i64 {
        return Err(MfError::InsufficientLevel { level: cfg.level, exponent: x.v });
    }
    let e = e as u32;
    Ok((x.u % cfg.pow_p(e)) * cfg.pow_p(cfg.level - e))
}

/// An element of `Q(ζ_N)`, `N = p^k`, reduced modulo the cyclotomic polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cyc {
    p: u64,
    level: u32,
    terms: BTreeMap<u64, BigRational>,
}

impl Cyc {
    pub fn zero(cfg: &PadicConfig) -> Cyc {
        Cyc { p: cfg.p, level: cfg.level, terms: BTreeMap::new() }
    }

    pub fn root(m: u64, q: BigRational, cfg: &PadicConfig) -> Cyc {
        let mut c = Cyc::zero(cfg);
        c.add_term(m, q);
        c.reduce()
    }

    fn order(&self) -> u64 {
        self.p.pow(self.level)
    }

    fn add_term(&mut self, m: u64, q: BigRational) {
        if q.is_zero() {
            return;
        }
        let slot = self.terms.entry(m % self.order()).or_insert_with(BigRational::zero);
        *slot += q;
        if slot.is_zero() {
            self.terms.remove(&(m % self.order()));
        }
    }

    /// Uses `Σ_j ζ^{r + j·p^{k−1}} = 0` to clear every top index `j = p−1`.
    fn reduce(mut self) -> Cyc {
        let step = self.p.pow(self.level - 1);
        let tops: Vec<(u64, BigRational)> = self
            .terms
            .iter()
            .filter(|(m, _)| *m / step == self.p - 1)
            .map(|(m, q)| (*m, q.clone()))
            .collect();
        for (m, q) in tops {
            let r = m % step;
            for j in 0..self.p {
                self.add_term(r + j * step, -q.clone());
            }
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Cyc) -> Cyc {
        let mut c = self.clone();
        for (m, q) in &o.terms {
            c.add_term(*m, q.clone());
        }
        c.reduce()
    }

    pub fn mul(&self, o: &Cyc) -> Cyc {
        let mut c = Cyc { p: self.p, level: self.level, terms: BTreeMap::new() };
        for (m1, q1) in &self.terms {
            for (m2, q2) in &o.terms {
                c.add_term(m1 + m2, q1 * q2);
            }
        }
        c.reduce()
    }

    /// Dense sums over `Z/N` times this element.
    fn mul_dense(&self, dense: &[BigRational]) -> Cyc {
        let n = self.order();
        let mut c = Cyc { p: self.p, level: self.level, terms: BTreeMap::new() };
        for (m1, q1) in &self.terms {
            for (m2, q2) in dense.iter().enumerate() {
                if !q2.is_zero() {
                    c.add_term((m1 + m2 as u64) % n, q1 * q2);
                }
            }
        }
        c.reduce()
    }

    pub fn to_complex(&self) -> (f64, f64) {
        let n = self.order() as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (m, q) in &self.terms {
            let x = q.to_f64().unwrap_or(f64::NAN);
            let a = 2.0 * std::f64::consts::PI * (*m as f64) / n;
            re += x * a.cos();
            im += x * a.sin();
        }
        (re, im)
    }
}

impl fmt::Display for Cyc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, q)| if *m == 0 { q.to_string() } else { format!("({})*z^{}", q, m) })
            .collect();
        write!(f, "{} [z = exp(2*pi*i/{})]", parts.join(" + "), self.order())
    }
}

fn p_pow(cfg: &PadicConfig, e: i64) -> BigRational {
    let p = BigRational::from_integer(BigInt::from(cfg.p));
    if e >= 0 {
        num_traits::pow(p, e as usize)
    } else {
        num_traits::pow(p, (-e) as usize).recip()
    }
}

/// `O_γ ↦ p^{−γ−1}`, `C_γ ↦ p^{−γ}`, `e ↦ p^{−1}`.
pub fn spec_mot(m: &MotElem, cfg: &PadicConfig) -> MfResult<BigRational> {
    let mut acc = BigRational::zero();
    for (mono, k) in m.terms() {
        let mut e: i64 = -mono.e_exp();
        for (g, n) in mono.o_exps() {
            e += (-integral(*g)? - 1) * *n as i64;
        }
        for (g, n) in mono.c_exps() {
            e += -integral(*g)? * *n as i64;
        }
        acc += p_pow(cfg, e) * BigRational::from_integer(k.clone());
    }
    Ok(acc)
}

pub fn spec_omega(w: &OmegaElem, cfg: &PadicConfig) -> MfResult<u64> {
    psi_index(&lift_vf(w.as_vf(), cfg)?, cfg)
}

pub fn spec_c(x: &CElem, cfg: &PadicConfig) -> MfResult<Cyc> {
    let mut acc = Cyc::zero(cfg);
    for (w, m) in x.terms() {
        acc = acc.add(&Cyc::root(spec_omega(w, cfg)?, spec_mot(m, cfg)?, cfg));
    }
    Ok(acc)
}

struct Lifted {
    /// `form ∈ B` as `v(Σ a_i x_i + a_0) ≥ r`.
    cons: Vec<(Vec<(usize, PAdic)>, PAdic, i64)>,
    quad: Vec<(usize, usize, PAdic)>,
    lin: Vec<PAdic>,
    constant: PAdic,
}

fn lift_packet(p: &WavePacket, n: usize, cfg: &PadicConfig) -> MfResult<Lifted> {
    let mut cons = Vec::new();
    for c in &p.support {
        let r = match c.radius {
            GammaVal::Inf => return Err(MfError::Unsupported("point supports have no p-adic volume".into())),
            GammaVal::Fin(g) => integral(g)?,
        };
        let r = if c.kind == BallKind::Open { r + 1 } else { r };
        let coeffs = c.form.coeffs.iter().map(|(i, a)| Ok((*i, lift_vf(a, cfg)?))).collect::<MfResult<Vec<_>>>()?;
        cons.push((coeffs, lift_vf(&c.form.constant, cfg)?, r));
    }
    let quad = p.phase.quad_terms().map(|((i, j), a)| Ok((*i, *j, lift_vf(a, cfg)?))).collect::<MfResult<Vec<_>>>()?;
    let mut lin = vec![PAdic::zero(); n];
    for (i, a) in p.phase.linear_terms() {
        lin[*i] = lift_vf(a, cfg)?;
    }
    Ok(Lifted { cons, quad, lin, constant: lift_vf(p.phase.constant_term(), cfg)? })
}

fn vmin(a: i64, b: i64) -> i64 {
    a.min(b)
}

const MAX_DEPTH: i64 = 12;

struct Walker<'a> {
    cfg: &'a PadicConfig,
    pk: &'a Lifted,
    dense: Vec<BigRational>,
    base: Vec<i64>,
}

impl Walker<'_> {
    /// Cell `c + ∏ p^{L_i}Z_p` with `c_i = p^{base_i}·j_i`.
    fn walk(&mut self, c: &mut Vec<PAdic>, l: &mut Vec<i64>) -> MfResult<()> {
        let cfg = self.cfg;
        let n = c.len();
        let mut deficient = vec![false; n];
        for (coeffs, a0, r) in &self.pk.cons {
            let mut val = *a0;
            let mut m = i64::MAX;
            for (i, a) in coeffs {
                val = val.add(&a.mul(&c[*i], cfg), cfg);
                if !a.is_zero() {
                    m = vmin(m, a.v + l[*i]);
                }
            }
            if m >= *r {
                if val.v < *r {
                    return Ok(());
                }
            } else {
                for (i, a) in coeffs {
                    if !a.is_zero() && a.v + l[*i] < *r {
                        deficient[*i] = true;
                    }
                }
            }
        }
        let mut grad = self.pk.lin.clone();
        let mut q = self.pk.constant;
        for (i, a) in self.pk.lin.iter().enumerate() {
            q = q.add(&a.mul(&c[i], cfg), cfg);
        }
        for (i, j, a) in &self.pk.quad {
            grad[*i] = grad[*i].add(&a.mul(&c[*j], cfg), cfg);
            grad[*j] = grad[*j].add(&a.mul(&c[*i], cfg), cfg);
            q = q.add(&a.mul(&c[*i], cfg).mul(&c[*j], cfg), cfg);
            if !a.is_zero() && a.v + l[*i] + l[*j] < 1 {
                deficient[*i] = true;
                deficient[*j] = true;
            }
        }
        for i in 0..n {
            if !grad[i].is_zero() && grad[i].v + l[i] < 1 {
                deficient[i] = true;
            }
        }
        match deficient.iter().position(|d| *d) {
            None => {
                let m = psi_index(&q, cfg)? as usize;
                let vol = p_pow(cfg, -l.iter().sum::<i64>());
                self.dense[m] += vol;
                Ok(())
            }
            Some(i) => {
                if l[i] - self.base[i] > MAX_DEPTH || l[i] + 1 >= cfg.prec as i64 {
                    return Err(MfError::Unsupported("oracle subdivision too deep".into()));
                }
                let old = c[i];
                let step = PAdic { v: l[i], u: 1 };
                l[i] += 1;
                for j in 0..cfg.p {
                    c[i] = old.add(&PAdic::from_u64(j, cfg).mul(&step, cfg), cfg);
                    self.walk(c, l)?;
                }
                l[i] -= 1;
                c[i] = old;
                Ok(())
            }
        }
    }
}

fn packet_integral(p: &WavePacket, n: usize, cfg: &PadicConfig) -> MfResult<Cyc> {
    let pk = lift_packet(p, n, cfg)?;
    let mut base = Vec::with_capacity(n);
    for (i, b) in p.var_bounds(n).into_iter().enumerate() {
        let b = b.ok_or(MfError::NotIntegrable(i + 1))?;
        let s = match b.val {
            GammaVal::Inf => return Err(MfError::Unsupported("point supports have no p-adic volume".into())),
            GammaVal::Fin(g) => {
                if b.strict {
                    g.floor().to_integer() + 1
                } else {
                    g.ceil().to_integer()
                }
            }
        };
        base.push(s);
    }
    let mut w = Walker { cfg, pk: &pk, dense: vec![BigRational::zero(); cfg.order() as usize], base: base.clone() };
    let mut c = vec![PAdic::zero(); n];
    let mut l = base;
    w.walk(&mut c, &mut l)?;
    Ok(spec_c(&p.coeff, cfg)?.mul_dense(&w.dense))
}

/// `∫ f` computed as a finite character sum; packets run in parallel and are
/// summed in order.
pub fn numeric_integral(f: &MotFn, cfg: &PadicConfig) -> MfResult<Cyc> {
    if !f.check().integrable {
        return Err(MfError::NotIntegrable(1));
    }
    let parts: Vec<MfResult<Cyc>> = f.packets.par_iter().map(|p| packet_integral(p, f.arity, cfg)).collect();
    let mut acc = Cyc::zero(cfg);
    for part in parts {
        acc = acc.add(&part?);
    }
    Ok(acc)
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub p: u64,
    pub level: u32,
    pub symbolic: String,
    pub numeric: String,
    pub abs_error: f64,
    pub status: crate::report::Status,
}

pub fn oracle_check(symbolic: &CElem, f: &MotFn, cfg: &PadicConfig) -> MfResult<OracleReport> {
    let s = spec_c(symbolic, cfg)?;
    let n = numeric_integral(f, cfg)?;
    let (a, b) = s.to_complex();
    let (c, d) = n.to_complex();
    let err = ((a - c).powi(2) + (b - d).powi(2)).sqrt();
    let status = if s == n { crate::report::Status::Pass } else { crate::report::Status::Fail };
    Ok(OracleReport { p: cfg.p, level: cfg.level, symbolic: s.to_string(), numeric: n.to_string(), abs_error: err, status })
}

/// Float value of `spec_c`.
pub fn spec_c_float(x: &CElem, cfg: &PadicConfig) -> MfResult<(f64, f64)> {
    Ok(spec_c(x, cfg)?.to_complex())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Ball, Polyball};
    use crate::integrator::integrate;
    use crate::valfield::gamma;
    use crate::wavefn::Phase;

    fn cfg(p: u64, k: u32) -> PadicConfig {
        PadicConfig::new(p, k).unwrap()
    }

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn setup() {
        let c = cfg(5, 3);
        assert_eq!(mulmod(c.i_lift, c.i_lift, c.modulus), c.modulus - 1);
        assert!(matches!(PadicConfig::new(7, 2), Err(MfError::BadPrime(7))));
        assert!(cfg(13, 4).order() == 28561);
    }

    #[test]
    fn volumes() {
        let c = cfg(5, 2);
        assert_eq!(spec_mot(&MotElem::o(gamma(0)), &c).unwrap(), q(1, 5));
        assert_eq!(spec_mot(&MotElem::c(gamma(0)), &c).unwrap(), q(1, 1));
        let m = MotElem::o(gamma(2)).mul(&MotElem::c(gamma(-2))).mul(&MotElem::e_inv());
        assert_eq!(spec_mot(&m, &c).unwrap(), q(1, 1));
        assert!(matches!(spec_mot(&MotElem::o(Gamma::new(1, 2)), &c), Err(MfError::NonIntegralGamma(_))));
    }

    #[test]
    fn characters() {
        let c = cfg(5, 2);
        assert_eq!(spec_c(&CElem::exp_vf(&VFElem::one()), &c).unwrap(), Cyc::root(5, q(1, 1), &c));
        assert_eq!(spec_c(&CElem::exp_vf(&VFElem::t_pow(gamma(-1))), &c).unwrap(), Cyc::root(1, q(1, 1), &c));
        assert_eq!(spec_c(&CElem::one(), &c).unwrap(), Cyc::root(0, q(1, 1), &c));
        // ψ is trivial on pZ_p
        assert_eq!(psi_index(&lift_vf(&VFElem::t_pow(gamma(1)), &c).unwrap(), &c).unwrap(), 0);
        assert!(matches!(spec_c(&CElem::exp_vf(&VFElem::t_pow(gamma(-2))), &c), Err(MfError::InsufficientLevel { .. })));
        // 1 + ζ + … + ζ^4 = 0
        let mut s = Cyc::zero(&c);
        for m in 0..5 {
            s = s.add(&Cyc::root(5 * m, q(1, 1), &c));
        }
        assert!(s.is_zero());
    }

    #[test]
    fn sums() {
        let c = cfg(5, 3);
        let zp = MotFn::indicator(&Polyball::new(vec![Ball::closed(VFElem::zero(), gamma(0))]));
        let psi = zp.mul(&MotFn::expchar(1, Phase::linear(0, VFElem::one())).unwrap()).unwrap();
        assert!(numeric_integral(&psi, &c).unwrap().is_zero());
        let psi5 = zp.mul(&MotFn::expchar(1, Phase::linear(0, VFElem::t_pow(gamma(1)))).unwrap()).unwrap();
        assert_eq!(numeric_integral(&psi5, &c).unwrap(), Cyc::root(0, q(1, 1), &c));
        let m = MotFn::indicator(&Polyball::new(vec![Ball::open(VFElem::zero(), gamma(0))]));
        assert_eq!(numeric_integral(&m, &c).unwrap(), Cyc::root(0, q(1, 5), &c));
    }

    #[test]
    fn agrees_with_symbolic() {
        let c = cfg(13, 3);
        let f = MotFn::indicator(&Polyball::new(vec![Ball::closed(VFElem::one(), gamma(-1)), Ball::open(VFElem::zero(), gamma(0))]))
            .mul(&MotFn::expchar(2, Phase::bilinear(0, 1, VFElem::t_pow(gamma(-1)))).unwrap())
            .unwrap();
        let r = oracle_check(&integrate(&f, None).unwrap(), &f, &c).unwrap();
        assert_eq!(r.status, crate::report::Status::Pass, "{:?}", r);
    }
}
