//! The valued field `VF = Q(i)((t^Q))` restricted to finite sums, its value
//! group, residue field and leading-term structure `RV`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, Zero};

use crate::error::{MfError, MfResult};

/// Elements of the value group.
pub type Gamma = Rational64;

/// A value in `Γ ∪ {∞}`. `Inf` compares above every finite value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GammaVal {
    Fin(Gamma),
    Inf,
}

impl GammaVal {
    pub fn fin(n: i64) -> Self {
        GammaVal::Fin(Gamma::from_integer(n))
    }

    pub fn finite(self) -> Option<Gamma> {
        match self {
            GammaVal::Fin(g) => Some(g),
            GammaVal::Inf => None,
        }
    }

    pub fn is_inf(self) -> bool {
        matches!(self, GammaVal::Inf)
    }

    /// `Inf` absorbs.
    pub fn plus(self, g: Gamma) -> Self {
        match self {
            GammaVal::Fin(a) => GammaVal::Fin(a + g),
            GammaVal::Inf => GammaVal::Inf,
        }
    }

    pub fn add(self, o: GammaVal) -> Self {
        match (self, o) {
            (GammaVal::Fin(a), GammaVal::Fin(b)) => GammaVal::Fin(a + b),
            _ => GammaVal::Inf,
        }
    }
}

impl From<Gamma> for GammaVal {
    fn from(g: Gamma) -> Self {
        GammaVal::Fin(g)
    }
}

impl fmt::Display for GammaVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaVal::Fin(g) => write!(f, "{}", fmt_gamma(*g)),
            GammaVal::Inf => write!(f, "inf"),
        }
    }
}

/// Prints a rational the way the DSL reads it back: `3`, `-1`, `1/2`.
pub fn fmt_gamma(g: Gamma) -> String {
    if *g.denom() == 1 {
        format!("{}", g.numer())
    } else {
        format!("{}/{}", g.numer(), g.denom())
    }
}

pub fn gamma(n: i64) -> Gamma {
    Gamma::from_integer(n)
}

pub fn big_q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        format!("{}", q.numer())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Gaussian rational `re + im·i`, the residue field `Q(i)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QI {
    pub re: BigRational,
    pub im: BigRational,
}

impl Default for QI {
    fn default() -> Self {
        QI::zero()
    }
}

impl QI {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        QI { re, im }
    }

    pub fn zero() -> Self {
        QI { re: BigRational::zero(), im: BigRational::zero() }
    }

    pub fn one() -> Self {
        QI::int(1)
    }

    pub fn i() -> Self {
        QI { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn int(n: i64) -> Self {
        QI { re: big_q(n), im: BigRational::zero() }
    }

    pub fn gauss(a: i64, b: i64) -> Self {
        QI { re: big_q(a), im: big_q(b) }
    }

    pub fn real(q: BigRational) -> Self {
        QI { re: q, im: BigRational::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    /// Some integer if this is a rational integer.
    pub fn as_integer(&self) -> Option<BigInt> {
        if self.im.is_zero() && self.re.is_integer() {
            Some(self.re.numer().clone())
        } else {
            None
        }
    }

    pub fn conj(&self) -> QI {
        QI { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<QI> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(QI { re: &self.re / &n, im: -(&self.im / &n) })
    }

    pub fn pow(&self, k: u32) -> QI {
        let mut acc = QI::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Exact square root in `Q(i)`, if there is one.
    pub fn sqrt(&self) -> Option<QI> {
        if self.is_zero() {
            return Some(QI::zero());
        }
        let n = rational_sqrt(&self.norm())?;
        let two = big_q(2);
        let x2 = (&self.re + &n) / &two;
        let y2 = (&n - &self.re) / &two;
        let x = rational_sqrt(&x2)?;
        let mut y = rational_sqrt(&y2)?;
        if !(&x * &y * &two == self.im) {
            y = -y;
        }
        let r = QI { re: x, im: y };
        debug_assert_eq!(&r * &r, *self);
        Some(r)
    }

    /// Whether this is a square in `Q(i)^×`.
    pub fn is_square(&self) -> bool {
        !self.is_zero() && self.sqrt().is_some()
    }

    /// `true` when printing needs parentheses inside a product.
    fn is_compound(&self) -> bool {
        (!self.re.is_zero() && !self.im.is_zero()) || !self.re.is_integer() || !self.im.is_integer()
    }
}

impl fmt::Display for QI {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", fmt_rational(&self.re));
        }
        let im = if self.im.is_one() {
            "i".to_string()
        } else if (-self.im.clone()).is_one() {
            "-i".to_string()
        } else {
            format!("{}*i", fmt_rational(&self.im))
        };
        if self.re.is_zero() {
            write!(f, "{}", im)
        } else if im.starts_with('-') {
            write!(f, "{} - {}", fmt_rational(&self.re), &im[1..])
        } else {
            write!(f, "{} + {}", fmt_rational(&self.re), im)
        }
    }
}

macro_rules! qi_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&QI> for &QI {
            type Output = QI;
            fn $m(self, o: &QI) -> QI {
                let f: fn(&QI, &QI) -> QI = $body;
                f(self, o)
            }
        }
        impl $tr<QI> for QI {
            type Output = QI;
            fn $m(self, o: QI) -> QI {
                (&self).$m(&o)
            }
        }
    };
}

qi_binop!(Add, add, |a, b| QI { re: &a.re + &b.re, im: &a.im + &b.im });
qi_binop!(Sub, sub, |a, b| QI { re: &a.re - &b.re, im: &a.im - &b.im });
qi_binop!(Mul, mul, |a, b| QI {
    re: &a.re * &b.re - &a.im * &b.im,
    im: &a.re * &b.im + &a.im * &b.re,
});

impl Neg for &QI {
    type Output = QI;
    fn neg(self) -> QI {
        QI { re: -self.re.clone(), im: -self.im.clone() }
    }
}

impl Neg for QI {
    type Output = QI;
    fn neg(self) -> QI {
        -&self
    }
}

/// A finite sum `Σ c_γ t^γ` with `c_γ ∈ Q(i)` nonzero.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VFElem {
    terms: BTreeMap<Gamma, QI>,
}

impl VFElem {
    pub fn zero() -> Self {
        VFElem { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        VFElem::constant(QI::one())
    }

    pub fn constant(c: QI) -> Self {
        VFElem::monomial(c, gamma(0))
    }

    pub fn int(n: i64) -> Self {
        VFElem::constant(QI::int(n))
    }

    pub fn monomial(c: QI, g: Gamma) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(g, c);
        }
        VFElem { terms }
    }

    /// `t^g`.
    pub fn t_pow(g: Gamma) -> Self {
        VFElem::monomial(QI::one(), g)
    }

    pub fn from_terms<I: IntoIterator<Item = (Gamma, QI)>>(it: I) -> Self {
        let mut v = VFElem::zero();
        for (g, c) in it {
            v.add_term(g, c);
        }
        v
    }

    pub fn add_term(&mut self, g: Gamma, c: QI) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(g).or_insert_with(QI::zero);
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.terms.remove(&g);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Gamma, &QI)> + '_ {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&gamma(0)).is_some_and(|c| c.is_one())
    }

    /// Valuation: the least exponent, `∞` for zero.
    pub fn val(&self) -> GammaVal {
        match self.terms.keys().next() {
            Some(g) => GammaVal::Fin(*g),
            None => GammaVal::Inf,
        }
    }

    pub fn lead(&self) -> Option<(Gamma, &QI)> {
        self.terms.iter().next().map(|(g, c)| (*g, c))
    }

    pub fn as_monomial(&self) -> Option<(QI, Gamma)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(g, c)| (c.clone(), *g))
        } else {
            None
        }
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// The constant, when only `t^0` occurs.
    pub fn as_constant(&self) -> Option<QI> {
        match self.terms.len() {
            0 => Some(QI::zero()),
            1 => self.terms.get(&gamma(0)).cloned(),
            _ => None,
        }
    }

    pub fn coeff(&self, g: Gamma) -> QI {
        self.terms.get(&g).cloned().unwrap_or_default()
    }

    pub fn scale(&self, c: &QI) -> VFElem {
        if c.is_zero() {
            return VFElem::zero();
        }
        VFElem { terms: self.terms.iter().map(|(g, a)| (*g, a * c)).collect() }
    }

    /// Multiplies by `c·t^g`.
    pub fn mul_monomial(&self, c: &QI, g: Gamma) -> VFElem {
        if c.is_zero() {
            return VFElem::zero();
        }
        VFElem { terms: self.terms.iter().map(|(h, a)| (*h + g, a * c)).collect() }
    }

    pub fn pow(&self, k: u32) -> VFElem {
        let mut acc = VFElem::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Inverse; only monomials are invertible within finite sums.
    pub fn inverse(&self) -> MfResult<VFElem> {
        match self.as_monomial() {
            Some((c, g)) => Ok(VFElem::monomial(c.inv().expect("nonzero"), -g)),
            None if self.is_zero() => Err(MfError::DivideByZero),
            None => Err(MfError::NonMonomial(self.to_string())),
        }
    }

    /// `1/self` up to exponent `bound` (inclusive or not): the error has
    /// valuation `>= bound`, or `> bound` when `inclusive`.
    pub fn inverse_to(&self, bound: Gamma, inclusive: bool) -> MfResult<VFElem> {
        let (g, a) = match self.lead() {
            Some((g, a)) => (g, a.clone()),
            None => return Err(MfError::DivideByZero),
        };
        let lead = VFElem::monomial(a, g);
        let lead_inv = lead.inverse()?;
        // self = lead·(1 + eps), v(eps) > 0
        let eps = &(self * &lead_inv) - &VFElem::one();
        let Some(delta) = eps.val().finite() else {
            return Ok(lead_inv.truncate(bound, inclusive));
        };
        let reach = bound + g;
        let mut sum = VFElem::one();
        let mut term = VFElem::one();
        let neg = -&eps;
        let mut k = Gamma::from(0);
        while k <= reach {
            term = (&term * &neg).truncate(reach, true);
            sum = &sum + &term;
            k += delta;
        }
        Ok((&sum * &lead_inv).truncate(bound, inclusive))
    }

    /// Keeps the terms of exponent `< bound`, or `<= bound` when `inclusive`.
    pub fn truncate(&self, bound: Gamma, inclusive: bool) -> VFElem {
        VFElem {
            terms: self
                .terms
                .iter()
                .filter(|(g, _)| if inclusive { **g <= bound } else { **g < bound })
                .map(|(g, c)| (*g, c.clone()))
                .collect(),
        }
    }

    /// Image in `VF/ℳ`.
    pub fn theta(&self) -> OmegaElem {
        OmegaElem(self.truncate(gamma(0), true))
    }

    pub fn rv(&self) -> RVElem {
        match self.lead() {
            Some((g, c)) => RVElem::Fin { coef: c.clone(), val: g },
            None => RVElem::Inf,
        }
    }

    /// Whether every exponent is an integer.
    pub fn integral_exponents(&self) -> bool {
        self.terms.keys().all(|g| g.is_integer())
    }

    pub fn max_exponent(&self) -> Option<Gamma> {
        self.terms.keys().next_back().copied()
    }
}

impl fmt::Display for VFElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (g, c) in &self.terms {
            let (sign, c) = if !first && c.im.is_zero() && c.re.is_negative() {
                (" - ", -c)
            } else if first {
                ("", c.clone())
            } else {
                (" + ", c.clone())
            };
            f.write_str(sign)?;
            first = false;
            let tp = fmt_t_power(*g);
            match tp {
                None => {
                    if c.is_compound() && !sign.is_empty() && c.im.is_zero() {
                        write!(f, "{}", c)?
                    } else if c.is_compound() && !sign.is_empty() {
                        write!(f, "({})", c)?
                    } else {
                        write!(f, "{}", c)?
                    }
                }
                Some(tp) => {
                    if c.is_one() {
                        write!(f, "{}", tp)?
                    } else if (-&c).is_one() {
                        write!(f, "-{}", tp)?
                    } else if c.is_compound() {
                        write!(f, "({})*{}", c, tp)?
                    } else {
                        write!(f, "{}*{}", c, tp)?
                    }
                }
            }
        }
        Ok(())
    }
}

fn fmt_t_power(g: Gamma) -> Option<String> {
    if g.is_zero() {
        None
    } else if g.is_one() {
        Some("t".into())
    } else if g.is_integer() {
        Some(format!("t^{}", g.numer()))
    } else {
        Some(format!("t^({})", fmt_gamma(g)))
    }
}

impl Add<&VFElem> for &VFElem {
    type Output = VFElem;
    fn add(self, o: &VFElem) -> VFElem {
        let mut r = self.clone();
        for (g, c) in &o.terms {
            r.add_term(*g, c.clone());
        }
        r
    }
}

impl Sub<&VFElem> for &VFElem {
    type Output = VFElem;
    fn sub(self, o: &VFElem) -> VFElem {
        let mut r = self.clone();
        for (g, c) in &o.terms {
            r.add_term(*g, -c);
        }
        r
    }
}

impl Mul<&VFElem> for &VFElem {
    type Output = VFElem;
    fn mul(self, o: &VFElem) -> VFElem {
        let mut r = VFElem::zero();
        for (g, a) in &self.terms {
            for (h, b) in &o.terms {
                r.add_term(*g + *h, a * b);
            }
        }
        r
    }
}

impl Neg for &VFElem {
    type Output = VFElem;
    fn neg(self) -> VFElem {
        VFElem { terms: self.terms.iter().map(|(g, c)| (*g, -c)).collect() }
    }
}

macro_rules! owned_ops {
    ($t:ty) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t {
                &self + &o
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t {
                &self - &o
            }
        }
        impl Mul for $t {
            type Output = $t;
            fn mul(self, o: $t) -> $t {
                &self * &o
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                -&self
            }
        }
    };
}

owned_ops!(VFElem);

/// An element of `VF/ℳ`, represented by its truncation to exponents `≤ 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OmegaElem(VFElem);

impl OmegaElem {
    pub fn zero() -> Self {
        OmegaElem(VFElem::zero())
    }

    pub fn from_vf(v: &VFElem) -> Self {
        v.theta()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn as_vf(&self) -> &VFElem {
        &self.0
    }

    pub fn add(&self, o: &OmegaElem) -> OmegaElem {
        OmegaElem(&self.0 + &o.0)
    }

    pub fn neg(&self) -> OmegaElem {
        OmegaElem(-&self.0)
    }
}

impl fmt::Display for OmegaElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Leading term `rv(a) = (ac(a), v(a))`, with `Inf` standing for `rv(0)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RVElem {
    Inf,
    Fin { coef: QI, val: Gamma },
}

impl RVElem {
    pub fn one() -> Self {
        RVElem::Fin { coef: QI::one(), val: gamma(0) }
    }

    pub fn new(coef: QI, val: Gamma) -> Self {
        if coef.is_zero() {
            RVElem::Inf
        } else {
            RVElem::Fin { coef, val }
        }
    }

    pub fn mul(&self, o: &RVElem) -> RVElem {
        match (self, o) {
            (RVElem::Fin { coef: a, val: g }, RVElem::Fin { coef: b, val: h }) => {
                RVElem::Fin { coef: a * b, val: *g + *h }
            }
            _ => RVElem::Inf,
        }
    }

    pub fn inv(&self) -> MfResult<RVElem> {
        match self {
            RVElem::Fin { coef, val } => Ok(RVElem::Fin { coef: coef.inv().expect("nonzero"), val: -*val }),
            RVElem::Inf => Err(MfError::DivideByZero),
        }
    }

    pub fn val(&self) -> GammaVal {
        match self {
            RVElem::Fin { val, .. } => GammaVal::Fin(*val),
            RVElem::Inf => GammaVal::Inf,
        }
    }

    pub fn coef(&self) -> Option<&QI> {
        match self {
            RVElem::Fin { coef, .. } => Some(coef),
            RVElem::Inf => None,
        }
    }
}

impl fmt::Display for RVElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RVElem::Inf => write!(f, "rv(0, 0)"),
            RVElem::Fin { coef, val } => write!(f, "rv({}, {})", coef, fmt_gamma(*val)),
        }
    }
}

/// Compares two valuations with an optional strictness, `a > b` or `a ≥ b`.
pub fn val_at_least(a: GammaVal, b: GammaVal, strict: bool) -> bool {
    match a.cmp(&b) {
        Ordering::Greater => true,
        Ordering::Equal => !strict || a.is_inf(),
        Ordering::Less => false,
    }
}

/// Least common multiple helper used for denominators of exponents.
pub fn lcm_i64(a: i64, b: i64) -> i64 {
    a.lcm(&b)
}
