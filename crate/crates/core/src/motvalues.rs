//! Presented models of the value rings: `MotElem` for the ring of ball
//! volumes localized at `e`, and `CElem`, its group ring over `Ω`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::valfield::{fmt_gamma, gamma, Gamma, OmegaElem, VFElem};

/// `∏ O_γ^a · ∏ C_γ^b · e^k` in normal form: no `O_γ` next to a `C_{-γ}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MotMonomial {
    o: BTreeMap<Gamma, u32>,
    c: BTreeMap<Gamma, u32>,
    e: i64,
}

impl MotMonomial {
    pub fn one() -> Self {
        MotMonomial::default()
    }

    pub fn o(g: Gamma) -> Self {
        MotMonomial { o: BTreeMap::from([(g, 1)]), ..Default::default() }
    }

    pub fn c(g: Gamma) -> Self {
        MotMonomial { c: BTreeMap::from([(g, 1)]), ..Default::default() }
    }

    pub fn e_pow(k: i64) -> Self {
        MotMonomial { e: k, ..Default::default() }
    }

    /// Builds a monomial from raw exponents and normalizes it.
    pub fn from_raw(o: &[(Gamma, u32)], c: &[(Gamma, u32)], e: i64) -> Self {
        let mut m = MotMonomial { e, ..Default::default() };
        for (g, k) in o {
            if *k > 0 {
                *m.o.entry(*g).or_insert(0) += k;
            }
        }
        for (g, k) in c {
            if *k > 0 {
                *m.c.entry(*g).or_insert(0) += k;
            }
        }
        m.normalize();
        m
    }

    pub fn o_exps(&self) -> &BTreeMap<Gamma, u32> {
        &self.o
    }

    pub fn c_exps(&self) -> &BTreeMap<Gamma, u32> {
        &self.c
    }

    pub fn e_exp(&self) -> i64 {
        self.e
    }

    pub fn is_one(&self) -> bool {
        self.o.is_empty() && self.c.is_empty() && self.e == 0
    }

    fn normalize(&mut self) {
        let keys: Vec<Gamma> = self.o.keys().copied().collect();
        for g in keys {
            let a = self.o[&g];
            if let Some(&b) = self.c.get(&-g) {
                let k = a.min(b);
                self.e += k as i64;
                if a == k {
                    self.o.remove(&g);
                } else {
                    self.o.insert(g, a - k);
                }
                if b == k {
                    self.c.remove(&-g);
                } else {
                    self.c.insert(-g, b - k);
                }
            }
        }
    }

    pub fn mul(&self, other: &MotMonomial) -> MotMonomial {
        let mut m = self.clone();
        for (g, k) in &other.o {
            *m.o.entry(*g).or_insert(0) += k;
        }
        for (g, k) in &other.c {
            *m.c.entry(*g).or_insert(0) += k;
        }
        m.e += other.e;
        m.normalize();
        m
    }

    /// `O_γ^{-1} = C_{-γ} e^{-1}` and `C_γ^{-1} = O_{-γ} e^{-1}`.
    pub fn inverse(&self) -> MotMonomial {
        let mut m = MotMonomial { e: -self.e, ..Default::default() };
        for (g, k) in &self.o {
            m.c.insert(-*g, *k);
            m.e -= *k as i64;
        }
        for (g, k) in &self.c {
            m.o.insert(-*g, *k);
            m.e -= *k as i64;
        }
        m.normalize();
        m
    }

    /// Total degree in the volume symbols: `O` and `C` count one, `e` counts two.
    pub fn weight(&self) -> i64 {
        let s: i64 = self.o.values().chain(self.c.values()).map(|k| *k as i64).sum();
        s + 2 * self.e
    }
}

impl fmt::Display for MotMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (sym, map) in [("O", &self.o), ("C", &self.c)] {
            for (g, k) in map {
                let base = format!("{}[{}]", sym, fmt_gamma(*g));
                parts.push(if *k == 1 { base } else { format!("{}^{}", base, k) });
            }
        }
        match self.e {
            0 => {}
            1 => parts.push("e".into()),
            k => parts.push(format!("e^{}", k)),
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

/// Integer combination of normal-form monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MotElem {
    terms: BTreeMap<MotMonomial, BigInt>,
}

impl MotElem {
    pub fn zero() -> Self {
        MotElem::default()
    }

    pub fn one() -> Self {
        MotElem::from_monomial(MotMonomial::one())
    }

    pub fn int(n: i64) -> Self {
        let mut m = MotElem::zero();
        m.add_term(MotMonomial::one(), BigInt::from(n));
        m
    }

    pub fn from_monomial(m: MotMonomial) -> Self {
        MotElem { terms: BTreeMap::from([(m, BigInt::one())]) }
    }

    pub fn o(g: Gamma) -> Self {
        MotElem::from_monomial(MotMonomial::o(g))
    }

    pub fn c(g: Gamma) -> Self {
        MotElem::from_monomial(MotMonomial::c(g))
    }

    pub fn e() -> Self {
        MotElem::from_monomial(MotMonomial::e_pow(1))
    }

    pub fn e_pow(k: i64) -> Self {
        MotElem::from_monomial(MotMonomial::e_pow(k))
    }

    pub fn e_inv() -> Self {
        MotElem::e_pow(-1)
    }

    pub fn add_term(&mut self, m: MotMonomial, k: BigInt) {
        if k.is_zero() {
            return;
        }
        let slot = self.terms.entry(m.clone()).or_insert_with(BigInt::zero);
        *slot += k;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MotMonomial, &BigInt)> + '_ {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.iter().all(|(m, k)| m.is_one() && k.is_one())
    }

    pub fn add(&self, o: &MotElem) -> MotElem {
        let mut r = self.clone();
        for (m, k) in &o.terms {
            r.add_term(m.clone(), k.clone());
        }
        r
    }

    pub fn neg(&self) -> MotElem {
        MotElem { terms: self.terms.iter().map(|(m, k)| (m.clone(), -k)).collect() }
    }

    pub fn sub(&self, o: &MotElem) -> MotElem {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &MotElem) -> MotElem {
        let mut r = MotElem::zero();
        for (m1, k1) in &self.terms {
            for (m2, k2) in &o.terms {
                r.add_term(m1.mul(m2), k1 * k2);
            }
        }
        r
    }

    pub fn scale(&self, k: &BigInt) -> MotElem {
        let mut r = MotElem::zero();
        for (m, c) in &self.terms {
            r.add_term(m.clone(), c * k);
        }
        r
    }

    pub fn pow(&self, k: u32) -> MotElem {
        let mut acc = MotElem::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Inverse of a single unit-coefficient monomial.
    pub fn monomial_inverse(&self) -> Option<MotElem> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, k) = self.terms.iter().next()?;
        if k.abs().is_one() {
            let mut r = MotElem::zero();
            r.add_term(m.inverse(), k.clone());
            Some(r)
        } else {
            None
        }
    }
}

impl fmt::Display for MotElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, k)) in self.terms.iter().enumerate() {
            let neg = k.is_negative();
            let a = k.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            if m.is_one() {
                write!(f, "{}", a)?;
            } else if a.is_one() {
                write!(f, "{}", m)?;
            } else {
                write!(f, "{}*{}", a, m)?;
            }
        }
        Ok(())
    }
}

/// Finite `MotElem`-combination of symbols `exp⟨ω⟩`, `ω ∈ Ω`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CElem {
    terms: BTreeMap<OmegaElem, MotElem>,
}

impl CElem {
    pub fn zero() -> Self {
        CElem::default()
    }

    pub fn one() -> Self {
        CElem::from_mot(MotElem::one())
    }

    pub fn int(n: i64) -> Self {
        CElem::from_mot(MotElem::int(n))
    }

    pub fn from_mot(m: MotElem) -> Self {
        let mut c = CElem::zero();
        c.add_term(OmegaElem::zero(), m);
        c
    }

    pub fn exp(w: OmegaElem) -> Self {
        let mut c = CElem::zero();
        c.add_term(w, MotElem::one());
        c
    }

    /// `exp⟨θ(a)⟩`.
    pub fn exp_vf(a: &VFElem) -> Self {
        CElem::exp(a.theta())
    }

    pub fn add_term(&mut self, w: OmegaElem, m: MotElem) {
        if m.is_zero() {
            return;
        }
        let slot = self.terms.entry(w.clone()).or_default();
        *slot = slot.add(&m);
        if slot.is_zero() {
            self.terms.remove(&w);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OmegaElem, &MotElem)> + '_ {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&OmegaElem::zero()).is_some_and(|m| m.is_one())
    }

    /// The `MotElem` part when no nontrivial exponential occurs.
    pub fn as_mot(&self) -> Option<MotElem> {
        match self.terms.len() {
            0 => Some(MotElem::zero()),
            1 => self.terms.get(&OmegaElem::zero()).cloned(),
            _ => None,
        }
    }

    pub fn add(&self, o: &CElem) -> CElem {
        let mut r = self.clone();
        for (w, m) in &o.terms {
            r.add_term(w.clone(), m.clone());
        }
        r
    }

    pub fn neg(&self) -> CElem {
        CElem { terms: self.terms.iter().map(|(w, m)| (w.clone(), m.neg())).collect() }
    }

    pub fn sub(&self, o: &CElem) -> CElem {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &CElem) -> CElem {
        let mut r = CElem::zero();
        for (w1, m1) in &self.terms {
            for (w2, m2) in &o.terms {
                r.add_term(w1.add(w2), m1.mul(m2));
            }
        }
        r
    }

    pub fn mul_mot(&self, m: &MotElem) -> CElem {
        let mut r = CElem::zero();
        for (w, a) in &self.terms {
            r.add_term(w.clone(), a.mul(m));
        }
        r
    }

    /// Multiplies by `exp⟨θ(a)⟩`.
    pub fn shift(&self, a: &VFElem) -> CElem {
        let w = a.theta();
        if w.is_zero() {
            return self.clone();
        }
        CElem { terms: self.terms.iter().map(|(v, m)| (v.add(&w), m.clone())).collect() }
    }
}

impl fmt::Display for CElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (w, m)) in self.terms.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            if w.is_zero() {
                write!(f, "({})", m)?;
            } else if m.is_one() {
                write!(f, "exp{{{}}}", w)?;
            } else {
                write!(f, "({})*exp{{{}}}", m, w)?;
            }
        }
        Ok(())
    }
}

/// Values of the homogenized ring: `exp⟨ω⟩·𝓪^i·𝓫^j·T^γ` with integer
/// coefficients, reading `O_γ` as `𝓪T^γ`, `C_γ` as `𝓫T^γ` and `e` as `𝓪𝓫`.
///
/// The map kills `O_γC_δ − O_{γ+ε}C_{δ−ε}`. That relation holds in `𝓒`:
/// integrating `exp(x1x2/t + x·y)` over `𝒪²×𝒪²` in the two possible orders
/// gives `O_1C_0^3` and `O_0C_1C_0^2`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HomElem(BTreeMap<(OmegaElem, i64, i64, Gamma), BigInt>);

impl HomElem {
    pub fn of(c: &CElem) -> HomElem {
        let mut out = HomElem::default();
        for (w, m) in c.terms() {
            for (mono, k) in m.terms() {
                let (mut a, mut b, mut t) = (mono.e_exp(), mono.e_exp(), gamma(0));
                for (g, n) in mono.o_exps() {
                    a += *n as i64;
                    t += *g * Gamma::from(*n as i64);
                }
                for (g, n) in mono.c_exps() {
                    b += *n as i64;
                    t += *g * Gamma::from(*n as i64);
                }
                out.add((w.clone(), a, b, t), k);
            }
        }
        out
    }

    fn add(&mut self, key: (OmegaElem, i64, i64, Gamma), k: &BigInt) {
        let slot = self.0.entry(key.clone()).or_insert_with(BigInt::zero);
        *slot += k;
        if slot.is_zero() {
            self.0.remove(&key);
        }
    }

    pub fn shift_t(&self, d: Gamma) -> HomElem {
        HomElem(self.0.iter().map(|((w, a, b, t), k)| ((w.clone(), *a, *b, *t + d), k.clone())).collect())
    }
}

impl fmt::Display for HomElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|((w, a, b, t), k)| format!("{}*a^{}*b^{}*T^{}*exp{{{}}}", k, a, b, fmt_gamma(*t), w.as_vf()))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl CElem {
    /// Equality after homogenizing; implied by syntactic equality.
    pub fn homogenized_eq(&self, o: &CElem) -> bool {
        self == o || HomElem::of(self) == HomElem::of(o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valfield::gamma;

    #[test]
    fn dual_volumes_multiply_to_e() {
        for g in -3..=3 {
            assert_eq!(MotElem::o(gamma(g)).mul(&MotElem::c(gamma(-g))), MotElem::e());
        }
        assert_eq!(MotElem::o(gamma(0)).mul(&MotElem::c(gamma(0))), MotElem::e());
        assert_eq!(MotElem::o(gamma(1)).mul(&MotElem::o(gamma(1))).to_string(), "O[1]^2");
    }

    #[test]
    fn inverses() {
        let o2 = MotElem::o(gamma(2));
        assert!(o2.mul(&o2.monomial_inverse().unwrap()).is_one());
        assert!(MotElem::e().mul(&MotElem::e_inv()).is_one());
        let m = MotMonomial::from_raw(&[(gamma(1), 2)], &[(gamma(3), 1)], -2);
        assert!(m.mul(&m.inverse()).is_one());
    }

    #[test]
    fn display() {
        let m = MotMonomial::from_raw(&[(gamma(1), 2)], &[(gamma(-1), 1)], -1);
        assert_eq!(m.to_string(), "O[1]");
    }
}
