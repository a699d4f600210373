//! Polynomials over `VF`, Newton polygons, limit sets of one-parameter
//! families and derivatives of polynomial maps.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{MfError, MfResult};
use crate::valfield::{fmt_gamma, Gamma, GammaVal, VFElem, QI};
use crate::wavefn::determinant;

/// A polynomial in `x1..xn`, as exponent vector ↦ coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VFPoly {
    pub nvars: usize,
    terms: BTreeMap<Vec<u32>, VFElem>,
}

impl VFPoly {
    pub fn zero(nvars: usize) -> VFPoly {
        VFPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: VFElem) -> VFPoly {
        let mut p = VFPoly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> VFPoly {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = VFPoly::zero(nvars);
        p.add_term(e, VFElem::one());
        p
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: VFElem) {
        debug_assert_eq!(e.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_insert_with(VFElem::zero);
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &VFElem)> + '_ {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Widens to `n ≥ nvars` variables.
    pub fn with_vars(&self, n: usize) -> VFPoly {
        let mut p = VFPoly::zero(n.max(self.nvars));
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2.resize(p.nvars, 0);
            p.add_term(e2, c.clone());
        }
        p
    }

    pub fn add(&self, o: &VFPoly) -> VFPoly {
        let n = self.nvars.max(o.nvars);
        let mut p = self.with_vars(n);
        for (e, c) in &o.with_vars(n).terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn neg(&self) -> VFPoly {
        VFPoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    pub fn sub(&self, o: &VFPoly) -> VFPoly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &VFPoly) -> VFPoly {
        let n = self.nvars.max(o.nvars);
        let (a, b) = (self.with_vars(n), o.with_vars(n));
        let mut p = VFPoly::zero(n);
        for (e1, c1) in &a.terms {
            for (e2, c2) in &b.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(x, y)| x + y).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }

    pub fn pow(&self, k: u32) -> VFPoly {
        let mut acc = VFPoly::constant(self.nvars, VFElem::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, x: &[VFElem]) -> MfResult<VFElem> {
        if x.len() != self.nvars {
            return Err(MfError::ArityMismatch { expected: self.nvars, found: x.len() });
        }
        let mut acc = VFElem::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, k) in x.iter().zip(e) {
                t = &t * &xi.pow(*k);
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }

    /// `∂/∂x_i`.
    pub fn partial(&self, i: usize) -> VFPoly {
        let mut p = VFPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            if i < e.len() && e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                p.add_term(e2, c * &VFElem::int(e[i] as i64));
            }
        }
        p
    }

    /// `g(f_1, …, f_n)`.
    pub fn compose(&self, fs: &[VFPoly]) -> MfResult<VFPoly> {
        if fs.len() != self.nvars {
            return Err(MfError::ArityMismatch { expected: self.nvars, found: fs.len() });
        }
        let m = fs.iter().map(|f| f.nvars).max().unwrap_or(0);
        let mut out = VFPoly::zero(m);
        for (e, c) in &self.terms {
            let mut t = VFPoly::constant(m, c.clone());
            for (f, k) in fs.iter().zip(e) {
                t = t.mul(&f.pow(*k));
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    pub fn degree_in(&self, i: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[i]).max()
    }

    /// Coefficients in `x_i` (as polynomials in the other variables, still indexed as before).
    pub fn coeffs_in(&self, i: usize) -> BTreeMap<u32, VFPoly> {
        let mut out: BTreeMap<u32, VFPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[i] = 0;
            out.entry(e[i]).or_insert_with(|| VFPoly::zero(self.nvars)).add_term(e2, c.clone());
        }
        out
    }

    /// Divides by `x_i^k` where every term allows it.
    fn shift_down(&self, i: usize, k: u32) -> VFPoly {
        let mut p = VFPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[i] -= k;
            p.add_term(e2, c.clone());
        }
        p
    }
}

fn var_name(nvars: usize, i: usize) -> String {
    if nvars == 2 {
        ["x", "y"][i].to_string()
    } else {
        format!("x{}", i + 1)
    }
}

impl fmt::Display for VFPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (n, (e, c)) in self.terms.iter().rev().enumerate() {
            let mut vars = Vec::new();
            for (i, k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => vars.push(var_name(self.nvars, i)),
                    _ => vars.push(format!("{}^{}", var_name(self.nvars, i), k)),
                }
            }
            let (neg, body) = match (c.as_constant(), vars.is_empty()) {
                (Some(q), _) if q.im.is_zero() && q.re.is_negative() => {
                    let a = QI::real(-q.re.clone());
                    let s = if a.is_one() && !vars.is_empty() { vars.join("*") } else if vars.is_empty() { a.to_string() } else { format!("{}*{}", a, vars.join("*")) };
                    (true, s)
                }
                (Some(q), false) if q.is_one() => (false, vars.join("*")),
                (_, true) => (false, paren(c)),
                _ => (false, format!("{}*{}", paren(c), vars.join("*"))),
            };
            if n == 0 {
                out.push_str(&if neg { format!("-{}", body) } else { body });
            } else {
                out.push_str(if neg { " - " } else { " + " });
                out.push_str(&body);
            }
        }
        write!(f, "{}", out)
    }
}

fn paren(c: &VFElem) -> String {
    if c.num_terms() > 1 || c.as_constant().map_or(false, |q| !q.re.is_zero() && !q.im.is_zero()) {
        format!("({})", c)
    } else {
        c.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub slope: String,
    pub length: u32,
    pub root_valuation: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    pub vertices: Vec<(u32, Gamma)>,
}

impl NewtonPolygon {
    /// `(slope, length)` of each segment; slopes increase strictly.
    pub fn segments(&self) -> Vec<(Gamma, u32)> {
        self.vertices
            .windows(2)
            .map(|w| {
                let len = w[1].0 - w[0].0;
                ((w[1].1 - w[0].1) / Gamma::from(len as i64), len)
            })
            .collect()
    }

    /// Root valuations with multiplicity, from the segments.
    pub fn root_valuations(&self) -> Vec<(Gamma, u32)> {
        self.segments().into_iter().map(|(s, l)| (-s, l)).collect()
    }

    pub fn describe(&self) -> Vec<Segment> {
        self.segments()
            .into_iter()
            .map(|(s, l)| Segment { slope: fmt_gamma(s), length: l, root_valuation: fmt_gamma(-s) })
            .collect()
    }
}

/// Lower convex hull of `(j, v(c_j))` for a polynomial in one variable.
pub fn newton_polygon(p: &VFPoly, var: usize) -> MfResult<NewtonPolygon> {
    if p.is_zero() {
        return Err(MfError::Invalid("zero polynomial".into()));
    }
    let mut pts: Vec<(u32, Gamma)> = Vec::new();
    for (j, c) in p.coeffs_in(var) {
        if c.nvars > 0 && c.terms().any(|(e, _)| e.iter().enumerate().any(|(i, k)| i != var && *k > 0)) {
            return Err(MfError::Invalid("polynomial must be univariate".into()));
        }
        let cv = c.terms().next().map(|(_, v)| v.clone()).unwrap_or_else(VFElem::zero);
        if let GammaVal::Fin(v) = cv.val() {
            pts.push((j, v));
        }
    }
    let mut hull: Vec<(u32, Gamma)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b unless it lies strictly below the chord a–p
            let lhs = (b.1 - a.1) * Gamma::from((p.0 - a.0) as i64);
            let rhs = (p.1 - a.1) * Gamma::from((b.0 - a.0) as i64);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    Ok(NewtonPolygon { vertices: hull })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LimitSet {
    Escape,
    Limits(Vec<QI>),
}

impl fmt::Display for LimitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitSet::Escape => write!(f, "Escape"),
            LimitSet::Limits(v) => {
                let s: Vec<String> = v.iter().map(|q| q.to_string()).collect();
                write!(f, "Limits{{{}}}", s.join(", "))
            }
        }
    }
}

/// `g = y^m · x^k · g*(x, y)` with `g*` divisible by neither variable.
pub fn reduce_star(g: &VFPoly) -> MfResult<VFPoly> {
    if g.nvars != 2 {
        return Err(MfError::ArityMismatch { expected: 2, found: g.nvars });
    }
    if g.is_zero() {
        return Err(MfError::Invalid("zero polynomial".into()));
    }
    let my = g.terms().map(|(e, _)| e[1]).min().unwrap_or(0);
    let mx = g.terms().map(|(e, _)| e[0]).min().unwrap_or(0);
    Ok(g.shift_down(1, my).shift_down(0, mx))
}

/// `g*(0, y)` as Gaussian-rational coefficients, lowest degree first.
pub fn star_at_zero(g: &VFPoly) -> MfResult<Vec<QI>> {
    let s = reduce_star(g)?;
    let d = s.degree_in(1).unwrap_or(0) as usize;
    let mut out = vec![QI::zero(); d + 1];
    for (e, c) in s.terms() {
        if e[0] == 0 {
            out[e[1] as usize] = c
                .as_constant()
                .ok_or_else(|| MfError::Unsupported(format!("coefficient {} is not in Q(i)", c)))?;
        }
    }
    Ok(out)
}

/// Classification of the limits of `y` along `g(x, y) = 0` as `x → 0`.
///
/// Roots escape exactly when the leading `y`-coefficient of `g*` vanishes at
/// `x = 0`: the polygon of `(j, ord_x c_j)` then rises after the degree of
/// `g*(0, y)`, giving roots of valuation `→ −∞`. Otherwise every root tends to
/// a root of `g*(0, y)`, which is returned (a superset of the minimal limit set).
pub fn limit_set(g: &VFPoly) -> MfResult<LimitSet> {
    let s = reduce_star(g)?;
    if let Some((_, c)) = s.terms().find(|(_, c)| c.as_constant().is_none()) {
        return Err(MfError::Unsupported(format!("coefficient {} is not in Q(i)", c)));
    }
    let d = s.degree_in(1).unwrap_or(0);
    let lead = &s.coeffs_in(1)[&d];
    let lead_at_zero = lead.terms().any(|(e, _)| e[0] == 0);
    if !lead_at_zero {
        return Ok(LimitSet::Escape);
    }
    let coeffs = star_at_zero(g)?;
    let mut roots: BTreeSet<QI> = BTreeSet::new();
    for r in roots_qi(&coeffs)? {
        roots.insert(r);
    }
    Ok(LimitSet::Limits(roots.into_iter().collect()))
}

pub fn eval_qi(coeffs: &[QI], x: &QI) -> QI {
    let mut acc = QI::zero();
    for c in coeffs.iter().rev() {
        acc = &(&acc * x) + c;
    }
    acc
}

fn deflate(coeffs: &[QI], r: &QI) -> Vec<QI> {
    // synthetic division by (y − r)
    let n = coeffs.len() - 1;
    let mut out = vec![QI::zero(); n];
    let mut carry = QI::zero();
    for j in (1..=n).rev() {
        carry = &(&carry * r) + &coeffs[j];
        out[j - 1] = carry.clone();
    }
    out
}

fn trim(mut c: Vec<QI>) -> Vec<QI> {
    while c.len() > 1 && c.last().map_or(false, |x| x.is_zero()) {
        c.pop();
    }
    c
}

/// All roots in `Q(i)`; fails if an irreducible factor of degree ≥ 2 remains.
pub fn roots_qi(coeffs: &[QI]) -> MfResult<Vec<QI>> {
    let mut c = trim(coeffs.to_vec());
    let mut out = Vec::new();
    while c.len() > 1 && c[0].is_zero() {
        out.push(QI::zero());
        c.remove(0);
    }
    loop {
        let deg = c.len() - 1;
        match deg {
            0 => return Ok(out),
            1 => {
                out.push(-&(&c[0] * &c[1].inv().expect("nonzero")));
                return Ok(out);
            }
            2 => {
                let (a, b, cc) = (&c[2], &c[1], &c[0]);
                let disc = &(b * b) - &(&(&QI::int(4) * a) * cc);
                let s = disc.sqrt().ok_or_else(|| MfError::CannotSplit(poly_string(&c)))?;
                let den = (&QI::int(2) * a).inv().expect("nonzero");
                out.push(&(&(-b) + &s) * &den);
                out.push(&(&(-b) - &s) * &den);
                return Ok(out);
            }
            _ => {
                let r = gaussian_root(&c).ok_or_else(|| MfError::CannotSplit(poly_string(&c)))?;
                c = deflate(&c, &r);
                out.push(r);
            }
        }
    }
}

fn poly_string(c: &[QI]) -> String {
    let mut p = VFPoly::zero(1);
    for (j, q) in c.iter().enumerate() {
        p.add_term(vec![j as u32], VFElem::constant(q.clone()));
    }
    p.to_string()
}

type GInt = (BigInt, BigInt);

fn gmul(a: &GInt, b: &GInt) -> GInt {
    (&a.0 * &b.0 - &a.1 * &b.1, &a.0 * &b.1 + &a.1 * &b.0)
}

fn gdivides(d: &GInt, n: &GInt) -> bool {
    let nd = &d.0 * &d.0 + &d.1 * &d.1;
    if nd.is_zero() {
        return false;
    }
    let conj = (d.0.clone(), -d.1.clone());
    let p = gmul(n, &conj);
    p.0.is_multiple_of(&nd) && p.1.is_multiple_of(&nd)
}

const DIVISOR_NORM_CAP: i64 = 40_000;

fn gdivisors(n: &GInt) -> Option<Vec<GInt>> {
    let nn = &n.0 * &n.0 + &n.1 * &n.1;
    let cap = BigInt::from(DIVISOR_NORM_CAP);
    if nn > cap {
        return None;
    }
    let nn: i64 = nn.try_into().ok()?;
    let r = (nn as f64).sqrt() as i64 + 1;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            let m = a * a + b * b;
            if m == 0 || nn % m != 0 {
                continue;
            }
            let d = (BigInt::from(a), BigInt::from(b));
            if gdivides(&d, n) {
                out.push(d);
            }
        }
    }
    Some(out)
}

/// Rational root search over `Z[i]`: a root `p/q` has `p | c_0` and `q | c_d`.
fn gaussian_root(c: &[QI]) -> Option<QI> {
    let mut den = BigInt::one();
    for q in c {
        den = den.lcm(q.re.denom()).lcm(q.im.denom());
    }
    let ints: Vec<GInt> = c
        .iter()
        .map(|q| {
            let re = &q.re * BigRational::from_integer(den.clone());
            let im = &q.im * BigRational::from_integer(den.clone());
            (re.to_integer(), im.to_integer())
        })
        .collect();
    let ps = gdivisors(&ints[0])?;
    let qs = gdivisors(ints.last()?)?;
    for p in &ps {
        for q in &qs {
            let pq = QI::new(BigRational::from_integer(p.0.clone()), BigRational::from_integer(p.1.clone()));
            let qq = QI::new(BigRational::from_integer(q.0.clone()), BigRational::from_integer(q.1.clone()));
            let r = &pq * &qq.inv()?;
            if eval_qi(c, &r).is_zero() {
                return Some(r);
            }
        }
    }
    None
}

/// `(∂f_i/∂x_j)(a)`.
pub fn derivative(map: &[VFPoly], point: &[VFElem]) -> MfResult<Vec<Vec<VFElem>>> {
    let n = point.len();
    map.iter()
        .map(|f| (0..n).map(|j| f.with_vars(n).partial(j).eval(point)).collect::<MfResult<Vec<_>>>())
        .collect()
}

pub fn jacobian(map: &[VFPoly], point: &[VFElem]) -> MfResult<VFElem> {
    if map.len() != point.len() {
        return Err(MfError::NonSquare);
    }
    Ok(determinant(&derivative(map, point)?))
}

pub fn mat_mul(a: &[Vec<VFElem>], b: &[Vec<VFElem>]) -> Vec<Vec<VFElem>> {
    let k = b.len();
    let m = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..m)
                .map(|j| (0..k).fold(VFElem::zero(), |acc, l| &acc + &(&row[l] * &b[l][j])))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valfield::gamma;

    fn x() -> VFPoly {
        VFPoly::var(2, 0)
    }
    fn y() -> VFPoly {
        VFPoly::var(2, 1)
    }
    fn k(n: i64) -> VFPoly {
        VFPoly::constant(2, VFElem::int(n))
    }
    fn t(g: i64) -> VFPoly {
        VFPoly::constant(2, VFElem::t_pow(gamma(g)))
    }

    #[test]
    fn polygons() {
        let p = y().mul(&y()).sub(&k(1).add(&t(1)));
        let np = newton_polygon(&p, 1).unwrap();
        assert_eq!(np.vertices, vec![(0, gamma(0)), (2, gamma(0))]);
        let q = t(1).mul(&y().pow(2)).sub(&y()).add(&t(1));
        let nq = newton_polygon(&q, 1).unwrap();
        assert_eq!(nq.vertices, vec![(0, gamma(1)), (1, gamma(0)), (2, gamma(1))]);
        assert_eq!(nq.root_valuations(), vec![(gamma(1), 1), (gamma(-1), 1)]);
    }

    #[test]
    fn limits() {
        assert_eq!(limit_set(&x().mul(&y()).sub(&k(1))).unwrap(), LimitSet::Escape);
        assert_eq!(limit_set(&x().mul(&y().pow(2)).sub(&y()).add(&x())).unwrap(), LimitSet::Escape);
        let g = y().pow(2).sub(&k(1).add(&x()));
        assert_eq!(limit_set(&g).unwrap(), LimitSet::Limits(vec![QI::int(-1), QI::int(1)]));
        let h = y().pow(2).add(&k(1));
        assert!(matches!(limit_set(&h).unwrap(), LimitSet::Limits(v) if v.len() == 2));
        let irr = y().pow(2).sub(&k(2));
        assert!(matches!(limit_set(&irr), Err(MfError::CannotSplit(_))));
    }

    #[test]
    fn cubic_roots() {
        // (y − 1)(y − i)(2y + 3)
        let c = vec![QI::gauss(0, 3), QI::gauss(-3, -1), QI::gauss(1, -2), QI::int(2)];
        let mut want = roots_qi(&c).unwrap();
        want.sort();
        for r in &want {
            assert!(eval_qi(&c, r).is_zero());
        }
        assert_eq!(want.len(), 3);
    }

    #[test]
    fn jacobians() {
        let a = VFElem::t_pow(gamma(2));
        let ax = VFPoly::constant(2, a.clone()).mul(&x());
        let ay = VFPoly::constant(2, a.clone()).mul(&y());
        let pt = [VFElem::one(), VFElem::t_pow(gamma(-1))];
        assert_eq!(jacobian(&[ax.clone(), ay], &pt).unwrap(), &a * &a);
        let ainv = VFPoly::constant(2, a.inverse().unwrap()).mul(&y());
        assert_eq!(jacobian(&[ax, ainv], &pt).unwrap(), VFElem::one());
        let sq = VFPoly::var(1, 0).pow(2);
        assert_eq!(derivative(&[sq], &[VFElem::t_pow(gamma(1))]).unwrap()[0][0], VFElem::monomial(QI::int(2), gamma(1)));
        assert!(matches!(jacobian(&[x()], &pt), Err(MfError::NonSquare)));
    }
}
