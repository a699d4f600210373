//! Balls, polyballs, duals, annihilators and affine support constraints.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{MfError, MfResult};
use crate::motvalues::MotElem;
use crate::valfield::{val_at_least, Gamma, GammaVal, VFElem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BallKind {
    Open,
    Closed,
}

impl BallKind {
    pub fn flip(self) -> Self {
        match self {
            BallKind::Open => BallKind::Closed,
            BallKind::Closed => BallKind::Open,
        }
    }
}

/// `𝔬(a,γ) = {v(x−a) > γ}` or `𝔠(a,γ) = {v(x−a) ≥ γ}`. Radius `∞` with
/// `Closed` is the point `{a}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ball {
    pub center: VFElem,
    pub radius: GammaVal,
    pub kind: BallKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BallRelation {
    Equal,
    FirstInSecond,
    SecondInFirst,
    Disjoint,
}

impl Ball {
    pub fn open(center: VFElem, r: Gamma) -> Ball {
        Ball { center, radius: GammaVal::Fin(r), kind: BallKind::Open }
    }

    pub fn closed(center: VFElem, r: Gamma) -> Ball {
        Ball { center, radius: GammaVal::Fin(r), kind: BallKind::Closed }
    }

    pub fn point(center: VFElem) -> Ball {
        Ball { center, radius: GammaVal::Inf, kind: BallKind::Closed }
    }

    pub fn is_point(&self) -> bool {
        self.radius.is_inf()
    }

    pub fn contains(&self, x: &VFElem) -> bool {
        contains_val((x - &self.center).val(), self.radius, self.kind)
    }

    /// Volume symbol: `O_γ`, `C_γ`, or `1` for a point.
    pub fn volume(&self) -> MotElem {
        volume_of(self.radius, self.kind)
    }

    pub fn dual(&self) -> MfResult<Ball> {
        match self.radius {
            GammaVal::Fin(r) => Ok(Ball { center: self.center.clone(), radius: GammaVal::Fin(-r), kind: self.kind.flip() }),
            GammaVal::Inf => Err(MfError::Unsupported("dual of a point".into())),
        }
    }

    /// `true` when `self` is no larger than `other` as a set shape.
    pub fn smaller_shape(&self, other: &Ball) -> bool {
        shape_key(self.radius, self.kind) >= shape_key(other.radius, other.kind)
    }

    pub fn relation(&self, other: &Ball) -> BallRelation {
        let d = (&self.center - &other.center).val();
        let a_has_b = contains_val(d, self.radius, self.kind);
        let b_has_a = contains_val(d, other.radius, other.kind);
        if !a_has_b && !b_has_a {
            return BallRelation::Disjoint;
        }
        match shape_key(self.radius, self.kind).cmp(&shape_key(other.radius, other.kind)) {
            Ordering::Equal => {
                if a_has_b {
                    BallRelation::Equal
                } else {
                    BallRelation::Disjoint
                }
            }
            Ordering::Greater => {
                if b_has_a {
                    BallRelation::FirstInSecond
                } else {
                    BallRelation::Disjoint
                }
            }
            Ordering::Less => {
                if a_has_b {
                    BallRelation::SecondInFirst
                } else {
                    BallRelation::Disjoint
                }
            }
        }
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.radius, self.kind) {
            (GammaVal::Inf, _) => write!(f, "point({})", self.center),
            (GammaVal::Fin(r), BallKind::Open) => write!(f, "oball({}, {})", self.center, crate::valfield::fmt_gamma(r)),
            (GammaVal::Fin(r), BallKind::Closed) => write!(f, "cball({}, {})", self.center, crate::valfield::fmt_gamma(r)),
        }
    }
}

/// Smaller sets get larger keys: larger radius, then open before closed.
pub fn shape_key(r: GammaVal, k: BallKind) -> (GammaVal, u8) {
    (r, if k == BallKind::Open { 1 } else { 0 })
}

/// Membership of an element of valuation `v` in a ball of radius `r` around 0.
pub fn contains_val(v: GammaVal, r: GammaVal, kind: BallKind) -> bool {
    match kind {
        BallKind::Open if !r.is_inf() => val_at_least(v, r, true),
        _ => val_at_least(v, r, false),
    }
}

pub fn volume_of(r: GammaVal, kind: BallKind) -> MotElem {
    match (r, kind) {
        (GammaVal::Inf, _) => MotElem::one(),
        (GammaVal::Fin(g), BallKind::Open) => MotElem::o(g),
        (GammaVal::Fin(g), BallKind::Closed) => MotElem::c(g),
    }
}

pub fn dual_ball(b: &Ball) -> MfResult<Ball> {
    b.dual()
}

pub fn ball_relation(a: &Ball, b: &Ball) -> BallRelation {
    a.relation(b)
}

/// One ball per coordinate; `None` leaves a coordinate unconstrained.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Polyball(pub Vec<Option<Ball>>);

impl Polyball {
    pub fn new(balls: Vec<Ball>) -> Self {
        Polyball(balls.into_iter().map(Some).collect())
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    pub fn balls(&self) -> MfResult<Vec<&Ball>> {
        self.0
            .iter()
            .map(|b| b.as_ref().ok_or_else(|| MfError::Unsupported("unbounded polyball coordinate".into())))
            .collect()
    }

    pub fn dual(&self) -> MfResult<Polyball> {
        Ok(Polyball(self.balls()?.into_iter().map(|b| b.dual().map(Some)).collect::<MfResult<_>>()?))
    }

    pub fn volume(&self) -> MfResult<MotElem> {
        let mut v = MotElem::one();
        for b in self.balls()? {
            v = v.mul(&b.volume());
        }
        Ok(v)
    }

    pub fn contains(&self, x: &[VFElem]) -> bool {
        self.0.iter().zip(x).all(|(b, a)| b.as_ref().map_or(true, |b| b.contains(a)))
    }

    pub fn centered_at_zero(&self) -> bool {
        self.0.iter().all(|b| b.as_ref().map_or(false, |b| b.center.is_zero() && !b.is_point()))
    }

    /// Conjunction of single-variable constraints.
    pub fn constraints(&self) -> Vec<Constraint> {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.as_ref().map(|b| Constraint::in_ball(i, b)))
            .collect()
    }
}

impl fmt::Display for Polyball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|b| b.as_ref().map_or("all".to_string(), |b| b.to_string())).collect();
        write!(f, "{}", parts.join(" × "))
    }
}

pub fn dual_polyball(p: &Polyball) -> MfResult<Polyball> {
    p.dual()
}

/// `H_*` for a polyball subgroup `H` centered at 0.
pub fn annihilator(h: &Polyball) -> MfResult<Polyball> {
    if !h.centered_at_zero() {
        return Err(MfError::NotCenteredAtZero);
    }
    h.dual()
}

/// `Σ m_i x_i + c`, variables indexed from 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Affine {
    pub coeffs: BTreeMap<usize, VFElem>,
    pub constant: VFElem,
}

impl Affine {
    pub fn constant(c: VFElem) -> Affine {
        Affine { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn var(i: usize) -> Affine {
        Affine::term(i, VFElem::one())
    }

    pub fn term(i: usize, m: VFElem) -> Affine {
        let mut a = Affine::default();
        a.add_coeff(i, &m);
        a
    }

    pub fn add_coeff(&mut self, i: usize, m: &VFElem) {
        let c = self.coeffs.get(&i).map_or_else(|| m.clone(), |x| x + m);
        if c.is_zero() {
            self.coeffs.remove(&i);
        } else {
            self.coeffs.insert(i, c);
        }
    }

    pub fn coeff(&self, i: usize) -> Option<&VFElem> {
        self.coeffs.get(&i)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn max_var(&self) -> Option<usize> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn add(&self, o: &Affine) -> Affine {
        let mut r = self.clone();
        for (i, m) in &o.coeffs {
            r.add_coeff(*i, m);
        }
        r.constant = &r.constant + &o.constant;
        r
    }

    pub fn neg(&self) -> Affine {
        self.scale(&VFElem::int(-1))
    }

    pub fn sub(&self, o: &Affine) -> Affine {
        self.add(&o.neg())
    }

    pub fn scale(&self, a: &VFElem) -> Affine {
        if a.is_zero() {
            return Affine::default();
        }
        Affine {
            coeffs: self.coeffs.iter().map(|(i, m)| (*i, m * a)).collect(),
            constant: &self.constant * a,
        }
    }

    pub fn eval(&self, x: &[VFElem]) -> VFElem {
        let mut acc = self.constant.clone();
        for (i, m) in &self.coeffs {
            acc = &acc + &(m * &x[*i]);
        }
        acc
    }

    /// Replaces `x_i` by `sub[i]`.
    pub fn substitute(&self, sub: &[Affine]) -> Affine {
        let mut r = Affine::constant(self.constant.clone());
        for (i, m) in &self.coeffs {
            r = r.add(&sub[*i].scale(m));
        }
        r
    }

    /// Drops `x_k` (which must not occur) and shifts later indices down.
    pub fn remove_var(&self, k: usize) -> Affine {
        debug_assert!(!self.coeffs.contains_key(&k));
        Affine {
            coeffs: self.coeffs.iter().map(|(i, m)| (if *i > k { i - 1 } else { *i }, m.clone())).collect(),
            constant: self.constant.clone(),
        }
    }

    pub fn linear_part(&self) -> Affine {
        Affine { coeffs: self.coeffs.clone(), constant: VFElem::zero() }
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (i, m) in &self.coeffs {
            parts.push(fmt_term(m, &format!("x{}", i + 1)));
        }
        if !self.constant.is_zero() || parts.is_empty() {
            parts.push(fmt_term(&self.constant, ""));
        }
        write!(f, "{}", join_signed(&parts))
    }
}

/// `m*x` with parentheses when `m` is a sum.
pub fn fmt_term(m: &VFElem, var: &str) -> String {
    if var.is_empty() {
        let s = m.to_string();
        return if m.num_terms() > 1 { format!("({})", s) } else { s };
    }
    if m.is_one() {
        return var.to_string();
    }
    if m.num_terms() == 1 {
        let s = m.to_string();
        if s == "-1" {
            return format!("-{}", var);
        }
        if !s.contains(" + ") && !s.contains(" - ") {
            return format!("{}*{}", s, var);
        }
    }
    format!("({})*{}", m, var)
}

pub fn join_signed(parts: &[String]) -> String {
    let mut out = String::new();
    for (i, p) in parts.iter().enumerate() {
        if i == 0 {
            out.push_str(p);
        } else if let Some(rest) = p.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(p);
        }
    }
    out
}

/// `form(x) ∈ B(0, radius, kind)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constraint {
    pub form: Affine,
    pub radius: GammaVal,
    pub kind: BallKind,
}

/// `x_k ∈ B(center(x'), radius, kind)` with `center` free of `x_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MovingBall {
    pub center: Affine,
    pub radius: GammaVal,
    pub kind: BallKind,
}

impl MovingBall {
    pub fn volume(&self) -> MotElem {
        volume_of(self.radius, self.kind)
    }

    pub fn shape_key(&self) -> (GammaVal, u8) {
        shape_key(self.radius, self.kind)
    }
}

impl Constraint {
    /// `form(x) ∈ ball`, re-centered at 0.
    pub fn new(form: Affine, ball: &Ball) -> Constraint {
        let form = form.sub(&Affine::constant(ball.center.clone()));
        Constraint { form, radius: ball.radius, kind: ball.kind }
    }

    pub fn in_ball(i: usize, ball: &Ball) -> Constraint {
        Constraint::new(Affine::var(i), ball)
    }

    pub fn holds(&self, x: &[VFElem]) -> bool {
        contains_val(self.form.eval(x).val(), self.radius, self.kind)
    }

    pub fn target(&self) -> Ball {
        Ball { center: VFElem::zero(), radius: self.radius, kind: self.kind }
    }

    pub fn involves(&self, k: usize) -> bool {
        self.form.coeffs.contains_key(&k)
    }

    /// Solves for `x_k`; the coefficient of `x_k` must be a monomial.
    pub fn solve_for(&self, k: usize) -> MfResult<MovingBall> {
        self.solve_within(k, None)
    }

    /// Solves for `x_k` on a region where `v(x_k) >= lb`. There a coefficient
    /// `m` that is not a monomial may be replaced by a truncation of `1/m`:
    /// `v(rest) >= min(r, v(m) + lb)` bounds the error of the center.
    pub fn solve_within(&self, k: usize, lb: Option<GammaVal>) -> MfResult<MovingBall> {
        let m = self.form.coeff(k).ok_or_else(|| MfError::Invalid(format!("x{} does not occur", k + 1)))?;
        let vm = m.val().finite().ok_or(MfError::DivideByZero)?;
        let radius = self.radius.plus(-vm);
        let inv = match (m.inverse(), self.radius, lb) {
            (Ok(inv), _, _) => inv,
            (Err(MfError::NonMonomial(_)), GammaVal::Fin(r), Some(lb)) => {
                let lam = match lb {
                    GammaVal::Fin(l) => r.min(vm + l),
                    GammaVal::Inf => r,
                };
                m.inverse_to(r - vm - lam, self.kind == BallKind::Open)?
            }
            (Err(e), _, _) => return Err(e),
        };
        let mut rest = self.form.clone();
        rest.coeffs.remove(&k);
        let center = rest.scale(&-&inv);
        Ok(MovingBall { center, radius, kind: self.kind })
    }

    pub fn substitute(&self, sub: &[Affine]) -> Constraint {
        Constraint { form: self.form.substitute(sub), radius: self.radius, kind: self.kind }
    }

    /// Truth value when no variable occurs.
    pub fn constant_truth(&self) -> Option<bool> {
        if self.form.is_constant() {
            Some(contains_val(self.form.constant.val(), self.radius, self.kind))
        } else {
            None
        }
    }

    /// Canonical shape: first coefficient 1 when it is a monomial, constant
    /// truncated to terms that matter for membership.
    pub fn normalized(&self) -> Constraint {
        let mut c = self.clone();
        if let Some((_, m)) = c.form.coeffs.iter().next() {
            if let Ok(inv) = m.inverse() {
                let vm = m.val().finite().expect("nonzero");
                c.form = c.form.scale(&inv);
                c.radius = c.radius.plus(-vm);
            }
        }
        if let GammaVal::Fin(r) = c.radius {
            c.form.constant = c.form.constant.truncate(r, c.kind == BallKind::Open);
        }
        c
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "in({}, {})", self.form, self.target())
    }
}
