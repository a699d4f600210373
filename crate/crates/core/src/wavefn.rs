//! Wave packets and the function class `MotFn` they span.
//!
//! A packet is `coeff · exp⟨θ(Q(x))⟩ · [x ∈ support]` with a conjunction of
//! affine ball constraints as support and a quadratic phase `Q`. Every
//! operation returns a canonical form (see [`MotFn::normalize`]) so that
//! equal normal forms can be compared syntactically.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{MfError, MfResult};
use crate::geometry::{contains_val, fmt_term, join_signed, Affine, Ball, BallKind, BallRelation, Constraint, Polyball};
use crate::motvalues::CElem;
use crate::valfield::{gamma, Gamma, GammaVal, QI, VFElem};

/// `Σ_{i≤j} q_ij x_i x_j + Σ b_i x_i + d`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Phase {
    quad: BTreeMap<(usize, usize), VFElem>,
    lin: BTreeMap<usize, VFElem>,
    constant: VFElem,
}

fn add_entry<K: Ord + Clone>(map: &mut BTreeMap<K, VFElem>, k: K, v: &VFElem) {
    if v.is_zero() {
        return;
    }
    let s = map.get(&k).map_or_else(|| v.clone(), |x| x + v);
    if s.is_zero() {
        map.remove(&k);
    } else {
        map.insert(k, s);
    }
}

impl Phase {
    pub fn zero() -> Phase {
        Phase::default()
    }

    pub fn constant(d: VFElem) -> Phase {
        Phase { constant: d, ..Default::default() }
    }

    pub fn linear(i: usize, b: VFElem) -> Phase {
        let mut p = Phase::zero();
        p.add_linear(i, &b);
        p
    }

    pub fn bilinear(i: usize, j: usize, q: VFElem) -> Phase {
        let mut p = Phase::zero();
        p.add_quad(i, j, &q);
        p
    }

    /// Phase of a linear character `x ↦ Σ b_i x_i`.
    pub fn from_affine(a: &Affine) -> Phase {
        let mut p = Phase::constant(a.constant.clone());
        for (i, m) in &a.coeffs {
            p.add_linear(*i, m);
        }
        p
    }

    /// The product of two affine forms.
    pub fn affine_product(a: &Affine, b: &Affine) -> Phase {
        let mut p = Phase::constant(&a.constant * &b.constant);
        for (i, m) in &a.coeffs {
            for (j, n) in &b.coeffs {
                p.add_quad(*i, *j, &(m * n));
            }
            p.add_linear(*i, &(m * &b.constant));
        }
        for (j, n) in &b.coeffs {
            p.add_linear(*j, &(n * &a.constant));
        }
        p
    }

    pub fn add_quad(&mut self, i: usize, j: usize, q: &VFElem) {
        let k = if i <= j { (i, j) } else { (j, i) };
        add_entry(&mut self.quad, k, q);
    }

    pub fn add_linear(&mut self, i: usize, b: &VFElem) {
        add_entry(&mut self.lin, i, b);
    }

    pub fn constant_term(&self) -> &VFElem {
        &self.constant
    }

    pub fn quad_terms(&self) -> impl Iterator<Item = (&(usize, usize), &VFElem)> + '_ {
        self.quad.iter()
    }

    pub fn linear_terms(&self) -> impl Iterator<Item = (&usize, &VFElem)> + '_ {
        self.lin.iter()
    }

    pub fn linear_coeff(&self, i: usize) -> VFElem {
        self.lin.get(&i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.quad.is_empty() && self.lin.is_empty() && self.constant.is_zero()
    }

    /// No variable occurs.
    pub fn is_constant(&self) -> bool {
        self.quad.is_empty() && self.lin.is_empty()
    }

    pub fn has_square(&self) -> bool {
        self.quad.keys().any(|(i, j)| i == j)
    }

    pub fn has_square_in(&self, k: usize) -> bool {
        self.quad.contains_key(&(k, k))
    }

    pub fn vars(&self) -> BTreeSet<usize> {
        let mut s: BTreeSet<usize> = self.lin.keys().copied().collect();
        for (i, j) in self.quad.keys() {
            s.insert(*i);
            s.insert(*j);
        }
        s
    }

    pub fn max_var(&self) -> Option<usize> {
        self.vars().into_iter().next_back()
    }

    pub fn add(&self, o: &Phase) -> Phase {
        let mut r = self.clone();
        for ((i, j), q) in &o.quad {
            r.add_quad(*i, *j, q);
        }
        for (i, b) in &o.lin {
            r.add_linear(*i, b);
        }
        r.constant = &r.constant + &o.constant;
        r
    }

    pub fn scale(&self, a: &VFElem) -> Phase {
        let mut r = Phase::constant(&self.constant * a);
        for ((i, j), q) in &self.quad {
            r.add_quad(*i, *j, &(q * a));
        }
        for (i, b) in &self.lin {
            r.add_linear(*i, &(b * a));
        }
        r
    }

    pub fn neg(&self) -> Phase {
        self.scale(&VFElem::int(-1))
    }

    pub fn eval(&self, x: &[VFElem]) -> VFElem {
        let mut acc = self.constant.clone();
        for (i, b) in &self.lin {
            acc = &acc + &(b * &x[*i]);
        }
        for ((i, j), q) in &self.quad {
            acc = &acc + &(&(q * &x[*i]) * &x[*j]);
        }
        acc
    }

    /// `∂Q/∂x_i` as an affine form.
    pub fn partial(&self, i: usize) -> Affine {
        let mut a = Affine::constant(self.linear_coeff(i));
        for ((p, q), c) in &self.quad {
            if *p == i && *q == i {
                a.add_coeff(i, &(c * &VFElem::int(2)));
            } else if *p == i {
                a.add_coeff(*q, c);
            } else if *q == i {
                a.add_coeff(*p, c);
            }
        }
        a
    }

    /// Replaces `x_i` by `sub[i]`.
    pub fn substitute(&self, sub: &[Affine]) -> Phase {
        let mut r = Phase::constant(self.constant.clone());
        for (i, b) in &self.lin {
            r = r.add(&Phase::from_affine(&sub[*i].scale(b)));
        }
        for ((i, j), q) in &self.quad {
            r = r.add(&Phase::affine_product(&sub[*i].scale(q), &sub[*j]));
        }
        r
    }

    /// Splits `Q = L(x')·x_k + R(x')`; fails on a square in `x_k`.
    pub fn split_var(&self, k: usize) -> MfResult<(Affine, Phase)> {
        if self.has_square_in(k) {
            return Err(MfError::UnsupportedPhase(format!("square term in x{}", k + 1)));
        }
        let mut l = Affine::constant(self.linear_coeff(k));
        let mut r = Phase::constant(self.constant.clone());
        for (i, b) in &self.lin {
            if *i != k {
                r.add_linear(*i, b);
            }
        }
        for ((i, j), q) in &self.quad {
            if *i == k {
                l.add_coeff(*j, q);
            } else if *j == k {
                l.add_coeff(*i, q);
            } else {
                r.add_quad(*i, *j, q);
            }
        }
        Ok((l, r))
    }

    /// Drops variable `k` (absent) and shifts later indices.
    pub fn remove_var(&self, k: usize) -> Phase {
        let sh = |i: usize| if i > k { i - 1 } else { i };
        let mut r = Phase::constant(self.constant.clone());
        for ((i, j), q) in &self.quad {
            debug_assert!(*i != k && *j != k);
            r.add_quad(sh(*i), sh(*j), q);
        }
        for (i, b) in &self.lin {
            debug_assert!(*i != k);
            r.add_linear(sh(*i), b);
        }
        r
    }

    fn without_constant(&self) -> Phase {
        Phase { quad: self.quad.clone(), lin: self.lin.clone(), constant: VFElem::zero() }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for ((i, j), q) in &self.quad {
            let v = if i == j { format!("x{}^2", i + 1) } else { format!("x{}*x{}", i + 1, j + 1) };
            parts.push(fmt_term(q, &v));
        }
        for (i, b) in &self.lin {
            parts.push(fmt_term(b, &format!("x{}", i + 1)));
        }
        if !self.constant.is_zero() || parts.is_empty() {
            parts.push(fmt_term(&self.constant, ""));
        }
        write!(f, "{}", join_signed(&parts))
    }
}

/// `coeff · exp⟨θ(phase(x))⟩ · [x ∈ support]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WavePacket {
    pub support: Vec<Constraint>,
    pub phase: Phase,
    pub coeff: CElem,
}

/// A lower bound `v(x) ≥ val`, or `v(x) > val` when `strict`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bound {
    pub val: GammaVal,
    pub strict: bool,
}

impl Bound {
    fn tighter(self, o: Bound) -> Bound {
        if o.val > self.val || (o.val == self.val && o.strict && !self.strict) {
            o
        } else {
            self
        }
    }

    /// Guarantees `v > 0` for a term of base valuation `g` times this bound.
    fn forces_positive(self, g: Gamma) -> bool {
        match self.val {
            GammaVal::Inf => true,
            GammaVal::Fin(l) => {
                if self.strict {
                    g + l >= gamma(0)
                } else {
                    g + l > gamma(0)
                }
            }
        }
    }
}

impl WavePacket {
    pub fn new(support: Vec<Constraint>, phase: Phase, coeff: CElem) -> WavePacket {
        WavePacket { support, phase, coeff }
    }

    pub fn holds(&self, x: &[VFElem]) -> bool {
        self.support.iter().all(|c| c.holds(x))
    }

    pub fn eval(&self, x: &[VFElem]) -> CElem {
        if self.holds(x) {
            self.coeff.shift(&self.phase.eval(x))
        } else {
            CElem::zero()
        }
    }

    pub fn mul(&self, o: &WavePacket) -> WavePacket {
        let mut support = self.support.clone();
        support.extend(o.support.iter().cloned());
        WavePacket { support, phase: self.phase.add(&o.phase), coeff: self.coeff.mul(&o.coeff) }
    }

    pub fn substitute(&self, sub: &[Affine]) -> WavePacket {
        WavePacket {
            support: self.support.iter().map(|c| c.substitute(sub)).collect(),
            phase: self.phase.substitute(sub),
            coeff: self.coeff.clone(),
        }
    }

    pub fn has_point(&self) -> bool {
        self.support.iter().any(|c| c.radius.is_inf())
    }

    /// Per-variable valuation lower bounds implied by the support.
    pub fn var_bounds(&self, n: usize) -> Vec<Option<Bound>> {
        let mut b: Vec<Option<Bound>> = vec![None; n];
        for c in &self.support {
            if c.form.coeffs.len() != 1 {
                continue;
            }
            let (&i, m) = c.form.coeffs.iter().next().expect("one");
            let vm = m.val().finite().expect("nonzero");
            let bd = single_bound(&c.form.constant, c.radius, c.kind, vm);
            b[i] = Some(b[i].map_or(bd, |o| o.tighter(bd)));
        }
        // propagate through triangular systems
        for _ in 0..n {
            let mut changed = false;
            for c in &self.support {
                if c.form.coeffs.len() < 2 {
                    continue;
                }
                for (&j, mj) in &c.form.coeffs {
                    let mut lb = GammaVal::Inf.min(c.radius).min(c.form.constant.val());
                    let mut ok = true;
                    for (&i, mi) in &c.form.coeffs {
                        if i == j {
                            continue;
                        }
                        match b[i] {
                            Some(bi) => lb = lb.min(mi.val().add(bi.val)),
                            None => ok = false,
                        }
                    }
                    if !ok {
                        continue;
                    }
                    let vm = mj.val().finite().expect("nonzero");
                    let cand = Bound { val: lb.plus(-vm), strict: false };
                    let nb = b[j].map_or(cand, |o| o.tighter(cand));
                    if b[j] != Some(nb) {
                        b[j] = Some(nb);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if b.iter().any(|x| x.is_none()) {
            if let Some(adj) = adjugate_bounds(&self.support, n) {
                for (j, a) in adj.into_iter().enumerate() {
                    if let Some(a) = a {
                        b[j] = Some(b[j].map_or(a, |o| o.tighter(a)));
                    }
                }
            }
        }
        b
    }

    fn normalize(&self, n: usize) -> Option<WavePacket> {
        if self.coeff.is_zero() {
            return None;
        }
        let mut groups: BTreeMap<Affine, (VFElem, GammaVal, BallKind)> = BTreeMap::new();
        for c in &self.support {
            let c = c.normalized();
            match c.constant_truth() {
                Some(true) => continue,
                Some(false) => return None,
                None => {}
            }
            let lin = c.form.linear_part();
            let ball = Ball { center: -&c.form.constant, radius: c.radius, kind: c.kind };
            match groups.get(&lin) {
                None => {
                    groups.insert(lin, (ball.center, ball.radius, ball.kind));
                }
                Some((center, r, k)) => {
                    let other = Ball { center: center.clone(), radius: *r, kind: *k };
                    match ball.relation(&other) {
                        BallRelation::Disjoint => return None,
                        BallRelation::FirstInSecond => {
                            groups.insert(lin, (ball.center, ball.radius, ball.kind));
                        }
                        _ => {}
                    }
                }
            }
        }
        let mut support: Vec<Constraint> = groups
            .into_iter()
            .map(|(lin, (center, radius, kind))| {
                Constraint { form: lin.add(&Affine::constant(-&center)), radius, kind }.normalized()
            })
            .collect();
        support.sort();
        let mut coeff = self.coeff.shift(self.phase.constant_term());
        let mut phase = self.phase.without_constant();
        let mut p = WavePacket { support, phase: phase.clone(), coeff: coeff.clone() };
        let bounds = p.var_bounds(n);
        phase = trim_phase(&phase, &bounds);
        if let Some(value) = constant_phase_value(&p.support, &phase) {
            coeff = coeff.shift(&value);
            phase = Phase::zero();
        }
        p.phase = phase;
        p.coeff = coeff;
        if p.coeff.is_zero() {
            None
        } else {
            Some(p)
        }
    }
}

fn single_bound(c: &VFElem, r: GammaVal, kind: BallKind, vm: Gamma) -> Bound {
    // m·x + c ∈ B(0, r): x ∈ B(-c/m, r - v(m))
    let r = r.plus(-vm);
    let vc = c.val().plus(-vm);
    match kind {
        _ if r.is_inf() => Bound { val: vc, strict: false },
        BallKind::Open => {
            if vc > r {
                Bound { val: r, strict: true }
            } else {
                Bound { val: vc, strict: false }
            }
        }
        BallKind::Closed => Bound { val: vc.min(r), strict: false },
    }
}

/// Bounds from `x = adj(M)·z / det(M)` on a maximal independent row set.
fn adjugate_bounds(support: &[Constraint], n: usize) -> Option<Vec<Option<Bound>>> {
    let rows: Vec<(Vec<VFElem>, GammaVal)> = support
        .iter()
        .map(|c| {
            let row = (0..n).map(|i| c.form.coeff(i).cloned().unwrap_or_default()).collect();
            (row, c.radius.min(c.form.constant.val()))
        })
        .collect();
    let mut chosen: Vec<usize> = Vec::new();
    for (idx, _) in rows.iter().enumerate() {
        let mut trial: Vec<Vec<VFElem>> = chosen.iter().map(|&k| rows[k].0.clone()).collect();
        trial.push(rows[idx].0.clone());
        if rank(&trial) == trial.len() {
            chosen.push(idx);
        }
        if chosen.len() == n {
            break;
        }
    }
    if chosen.len() < n {
        return None;
    }
    let m: Vec<Vec<VFElem>> = chosen.iter().map(|&k| rows[k].0.clone()).collect();
    let det = determinant(&m);
    let vd = det.val().finite()?;
    let mut out = vec![None; n];
    for (j, slot) in out.iter_mut().enumerate() {
        // adj(M)[j][r] = cofactor(r, j)
        let mut lb = GammaVal::Inf;
        for (r, &k) in chosen.iter().enumerate() {
            let cof = cofactor(&m, r, j);
            lb = lb.min(cof.val().add(rows[k].1));
        }
        *slot = Some(Bound { val: lb.plus(-vd), strict: false });
    }
    Some(out)
}

/// Determinant by Laplace expansion.
pub fn determinant(m: &[Vec<VFElem>]) -> VFElem {
    let n = m.len();
    if n == 0 {
        return VFElem::one();
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = VFElem::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let c = cofactor(m, 0, j);
        acc = &acc + &(&m[0][j] * &c);
    }
    acc
}

/// Signed minor with row `r` and column `c` removed.
pub fn cofactor(m: &[Vec<VFElem>], r: usize, c: usize) -> VFElem {
    let minor: Vec<Vec<VFElem>> = m
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != r)
        .map(|(_, row)| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, x)| x.clone()).collect())
        .collect();
    let d = determinant(&minor);
    if (r + c) % 2 == 0 {
        d
    } else {
        -d
    }
}

/// Rank by fraction-free elimination.
pub fn rank(rows: &[Vec<VFElem>]) -> usize {
    let mut m: Vec<Vec<VFElem>> = rows.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rk = 0;
    for col in 0..ncols {
        let Some(piv) = (rk..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(rk, piv);
        for r in 0..m.len() {
            if r == rk || m[r][col].is_zero() {
                continue;
            }
            let a = m[rk][col].clone();
            let b = m[r][col].clone();
            let pivot_row = m[rk].clone();
            for (x, y) in m[r].iter_mut().zip(pivot_row.iter()) {
                *x = &(&*x * &a) - &(y * &b);
            }
        }
        rk += 1;
    }
    rk
}

fn trim_phase(phase: &Phase, bounds: &[Option<Bound>]) -> Phase {
    let keep = |g: &Gamma, b: Option<Bound>| b.map_or(true, |b| !b.forces_positive(*g));
    let mut r = Phase::constant(phase.constant.clone());
    for (i, b) in &phase.lin {
        let kept = VFElem::from_terms(b.terms().filter(|(g, _)| keep(g, bounds[*i])).map(|(g, c)| (*g, c.clone())));
        r.add_linear(*i, &kept);
    }
    for ((i, j), q) in &phase.quad {
        let bij = match (bounds[*i], bounds[*j]) {
            (Some(a), Some(b)) => Some(Bound { val: a.val.add(b.val), strict: a.strict || b.strict }),
            _ => None,
        };
        let kept = VFElem::from_terms(q.terms().filter(|(g, _)| keep(g, bij)).map(|(g, c)| (*g, c.clone())));
        r.add_quad(*i, *j, &kept);
    }
    r
}

/// If the phase is constant on the support, its value.
fn constant_phase_value(support: &[Constraint], phase: &Phase) -> Option<VFElem> {
    let vars = phase.vars();
    if vars.is_empty() {
        return None;
    }
    let mut balls: BTreeMap<usize, (VFElem, GammaVal, BallKind)> = BTreeMap::new();
    for c in support {
        if c.form.coeffs.len() != 1 {
            continue;
        }
        let (&i, m) = c.form.coeffs.iter().next().expect("one");
        if !m.is_one() {
            continue;
        }
        let cand = (-&c.form.constant, c.radius, c.kind);
        let better = balls.get(&i).map_or(true, |(_, r, k)| {
            crate::geometry::shape_key(cand.1, cand.2) > crate::geometry::shape_key(*r, *k)
        });
        if better {
            balls.insert(i, cand);
        }
    }
    if !vars.iter().all(|i| balls.contains_key(i)) {
        return None;
    }
    let n = vars.iter().next_back().map_or(0, |m| m + 1);
    let mut center = vec![VFElem::zero(); n];
    for (i, (c, _, _)) in &balls {
        if *i < n {
            center[*i] = c.clone();
        }
    }
    for &i in &vars {
        let d = phase.partial(i).eval(&center);
        let (_, r, k) = &balls[&i];
        let ok = match r {
            GammaVal::Inf => true,
            GammaVal::Fin(r) => match d.val() {
                GammaVal::Inf => true,
                GammaVal::Fin(v) => {
                    if *k == BallKind::Open {
                        v + *r >= gamma(0)
                    } else {
                        v + *r > gamma(0)
                    }
                }
            },
        };
        if !ok {
            return None;
        }
    }
    for ((i, j), q) in &phase.quad {
        let (_, ri, ki) = &balls[i];
        let (_, rj, kj) = &balls[j];
        let total = q.val().add(*ri).add(*rj);
        let strict_ok = *ki == BallKind::Open || *kj == BallKind::Open;
        let ok = match total {
            GammaVal::Inf => true,
            GammaVal::Fin(t) => {
                if strict_ok {
                    t >= gamma(0)
                } else {
                    t > gamma(0)
                }
            }
        };
        if !ok {
            return None;
        }
    }
    Some(phase.eval(&center))
}

/// Classification flags of a function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FnFlags {
    pub bounded: bool,
    pub integrable: bool,
    pub almost_integrable: bool,
    pub schwartz: bool,
}

/// A finite sum of wave packets on `VF^arity`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MotFn {
    pub arity: usize,
    pub packets: Vec<WavePacket>,
}

impl MotFn {
    pub fn zero(n: usize) -> MotFn {
        MotFn { arity: n, packets: Vec::new() }
    }

    pub fn from_packets(n: usize, packets: Vec<WavePacket>) -> MotFn {
        MotFn { arity: n, packets }.normalize()
    }

    pub fn constant(n: usize, c: CElem) -> MotFn {
        MotFn::from_packets(n, vec![WavePacket::new(vec![], Phase::zero(), c)])
    }

    pub fn one(n: usize) -> MotFn {
        MotFn::constant(n, CElem::one())
    }

    pub fn indicator(p: &Polyball) -> MotFn {
        MotFn::from_packets(p.dims(), vec![WavePacket::new(p.constraints(), Phase::zero(), CElem::one())])
    }

    /// `χ` of a conjunction of constraints.
    pub fn indicator_of(n: usize, cs: Vec<Constraint>) -> MotFn {
        MotFn::from_packets(n, vec![WavePacket::new(cs, Phase::zero(), CElem::one())])
    }

    /// `x ↦ exp⟨θ(Q(x))⟩` on all of `VF^n`.
    pub fn expchar(n: usize, q: Phase) -> MfResult<MotFn> {
        if q.has_square() {
            return Err(MfError::UnsupportedPhase("square term".into()));
        }
        if q.max_var().is_some_and(|m| m >= n) {
            return Err(MfError::ArityMismatch { expected: n, found: q.max_var().unwrap_or(0) + 1 });
        }
        Ok(MotFn::from_packets(n, vec![WavePacket::new(vec![], q, CElem::one())]))
    }

    /// `ν_b(a_1, a_2) = exp⟨θ(b a_1 a_2)⟩`.
    pub fn nu(b: &VFElem) -> MotFn {
        MotFn::from_packets(2, vec![WavePacket::new(vec![], Phase::bilinear(0, 1, b.clone()), CElem::one())])
    }

    /// The identity for convolution: coefficient 1 at the origin.
    pub fn delta(n: usize) -> MotFn {
        let p = Polyball::new((0..n).map(|_| Ball::point(VFElem::zero())).collect());
        MotFn::indicator(&p)
    }

    pub fn is_zero(&self) -> bool {
        self.packets.is_empty()
    }

    fn check_arity(&self, o: &MotFn) -> MfResult<()> {
        if self.arity != o.arity {
            Err(MfError::ArityMismatch { expected: self.arity, found: o.arity })
        } else {
            Ok(())
        }
    }

    pub fn add(&self, o: &MotFn) -> MfResult<MotFn> {
        self.check_arity(o)?;
        let mut p = self.packets.clone();
        p.extend(o.packets.iter().cloned());
        Ok(MotFn::from_packets(self.arity, p))
    }

    pub fn neg(&self) -> MotFn {
        self.scale(&CElem::int(-1))
    }

    pub fn sub(&self, o: &MotFn) -> MfResult<MotFn> {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &CElem) -> MotFn {
        let p = self.packets.iter().map(|k| WavePacket { coeff: k.coeff.mul(c), ..k.clone() }).collect();
        MotFn::from_packets(self.arity, p)
    }

    pub fn mul(&self, o: &MotFn) -> MfResult<MotFn> {
        self.check_arity(o)?;
        let mut p = Vec::new();
        for a in &self.packets {
            for b in &o.packets {
                p.push(a.mul(b));
            }
        }
        Ok(MotFn::from_packets(self.arity, p))
    }

    /// `(x, y) ↦ f(x)·g(y)`.
    pub fn tensor(&self, o: &MotFn) -> MotFn {
        let n = self.arity;
        let sub: Vec<Affine> = (0..o.arity).map(|i| Affine::var(n + i)).collect();
        let mut p = Vec::new();
        for a in &self.packets {
            for b in &o.packets {
                p.push(a.mul(&b.substitute(&sub)));
            }
        }
        MotFn::from_packets(n + o.arity, p)
    }

    /// Views `f` as a function of more variables that ignores the extra ones.
    pub fn extend_arity(&self, n: usize) -> MfResult<MotFn> {
        if n < self.arity {
            return Err(MfError::ArityMismatch { expected: self.arity, found: n });
        }
        Ok(MotFn { arity: n, packets: self.packets.clone() }.normalize())
    }

    pub fn eval(&self, x: &[VFElem]) -> MfResult<CElem> {
        if x.len() != self.arity {
            return Err(MfError::ArityMismatch { expected: self.arity, found: x.len() });
        }
        let mut acc = CElem::zero();
        for p in &self.packets {
            acc = acc.add(&p.eval(x));
        }
        Ok(acc)
    }

    /// `x ↦ f(A(x))` where `sub[i]` gives the old `x_i` over `new_arity` variables.
    pub fn substitute(&self, sub: &[Affine], new_arity: usize) -> MfResult<MotFn> {
        if sub.len() != self.arity {
            return Err(MfError::ArityMismatch { expected: self.arity, found: sub.len() });
        }
        let p = self.packets.iter().map(|k| k.substitute(sub)).collect();
        Ok(MotFn::from_packets(new_arity, p))
    }

    /// `x ↦ f(x + c)`.
    pub fn translate(&self, c: &[VFElem]) -> MfResult<MotFn> {
        if c.len() != self.arity {
            return Err(MfError::ArityMismatch { expected: self.arity, found: c.len() });
        }
        let sub: Vec<Affine> = c.iter().enumerate().map(|(i, ci)| Affine::var(i).add(&Affine::constant(ci.clone()))).collect();
        self.substitute(&sub, self.arity)
    }

    /// `x ↦ f(a·x)` for a monomial `a`.
    pub fn scale_arg(&self, a: &VFElem) -> MfResult<MotFn> {
        a.inverse()?;
        let sub: Vec<Affine> = (0..self.arity).map(|i| Affine::term(i, a.clone())).collect();
        self.substitute(&sub, self.arity)
    }

    /// Canonical form: constraints made monic, truncated, intersected and
    /// sorted; constant phases folded into coefficients; equal supports
    /// merged; packets sorted.
    pub fn normalize(&self) -> MotFn {
        let mut merged: BTreeMap<(Vec<Constraint>, Phase), CElem> = BTreeMap::new();
        for p in &self.packets {
            if let Some(q) = p.normalize(self.arity) {
                let slot = merged.entry((q.support, q.phase)).or_default();
                *slot = slot.add(&q.coeff);
            }
        }
        let packets = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((support, phase), coeff)| WavePacket { support, phase, coeff })
            .collect();
        MotFn { arity: self.arity, packets }
    }

    pub fn check(&self) -> FnFlags {
        let bounded = self.packets.iter().all(|p| {
            let rows: Vec<Vec<VFElem>> = p
                .support
                .iter()
                .map(|c| (0..self.arity).map(|i| c.form.coeff(i).cloned().unwrap_or_default()).collect())
                .collect();
            rank(&rows) == self.arity
        });
        let points = self.packets.iter().any(|p| p.has_point());
        FnFlags { bounded, integrable: bounded, almost_integrable: true, schwartz: bounded && !points }
    }

    /// Per-coordinate valuation lower bound of the whole support, if bounded.
    pub fn support_lower_bounds(&self) -> Option<Vec<GammaVal>> {
        let mut out = vec![GammaVal::Inf; self.arity];
        for p in &self.packets {
            let b = p.var_bounds(self.arity);
            for (o, x) in out.iter_mut().zip(b) {
                *o = (*o).min(x?.val);
            }
        }
        Some(out)
    }

    /// A radius `β` such that `f` is constant on every `𝔬(a, β)`.
    pub fn iota_bound(&self) -> MfResult<Gamma> {
        if !self.check().schwartz {
            return Err(MfError::NotSchwartz);
        }
        let mut beta: Option<Gamma> = None;
        let mut bump = |g: Gamma| beta = Some(beta.map_or(g, |b: Gamma| b.max(g)));
        for p in &self.packets {
            for c in &p.support {
                let r = c.radius.finite().expect("no points");
                let vm = c.form.coeffs.values().map(|m| m.val()).min().and_then(|v| v.finite()).expect("nonconstant");
                bump(r - vm);
            }
            let bounds = p.var_bounds(self.arity);
            for i in p.phase.vars() {
                let d = p.phase.partial(i);
                let mut lb = d.constant.val();
                for (j, m) in &d.coeffs {
                    let bj = bounds[*j].ok_or(MfError::NotSchwartz)?;
                    lb = lb.min(m.val().add(bj.val));
                }
                if let GammaVal::Fin(l) = lb {
                    bump(-l);
                }
            }
            for (_, q) in p.phase.quad_terms() {
                if let GammaVal::Fin(v) = q.val() {
                    bump(-v / gamma(2));
                }
            }
        }
        Ok(beta.map_or(gamma(0), |b| b.ceil()))
    }

    /// Largest variable index occurring anywhere, plus one.
    pub fn used_arity(&self) -> usize {
        let mut m = 0;
        for p in &self.packets {
            for c in &p.support {
                if let Some(v) = c.form.max_var() {
                    m = m.max(v + 1);
                }
            }
            if let Some(v) = p.phase.max_var() {
                m = m.max(v + 1);
            }
        }
        m
    }
}

impl fmt::Display for WavePacket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sup = if self.support.is_empty() {
            "all".to_string()
        } else {
            self.support.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" & ")
        };
        write!(f, "({}; {}; {})", sup, self.phase, self.coeff)
    }
}

impl fmt::Display for MotFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.packets.is_empty() {
            return write!(f, "zero[{}]", self.arity);
        }
        let parts: Vec<String> = self.packets.iter().map(|p| format!("packet[{}]{}", self.arity, p)).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// How two functions were found equal or different.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum EqMethod {
    Syntactic,
    Probed(usize),
    Differs { point: Vec<String>, lhs: String, rhs: String },
}

impl EqMethod {
    pub fn holds(&self) -> bool {
        !matches!(self, EqMethod::Differs { .. })
    }

    pub fn label(&self) -> String {
        match self {
            EqMethod::Syntactic => "syntactic".into(),
            EqMethod::Probed(k) => format!("probed:{}", k),
            EqMethod::Differs { .. } => "differs".into(),
        }
    }
}

/// Deterministic probing parameters.
#[derive(Clone, Copy, Debug)]
pub struct ProbeConfig {
    pub count: usize,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { count: 32, seed: 0x6d66 }
    }
}

/// Equality of two functions: syntactic after normalization, else by
/// evaluation at deterministic probe points with values compared in the
/// homogenized ring.
pub fn fn_equal(f: &MotFn, g: &MotFn, cfg: ProbeConfig) -> MfResult<EqMethod> {
    let d = f.sub(g)?;
    if d.is_zero() {
        return Ok(EqMethod::Syntactic);
    }
    let points = probe_points(&[f, g], cfg);
    for x in &points {
        let a = f.eval(x)?;
        let b = g.eval(x)?;
        if !a.homogenized_eq(&b) {
            return Ok(EqMethod::Differs {
                point: x.iter().map(|v| v.to_string()).collect(),
                lhs: a.to_string(),
                rhs: b.to_string(),
            });
        }
    }
    Ok(EqMethod::Probed(points.len()))
}

/// Probe points near every constraint boundary and phase scale.
pub fn probe_points(fs: &[&MotFn], cfg: ProbeConfig) -> Vec<Vec<VFElem>> {
    let n = fs.iter().map(|f| f.arity).max().unwrap_or(0);
    let mut cands: Vec<BTreeSet<VFElem>> = vec![BTreeSet::new(); n];
    let units = [QI::one(), QI::int(-1), QI::i(), QI::gauss(1, 1)];
    for c in cands.iter_mut() {
        c.insert(VFElem::zero());
        for k in -2..=2 {
            c.insert(VFElem::t_pow(gamma(k)));
        }
    }
    for f in fs {
        for p in &f.packets {
            for c in &p.support {
                let Some((&j, m)) = c.form.coeffs.iter().next() else { continue };
                let Ok(inv) = m.inverse() else { continue };
                let center = &(-&c.form.constant) * &inv;
                cands[j].insert(center.clone());
                if let GammaVal::Fin(r) = c.radius.plus(-m.val().finite().unwrap_or_default()) {
                    for dr in [gamma(-1), gamma(0), gamma(1)] {
                        for u in &units {
                            let g = (r + dr).floor();
                            cands[j].insert(&center + &VFElem::monomial(u.clone(), g));
                        }
                    }
                }
            }
            for i in p.phase.vars() {
                if let GammaVal::Fin(v) = p.phase.partial(i).constant.val() {
                    cands[i].insert(VFElem::t_pow((-v).floor()));
                    cands[i].insert(VFElem::monomial(QI::i(), (-v).floor() + gamma(1)));
                }
            }
        }
    }
    let lists: Vec<Vec<VFElem>> = cands.into_iter().map(|s| s.into_iter().collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out: BTreeSet<Vec<VFElem>> = BTreeSet::new();
    let total: usize = lists.iter().map(|l| l.len()).product();
    if total <= cfg.count {
        let mut idx = vec![0usize; n];
        loop {
            out.insert(idx.iter().zip(&lists).map(|(i, l)| l[*i].clone()).collect());
            let mut k = 0;
            while k < n {
                idx[k] += 1;
                if idx[k] < lists[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
        }
    } else {
        let mut guard = 0;
        while out.len() < cfg.count && guard < cfg.count * 20 {
            guard += 1;
            let x: Vec<VFElem> = lists.iter().map(|l| l.choose(&mut rng).cloned().unwrap_or_default()).collect();
            out.insert(x);
        }
    }
    out.into_iter().collect()
}

/// Whether `x` is inside the support of some packet.
pub fn in_support(f: &MotFn, x: &[VFElem]) -> bool {
    f.packets.iter().any(|p| p.holds(x))
}

pub fn check_membership(v: GammaVal, r: GammaVal, kind: BallKind) -> bool {
    contains_val(v, r, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motvalues::MotElem;

    fn t(g: i64) -> VFElem {
        VFElem::t_pow(gamma(g))
    }

    fn chi(b: Ball) -> MotFn {
        MotFn::indicator(&Polyball::new(vec![b]))
    }

    #[test]
    fn eval_examples() {
        let f = chi(Ball::closed(VFElem::zero(), gamma(0))).mul(&MotFn::expchar(1, Phase::linear(0, t(-1))).unwrap()).unwrap();
        assert_eq!(f.eval(&[t(1)]).unwrap(), CElem::exp_vf(&VFElem::one()));
        let m = chi(Ball::open(VFElem::zero(), gamma(0)));
        assert!(m.eval(&[VFElem::one()]).unwrap().is_zero());
        let nu = MotFn::nu(&VFElem::one());
        assert_eq!(nu.eval(&[t(-1), t(-1)]).unwrap(), CElem::exp_vf(&t(-2)));
    }

    #[test]
    fn reduce_examples() {
        let f = chi(Ball::open(VFElem::zero(), gamma(2))).mul(&MotFn::expchar(1, Phase::linear(0, t(-1))).unwrap()).unwrap();
        assert_eq!(f, chi(Ball::open(VFElem::zero(), gamma(2))));
        let g = chi(Ball::closed(VFElem::zero(), gamma(0))).mul(&MotFn::expchar(1, Phase::linear(0, t(-2))).unwrap()).unwrap();
        assert!(!g.packets[0].phase.is_zero());
    }

    #[test]
    fn products_of_balls() {
        let a = chi(Ball::open(VFElem::zero(), gamma(1)));
        let b = chi(Ball::closed(VFElem::zero(), gamma(2)));
        assert_eq!(a.mul(&b).unwrap(), b);
        let c = chi(Ball::closed(VFElem::one(), gamma(1)));
        assert!(chi(Ball::closed(VFElem::zero(), gamma(1))).mul(&c).unwrap().is_zero());
        assert_eq!(a.mul(&MotFn::one(1)).unwrap(), a);
    }

    #[test]
    fn translate_and_scale() {
        let a = chi(Ball::open(VFElem::zero(), gamma(1)));
        assert_eq!(a.translate(&[VFElem::one()]).unwrap(), chi(Ball::open(VFElem::int(-1), gamma(1))));
        let o = chi(Ball::closed(VFElem::zero(), gamma(0)));
        assert_eq!(o.scale_arg(&t(1)).unwrap(), chi(Ball::closed(VFElem::zero(), gamma(-1))));
        assert!(matches!(o.scale_arg(&(&t(0) + &t(1))), Err(MfError::NonMonomial(_))));
    }

    #[test]
    fn flags_and_iota() {
        let e = MotFn::expchar(1, Phase::linear(0, t(1))).unwrap();
        let fl = e.check();
        assert!(fl.almost_integrable && !fl.integrable);
        assert_eq!(chi(Ball::open(VFElem::zero(), gamma(2))).iota_bound().unwrap(), gamma(2));
        let f = chi(Ball::closed(VFElem::zero(), gamma(0))).mul(&MotFn::expchar(1, Phase::linear(0, t(-3))).unwrap()).unwrap();
        assert_eq!(f.iota_bound().unwrap(), gamma(3));
        assert_eq!(MotFn::zero(2).iota_bound().unwrap(), gamma(0));
    }

    #[test]
    fn merging_and_cancellation() {
        let a = chi(Ball::open(VFElem::zero(), gamma(1)));
        let s = a.add(&a).unwrap();
        assert_eq!(s.packets.len(), 1);
        assert_eq!(s.packets[0].coeff, CElem::from_mot(MotElem::int(2)));
        assert!(a.sub(&a).unwrap().is_zero());
    }
}
