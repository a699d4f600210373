//! One variable at a time: a character over a ball integrates to the ball's
//! volume when the frequency lies in the dual ball, and to 0 otherwise.

use crate::error::{MfError, MfResult};
use crate::geometry::{Affine, Constraint, MovingBall, Polyball};
use crate::motvalues::{CElem, MotElem};
use crate::valfield::{RVElem, VFElem};
use crate::wavefn::{MotFn, Phase, WavePacket};

fn integrate_packet(p: &WavePacket, k: usize) -> MfResult<Option<WavePacket>> {
    let (l, rest) = p.phase.split_var(k)?;
    let mut balls: Vec<MovingBall> = Vec::new();
    let mut support: Vec<Constraint> = Vec::new();
    let n = p.support.iter().filter_map(|c| c.form.max_var()).max().map_or(0, |m| m + 1).max(k + 1);
    let lb = p.var_bounds(n)[k].map(|b| b.val);
    for c in &p.support {
        if c.involves(k) {
            balls.push(c.solve_within(k, lb)?);
        } else {
            support.push(c.clone());
        }
    }
    if balls.is_empty() {
        return Err(MfError::NotIntegrable(k + 1));
    }
    let mut s = 0;
    for (i, b) in balls.iter().enumerate() {
        if b.shape_key() > balls[s].shape_key() {
            s = i;
        }
    }
    let small = &balls[s];
    for (i, b) in balls.iter().enumerate() {
        if i != s {
            support.push(Constraint { form: small.center.sub(&b.center), radius: b.radius, kind: b.kind });
        }
    }
    if let Some(r) = small.radius.finite() {
        support.push(Constraint { form: l.clone(), radius: (-r).into(), kind: small.kind.flip() });
    }
    let phase = rest.add(&Phase::affine_product(&l, &small.center));
    let coeff = p.coeff.mul_mot(&small.volume());
    Ok(Some(WavePacket {
        support: support.iter().map(|c| Constraint { form: c.form.remove_var(k), ..c.clone() }).collect(),
        phase: phase.remove_var(k),
        coeff,
    }))
}

/// `∫ f dx_k`, a function of the remaining variables.
pub fn integrate_var(f: &MotFn, k: usize) -> MfResult<MotFn> {
    if k >= f.arity {
        return Err(MfError::ArityMismatch { expected: f.arity, found: k + 1 });
    }
    let mut out = Vec::new();
    for p in &f.packets {
        if let Some(q) = integrate_packet(p, k)? {
            out.push(q);
        }
    }
    Ok(MotFn::from_packets(f.arity - 1, out))
}

fn first_unbounded(f: &MotFn) -> usize {
    for p in &f.packets {
        if let Some(i) = p.var_bounds(f.arity).iter().position(|b| b.is_none()) {
            return i + 1;
        }
    }
    1
}

/// Integrates the variables in `order` (original 0-based indices).
pub fn integrate_vars(f: &MotFn, order: &[usize]) -> MfResult<MotFn> {
    let mut remaining: Vec<usize> = (0..f.arity).collect();
    let mut g = f.clone();
    for v in order {
        let pos = remaining.iter().position(|x| x == v).ok_or(MfError::Invalid(format!("bad variable x{}", v + 1)))?;
        g = integrate_var(&g, pos)?;
        remaining.remove(pos);
    }
    Ok(g)
}

fn constant_value(g: &MotFn) -> CElem {
    debug_assert_eq!(g.arity, 0);
    let mut acc = CElem::zero();
    for p in &g.packets {
        acc = acc.add(&p.coeff);
    }
    acc
}

/// `∫ f` over `VF^n`, integrating in the given order (default: last variable first).
pub fn integrate(f: &MotFn, order: Option<&[usize]>) -> MfResult<CElem> {
    if !f.check().integrable {
        return Err(MfError::NotIntegrable(first_unbounded(f)));
    }
    let default: Vec<usize> = (0..f.arity).rev().collect();
    let order = order.unwrap_or(&default);
    let mut seen = order.to_vec();
    seen.sort_unstable();
    if seen != (0..f.arity).collect::<Vec<_>>() {
        return Err(MfError::Invalid("order must be a permutation of the variables".into()));
    }
    Ok(constant_value(&integrate_vars(f, order)?))
}

/// `(f∗g)(a) = ∫ f(x) g(a − x) dx`.
pub fn convolve(f: &MotFn, g: &MotFn) -> MfResult<MotFn> {
    if f.arity != g.arity {
        return Err(MfError::ArityMismatch { expected: f.arity, found: g.arity });
    }
    for h in [f, g] {
        if !h.check().integrable {
            return Err(MfError::NotIntegrable(first_unbounded(h)));
        }
    }
    convolve_bounded(f, g)
}

/// Convolution when only `f` is known to have bounded support.
pub fn convolve_bounded(f: &MotFn, g: &MotFn) -> MfResult<MotFn> {
    if f.arity != g.arity {
        return Err(MfError::ArityMismatch { expected: f.arity, found: g.arity });
    }
    if !f.check().integrable {
        return Err(MfError::NotIntegrable(first_unbounded(f)));
    }
    let n = f.arity;
    let fx: Vec<Affine> = (0..n).map(|i| Affine::var(n + i)).collect();
    let gx: Vec<Affine> = (0..n).map(|i| Affine::var(i).sub(&Affine::var(n + i))).collect();
    let mut h = f.substitute(&fx, 2 * n)?.mul(&g.substitute(&gx, 2 * n)?)?;
    for k in (n..2 * n).rev() {
        h = integrate_var(&h, k)?;
    }
    Ok(h)
}

/// Convolution on `VF^n/H` for `H`-invariant factors.
pub fn convolve_mod(f: &MotFn, g: &MotFn, h: &Polyball) -> MfResult<MotFn> {
    let c = convolve(f, g)?;
    let inv = h.volume()?.monomial_inverse().ok_or(MfError::Unsupported("volume not invertible".into()))?;
    Ok(c.scale(&CElem::from_mot(inv)))
}

/// A function with a constant volume form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MuFn {
    pub f: MotFn,
    pub form: RVElem,
}

/// `x ↦ (s_i x_{perm[i]} + c_i)_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    pub scale: Vec<VFElem>,
    pub shift: Vec<VFElem>,
    pub perm: Vec<usize>,
}

impl AffineMap {
    pub fn identity(n: usize) -> AffineMap {
        AffineMap { scale: vec![VFElem::one(); n], shift: vec![VFElem::zero(); n], perm: (0..n).collect() }
    }

    pub fn scaling(n: usize, a: &VFElem) -> AffineMap {
        AffineMap { scale: vec![a.clone(); n], ..AffineMap::identity(n) }
    }

    pub fn translation(c: &[VFElem]) -> AffineMap {
        AffineMap { shift: c.to_vec(), ..AffineMap::identity(c.len()) }
    }

    pub fn swap() -> AffineMap {
        AffineMap { perm: vec![1, 0], ..AffineMap::identity(2) }
    }

    fn perm_sign(&self) -> i64 {
        let mut sign = 1;
        let p = &self.perm;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if p[i] > p[j] {
                    sign = -sign;
                }
            }
        }
        sign
    }

    /// `rv` of the Jacobian determinant.
    pub fn jacobian_rv(&self) -> MfResult<RVElem> {
        let mut d = VFElem::int(self.perm_sign());
        for s in &self.scale {
            s.inverse()?;
            d = &d * s;
        }
        Ok(d.rv())
    }
}

impl MuFn {
    pub fn new(f: MotFn) -> MuFn {
        MuFn { f, form: RVElem::one() }
    }
}

pub fn integrate_with_form(mf: &MuFn, order: Option<&[usize]>) -> MfResult<(CElem, RVElem)> {
    Ok((integrate(&mf.f, order)?, mf.form.clone()))
}

/// Pulls the function back along the map; the form picks up `rv(jcb)`.
pub fn apply_affine(mf: &MuFn, map: &AffineMap) -> MfResult<MuFn> {
    let n = mf.f.arity;
    if map.scale.len() != n || map.shift.len() != n || map.perm.len() != n {
        return Err(MfError::ArityMismatch { expected: n, found: map.perm.len() });
    }
    let rv = map.jacobian_rv()?;
    let sub: Vec<Affine> = (0..n)
        .map(|i| Affine::term(map.perm[i], map.scale[i].clone()).add(&Affine::constant(map.shift[i].clone())))
        .collect();
    Ok(MuFn { f: mf.f.substitute(&sub, n)?, form: mf.form.mul(&rv) })
}

/// Volume of a polyball.
pub fn volume(p: &Polyball) -> MfResult<MotElem> {
    p.volume()
}
