//! Distributions as expression trees with evaluable kernels
//! `K_γ(a) = 𝔇(a, γ)`.
//!
//! Kernels are computed symbolically in `a` by pushing a family of test
//! functions through the tree: the base family is `χ_{𝔬(a,γ)}`, a
//! `FourierOf` node transforms the family in `x`, a `Regular(h)` leaf
//! integrates `family · h`, and `Tensor` splits the coordinates.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use serde::Serialize;

use crate::error::{MfError, MfResult};
use crate::fourier::fourier0;
use crate::geometry::{Affine, Ball, BallKind, Constraint};
use crate::integrator::{convolve_bounded, integrate, integrate_var};
use crate::motvalues::{CElem, MotElem};
use crate::report::Report;
use crate::valfield::{gamma, Gamma, GammaVal, VFElem};
use crate::wavefn::{MotFn, Phase, WavePacket};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Dist {
    Regular(MotFn),
    FourierOf(Box<Dist>),
    Tensor(Box<Dist>, Box<Dist>),
    Conv(Box<Dist>, Box<Dist>),
}

impl Dist {
    pub fn regular(f: MotFn) -> Dist {
        Dist::Regular(f)
    }

    pub fn fourier(d: Dist) -> Dist {
        Dist::FourierOf(Box::new(d))
    }

    pub fn tensor(a: Dist, b: Dist) -> Dist {
        Dist::Tensor(Box::new(a), Box::new(b))
    }

    pub fn conv(a: Dist, b: Dist) -> MfResult<Dist> {
        if a.arity() != b.arity() {
            return Err(MfError::ArityMismatch { expected: a.arity(), found: b.arity() });
        }
        Ok(Dist::Conv(Box::new(a), Box::new(b)))
    }

    pub fn arity(&self) -> usize {
        match self {
            Dist::Regular(f) => f.arity,
            Dist::FourierOf(d) => d.arity(),
            Dist::Tensor(a, b) => a.arity() + b.arity(),
            Dist::Conv(a, _) => a.arity(),
        }
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dist::Regular(h) => write!(f, "regular({})", h),
            Dist::FourierOf(d) => write!(f, "fourier({})", d),
            Dist::Tensor(a, b) => write!(f, "tensor({}, {})", a, b),
            Dist::Conv(a, b) => write!(f, "conv({}, {})", a, b),
        }
    }
}

/// Per-coordinate radii `s` with `supp ⊆ ∏ 𝔠(0, s_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SupportBound {
    Bounded(Vec<String>),
    Unbounded,
}

fn o_pow_inv(beta: Gamma, n: usize) -> CElem {
    let inv = MotElem::o(beta).monomial_inverse().expect("monomial");
    CElem::from_mot(inv.pow(n as u32))
}

fn o_pow(g: Gamma, n: usize) -> CElem {
    CElem::from_mot(MotElem::o(g).pow(n as u32))
}

/// `χ_{𝔬(a,γ)}(x)` as a function of `(a, x)`.
fn base_block(g: Gamma) -> MotFn {
    let c = Constraint { form: Affine::var(1).sub(&Affine::var(0)), radius: GammaVal::Fin(g), kind: BallKind::Open };
    MotFn::indicator_of(2, vec![c])
}

/// Fourier transform of a block `(a, x)` in `x`.
fn fourier_block(b: &MotFn) -> MfResult<MotFn> {
    let sub = [Affine::var(0), Affine::var(2)];
    let kernel = MotFn::from_packets(3, vec![WavePacket::new(vec![], Phase::bilinear(1, 2, VFElem::one()), CElem::one())]);
    integrate_var(&b.substitute(&sub, 3)?.mul(&kernel)?, 2)
}

/// Kernel evaluation with a thread-safe memo keyed by node and radius.
#[derive(Default)]
pub struct DistEngine {
    memo: Mutex<HashMap<(Dist, Gamma), MotFn>>,
}

impl DistEngine {
    pub fn new() -> Self {
        DistEngine::default()
    }

    /// `a ↦ 𝔇(a, γ)` as a packet function.
    pub fn kernel(&self, d: &Dist, g: Gamma) -> MfResult<MotFn> {
        if let Some(k) = self.memo.lock().expect("memo").get(&(d.clone(), g)) {
            return Ok(k.clone());
        }
        let n = d.arity();
        let blocks = vec![base_block(g); n];
        let k = self.apply_family(d, &blocks, Some(g))?;
        self.memo.lock().expect("memo").insert((d.clone(), g), k.clone());
        Ok(k)
    }

    /// `a ↦ 𝔇(Φ(a, ·))` for a coordinatewise product family `Φ`.
    fn apply_family(&self, d: &Dist, blocks: &[MotFn], base: Option<Gamma>) -> MfResult<MotFn> {
        let n = blocks.len();
        match d {
            Dist::Regular(h) => {
                let mut phi = MotFn::one(2 * n);
                for (i, b) in blocks.iter().enumerate() {
                    let mut sub = vec![Affine::default(); 2];
                    sub[0] = Affine::var(i);
                    sub[1] = Affine::var(n + i);
                    phi = phi.mul(&b.substitute(&sub, 2 * n)?)?;
                }
                let hx: Vec<Affine> = (0..n).map(|i| Affine::var(n + i)).collect();
                let mut g = phi.mul(&h.substitute(&hx, 2 * n)?)?;
                for k in (n..2 * n).rev() {
                    g = integrate_var(&g, k)?;
                }
                Ok(g)
            }
            Dist::FourierOf(inner) => {
                let fb = blocks.iter().map(fourier_block).collect::<MfResult<Vec<_>>>()?;
                self.apply_family(inner, &fb, None)
            }
            Dist::Tensor(a, b) => {
                let na = a.arity();
                let ka = self.apply_family(a, &blocks[..na], base)?;
                let kb = self.apply_family(b, &blocks[na..], base)?;
                Ok(ka.tensor(&kb))
            }
            Dist::Conv(a, b) => match base {
                Some(g) => self.conv_kernel(a, b, g),
                None => Err(MfError::Unsupported("kernel of the Fourier transform of a convolution".into())),
            },
        }
    }

    fn conv_kernel(&self, a: &Dist, b: &Dist, g: Gamma) -> MfResult<MotFn> {
        let n = a.arity();
        let s = match support_bound(a)? {
            Some(s) => s,
            None => match support_bound(b)? {
                Some(_) => return self.conv_kernel(b, a, g),
                None => return Err(MfError::UnboundedBothFactors),
            },
        };
        let radii: Vec<Gamma> = s.iter().map(|r| r.finite().unwrap_or_else(|| gamma(0))).collect();
        let beta = radii.iter().copied().fold(g, Gamma::max).ceil();
        let k1 = self.kernel(a, beta)?;
        let k2 = self.kernel(b, beta)?;
        // variables: a in 0..n, x1 in n..2n, x2 in 2n..3n
        let mut cs = Vec::new();
        for i in 0..n {
            let form = Affine::var(n + i).add(&Affine::var(2 * n + i)).sub(&Affine::var(i));
            cs.push(Constraint { form, radius: GammaVal::Fin(g), kind: BallKind::Open });
            cs.push(Constraint::in_ball(n + i, &Ball::closed(VFElem::zero(), radii[i])));
        }
        let x1: Vec<Affine> = (0..n).map(|i| Affine::var(n + i)).collect();
        let x2: Vec<Affine> = (0..n).map(|i| Affine::var(2 * n + i)).collect();
        let mut f = MotFn::indicator_of(3 * n, cs)
            .mul(&k1.substitute(&x1, 3 * n)?)?
            .mul(&k2.substitute(&x2, 3 * n)?)?
            .scale(&o_pow_inv(beta, 2 * n));
        for k in (n..3 * n).rev() {
            f = integrate_var(&f, k)?;
        }
        Ok(f)
    }

    /// `𝔇(a, γ)`.
    pub fn eval(&self, d: &Dist, a: &[VFElem], g: Gamma) -> MfResult<CElem> {
        match self.kernel(d, g) {
            Ok(k) => k.eval(a),
            Err(MfError::Unsupported(_)) => match d {
                Dist::FourierOf(inner) => {
                    let cell = MotFn::indicator(&crate::geometry::Polyball::new(
                        a.iter().map(|c| Ball::open(c.clone(), g)).collect(),
                    ));
                    self.apply(inner, &fourier0(&cell)?)
                }
                Dist::Tensor(x, y) => {
                    let (ax, ay) = a.split_at(x.arity());
                    Ok(self.eval(x, ax, g)?.mul(&self.eval(y, ay, g)?))
                }
                _ => Err(MfError::Unsupported("kernel".into())),
            },
            Err(e) => Err(e),
        }
    }

    /// `𝔇(f) = ∫ f · O_β^{-n} 𝔇(·, β)` with `β = ι(f)`.
    pub fn apply(&self, d: &Dist, f: &MotFn) -> MfResult<CElem> {
        if f.arity != d.arity() {
            return Err(MfError::ArityMismatch { expected: d.arity(), found: f.arity });
        }
        let beta = f.iota_bound()?;
        match self.kernel(d, beta) {
            Ok(k) => integrate(&f.mul(&k)?.scale(&o_pow_inv(beta, f.arity)), None),
            Err(MfError::Unsupported(_)) => match d {
                Dist::FourierOf(inner) => self.apply(inner, &fourier0(f)?),
                _ => Err(MfError::Unsupported("kernel".into())),
            },
            Err(e) => Err(e),
        }
    }

    /// `𝔇(a, γ) = ∫_{x∈𝔬(a,γ)} O_{γ'}^{-n} 𝔇(x, γ')`.
    pub fn check_coherence(&self, d: &Dist, a: &[VFElem], g: Gamma, g2: Gamma) -> MfResult<Report> {
        let n = d.arity();
        let lhs = self.eval(d, a, g)?;
        let cell = MotFn::indicator(&crate::geometry::Polyball::new(a.iter().map(|c| Ball::open(c.clone(), g)).collect()));
        let rhs = integrate(&cell.mul(&self.kernel(d, g2)?)?.scale(&o_pow_inv(g2, n)), None)?;
        Ok(Report::values("coherence", &lhs, &rhs))
    }

    /// `𝔇(f̂) = 𝔇̂(f)`.
    pub fn check_fourier(&self, d: &Dist, f: &MotFn) -> MfResult<Report> {
        let lhs = self.apply(d, &fourier0(f)?)?;
        let rhs = self.apply(&Dist::fourier(d.clone()), f)?;
        Ok(Report::values("dist-fourier", &lhs, &rhs))
    }

    /// `𝓕(𝔇₁ ⊗ 𝔇₂)(a, γ) = (𝔇̂₁ ⊗ 𝔇̂₂)(a, γ)`, the left side evaluated as
    /// `(𝔇₁ ⊗ 𝔇₂)(ĥ_{𝔬(a,γ)})`.
    pub fn check_tensor_fourier(&self, d1: &Dist, d2: &Dist, a: &[VFElem], g: Gamma) -> MfResult<Report> {
        let t = Dist::tensor(d1.clone(), d2.clone());
        let cell = MotFn::indicator(&crate::geometry::Polyball::new(a.iter().map(|c| Ball::open(c.clone(), g)).collect()));
        let lhs = self.apply(&t, &fourier0(&cell)?)?;
        let rhs = self.eval(&Dist::tensor(Dist::fourier(d1.clone()), Dist::fourier(d2.clone())), a, g)?;
        Ok(Report::values("tensor-fourier", &lhs, &rhs))
    }

    /// `𝓕(𝔇₁ ∗ 𝔇₂)(f) = 𝔇̂₂(f · ĥ₁)` where `𝔇̂₁` is realized as `ĥ₁`.
    pub fn check_conv_fourier(&self, d1: &Dist, d2: &Dist, f: &MotFn) -> MfResult<Report> {
        let lhs = self.apply(&Dist::fourier(Dist::conv(d1.clone(), d2.clone())?), f)?;
        let h1 = bounded_fourier_as_function(d1)?;
        let rhs = self.apply(&Dist::fourier(d2.clone()), &f.mul(&h1)?)?;
        Ok(Report::values("conv-fourier", &lhs, &rhs))
    }
}

fn regular_bound(h: &MotFn) -> Option<Vec<GammaVal>> {
    if !h.check().bounded {
        return None;
    }
    let b = h.support_lower_bounds()?;
    Some(b.into_iter().map(|v| match v {
        GammaVal::Fin(g) => GammaVal::Fin(g.floor()),
        GammaVal::Inf => GammaVal::Inf,
    }).collect())
}

/// A certified superset of the support, as closed radii per coordinate.
pub fn support_bound(d: &Dist) -> MfResult<Option<Vec<GammaVal>>> {
    Ok(match d {
        Dist::Regular(h) => regular_bound(h),
        Dist::Tensor(a, b) => match (support_bound(a)?, support_bound(b)?) {
            (Some(mut x), Some(y)) => {
                x.extend(y);
                Some(x)
            }
            _ => None,
        },
        Dist::FourierOf(inner) => match inner.as_ref() {
            Dist::Regular(h) if h.check().schwartz => regular_bound(&fourier0(h)?),
            _ => None,
        },
        Dist::Conv(a, b) => match (support_bound(a)?, support_bound(b)?) {
            (Some(x), Some(y)) => Some(x.into_iter().zip(y).map(|(p, q)| p.min(q)).collect()),
            _ => None,
        },
    })
}

pub fn support_bound_report(d: &Dist) -> MfResult<SupportBound> {
    Ok(match support_bound(d)? {
        Some(v) => SupportBound::Bounded(v.iter().map(|g| g.to_string()).collect()),
        None => SupportBound::Unbounded,
    })
}

/// Rewrites to a regular distribution where the tree allows it.
pub fn as_regular(d: &Dist) -> MfResult<Option<MotFn>> {
    Ok(match d {
        Dist::Regular(h) => Some(h.clone()),
        Dist::FourierOf(inner) => match as_regular(inner)? {
            Some(h) if h.check().integrable => Some(fourier0(&h)?),
            _ => None,
        },
        Dist::Tensor(a, b) => match (as_regular(a)?, as_regular(b)?) {
            (Some(x), Some(y)) => Some(x.tensor(&y)),
            _ => None,
        },
        Dist::Conv(a, b) => match (as_regular(a)?, as_regular(b)?) {
            (Some(x), Some(y)) if x.check().bounded => Some(convolve_bounded(&x, &y)?),
            (Some(x), Some(y)) if y.check().bounded => Some(convolve_bounded(&y, &x)?),
            _ => None,
        },
    })
}

/// `𝔇̂` as a function, for bounded distributions with a regular realization.
pub fn bounded_fourier_as_function(d: &Dist) -> MfResult<MotFn> {
    if support_bound(d)?.is_none() {
        return Err(MfError::Unsupported("unbounded support".into()));
    }
    match as_regular(d)? {
        Some(h) => fourier0(&h),
        None => Err(MfError::Unsupported("no regular realization".into())),
    }
}

/// `ĥ_{𝔬(a,γ)} = O_γⁿ exp_a χ_{𝔠(0,−γ)}`.
pub fn cell_transform(a: &[VFElem], g: Gamma) -> MotFn {
    let n = a.len();
    let mut ph = Phase::zero();
    for (i, c) in a.iter().enumerate() {
        ph.add_linear(i, c);
    }
    let sup = crate::geometry::Polyball::new((0..n).map(|_| Ball::closed(VFElem::zero(), -g)).collect());
    MotFn::from_packets(n, vec![WavePacket::new(sup.constraints(), ph, o_pow(g, n))])
}
