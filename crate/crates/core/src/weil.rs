//! The Weil representation of SL₂ on Schwartz functions of `VF²` carrying a
//! constant volume form, with `π = i`.
//!
//! Two pairs are compared in two ways. `strict` asks for equal functions and
//! equal forms. `with_form` compares the measures the pairs define: a volume
//! `O_γ` is read as `𝓪T^γ`, `C_γ` as `𝓫T^γ`, `e` as `𝓪𝓫`, and a form `ρ`
//! contributes `T^{v(ρ)}`. Scaling one coordinate by a unit fixes every
//! polyball, so the unit part of `ρ` drops out.

use std::fmt;

use serde::Serialize;

use crate::error::{MfError, MfResult};
use crate::fourier::fourier0;
use crate::geometry::Affine;
use crate::integrator::{convolve_bounded, MuFn};
use crate::motvalues::{CElem, HomElem, MotElem};
use crate::valfield::{VFElem, QI};
use crate::wavefn::{fn_equal, probe_points, MotFn, ProbeConfig};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gen {
    U(VFElem),
    S(VFElem),
    W,
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gen::U(b) => write!(f, "u({})", b),
            Gen::S(a) => write!(f, "s({})", a),
            Gen::W => write!(f, "w"),
        }
    }
}

/// A word in the generators; the rightmost letter acts first.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SL2Word(pub Vec<Gen>);

impl fmt::Display for SL2Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|g| g.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl SL2Word {
    pub fn inverse(&self) -> MfResult<SL2Word> {
        let mut out = Vec::new();
        for g in self.0.iter().rev() {
            match g {
                Gen::U(b) => out.push(Gen::U(-b)),
                Gen::S(a) => out.push(Gen::S(a.inverse()?)),
                Gen::W => {
                    out.push(Gen::S(VFElem::int(-1)));
                    out.push(Gen::W);
                }
            }
        }
        Ok(SL2Word(out))
    }
}

pub fn pi() -> VFElem {
    VFElem::constant(QI::i())
}

fn e_inv() -> CElem {
    CElem::from_mot(MotElem::e_inv())
}

/// One generator.
pub fn act(g: &Gen, mf: &MuFn) -> MfResult<MuFn> {
    if mf.f.arity != 2 {
        return Err(MfError::ArityMismatch { expected: 2, found: mf.f.arity });
    }
    match g {
        Gen::S(a) => {
            a.inverse()?;
            Ok(MuFn { f: mf.f.scale_arg(a)?, form: mf.form.mul(&a.rv()) })
        }
        Gen::U(b) => {
            if b.is_zero() {
                return Ok(mf.clone());
            }
            Ok(MuFn { f: mf.f.mul(&MotFn::nu(&(b * &pi())))?, form: mf.form.clone() })
        }
        Gen::W => {
            if !mf.f.check().schwartz {
                return Err(MfError::NotSchwartz);
            }
            let fh = fourier0(&mf.f)?.scale_arg(&pi())?.scale(&e_inv());
            // the pairing is the polar form of x1*x2, so the transform lands on swapped coordinates
            let fh = fh.substitute(&[Affine::var(1), Affine::var(0)], 2)?;
            let rho = (-&pi().inverse()?).rv();
            Ok(MuFn { f: fh, form: mf.form.mul(&rho) })
        }
    }
}

pub fn weil_apply(word: &SL2Word, mf: &MuFn) -> MfResult<MuFn> {
    let mut cur = mf.clone();
    for g in word.0.iter().rev() {
        cur = act(g, &cur)?;
    }
    Ok(cur)
}

/// Outcome of comparing two pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairCheck {
    pub strict: bool,
    pub with_form: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

pub fn compare_pairs(x: &MuFn, y: &MuFn, probes: ProbeConfig) -> MfResult<PairCheck> {
    let strict = x.form == y.form && fn_equal(&x.f, &y.f, probes)?.holds();
    let dx = x.form.val().finite().ok_or(MfError::DivideByZero)?;
    let dy = y.form.val().finite().ok_or(MfError::DivideByZero)?;
    let mut detail = None;
    for p in probe_points(&[&x.f, &y.f], probes) {
        let a = HomElem::of(&x.f.eval(&p)?).shift_t(dx);
        let b = HomElem::of(&y.f.eval(&p)?).shift_t(dy);
        if a != b {
            let at: Vec<String> = p.iter().map(|v| v.to_string()).collect();
            detail = Some(format!("at ({}): {} vs {}", at.join(", "), a, b));
            break;
        }
    }
    Ok(PairCheck { strict, with_form: detail.is_none(), detail })
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationReport {
    pub relation: String,
    pub input: String,
    pub lhs: String,
    pub rhs: String,
    pub strict: bool,
    pub with_form: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

fn word(gs: Vec<Gen>) -> SL2Word {
    SL2Word(gs)
}

/// The five relations as pairs of words, for parameters `a`, `b`.
pub fn relations(a: &VFElem, b: &VFElem) -> MfResult<Vec<(String, SL2Word, SL2Word)>> {
    let ai = a.inverse()?;
    Ok(vec![
        ("u(a)u(b) = u(a+b)".into(), word(vec![Gen::U(a.clone()), Gen::U(b.clone())]), word(vec![Gen::U(a + b)])),
        ("s(a)s(b) = s(ab)".into(), word(vec![Gen::S(a.clone()), Gen::S(b.clone())]), word(vec![Gen::S(a * b)])),
        ("w s(a) = s(a^-1) w".into(), word(vec![Gen::W, Gen::S(a.clone())]), word(vec![Gen::S(ai.clone()), Gen::W])),
        ("w^2 = s(-1)".into(), word(vec![Gen::W, Gen::W]), word(vec![Gen::S(VFElem::int(-1))])),
        (
            "w u(a) w = s(-a^-1) u(-a) w u(-a^-1)".into(),
            word(vec![Gen::W, Gen::U(a.clone()), Gen::W]),
            word(vec![Gen::S(-&ai), Gen::U(-a), Gen::W, Gen::U(-&ai)]),
        ),
    ])
}

pub fn check_relation(name: &str, l: &SL2Word, r: &SL2Word, mf: &MuFn, probes: ProbeConfig) -> MfResult<RelationReport> {
    let x = weil_apply(l, mf)?;
    let y = weil_apply(r, mf)?;
    let c = compare_pairs(&x, &y, probes)?;
    Ok(RelationReport {
        relation: format!("{}: {} vs {}", name, l, r),
        input: mf.f.to_string(),
        lhs: format!("({}, {})", x.f, x.form),
        rhs: format!("({}, {})", y.f, y.form),
        strict: c.strict,
        with_form: c.with_form,
        detail: c.detail,
    })
}

/// All relations for every function and parameter pair.
pub fn verify_relations(corpus: &[MotFn], params: &[VFElem], probes: ProbeConfig) -> MfResult<Vec<RelationReport>> {
    let mut out = Vec::new();
    for f in corpus {
        let mf = MuFn::new(f.clone());
        for a in params {
            for b in params {
                for (i, (name, l, r)) in relations(a, b)?.into_iter().enumerate() {
                    // relations 3 to 5 depend on a only
                    if i >= 2 && b != &params[0] {
                        continue;
                    }
                    out.push(check_relation(&name, &l, &r, &mf, probes)?);
                }
            }
        }
    }
    Ok(out)
}

/// `(𝓕(f∗ν_b)(bx), μ)` against `(𝓮 f̂(bx) ν_{−b}(x), rv(b^{-1})μ)`.
pub fn check_nu_convolution(f: &MotFn, b: &VFElem, probes: ProbeConfig) -> MfResult<RelationReport> {
    let conv = convolve_bounded(f, &MotFn::nu(b))?;
    let lhs = MuFn::new(fourier0(&conv)?.scale_arg(b)?);
    let rf = fourier0(f)?
        .scale_arg(b)?
        .mul(&MotFn::nu(&-b))?
        .scale(&CElem::from_mot(MotElem::e()));
    let rhs = MuFn { f: rf, form: b.inverse()?.rv() };
    let c = compare_pairs(&lhs, &rhs, probes)?;
    Ok(RelationReport {
        relation: format!("F(f*nu_b)(bx) with b = {}", b),
        input: f.to_string(),
        lhs: format!("({}, {})", lhs.f, lhs.form),
        rhs: format!("({}, {})", rhs.f, rhs.form),
        strict: c.strict,
        with_form: c.with_form,
        detail: c.detail,
    })
}
