//! Fourier transforms `f̂(y) = vol(H)^{-1} ∫ f(x) exp⟨θ(x·y)⟩ dx` for the
//! trivial group and polyball subgroups `H`, with verifiers for the
//! transform identities.

use crate::error::{MfError, MfResult};
use crate::geometry::{annihilator, Affine, Ball, BallKind, Constraint, Polyball};
use crate::integrator::{convolve, convolve_mod, integrate, integrate_var};
use crate::motvalues::{CElem, MotElem};
use crate::report::Report;
use crate::valfield::{gamma, GammaVal, QI, VFElem};
use crate::wavefn::{probe_points, MotFn, Phase, ProbeConfig, WavePacket};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Group {
    Trivial,
    Polyball(Polyball),
}

#[derive(Clone, Debug)]
pub struct FourierConfig {
    pub group: Group,
    pub probes: ProbeConfig,
}

impl FourierConfig {
    pub fn trivial() -> Self {
        FourierConfig { group: Group::Trivial, probes: ProbeConfig::default() }
    }

    pub fn subgroup(h: Polyball) -> Self {
        FourierConfig { group: Group::Polyball(h), probes: ProbeConfig::default() }
    }
}

fn e_pow(n: usize) -> CElem {
    CElem::from_mot(MotElem::e_pow(n as i64))
}

fn inv_volume(h: &Polyball) -> MfResult<CElem> {
    let v = h.volume()?;
    v.monomial_inverse().map(CElem::from_mot).ok_or_else(|| MfError::Unsupported("volume not invertible".into()))
}

/// `∫ f(x) exp⟨θ(x·y)⟩ dx` with no volume factor.
pub fn fourier0(f: &MotFn) -> MfResult<MotFn> {
    if !f.check().bounded {
        return Err(MfError::NotBounded);
    }
    let n = f.arity;
    let sub: Vec<Affine> = (0..n).map(|i| Affine::var(n + i)).collect();
    let mut q = Phase::zero();
    for i in 0..n {
        q.add_quad(i, n + i, &VFElem::one());
    }
    let kernel = MotFn::from_packets(2 * n, vec![WavePacket::new(vec![], q, CElem::one())]);
    let mut h = f.substitute(&sub, 2 * n)?.mul(&kernel)?;
    for k in (n..2 * n).rev() {
        h = integrate_var(&h, k)?;
    }
    Ok(h)
}

/// Sample elements of a polyball subgroup.
fn subgroup_samples(h: &Polyball) -> MfResult<Vec<Vec<VFElem>>> {
    let balls = h.balls()?;
    let n = balls.len();
    let mut per: Vec<Vec<VFElem>> = Vec::new();
    for b in &balls {
        let r = b.radius.finite().ok_or(MfError::NotCenteredAtZero)?;
        let g = if b.kind == BallKind::Open { r.floor() + gamma(1) } else { r.ceil() };
        per.push(vec![
            VFElem::t_pow(g),
            VFElem::monomial(QI::i(), g),
            VFElem::monomial(QI::gauss(1, 1), g + gamma(1)),
            VFElem::monomial(QI::int(-1), g),
        ]);
    }
    let mut out = Vec::new();
    for i in 0..n {
        for s in &per[i] {
            let mut v = vec![VFElem::zero(); n];
            v[i] = s.clone();
            out.push(v);
        }
    }
    for k in 0..4 {
        out.push(per.iter().map(|p| p[k].clone()).collect());
    }
    Ok(out)
}

/// Probe check of `f(x + h) = f(x)` for `h ∈ H`.
pub fn is_invariant(f: &MotFn, h: &Polyball, probes: ProbeConfig) -> MfResult<bool> {
    if h.dims() != f.arity {
        return Err(MfError::ArityMismatch { expected: f.arity, found: h.dims() });
    }
    let hs = subgroup_samples(h)?;
    for x in probe_points(&[f], probes) {
        let fx = f.eval(&x)?;
        for d in &hs {
            let y: Vec<VFElem> = x.iter().zip(d).map(|(a, b)| a + b).collect();
            if f.eval(&y)? != fx {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn check_subgroup(f: &MotFn, h: &Polyball) -> MfResult<Polyball> {
    if h.dims() != f.arity {
        return Err(MfError::ArityMismatch { expected: f.arity, found: h.dims() });
    }
    annihilator(h)
}

/// The Fourier transform for the configured group.
pub fn fourier(f: &MotFn, cfg: &FourierConfig) -> MfResult<MotFn> {
    match &cfg.group {
        Group::Trivial => fourier0(f),
        Group::Polyball(h) => {
            let hs = check_subgroup(f, h)?;
            if !f.check().bounded {
                return Err(MfError::NotBounded);
            }
            if !is_invariant(f, h, cfg.probes)? {
                return Err(MfError::NotHInvariant);
            }
            fourier0(f)?.scale(&inv_volume(h)?).mul(&MotFn::indicator(&hs))
        }
    }
}

/// Per-coordinate closed form for polyball supports with linear phases.
pub fn fourier_closed_form(f: &MotFn) -> Option<MotFn> {
    let n = f.arity;
    let mut out = Vec::new();
    for p in &f.packets {
        if p.phase.quad_terms().next().is_some() {
            return None;
        }
        let mut balls: Vec<Option<Ball>> = vec![None; n];
        for c in &p.support {
            if c.form.coeffs.len() != 1 {
                return None;
            }
            let (&i, m) = c.form.coeffs.iter().next()?;
            if !m.is_one() || balls[i].is_some() {
                return None;
            }
            balls[i] = Some(Ball { center: -&c.form.constant, radius: c.radius, kind: c.kind });
        }
        let mut support = Vec::new();
        let mut phase = Phase::constant(p.phase.constant_term().clone());
        let mut coeff = p.coeff.clone();
        for (i, b) in balls.iter().enumerate() {
            let b = b.as_ref()?;
            let bi = p.phase.linear_coeff(i);
            coeff = coeff.mul_mot(&b.volume());
            if let GammaVal::Fin(r) = b.radius {
                let form = Affine::var(i).add(&Affine::constant(bi.clone()));
                support.push(Constraint { form, radius: GammaVal::Fin(-r), kind: b.kind.flip() });
            }
            phase.add_linear(i, &b.center);
            phase = phase.add(&Phase::constant(&b.center * &bi));
        }
        out.push(WavePacket::new(support, phase, coeff));
    }
    Some(MotFn::from_packets(n, out))
}

fn reflect(f: &MotFn) -> MfResult<MotFn> {
    f.scale_arg(&VFElem::int(-1))
}

/// `f̂̂(−a) = 𝓽 vol(G)^{-1} f(a)`.
pub fn check_inversion(f: &MotFn, cfg: &FourierConfig) -> MfResult<Report> {
    let n = f.arity;
    let (twice, rhs) = match &cfg.group {
        Group::Trivial => (fourier0(&fourier0(f)?)?, f.scale(&e_pow(n))),
        Group::Polyball(h) => {
            let once = fourier(f, cfg)?;
            (fourier0(&once)?, f.scale(&e_pow(n).mul(&inv_volume(h)?)))
        }
    };
    Report::functions("inversion", &reflect(&twice)?, &rhs, cfg.probes)
}

/// `𝓕(f∗g) = 𝓕f · 𝓕g`.
pub fn check_convolution(f: &MotFn, g: &MotFn, cfg: &FourierConfig) -> MfResult<Report> {
    let conv = match &cfg.group {
        Group::Trivial => convolve(f, g)?,
        Group::Polyball(h) => convolve_mod(f, g, h)?,
    };
    let lhs = fourier(&conv, cfg)?;
    let rhs = fourier(f, cfg)?.mul(&fourier(g, cfg)?)?;
    Report::functions("convolution", &lhs, &rhs, cfg.probes)
}

/// `𝓽 vol(G)^{-2} ∫ f g = ∫ f̂ · (ǧ)^`.
pub fn check_plancherel(f: &MotFn, g: &MotFn, cfg: &FourierConfig) -> MfResult<Report> {
    let n = f.arity;
    let scale = match &cfg.group {
        Group::Trivial => e_pow(n),
        Group::Polyball(h) => {
            let iv = inv_volume(h)?;
            e_pow(n).mul(&iv).mul(&iv)
        }
    };
    let lhs = integrate(&f.mul(g)?, None)?.mul(&scale);
    let rhs = integrate(&fourier(f, cfg)?.mul(&fourier(&reflect(g)?, cfg)?)?, None)?;
    Ok(Report::values("plancherel", &lhs, &rhs))
}

/// `∫ 𝓕₀(f)·g = ∫ f·𝓕₀(g)`.
pub fn check_plancherel_classical(f: &MotFn, g: &MotFn) -> MfResult<Report> {
    let lhs = integrate(&fourier0(f)?.mul(g)?, None)?;
    let rhs = integrate(&f.mul(&fourier0(g)?)?, None)?;
    Ok(Report::values("plancherel-classical", &lhs, &rhs))
}

/// `𝓕₀(fg) = 𝓮^{-n}(𝓕₀f ∗ 𝓕₀g)`.
pub fn check_product_convolution(f: &MotFn, g: &MotFn, probes: ProbeConfig) -> MfResult<Report> {
    let n = f.arity;
    let lhs = fourier0(&f.mul(g)?)?;
    let rhs = convolve(&fourier0(f)?, &fourier0(g)?)?.scale(&CElem::from_mot(MotElem::e_pow(-(n as i64))));
    Report::functions("product-convolution", &lhs, &rhs, probes)
}

/// `g(y) = ∫_{x∈H} f(x + y) dx`.
pub fn subgroup_average(f: &MotFn, h: &Polyball) -> MfResult<MotFn> {
    let n = f.arity;
    let sub: Vec<Affine> = (0..n).map(|i| Affine::var(i).add(&Affine::var(n + i))).collect();
    let shifted: Vec<Affine> = (0..n).map(|i| Affine::var(n + i)).collect();
    let chi_h = MotFn::indicator(h).substitute(&shifted, 2 * n)?;
    let mut g = f.substitute(&sub, 2 * n)?.mul(&chi_h)?;
    for k in (n..2 * n).rev() {
        g = integrate_var(&g, k)?;
    }
    Ok(g)
}

/// `(𝓮ⁿ/vol H) ∫_H f = ∫_{H_*} 𝓕₀ f`, after checking the hypotheses.
pub fn check_poisson(f: &MotFn, h: &Polyball, probes: ProbeConfig) -> MfResult<Report> {
    let hs = check_subgroup(f, h)?;
    let n = f.arity;
    if !f.check().integrable {
        return Err(MfError::HypothesisFailed(1));
    }
    let g = subgroup_average(f, h)?;
    if !g.check().bounded || !is_invariant(&g, h, probes)? {
        return Err(MfError::HypothesisFailed(1));
    }
    if !g.check().schwartz {
        return Err(MfError::HypothesisFailed(2));
    }
    let lhs = integrate(&f.mul(&MotFn::indicator(h))?, None)?.mul(&e_pow(n)).mul(&inv_volume(h)?);
    let rhs = integrate(&fourier0(f)?.mul(&MotFn::indicator(&hs))?, None)?;
    Ok(Report::values("poisson", &lhs, &rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valfield::gamma;

    fn chi1(b: Ball) -> MotFn {
        MotFn::indicator(&Polyball::new(vec![b]))
    }

    fn o() -> Ball {
        Ball::closed(VFElem::zero(), gamma(0))
    }

    fn m() -> Ball {
        Ball::open(VFElem::zero(), gamma(0))
    }

    #[test]
    fn transform_examples() {
        let f = fourier0(&chi1(o())).unwrap();
        assert_eq!(f, chi1(m()).scale(&CElem::from_mot(MotElem::c(gamma(0)))));
        let a = VFElem::t_pow(gamma(-1));
        let g = fourier0(&chi1(Ball::open(a.clone(), gamma(1)))).unwrap();
        let want = chi1(Ball::closed(VFElem::zero(), gamma(-1)))
            .mul(&MotFn::expchar(1, Phase::linear(0, a)).unwrap())
            .unwrap()
            .scale(&CElem::from_mot(MotElem::o(gamma(1))));
        assert_eq!(g, want);
        assert!(fourier0(&MotFn::zero(1)).unwrap().is_zero());
    }

    #[test]
    fn subgroup_examples() {
        let h = Polyball::new(vec![o()]);
        let cfg = FourierConfig::subgroup(h.clone());
        assert!(check_inversion(&chi1(o()), &cfg).unwrap().passed());
        assert!(check_convolution(&chi1(o()), &chi1(o()), &cfg).unwrap().passed());
        assert!(check_plancherel(&chi1(o()), &chi1(o()), &cfg).unwrap().passed());
        assert!(matches!(fourier(&chi1(m()), &cfg), Err(MfError::NotHInvariant)));
    }

    #[test]
    fn poisson_examples() {
        let p = ProbeConfig::default();
        let r = check_poisson(&chi1(o()), &Polyball::new(vec![o()]), p).unwrap();
        assert!(r.passed());
        assert_eq!(r.lhs, "(e)");
        assert!(check_poisson(&chi1(m()), &Polyball::new(vec![m()]), p).unwrap().passed());
    }

    #[test]
    fn trivial_identities() {
        let cfg = FourierConfig::trivial();
        let f = chi1(Ball::open(VFElem::zero(), gamma(1)));
        assert!(check_inversion(&f, &cfg).unwrap().passed());
        assert!(check_plancherel(&chi1(o()), &chi1(o()), &cfg).unwrap().passed());
        assert!(check_product_convolution(&chi1(o()), &chi1(o()), ProbeConfig::default()).unwrap().passed());
        assert!(check_convolution(&chi1(m()), &chi1(o()), &cfg).unwrap().passed());
        assert_eq!(fourier_closed_form(&f), Some(fourier0(&f).unwrap()));
    }
}
