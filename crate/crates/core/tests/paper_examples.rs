//! Worked values, each checked symbolically and, where it is an integral,
//! against the exact character sum at p = 5.

use motfourier_core::distrib::{Dist, DistEngine};
use motfourier_core::fourier::*;
use motfourier_core::geometry::Polyball;
use motfourier_core::integrator::*;
use motfourier_core::motvalues::CElem;
use motfourier_core::newton::{jacobian, limit_set, newton_polygon, LimitSet, VFPoly};
use motfourier_core::padic::{numeric_integral, spec_c, PadicConfig};
use motfourier_core::shell::{parse_expr, Session, Value};
use motfourier_core::valfield::*;
use motfourier_core::wavefn::{fn_equal, MotFn, ProbeConfig};
use motfourier_core::weil::{pi, weil_apply, SL2Word, Gen};

fn value(src: &str) -> Value {
    Session::default().eval(&parse_expr(src).unwrap()).unwrap_or_else(|e| panic!("{src}: {e}"))
}

fn fun(src: &str) -> MotFn {
    match value(src) {
        Value::Fn { f, .. } => f,
        v => panic!("{src} is a {}", v.type_name()),
    }
}

fn c(src: &str) -> CElem {
    match value(src) {
        Value::C(c) => c,
        v => panic!("{src} is a {}", v.type_name()),
    }
}

fn vf(src: &str) -> VFElem {
    match value(src) {
        Value::Poly(p) => p.eval(&[]).unwrap(),
        v => panic!("{src} is a {}", v.type_name()),
    }
}

fn poly(src: &str) -> VFPoly {
    match value(src) {
        Value::Poly(p) => p.with_vars(2),
        v => panic!("{src} is a {}", v.type_name()),
    }
}

fn same_fn(a: &MotFn, b: &MotFn) {
    let m = fn_equal(a, b, ProbeConfig::default()).unwrap();
    assert!(m.holds(), "{a}\n  vs\n{b}\n{m:?}");
}

fn p5() -> PadicConfig {
    PadicConfig::new(5, 3).unwrap()
}

/// `∫ f` by the engine equals `expected`, and both match the character sum.
fn integral_is(f: &MotFn, expected: &CElem) {
    let got = integrate(f, None).unwrap();
    assert!(got.homogenized_eq(expected), "∫ {f} = {got}, expected {expected}");
    assert_eq!(spec_c(expected, &p5()).unwrap(), numeric_integral(f, &p5()).unwrap(), "oracle on {f}");
}

/// `g(b) = ∫ f(x)·k(x, b)` checked at sample points by the character sum.
fn pointwise_oracle(g: &MotFn, integrand_at: impl Fn(&VFElem) -> MotFn) {
    for b in ["0", "1", "t", "t^2", "t^-1", "t^-2", "i + t", "1 + t^-1"] {
        let b = vf(b);
        let h = integrand_at(&b);
        let cfg = PadicConfig::new(5, 4).unwrap();
        assert_eq!(spec_c(&g.eval(&[b.clone()]).unwrap(), &cfg).unwrap(), numeric_integral(&h, &cfg).unwrap(), "at {b}");
    }
}

#[test]
fn evaluation() {
    let f = fun("chi(cball(0, 0)) * expchar(t^-1*x1)");
    assert_eq!(f.eval(&[vf("t")]).unwrap(), c("exp{1}"));
    assert!(fun("chi(oball(0, 0))").eval(&[VFElem::one()]).unwrap().is_zero());
    let t1 = vf("t^-1");
    assert_eq!(MotFn::nu(&VFElem::one()).eval(&[t1.clone(), t1]).unwrap(), c("exp{t^-2}"));
    assert!(MotFn::nu(&VFElem::one()).eval(&[VFElem::zero(), vf("t^-5")]).unwrap().is_one());
}

#[test]
fn reduction_and_bounds() {
    same_fn(&fun("chi(oball(0, 2)) * expchar(t^-1*x1)"), &fun("chi(oball(0, 2))"));
    assert_ne!(fun("chi(cball(0, 0)) * expchar(t^-2*x1)").normalize(), fun("chi(cball(0, 0))").normalize());
    assert_eq!(fun("chi(oball(0, 1)) * chi(cball(0, 2))"), fun("chi(cball(0, 2))"));
    assert!(fun("chi(cball(0, 1)) * chi(cball(1, 1))").is_zero());
    same_fn(&fun("chi(oball(0, 1))").translate(&[VFElem::one()]).unwrap(), &fun("chi(oball(-1, 1))"));
    same_fn(&fun("chi(cball(0, 0))").scale_arg(&vf("t")).unwrap(), &fun("chi(cball(0, -1))"));
    let flags = fun("expchar(x1)").check();
    assert!(flags.almost_integrable && !flags.integrable);
    assert_eq!(fun("chi(oball(0, 2))").iota_bound().unwrap(), gamma(2));
    assert_eq!(fun("chi(cball(0, 0)) * expchar(t^-3*x1)").iota_bound().unwrap(), gamma(3));
}

#[test]
fn character_integrals() {
    integral_is(&fun("chi(oball(0, 0)) * expchar(x1)"), &c("O[0]"));
    integral_is(&fun("chi(oball(0, 0)) * expchar(t^-1*x1)"), &CElem::zero());
    integral_is(&fun("chi(oball(0, 1) × oball(0, 1))"), &c("O[1]^2"));
    integral_is(&MotFn::zero(1), &CElem::zero());
    for b in ["cball(0, -1)", "cball(0, -2)", "oball(0, -2)"] {
        let f = fun(&format!("chi({b} × oball(0, 0)) * expchar(x1*x2)"));
        integral_is(&f, &c("e"));
        assert_eq!(integrate(&f, Some(&[1, 0])).unwrap(), c("e"));
    }
}

#[test]
fn integrating_one_variable() {
    let f = fun("packet[2](in(x1, cball(0, -1)); x1*x2; 1)");
    let g = integrate_var(&f, 0).unwrap();
    let expected = fun("chi(oball(0, 1)) * C[-1]");
    same_fn(&g, &expected);
    pointwise_oracle(&expected, |b| fun(&format!("chi(cball(0, -1)) * expchar(({b})*x1)")));
}

#[test]
fn convolution_examples() {
    let o = fun("chi(cball(0, 0))");
    let m = fun("chi(oball(0, 0))");
    let oo = convolve(&o, &o).unwrap();
    same_fn(&oo, &o.scale(&c("C[0]")));
    pointwise_oracle(&oo, |a| o.mul(&o.translate(&[a.clone()]).unwrap().scale_arg(&VFElem::int(-1)).unwrap()).unwrap());
    let mm = convolve(&m, &m).unwrap();
    same_fn(&mm, &m.scale(&c("O[0]")));
    pointwise_oracle(&mm, |a| m.mul(&m.translate(&[a.clone()]).unwrap().scale_arg(&VFElem::int(-1)).unwrap()).unwrap());
    for f in [&o, &m, &fun("chi(cball(0, -1)) * expchar(t*x1)")] {
        same_fn(&convolve(f, &MotFn::delta(1)).unwrap(), f);
    }
}

#[test]
fn transforms() {
    for (a, g) in [("0", 1), ("1", 0), ("t^-1", 2), ("i", -1)] {
        let f = fun(&format!("chi(oball({a}, {g}))"));
        let fh = fourier0(&f).unwrap();
        same_fn(&fh, &fun(&format!("chi(cball(0, {})) * expchar(({a})*x1) * O[{g}]", -g)));
        pointwise_oracle(&fh, |b| f.mul(&MotFn::expchar(1, motfourier_core::wavefn::Phase::linear(0, b.clone())).unwrap()).unwrap());
    }
    same_fn(&fourier0(&fun("chi(cball(0, 0))")).unwrap(), &fun("chi(oball(0, 0)) * C[0]"));
    assert!(fourier0(&MotFn::zero(1)).unwrap().is_zero());
}

#[test]
fn fourier_identities() {
    let triv = FourierConfig::trivial();
    let o = fun("chi(cball(0, 0))");
    let m = fun("chi(oball(0, 0))");
    let small = fun("chi(oball(0, 1))");
    assert!(check_inversion(&small, &triv).unwrap().passed());
    assert!(check_inversion(&o, &FourierConfig::subgroup(Polyball::new(vec![motfourier_core::geometry::Ball::closed(VFElem::zero(), gamma(0))]))).unwrap().passed());
    assert!(check_inversion(&MotFn::zero(1), &triv).unwrap().passed());
    let r = check_convolution(&o, &o, &triv).unwrap();
    assert!(r.passed());
    assert_eq!(r.lhs, fun("chi(oball(0, 0)) * C[0]^2").to_string());
    assert!(check_convolution(&m, &o, &triv).unwrap().passed());
    let p = check_plancherel(&o, &o, &triv).unwrap();
    assert!(p.passed());
    assert!(c(&p.lhs.replace("(", "").replace(")", "")).homogenized_eq(&c("e*C[0]")), "{}", p.lhs);
    assert!(check_plancherel(&small, &MotFn::zero(1), &triv).unwrap().passed());
    assert!(check_product_convolution(&o, &o, ProbeConfig::default()).unwrap().passed());
    assert!(check_plancherel_classical(&o, &small).unwrap().passed());
}

#[test]
fn poisson_examples() {
    use motfourier_core::geometry::Ball;
    let h_o = Polyball::new(vec![Ball::closed(VFElem::zero(), gamma(0))]);
    let h_m = Polyball::new(vec![Ball::open(VFElem::zero(), gamma(0))]);
    for (f, h) in [("chi(cball(0, 0))", &h_o), ("chi(oball(0, 0))", &h_m)] {
        let r = check_poisson(&fun(f), h, ProbeConfig::default()).unwrap();
        assert!(r.passed(), "{f}: {} vs {}", r.lhs, r.rhs);
        assert_eq!(r.rhs, c("e").to_string());
    }
    assert!(check_poisson(&MotFn::zero(1), &h_o, ProbeConfig::default()).unwrap().passed());
}

#[test]
fn distribution_examples() {
    let eng = DistEngine::new();
    let o = fun("chi(cball(0, 0))");
    let m = fun("chi(oball(0, 0))");
    let d = Dist::regular(o.clone());
    assert_eq!(eng.eval(&d, &[VFElem::zero()], gamma(1)).unwrap(), c("O[1]"));
    let dh = Dist::fourier(d.clone());
    let reg = Dist::regular(m.scale(&c("C[0]")));
    for a in ["0", "t", "1", "t^-1"] {
        for g in [0, 1, 2] {
            let a = [vf(a)];
            assert!(eng.eval(&dh, &a, gamma(g)).unwrap().homogenized_eq(&eng.eval(&reg, &a, gamma(g)).unwrap()));
        }
    }
    let zero = Dist::tensor(d.clone(), Dist::regular(MotFn::zero(1)));
    assert!(eng.eval(&zero, &[VFElem::one(), VFElem::zero()], gamma(0)).unwrap().is_zero());
    assert_eq!(eng.apply(&Dist::regular(m.clone()), &o).unwrap(), c("O[0]"));
    assert!(eng.apply(&d, &MotFn::zero(1)).unwrap().is_zero());
    assert!(eng.check_fourier(&d, &fun("chi(oball(0, 1))")).unwrap().passed());
    assert!(eng.check_coherence(&d, &[VFElem::zero()], gamma(0), gamma(2)).unwrap().passed());
    assert!(eng.check_conv_fourier(&d, &d, &fun("chi(oball(0, 1))")).unwrap().passed());
    assert!(eng.check_conv_fourier(&Dist::regular(m), &d, &o).unwrap().passed());
}

#[test]
fn nu_over_a_small_ball_vanishes() {
    let f = fun("chi(oball(t^-3, 1) × oball(0, 1))").mul(&MotFn::nu(&VFElem::one())).unwrap();
    integral_is(&f, &CElem::zero());
}

#[test]
fn weil_generators() {
    let o2 = MuFn::new(fun("chi(cball(0, 0) × cball(0, 0))"));
    let s = weil_apply(&SL2Word(vec![Gen::S(vf("t"))]), &o2).unwrap();
    same_fn(&s.f, &fun("chi(cball(0, -1) × cball(0, -1))"));
    assert_eq!(s.form, vf("t").rv());
    let w = weil_apply(&SL2Word(vec![Gen::W]), &o2).unwrap();
    same_fn(&w.f, &fun("chi(oball(0, 0) × oball(0, 0)) * C[0]^2 * e^-1"));
    assert_eq!(w.form, (-&pi().inverse().unwrap()).rv());
    let u0 = weil_apply(&SL2Word(vec![Gen::U(VFElem::zero())]), &o2).unwrap();
    same_fn(&u0.f, &o2.f);
    assert_eq!(u0.form, o2.form);
    let ww = weil_apply(&SL2Word(vec![Gen::W, Gen::W]), &o2).unwrap();
    same_fn(&ww.f, &o2.f);
    assert_eq!(ww.form, VFElem::int(-1).rv());
}

#[test]
fn newton_examples() {
    assert_eq!(limit_set(&poly("x*y - 1")).unwrap(), LimitSet::Escape);
    assert_eq!(limit_set(&poly("x*y^2 - y + x")).unwrap(), LimitSet::Escape);
    match limit_set(&poly("y^2 - (1 + x)")).unwrap() {
        LimitSet::Limits(mut l) => {
            l.sort();
            assert_eq!(l, vec![QI::int(-1), QI::int(1)]);
        }
        e => panic!("{e}"),
    }
    let segs = |p: &str| newton_polygon(&poly(p), 1).unwrap().segments();
    assert_eq!(segs("y^2 - (1 + t)"), vec![(gamma(0), 2)]);
    assert_eq!(segs("t*y^2 - y + t"), vec![(gamma(-1), 1), (gamma(1), 1)]);
    let a = vf("t");
    let ax = |s: &str| poly(s);
    assert_eq!(jacobian(&[ax("t*x"), ax("t*y")], &[VFElem::one(), VFElem::one()]).unwrap(), &a * &a);
    assert_eq!(jacobian(&[ax("t*x"), ax("t^-1*y")], &[a.clone(), VFElem::one()]).unwrap(), VFElem::one());
}
