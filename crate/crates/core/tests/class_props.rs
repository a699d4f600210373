use motfourier_core::corpus;
use motfourier_core::fourier::fourier0;
use motfourier_core::integrator::*;
use motfourier_core::motvalues::{CElem, MotElem};
use motfourier_core::valfield::*;
use motfourier_core::wavefn::{fn_equal, probe_points, MotFn, ProbeConfig};
use motfourier_core::weil::{compare_pairs, weil_apply, Gen, SL2Word};
use proptest::prelude::*;
use std::sync::OnceLock;

fn arity(n: usize) -> &'static [(String, MotFn)] {
    static ONE: OnceLock<Vec<(String, MotFn)>> = OnceLock::new();
    static TWO: OnceLock<Vec<(String, MotFn)>> = OnceLock::new();
    let cell = if n == 1 { &ONE } else { &TWO };
    cell.get_or_init(|| corpus::of_arity(n).into_iter().filter(|(_, f)| f.check().schwartz).collect())
}

fn pick(n: usize) -> impl Strategy<Value = &'static MotFn> {
    (0..arity(n).len()).prop_map(move |i| &arity(n)[i].1)
}

fn unit_pair() -> impl Strategy<Value = &'static MotFn> {
    prop_oneof![pick(1), pick(2)]
}

fn small_vf() -> impl Strategy<Value = VFElem> {
    (-2i64..=2, prop::sample::select(vec![QI::one(), QI::int(-1), QI::i(), QI::gauss(1, 1), QI::int(2)]))
        .prop_map(|(g, c)| VFElem::monomial(c, gamma(g)))
}

fn scalar() -> impl Strategy<Value = CElem> {
    (-2i64..=2, -1i64..=1, -2i64..=2).prop_map(|(k, g, w)| {
        CElem::exp_vf(&VFElem::t_pow(gamma(w.min(0)))).mul_mot(&MotElem::int(k).add(&MotElem::o(gamma(g))))
    })
}

fn eq(a: &CElem, b: &CElem) -> bool {
    a.homogenized_eq(b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pointwise_algebra(f in pick(2), g in pick(2)) {
        let (s, p) = (f.add(g).unwrap(), f.mul(g).unwrap());
        for x in probe_points(&[f, g], ProbeConfig { count: 24, seed: 3 }) {
            let (a, b) = (f.eval(&x).unwrap(), g.eval(&x).unwrap());
            prop_assert_eq!(s.eval(&x).unwrap(), a.add(&b));
            prop_assert_eq!(p.eval(&x).unwrap(), a.mul(&b));
            prop_assert_eq!(f.normalize().eval(&x).unwrap(), a);
        }
    }

    #[test]
    fn locally_constant_below_iota(f in unit_pair(), d in 1i64..3) {
        let beta = f.iota_bound().unwrap();
        for x in probe_points(&[f], ProbeConfig { count: 16, seed: 5 }) {
            let moved: Vec<VFElem> = x.iter().map(|a| a + &VFElem::monomial(QI::i(), beta.floor() + gamma(d))).collect();
            prop_assert_eq!(f.eval(&x).unwrap(), f.eval(&moved).unwrap(), "{} at {:?}", f, x);
        }
    }

    #[test]
    fn translation_invariance(f in unit_pair(), c in small_vf()) {
        let shift: Vec<VFElem> = (0..f.arity).map(|i| if i == 0 { c.clone() } else { -&c }).collect();
        prop_assert!(eq(&integrate(&f.translate(&shift).unwrap(), None).unwrap(), &integrate(f, None).unwrap()));
    }

    #[test]
    fn linearity(f in pick(1), g in pick(1), a in scalar(), b in scalar()) {
        let lhs = integrate(&f.scale(&a).add(&g.scale(&b)).unwrap(), None).unwrap();
        let rhs = a.mul(&integrate(f, None).unwrap()).add(&b.mul(&integrate(g, None).unwrap()));
        prop_assert!(eq(&lhs, &rhs), "{} vs {}", lhs, rhs);
        let fl = fourier0(&f.scale(&a).add(&g.scale(&b)).unwrap()).unwrap();
        let fr = fourier0(f).unwrap().scale(&a).add(&fourier0(g).unwrap().scale(&b)).unwrap();
        prop_assert!(fn_equal(&fl, &fr, ProbeConfig::default()).unwrap().holds());
    }

    #[test]
    fn convolution_commutes(f in pick(1), g in pick(1)) {
        let (fg, gf) = (convolve(f, g).unwrap(), convolve(g, f).unwrap());
        prop_assert!(fn_equal(&fg, &gf, ProbeConfig::default()).unwrap().holds());
        prop_assert!(fg.check().integrable);
    }

    #[test]
    fn convolution_associates(f in pick(1), g in pick(1), h in pick(1)) {
        let l = convolve(&convolve(f, g).unwrap(), h).unwrap();
        let r = convolve(f, &convolve(g, h).unwrap()).unwrap();
        prop_assert!(fn_equal(&l, &r, ProbeConfig::default()).unwrap().holds());
    }

    #[test]
    fn averaging(f in pick(1), extra in 0i64..2) {
        // ∫f = O_δ^{-1} ∫_y ∫_{x ∈ 𝔬(y, δ)} f(x)
        let delta = f.iota_bound().unwrap().ceil() + gamma(extra);
        let cell = motfourier_core::wavefn::WavePacket::new(
            vec![motfourier_core::geometry::Constraint::new(
                motfourier_core::geometry::Affine::var(0).sub(&motfourier_core::geometry::Affine::var(1)),
                &motfourier_core::geometry::Ball::open(VFElem::zero(), delta),
            )],
            motfourier_core::wavefn::Phase::zero(),
            CElem::one(),
        );
        let g = f.extend_arity(2).unwrap().mul(&MotFn::from_packets(2, vec![cell])).unwrap();
        let inner = integrate_var(&g, 0).unwrap();
        let vol_inv = MotElem::o(delta).monomial_inverse().unwrap();
        let lhs = integrate(&inner, None).unwrap().mul_mot(&vol_inv);
        prop_assert!(eq(&lhs, &integrate(f, None).unwrap()), "{} vs {}", lhs, integrate(f, None).unwrap());
    }

    #[test]
    fn fourier_stays_schwartz(f in unit_pair()) {
        prop_assert!(fourier0(f).unwrap().check().schwartz);
    }

    #[test]
    fn transform_is_constant_on_dual_balls(f in unit_pair(), k in 0usize..8) {
        // supp f ⊆ 𝔠(0, α)ⁿ makes f̂ constant on balls 𝔬(b, −α)
        let alpha = f.support_lower_bounds().unwrap().into_iter().filter_map(|v| v.finite()).fold(gamma(0), |a, b| a.min(b));
        let fh = fourier0(f).unwrap();
        let pts = probe_points(&[&fh], ProbeConfig { count: 8, seed: k as u64 });
        for x in pts {
            let moved: Vec<VFElem> = x.iter().map(|a| a + &VFElem::monomial(QI::gauss(1, 1), gamma(1) - alpha.floor())).collect();
            prop_assert_eq!(fh.eval(&x).unwrap(), fh.eval(&moved).unwrap());
        }
    }

    #[test]
    fn generators_invert(i in 0..corpus::weil_functions().len(), a in small_vf(), which in 0usize..3) {
        let f = corpus::weil_functions()[i].1.clone();
        let g = match which { 0 => Gen::U(a), 1 => Gen::S(a), _ => Gen::W };
        let word = SL2Word(vec![g]);
        let mf = MuFn::new(f);
        let back = weil_apply(&word.inverse().unwrap(), &weil_apply(&word, &mf).unwrap()).unwrap();
        prop_assert!(compare_pairs(&back, &mf, ProbeConfig::default()).unwrap().with_form);
    }

    #[test]
    fn u_keeps_supports_and_s_scales_them(i in 0..corpus::weil_functions().len(), a in small_vf()) {
        let f = corpus::weil_functions()[i].1.clone();
        let mf = MuFn::new(f.clone());
        let u = weil_apply(&SL2Word(vec![Gen::U(a.clone())]), &mf).unwrap();
        let s = weil_apply(&SL2Word(vec![Gen::S(a.clone())]), &mf).unwrap();
        let va = a.val().finite().unwrap();
        for x in probe_points(&[&f], ProbeConfig { count: 16, seed: 1 }) {
            let inside = !f.eval(&x).unwrap().is_zero();
            prop_assert_eq!(inside, !u.f.eval(&x).unwrap().is_zero());
            // (s(a)f)(x) = f(a x), so x is in the new support iff a·x was in the old one
            let ax: Vec<VFElem> = x.iter().map(|c| c * &a.inverse().unwrap()).collect();
            prop_assert_eq!(inside, !s.f.eval(&ax).unwrap().is_zero());
        }
        let lb = |g: &MotFn| g.support_lower_bounds().unwrap();
        for (old, new) in lb(&f).into_iter().zip(lb(&s.f)) {
            prop_assert_eq!(new, old.plus(-va));
        }
    }
}
