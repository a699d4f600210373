use motfourier_core::valfield::*;
use num_rational::Rational64;
use proptest::prelude::*;

fn qi() -> impl Strategy<Value = QI> {
    (-4i64..=4, -4i64..=4).prop_map(|(a, b)| QI::gauss(a, b))
}

fn exponent() -> impl Strategy<Value = Gamma> {
    prop_oneof![4 => (-3i64..=3).prop_map(gamma), 1 => (-5i64..=5).prop_map(|n| Rational64::new(n, 2))]
}

fn vf() -> impl Strategy<Value = VFElem> {
    prop::collection::vec((exponent(), qi()), 0..4).prop_map(VFElem::from_terms)
}

fn nonzero_vf() -> impl Strategy<Value = VFElem> {
    vf().prop_filter("nonzero", |a| !a.is_zero())
}

proptest! {
    #[test]
    fn ring_axioms(a in vf(), b in vf(), c in vf()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &VFElem::one(), a.clone());
    }

    #[test]
    fn monomials_are_units(c in qi().prop_filter("unit", |c| !c.is_zero()), g in exponent()) {
        let m = VFElem::monomial(c, g);
        prop_assert!((&m * &m.inverse().unwrap()).is_one());
    }

    #[test]
    fn ultrametric(a in vf(), b in vf()) {
        let (va, vb, vs) = (a.val(), b.val(), (&a + &b).val());
        prop_assert!(vs >= va.min(vb));
        if va != vb {
            prop_assert_eq!(vs, va.min(vb));
        }
    }

    #[test]
    fn valuation_is_additive(a in vf(), b in vf()) {
        prop_assert_eq!((&a * &b).val(), a.val().add(b.val()));
    }

    #[test]
    fn theta_kernel(a in vf()) {
        prop_assert_eq!(a.theta().is_zero(), a.val() > GammaVal::fin(0));
    }

    #[test]
    fn theta_additive(a in vf(), b in vf()) {
        prop_assert_eq!((&a + &b).theta(), a.theta().add(&b.theta()));
    }

    #[test]
    fn rv_multiplicative(a in nonzero_vf(), b in nonzero_vf()) {
        prop_assert_eq!((&a * &b).rv(), a.rv().mul(&b.rv()));
    }

    #[test]
    fn truncated_inverse_error(a in nonzero_vf(), n in 0i64..6, inclusive in any::<bool>()) {
        let bound = a.val().finite().unwrap() * -1 + gamma(n);
        let q = a.inverse_to(bound, inclusive).unwrap();
        // a·q − 1 = −a·(1/a − q), so its valuation clears v(a) + bound
        let err = (&(&a * &q) - &VFElem::one()).val();
        prop_assert!(val_at_least(err, GammaVal::fin(n), inclusive), "{} {} {}", a, q, err);
        if a.is_monomial() {
            prop_assert_eq!(q, a.inverse().unwrap().truncate(bound, inclusive));
        }
    }
}

#[test]
fn general_series_are_not_inverted_exactly() {
    let a = &VFElem::one() + &VFElem::t_pow(gamma(1));
    assert!(a.inverse().is_err());
    assert_eq!(a.inverse_to(gamma(3), false).unwrap().to_string(), "1 - t + t^2");
}

#[test]
fn pi_squared_is_minus_one() {
    let i = VFElem::constant(QI::i());
    assert_eq!(&i * &i, VFElem::int(-1));
}
