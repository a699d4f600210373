use motfourier_core::corpus;
use motfourier_core::shell::ast::BinOp;
use motfourier_core::shell::{parse, parse_expr, Expr};
use num_bigint::BigInt;
use num_rational::Rational64;
use proptest::prelude::*;

fn stable(src: &str) {
    let a = parse(src).unwrap_or_else(|e| panic!("{e}\n{src}"));
    let printed = a.to_string();
    let b = parse(&printed).unwrap_or_else(|e| panic!("{e}\n{printed}"));
    assert_eq!(a.stmts(), b.stmts(), "{printed}");
    assert_eq!(printed, b.to_string());
}

#[test]
fn corpus_files_round_trip() {
    for src in [corpus::FUNCTIONS, corpus::DISTRIBUTIONS, corpus::WEIL] {
        stable(src);
    }
}

#[test]
fn command_forms_round_trip() {
    stable("fn f = chi(oball(0, 1))\nverify inversion f\nintegrate f order [1] form t\nfourier f mod cball(0, 0)");
    stable("option p 13\noption level 2\noracle f\nconvolve f, f\ndist-support regular(f)\nnewton t*y^2 - y + t, 2");
    stable("weil [w, w], chi(cball(0, 0) × cball(0, 0))\nverify relations g, [t, i]\nverify nu-convolution g, t^-1");
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-9i64..=9).prop_map(|n| Expr::Int(BigInt::from(n))),
        (1i64..=3).prop_map(|n| Expr::Imag(BigInt::from(n))),
        Just(Expr::T),
        Just(Expr::I),
        Just(Expr::E),
        (0usize..3).prop_map(Expr::Var),
        prop::sample::select(vec!["f", "g", "alpha"]).prop_map(|s| Expr::Name(s.into())),
        (-3i64..=3).prop_map(|n| Expr::O(Rational64::from(n))),
        (-3i64..=3, 1i64..=2).prop_map(|(n, d)| Expr::C(Rational64::new(n, d))),
        (1usize..3).prop_map(Expr::Zero),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 3, |inner| {
        let ops = prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Tensor]);
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (ops, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::Bin(op, Box::new(a), Box::new(b))),
            (inner.clone(), -3i64..=3, 1i64..=2).prop_map(|(e, n, d)| Expr::Pow(Box::new(e), Rational64::new(n, d))),
            inner.clone().prop_map(|e| Expr::Exp(Box::new(e))),
            (prop::sample::select(vec!["chi", "oball", "cball", "expchar", "regular"]), prop::collection::vec(inner.clone(), 1..3))
                .prop_map(|(n, a)| Expr::Call(n.into(), a)),
            prop::collection::vec(inner.clone(), 0..3).prop_map(Expr::List),
            (prop::collection::vec((inner.clone(), inner.clone()), 0..2), inner.clone(), inner, prop::option::of(1usize..3))
                .prop_map(|(support, p, c, arity)| Expr::Packet { arity, support, phase: Box::new(p), coeff: Box::new(c) }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn parse_print_parse(e in expr()) {
        let once = parse_expr(&e.to_string());
        prop_assume!(once.is_ok());
        let once = once.unwrap();
        let twice = parse_expr(&once.to_string()).unwrap();
        prop_assert_eq!(&once, &twice, "{}", once);
    }

    #[test]
    fn printed_trees_parse(e in expr()) {
        prop_assert!(parse_expr(&e.to_string()).is_ok(), "{}", e);
    }

    #[test]
    fn arbitrary_text_never_panics(s in "[ -~×\n]{0,64}") {
        let _ = parse(&s);
    }
}
