//! Property-based invariants: expression round trips, coefficient-map
//! inverses, parity and closure of the series machinery.

use isochrone::expr::{parse_expr, Bindings, BinOp, ExprAst, Func};
use isochrone::scalar_fn::ScalarFn;
use isochrone::series::{
    chouikha_series_residual, f_coeffs_from_h, g_series_from_f, h_coeffs_from_f, SeriesPoly,
};
use isochrone::urabe::h_from_f;
use proptest::prelude::*;

/// Random well-formed expression trees over `x` and one parameter `a`.
fn arb_expr() -> impl Strategy<Value = ExprAst> {
    let leaf = prop_oneof![
        (-10.0..10.0f64).prop_map(ExprAst::Number),
        Just(ExprAst::Var),
        Just(ExprAst::Param("a".to_string())),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        let func = prop_oneof![
            Just(Func::Sin),
            Just(Func::Cos),
            Just(Func::Exp),
            Just(Func::Tanh),
            Just(Func::Sqrt),
            Just(Func::Log),
        ];
        let op = prop_oneof![
            Just(BinOp::Add),
            Just(BinOp::Sub),
            Just(BinOp::Mul),
            Just(BinOp::Div),
        ];
        prop_oneof![
            inner.clone().prop_map(|e| ExprAst::Neg(Box::new(e))),
            (func, inner.clone()).prop_map(|(f, e)| ExprAst::Call(f, Box::new(e))),
            (op, inner.clone(), inner.clone())
                .prop_map(|(op, l, r)| ExprAst::Bin(op, Box::new(l), Box::new(r))),
            (inner, -3.0..4.0f64).prop_map(|(e, p)| ExprAst::Pow(Box::new(e), p.round())),
        ]
    })
}

fn arb_coeffs(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-2.0..2.0f64, 1..=len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Printing an expression and reparsing it preserves evaluation exactly:
    /// the reparsed tree runs the same arithmetic, so values agree to the bit
    /// and the same points raise the same domain errors. (The trees need not
    /// be structurally equal — a negative literal prints as `(-v)` and comes
    /// back as a unary minus — but the arithmetic is identical.)
    #[test]
    fn print_then_parse_preserves_evaluation(ast in arb_expr()) {
        let text = ast.to_string();
        let back = parse_expr(&text).expect("printed expression parses");

        let mut params = Bindings::new();
        params.insert("a".to_string(), 0.7);
        let original = ScalarFn::from_expr(ast, params.clone()).unwrap();
        let reparsed = ScalarFn::from_expr(back, params).unwrap();

        let mut state: u64 = 0x9e3779b97f4a7c15;
        for _ in 0..100 {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let x = 6.0 * (state as f64 / u64::MAX as f64) - 3.0;
            match (original.eval(x), reparsed.eval(x)) {
                (Ok(u), Ok(v)) => prop_assert!(
                    u.to_bits() == v.to_bits() || (u.is_nan() && v.is_nan()),
                    "values differ at x = {}: {} vs {}", x, u, v
                ),
                (Err(eu), Err(ev)) => prop_assert_eq!(eu, ev),
                (u, v) => prop_assert!(false, "outcomes differ at x = {}: {:?} vs {:?}", x, u, v),
            }
        }
    }

    /// The coefficient maps between f and h invert each other exactly.
    #[test]
    fn coefficient_maps_are_mutually_inverse(
        coeffs in arb_coeffs(10),
        lambda in 0.5..2.5f64,
    ) {
        let f = SeriesPoly::new(coeffs);
        let h = h_coeffs_from_f(&f, lambda);
        let back = f_coeffs_from_h(&h, lambda * lambda).unwrap();
        for k in 0..=f.order() {
            let want = f.coeff(k);
            let got = back.coeff(k);
            prop_assert!(
                (got - want).abs() <= 1e-12 * want.abs().max(1.0),
                "coeff {}: {} vs {}", k, got, want
            );
        }
    }

    /// h built from any f is odd: only odd-index coefficients appear.
    #[test]
    fn series_h_is_odd(coeffs in arb_coeffs(10), lambda in 0.5..2.5f64) {
        let h = h_coeffs_from_f(&SeriesPoly::new(coeffs), lambda);
        prop_assert!(h.require_odd().is_ok());
    }

    /// The G series produced by the recursion satisfies the defining
    /// equation to rounding, coefficient by coefficient.
    #[test]
    fn recursion_output_closes_the_characteristic_equation(
        coeffs in arb_coeffs(6),
        lambda in 0.5..2.0f64,
    ) {
        let f = SeriesPoly::new(coeffs);
        let g = g_series_from_f(&f, lambda, 10).unwrap();
        let r = chouikha_series_residual(&g, &f).unwrap();
        for k in 0..=10 {
            let scale = g.coeff(k).abs().max(lambda * lambda);
            prop_assert!(
                r.coeff(k).abs() <= 1e-11 * scale,
                "residual coeff {} = {}", k, r.coeff(k)
            );
        }
    }
}

proptest! {
    // The sampled-curve construction integrates 1k panels per case; keep
    // the case count modest.
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// The sampled h from any polynomial characteristic is odd pointwise.
    #[test]
    fn sampled_h_is_odd_pointwise(
        c0 in -0.6..0.6f64,
        c1 in -0.6..0.6f64,
        lambda in 0.5..2.0f64,
    ) {
        let f = ScalarFn::from_expr_str(&format!("({c0}) + ({c1})*x")).unwrap();
        let h = h_from_f(&f, lambda, 0.8).unwrap();
        for i in 1..=25 {
            let s = 0.8 * i as f64 / 25.0;
            let defect = h.eval(s).unwrap() + h.eval(-s).unwrap();
            prop_assert!(defect.abs() <= 1e-10, "h({}) + h(-{}) = {}", s, s, defect);
        }
    }
}
