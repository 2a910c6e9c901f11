//! Property tests for the expression kernel: simplification preserves
//! evaluation, printing round-trips through the parser, and differentiation
//! is linear and agrees with finite differences.

use proptest::prelude::*;

use koszul::expr::{parse_expr, render, Expr};

const DIM: usize = 3;

fn leaf() -> BoxedStrategy<Expr> {
    prop_oneof![
        (-4i64..=4).prop_map(Expr::int),
        ((-4i64..=4), (1i64..=4)).prop_map(|(n, d)| Expr::rat(n, d)),
        (0usize..DIM).prop_map(Expr::coord),
    ]
    .boxed()
}

fn arb_expr() -> BoxedStrategy<Expr> {
    leaf()
        .prop_recursive(4, 48, 3, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(&b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.sub(&b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(&b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.div(&b)),
                (inner.clone(), 0i32..=3).prop_map(|(a, n)| a.powi(n)),
                inner.clone().prop_map(|a| a.neg()),
                inner.clone().prop_map(|a| a.sin()),
                inner.clone().prop_map(|a| a.cos()),
                // keep exponent arguments small so values stay finite
                inner.prop_map(|a| a.sin().exp()),
            ]
        })
        .boxed()
}

fn sample_points(n: usize) -> Vec<[f64; DIM]> {
    // fixed grid-ish points in [-1, 1]^3, away from axes
    (0..n)
        .map(|k| {
            let t = k as f64 / n as f64;
            [
                0.93 * (2.0 * t - 1.0) + 0.031,
                0.87 * (1.0 - 2.0 * t) - 0.017,
                0.71 * (2.0 * t - 1.0) + 0.053,
            ]
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    /// Simplification never changes the value where the original evaluates.
    #[test]
    fn simplify_preserves_evaluation(e in arb_expr()) {
        let s = e.simplify();
        for p in sample_points(20) {
            if let Ok(a) = e.eval(&p) {
                if !a.is_finite() {
                    continue;
                }
                let b = s.eval(&p).expect("simplify must not introduce singularities");
                let scale = 1.0 + a.abs();
                prop_assert!(
                    (a - b).abs() < 1e-12 * scale,
                    "simplify changed value at {p:?}: {a} vs {b}"
                );
            }
        }
    }

    /// print -> parse -> print is a fixed point, and parsing preserves value.
    #[test]
    fn print_parse_print_fixed_point(e in arb_expr()) {
        let names: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let printed = render(&e, &names);
        let reparsed = parse_expr(&printed, &names).expect("printed form must parse");
        let printed_again = render(&reparsed, &names);
        prop_assert_eq!(&printed_again, &printed);
        for p in sample_points(7) {
            match (e.eval(&p), reparsed.eval(&p)) {
                (Ok(a), Ok(b)) if a.is_finite() => {
                    prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
                }
                _ => {}
            }
        }
    }

    /// d/dx is linear.
    #[test]
    fn differentiation_is_linear(a in arb_expr(), b in arb_expr()) {
        let sum = a.add(&b);
        for i in 0..DIM {
            let lhs = sum.diff(i).simplify();
            let rhs = a.diff(i).add(&b.diff(i)).simplify();
            for p in sample_points(7) {
                match (lhs.eval(&p), rhs.eval(&p)) {
                    (Ok(x), Ok(y)) if x.is_finite() && y.is_finite() => {
                        prop_assert!((x - y).abs() < 1e-10 * (1.0 + x.abs()));
                    }
                    _ => {}
                }
            }
        }
    }
}

#[test]
fn finite_difference_agreement_on_catalog_components() {
    // the symbolic derivative of every catalog component matches central
    // differences at interior points (step 1e-4, tolerance 1e-5)
    use koszul::report::ResidualContext;
    for name in koszul::catalog::names() {
        let fixture = koszul::catalog::load(name).unwrap();
        let chart = fixture.structure.chart().clone();
        let ctx = ResidualContext::new(
            koszul::sample::sample_points(&chart, 20, 0).unwrap(),
            0,
            1e-5,
        );
        let report = koszul::suites::derivative_hygiene(&fixture.structure, &ctx);
        assert!(
            report.residual < 1e-5,
            "{name}: finite-difference deviation {:e}",
            report.residual
        );
    }
}
