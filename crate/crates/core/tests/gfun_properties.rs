use ineqcert::expr::{EvalContext, Expression};
use ineqcert::gfun::{
    build_g, chebyshev_interior, endpoint_limit, endpoint_limits_numeric, endpoint_limits_taylor,
    sign_equivalence_check, Endpoint, GFunction,
};
use ineqcert::precision::{parse_rational, Precision};
use proptest::prelude::*;
use rug::{Float, Rational};

fn ctx() -> EvalContext {
    EvalContext::new(Precision::default())
}

fn build(src: &str, a: f64, b: f64, n: &str, m: &str) -> GFunction {
    let ctx = ctx();
    let p = ctx.precision;
    let f = Expression::parse(src).unwrap();
    let (a, b) = (p.float(a), p.float(b));
    let (n, m) = (parse_rational(n).unwrap(), parse_rational(m).unwrap());
    let alpha = endpoint_limit(&f, &a, &b, &n, &m, Endpoint::A, &ctx, None).unwrap();
    let beta = endpoint_limit(&f, &a, &b, &n, &m, Endpoint::B, &ctx, None).unwrap();
    build_g(&f, &a, &b, &n, &m, alpha, beta, &ctx).unwrap()
}

fn fixtures() -> Vec<GFunction> {
    vec![
        build("x*(1-x)*(2+sin(3*x))", 0.0, 1.0, "1", "1"),
        build("sin(x)^2*(2-x)", 0.0, 2.0, "2", "1"),
        build("sqrt(x)*(3-x)*exp(x)", 0.0, 1.0, "1/2", "0"),
        build(
            "pi*(2-sqrt2)/(pi-2*sqrt2)*(sqrt(1+x)-sqrt(1-x)) / (sqrt2*(4-pi)/(pi-2*sqrt2) + sqrt(1+x) + sqrt(1-x)) - arcsin(x)",
            0.0,
            1.0,
            "3",
            "1/2",
        ),
        build("(x+1)^2*(2-x)^3*(1+x^2)", -1.0, 2.0, "2", "3"),
    ]
}

#[test]
fn g_approaches_endpoint_limits() {
    for g in fixtures() {
        let bits = g.context().precision.bits();
        let width = Float::with_val(bits, g.b() - g.a());
        let sides = [
            (Endpoint::A, &g.alpha().value, g.n().denom() == &1u32),
            (Endpoint::B, &g.beta().value, g.m().denom() == &1u32),
        ];
        for (endpoint, limit, integer_exponent) in sides {
            let mut previous: Option<Float> = None;
            for j in 6..=10 {
                let step = Float::with_val(bits, &width) * Float::with_val(bits, 10f64.powi(-j));
                let x = match endpoint {
                    Endpoint::A => Float::with_val(bits, g.a() + &step),
                    Endpoint::B => Float::with_val(bits, g.b() - &step),
                };
                let gap = Float::with_val(bits, g.evaluate(&x).unwrap() - limit).abs();
                if let Some(prev) = &previous {
                    assert!(gap <= *prev, "{} at {endpoint}: gap grew at j = {j}", g.f());
                }
                // A fractional exponent leaves a fractional power of the distance in g.
                if j == 10 && integer_exponent {
                    let tol = Float::with_val(bits, limit.clone().abs() * 1e-6);
                    assert!(gap <= tol, "{} at {endpoint}: gap {gap} at j = 10", g.f());
                }
                previous = Some(gap);
            }
        }
    }
}

#[test]
fn quotient_denominator_is_positive_inside() {
    for g in fixtures() {
        let ctx = g.context().clone();
        for x in chebyshev_interior(g.a(), g.b(), 64) {
            let fx = g.f().evaluate_with(&x, &ctx).unwrap();
            let gx = g.evaluate(&x).unwrap();
            if fx.is_zero() {
                continue;
            }
            let denominator = Float::with_val(fx.prec(), &fx / &gx);
            assert!(denominator > 0, "{} at {x}", g.f());
        }
        assert!(sign_equivalence_check(&g, 32).unwrap().passed());
    }
}

/// Polynomial with roots of multiplicity `n` at `a` and `m` at `b`.
fn polynomial_case() -> impl Strategy<Value = (String, i32, i32, u32, u32)> {
    (
        -10i32..=0,
        3i32..=10,
        0u32..=3,
        0u32..=3,
        proptest::collection::vec(-9i32..=9, 1..4),
        1i32..5,
    )
        .prop_map(|(a10, w10, n, m, coeffs, shift)| {
            // On [a, b] ⊂ [−1, 1] the tail Σ c_i x^i / 10 is below 2.7, so q ≥ 2.3.
            let q: String = coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| format!(" + ({c}/10)*x^{}", i + 1))
                .collect();
            let a = a10;
            let b = a10 + w10;
            let src = format!("(x - ({a}/10))^{n} * (({b}/10) - x)^{m} * (5 + {shift}*x^2{q})");
            (src, a, b, n, m)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn taylor_and_numeric_limits_agree((src, a10, b10, n, m) in polynomial_case()) {
        let ctx = ctx();
        let p = ctx.precision;
        let f = Expression::parse(&src).unwrap();
        let a = Float::with_val(p.bits(), Rational::from((a10, 10)));
        let b = Float::with_val(p.bits(), Rational::from((b10, 10)));
        let (ta, tb) = endpoint_limits_taylor(&f, &a, &b, n, m, &ctx).unwrap();
        let (na, nb) = endpoint_limits_numeric(&f, &a, &b, &Rational::from(n), &Rational::from(m), &ctx).unwrap();
        for (t, num) in [(ta, na), (tb, nb)] {
            let rel = Float::with_val(p.bits(), &t - &num).abs() / t.clone().abs();
            prop_assert!(rel <= 1e-6, "{}: taylor {} numeric {}", src, t, num);
        }
    }
}
