use ineqcert::certify::{
    certify_positive, prove_inequality, ProofReport, ProofSettings, Stage, Verdict,
};
use ineqcert::expr::Expression;
use ineqcert::precision::{parse_rational, Precision};
use ineqcert::remez::Polynomial;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;

const ARCSIN: &str = "pi*(2-sqrt2)/(pi-2*sqrt2)*(sqrt(1+x)-sqrt(1-x)) \
    / (sqrt2*(4-pi)/(pi-2*sqrt2) + sqrt(1+x) + sqrt(1-x)) - arcsin(x)";

fn precision() -> Precision {
    Precision::default()
}

fn prove(src: &str, a: f64, b: f64, n: &str, m: &str, k: usize) -> ProofReport {
    let p = precision();
    let f = Expression::parse(src).unwrap();
    prove_inequality(
        &f,
        &p.float(a),
        &p.float(b),
        &parse_rational(n).unwrap(),
        &parse_rational(m).unwrap(),
        k,
        &ProofSettings::new(p),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn certificates_tile_and_bound_from_below(
        coeffs in proptest::collection::vec(-1.0f64..1.0, 1..7),
        lift in 0.0f64..3.0,
        delta in 0.0f64..0.5,
    ) {
        let p = precision();
        let mut mono: Vec<Float> = coeffs.iter().map(|&c| p.float(c)).collect();
        mono[0] += lift;
        let poly = Polynomial::from_monomial(&mono, p.float(-1.0), p.float(1.0));
        let margin = p.float(1.0 + 1e-6);
        let delta = p.float(delta);
        let shift = Float::with_val(p.bits(), &delta * &margin);
        let sampled_min = (0..=10_000)
            .map(|i| poly.evaluate(&p.float(-1.0 + i as f64 / 5000.0)) - &shift)
            .fold(None::<Float>, |m, v| Some(match m { Some(m) if m < v => m, _ => v }))
            .unwrap();
        if let Ok(cert) = certify_positive(&poly, &delta, &margin, p) {
            prop_assert!(sampled_min > 0);
            prop_assert_eq!(&cert.subintervals.first().unwrap().0, &p.float(-1.0));
            prop_assert_eq!(&cert.subintervals.last().unwrap().1, &p.float(1.0));
            for w in cert.subintervals.windows(2) {
                prop_assert_eq!(&w[0].1, &w[1].0);
            }
            let mut least = cert.subintervals[0].2.clone();
            for (lo, hi, bound) in &cert.subintervals {
                prop_assert!(*bound > 0);
                prop_assert!(lo < hi);
                if *bound < least {
                    least = bound.clone();
                }
                // The bound is below the sampled values inside the piece.
                let mid = Float::with_val(p.bits(), lo + hi) / 2u32;
                for x in [lo, hi, &mid] {
                    prop_assert!(*bound <= poly.evaluate(x) - &shift);
                }
            }
            prop_assert_eq!(least, cert.global_min_bound);
        }
    }
}

fn assert_no_negative_samples(report: &ProofReport, src: &str, seed: u64) {
    let p = precision();
    let f = Expression::parse(src).unwrap();
    let (a, b) = (report.a.to_f64(), report.b.to_f64());
    let floor = -p.pow10_neg(p.digits() as i32 - 15);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        let x = p.float(rng.gen_range(a..=b));
        let v = f.evaluate(&x, p).unwrap();
        assert!(v >= floor, "{src}: f({x}) = {v}");
    }
}

#[test]
fn proven_verdicts_survive_random_sampling() {
    let cases = [
        ("x*(1-x)*(2+sin(3*x))", 0.0, 1.0, "1", "1", 4),
        ("2 + sin(5*x) + x^2", -1.0, 2.0, "0", "0", 6),
        ("exp(x) - 1 - x", 0.0, 1.0, "2", "0", 3),
        (ARCSIN, 0.0, 1.0, "3", "1/2", 8),
    ];
    for (i, (src, a, b, n, m, k)) in cases.into_iter().enumerate() {
        let report = prove(src, a, b, n, m, k);
        assert_eq!(report.verdict, Verdict::Proven, "{src}: {}", report.message);
        assert_no_negative_samples(&report, src, i as u64);
    }
}

#[test]
fn endpoint_roots_coexist_with_proof() {
    let report = prove(ARCSIN, 0.0, 1.0, "3", "1/2", 8);
    assert_eq!(report.verdict, Verdict::Proven, "{}", report.message);
    let f = Expression::parse(ARCSIN).unwrap();
    let p = precision();
    assert!(f.evaluate(&p.float(0.0), p).unwrap().abs() <= 1e-30);
    assert!(f.evaluate(&p.float(1.0), p).unwrap().abs() <= 1e-30);
    assert!(report.certificate.unwrap().global_min_bound > 0);
}

#[test]
fn raising_the_degree_repairs_a_failed_certificate() {
    let p = precision();
    let failed = prove(ARCSIN, 0.0, 1.0, "3", "1/2", 1);
    assert_eq!(failed.verdict, Verdict::Inconclusive);
    assert_eq!(failed.failed_stage, Some(Stage::Certify));
    // Sampled minimum of g = f / (x³ √(1 − x)) together with both limits.
    let f = Expression::parse(ARCSIN).unwrap();
    let mut min_g = failed
        .alpha
        .as_ref()
        .unwrap()
        .value
        .clone()
        .min(&failed.beta.as_ref().unwrap().value);
    for i in 1..1000 {
        let x = p.float(i as f64 / 1000.0);
        let denominator = Float::with_val(p.bits(), x.clone().square() * &x)
            * Float::with_val(p.bits(), 1 - &x).sqrt();
        let g = f.evaluate(&x, p).unwrap() / denominator;
        if g < min_g {
            min_g = g;
        }
    }
    for k in 2..=8 {
        let report = prove(ARCSIN, 0.0, 1.0, "3", "1/2", k);
        let delta = report.minimax.as_ref().unwrap().delta_hat.clone();
        // P − δ·margin ≥ g − 2δ·margin > 0 once 2δ·margin < min g.
        let needed = Float::with_val(p.bits(), &delta * 2u32) * (1.0 + 1e-6);
        if needed < min_g {
            assert_eq!(
                report.verdict,
                Verdict::Proven,
                "k = {k}: {}",
                report.message
            );
        }
    }
}
