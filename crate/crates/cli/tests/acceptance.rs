//! Acceptance suite. Runs every criterion in sequence, prints one line per
//! criterion and exits non-zero if any failed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use ineqcert::certify::{certify_positive, prove_inequality, ProofSettings, Verdict};
use ineqcert::expr::{EvalContext, Expression};
use ineqcert::gfun::{numeric_limit, taylor_limit, Endpoint};
use ineqcert::precision::Precision;
use ineqcert::quad::{find_inflection, kurepa, kurepa_derivative};
use ineqcert::remez::{absolute_floor, minimax, verify_equioscillation, Polynomial, RemezConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Rational};

const THEOREM_4: &str = "pi*(2-sqrt2)/(pi-2*sqrt2)*(sqrt(1+x)-sqrt(1-x)) \
    / (sqrt2*(4-pi)/(pi-2*sqrt2) + sqrt(1+x) + sqrt(1-x)) - arcsin(x)";
const THEOREM_3: &str = "kurepa_deriv(1, 0)*x - kurepa(x)";

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn precision() -> Precision {
    Precision::default()
}

fn fl(v: f64) -> Float {
    precision().float(v)
}

fn within_time(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ineqcert")
}

/// Max over a dense grid of `|g − (c0 + c1 x)|`.
fn linear_fit_error(g: &dyn Fn(f64) -> f64, grid: &[f64], c0: f64, c1: f64) -> f64 {
    grid.iter()
        .map(|&x| (g(x) - c0 - c1 * x).abs())
        .fold(0.0, f64::max)
}

fn ternary(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    0.5 * (lo + hi)
}

/// Best linear approximation by brute force: the max-error objective is
/// convex in (c0, c1), so nested ternary search over a dense grid finds it.
fn brute_force_linear(g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64, f64) {
    let grid: Vec<f64> = (0..=20_000)
        .map(|i| a + (b - a) * i as f64 / 20_000.0)
        .collect();
    let best_c0 = |c1: f64| ternary(-4.0, 4.0, |c0| linear_fit_error(g, &grid, c0, c1));
    let c1 = ternary(-4.0, 4.0, |c1| linear_fit_error(g, &grid, best_c0(c1), c1));
    let c0 = best_c0(c1);
    (c0, c1, linear_fit_error(g, &grid, c0, c1))
}

fn criterion_1() -> Outcome {
    let (oc0, oc1, odelta) = brute_force_linear(&|x| x * x, -1.0, 1.0);
    // Interior extremum of the oracle residual: root of its central difference.
    let r = |x: f64| x * x - oc0 - oc1 * x;
    let slope = |x: f64| (r(x + 1e-4) - r(x - 1e-4)) / 2e-4;
    let (mut lo, mut hi) = (-0.999, 0.999);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let interior = 0.5 * (lo + hi);
    let oracle_nodes = [-1.0, interior, 1.0];

    let f = Expression::parse("x*x").unwrap();
    let ctx = EvalContext::new(precision());
    let g = |x: &Float| f.evaluate_with(x, &ctx);
    let start = Instant::now();
    let res = minimax(
        &g,
        &fl(-1.0),
        &fl(1.0),
        1,
        &RemezConfig::default(),
        precision(),
    )
    .unwrap();
    let elapsed = start.elapsed();
    let delta = res.delta_hat.to_f64();
    let c0 = res.polynomial.to_monomial()[0].to_f64();
    let node_err = res
        .nodes
        .iter()
        .zip(oracle_nodes)
        .map(|(t, o)| (t.to_f64() - o).abs())
        .fold(0.0, f64::max);
    let passed = (delta - odelta).abs() <= 1e-10
        && (c0 - oc0).abs() <= 1e-10
        && res.nodes.len() == 3
        && node_err <= 1e-8
        && within_time(elapsed, 1.0);
    check(
        passed,
        format!(
            "delta_hat {delta:.12} vs oracle {odelta:.12}, c0 {c0:.12} vs {oc0:.12}, max node error {node_err:.1e}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Outcome {
    // Closed form: slope equals the chord, interior node where g' = slope.
    let e = std::f64::consts::E;
    let slope = e - 1.0;
    let node = (e - 1.0).ln();

    let f = Expression::parse("exp(x)").unwrap();
    let ctx = EvalContext::new(precision());
    let g = |x: &Float| f.evaluate_with(x, &ctx);
    let start = Instant::now();
    let res = minimax(
        &g,
        &fl(0.0),
        &fl(1.0),
        1,
        &RemezConfig::default(),
        precision(),
    )
    .unwrap();
    let elapsed = start.elapsed();
    let got_slope = res.polynomial.to_monomial()[1].to_f64();
    let got_node = res.nodes[1].to_f64();
    let passed = (got_slope - slope).abs() <= 1e-10
        && (got_node - node).abs() <= 1e-8
        && within_time(elapsed, 1.0);
    check(
        passed,
        format!(
            "slope {got_slope:.12} vs {slope:.12}, node {got_node:.10} vs {node:.10}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut max_iterations = 0;
    let floor = absolute_floor(precision(), &fl(1.0));
    for source in ["exp(x)", "sin(x)", "x*arcsin(x/2)"] {
        let f = Expression::parse(source).unwrap();
        let ctx = EvalContext::new(precision());
        let g = |x: &Float| f.evaluate_with(x, &ctx);
        let mut previous: Option<Float> = None;
        for k in 1..=6 {
            let res = match minimax(
                &g,
                &fl(0.0),
                &fl(1.0),
                k,
                &RemezConfig::default(),
                precision(),
            ) {
                Ok(r) => r,
                Err(e) => {
                    failures.push(format!("{source} k={k}: {e}"));
                    continue;
                }
            };
            max_iterations = max_iterations.max(res.iterations);
            let report = verify_equioscillation(&res, &g, 1e-6, &floor).unwrap();
            if !report.passed {
                failures.push(format!(
                    "{source} k={k}: equioscillation spread {}",
                    report.relative_spread.to_f64()
                ));
            }
            if res.iterations > 12 {
                failures.push(format!("{source} k={k}: {} iterations", res.iterations));
            }
            if let Some(p) = &previous {
                if res.delta_hat > *p {
                    failures.push(format!("{source} k={k}: delta_hat increased"));
                }
            }
            previous = Some(res.delta_hat);
        }
    }
    let elapsed = start.elapsed();
    let passed = failures.is_empty() && within_time(elapsed, 30.0);
    check(
        passed,
        format!(
            "18 runs, max iterations {max_iterations}, {:.1}s{}",
            elapsed.as_secs_f64(),
            if failures.is_empty() {
                String::new()
            } else {
                format!(", failures: {failures:?}")
            }
        ),
    )
}

fn criterion_4() -> Outcome {
    let p = precision();
    let start = Instant::now();
    let k1 = kurepa(&fl(1.0), p).unwrap().value.to_f64();
    let kp0 = kurepa_derivative(&fl(0.0), 1, p).unwrap().value;
    let c = find_inflection(p).unwrap();
    let product = Float::with_val(p.bits(), &kp0 * &c).to_f64();
    let elapsed = start.elapsed();
    let (kp0, c) = (kp0.to_f64(), c.to_f64());
    let passed = (k1 - 1.0).abs() <= 1e-15
        && (kp0 - 1.432205735).abs() <= 5e-9
        && (c - 0.929875685).abs() <= 5e-9
        && (product - 1.331773289).abs() <= 1e-8
        && within_time(elapsed, 60.0);
    check(
        passed,
        format!(
            "K(1) = {k1}, K'(0) = {kp0:.12}, c = {c:.12}, K'(0)c = {product:.12}, {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

/// α = lim f(h)/h² by Richardson extrapolation of evaluations near 0.
fn theorem_3_alpha_oracle(p: Precision) -> f64 {
    let bits = p.bits();
    let kp0 = kurepa_derivative(&p.float(0), 1, p).unwrap().value;
    let levels = 7;
    let mut table: Vec<Float> = (0..levels)
        .map(|j| {
            let h = Float::with_val(bits, 1e-2) >> j;
            let k = kurepa(&h, p).unwrap().value;
            let f = Float::with_val(bits, &kp0 * &h) - k;
            f / Float::with_val(bits, h.square_ref())
        })
        .collect();
    // q(h) = α + c1 h + c2 h² + ..., h halving per level.
    for order in 1..levels {
        let factor = Float::with_val(bits, 1u32 << order);
        table = table
            .windows(2)
            .map(|w| {
                (Float::with_val(bits, &w[1] * &factor) - &w[0])
                    / Float::with_val(bits, &factor - 1u32)
            })
            .collect();
    }
    table[0].to_f64()
}

fn criterion_5() -> Outcome {
    let p = precision();
    let f = Expression::parse(THEOREM_3).unwrap();
    let start = Instant::now();
    let report = prove_inequality(
        &f,
        &fl(0.0),
        &fl(1.0),
        &Rational::from(2),
        &Rational::from(0),
        1,
        &ProofSettings::new(p),
    )
    .unwrap();
    let elapsed = start.elapsed();
    let oracle = theorem_3_alpha_oracle(p);
    let second = kurepa_derivative(&fl(0.0), 2, p).unwrap().value.to_f64();
    let alpha = report
        .alpha
        .as_ref()
        .map(|a| a.value.to_f64())
        .unwrap_or(f64::NAN);
    let rel = ((alpha - oracle) / oracle).abs();
    let rel_second = ((-second / 2.0 - oracle) / oracle).abs();
    let passed = report.verdict == Verdict::Proven
        && rel <= 1e-6
        && rel_second <= 1e-6
        && within_time(elapsed, 120.0);
    check(
        passed,
        format!(
            "verdict {}, alpha {alpha:.12}, -K''(0)/2 {:.12}, oracle {oracle:.12} (rel {rel:.1e}), {:.1}s",
            report.verdict,
            -second / 2.0,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_6() -> Outcome {
    let p = precision();
    let f = Expression::parse(THEOREM_4).unwrap();
    let f0 = f.evaluate(&fl(0.0), p).unwrap().abs();
    let f1 = f.evaluate(&fl(1.0), p).unwrap().abs();
    let start = Instant::now();
    let report = prove_inequality(
        &f,
        &fl(0.0),
        &fl(1.0),
        &Rational::from(1),
        &Rational::from(1),
        1,
        &ProofSettings::new(p),
    )
    .unwrap();
    let elapsed = start.elapsed();
    let zeros = f0 <= 1e-30 && f1 <= 1e-30;
    let passed = report.verdict == Verdict::Proven && zeros && within_time(elapsed, 30.0);
    let stage = report
        .failed_stage
        .map(|s| format!(" at {s}: {}", report.message))
        .unwrap_or_default();
    check(
        passed,
        format!(
            "verdict {}{stage}; |f(0)| = {:.1e}, |f(1)| = {:.1e}, {:.1}s",
            report.verdict,
            f0.to_f64(),
            f1.to_f64(),
            elapsed.as_secs_f64()
        ),
    )
}

fn horner(coeffs: &[Float], x: &Float) -> Float {
    let mut acc = Float::new(x.prec());
    for c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn poly_mul(p: &[Float], q: &[Float], bits: u32) -> Vec<Float> {
    let mut out = vec![Float::new(bits); p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += Float::with_val(bits, a * b);
        }
    }
    out
}

/// Minimum of a monomial polynomial on [a, b]: dense samples plus every
/// critical point bracketed by a sign change of the derivative.
fn sampled_minimum(coeffs: &[Float], a: f64, b: f64, bits: u32) -> Float {
    let deriv: Vec<Float> = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| Float::with_val(bits, c * i as u32))
        .collect();
    let points = 10_000;
    let xs: Vec<Float> = (0..=points)
        .map(|i| Float::with_val(bits, a + (b - a) * i as f64 / points as f64))
        .collect();
    let mut min = horner(coeffs, &xs[0]);
    let mut prev_d = horner(&deriv, &xs[0]);
    for w in xs.windows(2) {
        let v = horner(coeffs, &w[1]);
        if v < min {
            min = v;
        }
        let d = horner(&deriv, &w[1]);
        if prev_d.is_sign_negative() != d.is_sign_negative() && !deriv.is_empty() {
            let (mut lo, mut hi) = (w[0].clone(), w[1].clone());
            let lo_neg = prev_d.is_sign_negative();
            for _ in 0..80 {
                let mid = Float::with_val(bits, &lo + &hi) / 2u32;
                if horner(&deriv, &mid).is_sign_negative() == lo_neg {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let v = horner(coeffs, &lo);
            if v < min {
                min = v;
            }
        }
        prev_d = d;
    }
    min
}

fn criterion_7() -> Outcome {
    let p = precision();
    let bits = p.bits();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let margin = fl(1.0 + 1e-6);
    let start = Instant::now();
    let (mut certified, mut unsound, mut missed) = (0, 0, 0);
    for _ in 0..100 {
        let a: f64 = rng.gen_range(-2.0..1.0);
        let b = a + rng.gen_range(0.5..3.0);
        let x0: f64 = rng.gen_range(a..b);
        let extra = rng.gen_range(0..=4usize);
        let scale: f64 = rng.gen_range(0.5..5.0);
        let floor_value: f64 = rng.gen_range(-0.01..0.05);
        let delta = fl(rng.gen_range(0.0..0.04));
        // P = μ + s (x − x0)² Q(u), u = (x − x0)/(b − a), Q ≥ 0.7 on the segment.
        let shift = [fl(-x0 / (b - a)), fl(1.0 / (b - a))];
        let mut q = vec![fl(1.0)];
        let mut u_pow = vec![fl(1.0)];
        for _ in 0..extra {
            u_pow = poly_mul(&u_pow, &shift, bits);
            let c = fl(rng.gen_range(-0.3..0.3) / extra as f64);
            q.resize(u_pow.len(), Float::new(bits));
            for (qi, ui) in q.iter_mut().zip(&u_pow) {
                *qi += Float::with_val(bits, ui * &c);
            }
        }
        let square = poly_mul(
            &[fl(-x0 * scale.sqrt()), fl(scale.sqrt())],
            &[fl(-x0 * scale.sqrt()), fl(scale.sqrt())],
            bits,
        );
        let mut coeffs = poly_mul(&square, &q, bits);
        coeffs[0] += floor_value;

        let poly = Polynomial::from_monomial(&coeffs, fl(a), fl(b));
        let ok = certify_positive(&poly, &delta, &margin, p).is_ok();
        let shifted_min =
            sampled_minimum(&coeffs, a, b, bits) - Float::with_val(bits, &delta * &margin);
        let truly_positive = shifted_min > 0;
        if ok {
            certified += 1;
            if !truly_positive {
                unsound += 1;
            }
        } else if truly_positive && shifted_min > 1e-9 {
            missed += 1;
        }
    }
    let elapsed = start.elapsed();
    let passed = unsound == 0 && certified >= 30 && within_time(elapsed, 60.0);
    check(
        passed,
        format!(
            "{certified}/100 certified, {unsound} unsound, {missed} positive but uncertified, {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_8() -> Outcome {
    let p = precision();
    let ctx = EvalContext::new(p);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut worst_exact: f64 = 0.0;
    let mut errors = Vec::new();
    for _ in 0..20 {
        let a = Rational::from((rng.gen_range(-20..10), 10));
        let b = Rational::from((rng.gen_range(5..30), 10)) + &a;
        let n = rng.gen_range(0..=3u32);
        let m = rng.gen_range(0..=3u32);
        let q: Vec<Rational> = loop {
            let q: Vec<Rational> = (0..rng.gen_range(1..=4))
                .map(|_| Rational::from((rng.gen_range(-30..=30), rng.gen_range(1..=7))))
                .collect();
            let at = |x: &Rational| q.iter().rev().fold(Rational::new(), |acc, c| acc * x + c);
            if Rational::from(at(&a).abs_ref()) > Rational::from((1, 10))
                && Rational::from(at(&b).abs_ref()) > Rational::from((1, 10))
            {
                break q;
            }
        };
        let q_text = q
            .iter()
            .enumerate()
            .map(|(i, c)| format!("({c})*x^{i}"))
            .collect::<Vec<_>>()
            .join(" + ");
        let source = format!("(x - ({a}))^{n} * (({b}) - x)^{m} * ({q_text})");
        let f = Expression::parse(&source).unwrap();
        let at = |x: &Rational| q.iter().rev().fold(Rational::new(), |acc, c| acc * x + c);
        // The quotient is q itself.
        let exact = [at(&a), at(&b)];
        let (fa, fb) = (Float::with_val(p.bits(), &a), Float::with_val(p.bits(), &b));
        let (nr, mr) = (Rational::from(n), Rational::from(m));
        for (endpoint, exact) in [Endpoint::A, Endpoint::B].into_iter().zip(exact) {
            let taylor = taylor_limit(&f, &fa, &fb, &nr, &mr, endpoint, &ctx);
            let numeric = numeric_limit(&f, &fa, &fb, &nr, &mr, endpoint, &ctx);
            match (taylor, numeric) {
                (Ok(t), Ok(nl)) => {
                    let rel = Float::with_val(p.bits(), &t - &nl.value) / &t;
                    worst = worst.max(rel.to_f64().abs());
                    let ex = Float::with_val(p.bits(), &exact);
                    let rel_exact = Float::with_val(p.bits(), &t - &ex) / &ex;
                    worst_exact = worst_exact.max(rel_exact.to_f64().abs());
                }
                (t, nl) => errors.push(format!(
                    "{source} at {endpoint}: {:?} / {:?}",
                    t.err(),
                    nl.err()
                )),
            }
        }
    }
    let elapsed = start.elapsed();
    let passed = errors.is_empty() && worst <= 1e-6 && within_time(elapsed, 10.0);
    check(
        passed,
        format!(
            "max taylor/numeric rel diff {worst:.1e} (taylor vs exact {worst_exact:.1e}), {:.1}s{}",
            elapsed.as_secs_f64(),
            if errors.is_empty() {
                String::new()
            } else {
                format!(", errors: {errors:?}")
            }
        ),
    )
}

fn run_cli(args: &[&str], out: Option<&Path>) -> (i32, serde_json::Value) {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    let tmp;
    let path = match out {
        Some(p) => p.to_path_buf(),
        None => {
            tmp = tempfile::NamedTempFile::new().unwrap();
            tmp.path().to_path_buf()
        }
    };
    cmd.arg("--out").arg(&path);
    let status = cmd.output().unwrap().status;
    let text = std::fs::read_to_string(&path).unwrap_or_default();
    (
        status.code().unwrap_or(-1),
        serde_json::from_str(&text).unwrap_or(serde_json::Value::Null),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let (neg_slope, _) = run_cli(
        &[
            "prove",
            "--function",
            "-x",
            "--interval",
            "0,1",
            "--n",
            "1",
            "--m",
            "0",
        ],
        None,
    );
    let (shifted, report) = run_cli(
        &[
            "prove",
            "--function",
            "x - 2",
            "--interval",
            "0,1",
            "--m",
            "0",
        ],
        None,
    );
    let beta = report["beta"]["value"].as_str().unwrap_or("");
    let beta_negative = beta.starts_with('-');
    let (huge_delta, _) = run_cli(
        &[
            "prove",
            "--function",
            THEOREM_4,
            "--interval",
            "0,1",
            "--n",
            "1",
            "--m",
            "1",
            "--degree",
            "0",
        ],
        None,
    );
    let elapsed = start.elapsed();
    let passed = neg_slope == 1
        && shifted == 1
        && beta_negative
        && huge_delta == 2
        && within_time(elapsed, 10.0);
    check(
        passed,
        format!(
            "-x exit {neg_slope}, x-2 exit {shifted} (beta {}), degree-0 arcsin exit {huge_delta}, {:.1}s",
            beta.chars().take(8).collect::<String>(),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "prove",
        "--function",
        THEOREM_4,
        "--interval",
        "0,1",
        "--n",
        "1",
        "--m",
        "1",
        "--degree",
        "1",
    ];
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    run_cli(&args, Some(&first));
    run_cli(&args, Some(&second));
    let a = std::fs::read(&first).unwrap_or_default();
    let b = std::fs::read(&second).unwrap_or_default();
    check(
        !a.is_empty() && a == b,
        format!("{} and {} bytes, identical: {}", a.len(), b.len(), a == b),
    )
}

/// The arcsin inequality with exponents matching the actual vanishing orders:
/// f ~ c·x³ at 0 and f ~ c·√(1 − x) at 1.
fn supplement_arcsin_orders() -> Outcome {
    let p = precision();
    let f = Expression::parse(THEOREM_4).unwrap();
    let start = Instant::now();
    let report = prove_inequality(
        &f,
        &fl(0.0),
        &fl(1.0),
        &Rational::from(3),
        &Rational::from((1, 2)),
        8,
        &ProofSettings::new(p),
    )
    .unwrap();
    let elapsed = start.elapsed();
    check(
        report.verdict == Verdict::Proven,
        format!(
            "n = 3, m = 1/2, degree 8: verdict {}, {:.1}s",
            report.verdict,
            elapsed.as_secs_f64()
        ),
    )
}

/// A degree too low for the certificate ends inconclusive, never proven.
fn supplement_failed_certificate() -> Outcome {
    let (code, report) = run_cli(
        &[
            "prove",
            "--function",
            THEOREM_4,
            "--interval",
            "0,1",
            "--n",
            "3",
            "--m",
            "1/2",
            "--degree",
            "1",
        ],
        None,
    );
    check(
        code == 2 && report["failed_stage"] == "certify",
        format!(
            "n = 3, m = 1/2, degree 1: exit {code}, failed stage {}",
            report["failed_stage"]
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("minimax oracle x^2", criterion_1),
        ("minimax oracle exp", criterion_2),
        ("equioscillation suite", criterion_3),
        ("Kurepa constants", criterion_4),
        ("Kurepa inequality", criterion_5),
        ("arcsin inequality, n = m = 1", criterion_6),
        ("certifier soundness fuzz", criterion_7),
        ("limit-method agreement", criterion_8),
        ("negative controls", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            check(false, format!("panicked: {msg}"))
        });
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {name}: {}", i + 1, outcome.detail);
        if !outcome.passed {
            failed.push(i + 1);
        }
    }
    let supplements: [Criterion; 2] = [
        (
            "arcsin inequality, workable exponents",
            supplement_arcsin_orders,
        ),
        (
            "arcsin, low degree stays inconclusive",
            supplement_failed_certificate,
        ),
    ];
    for (name, run) in supplements {
        let outcome =
            catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| check(false, "panicked"));
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!("supplement  {tag} {name}: {}", outcome.detail);
        if !outcome.passed {
            failed.push(0);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?} (0 = supplement)");
        std::process::exit(1);
    }
}
