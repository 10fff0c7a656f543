use std::time::Instant;

use rug::{Float, Rational};
use thiserror::Error;

use super::report::{ProofReport, Stage, StageCounts, Verdict, Witness, WitnessKind};
use super::{
    certify_positive, precondition_check, residual_check, Precondition, DEFAULT_MARGIN,
    MIN_CERTIFY_DIGITS,
};
use crate::expr::{EvalContext, Expression};
use crate::gfun::{build_g, chebyshev_interior, endpoint_limit, sign_equivalence_check, Endpoint};
use crate::precision::{to_sci_string, Precision};
use crate::quad::QuadConfig;
use crate::remez::{absolute_floor, minimax, verify_equioscillation, RemezConfig};

/// Largest polynomial degree accepted by the pipeline.
pub const MAX_DEGREE: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("interval is empty: need a < b")]
    EmptyInterval,
    #[error("exponent {name} = {value} must be non-negative")]
    NegativeExponent { name: &'static str, value: String },
    #[error("certification needs at least {MIN_CERTIFY_DIGITS} digits of precision, got {0}")]
    PrecisionTooLow(u32),
    #[error("margin factor {0} must lie in (1, 2]")]
    BadMargin(String),
    #[error("degree {0} exceeds the maximum of {MAX_DEGREE}")]
    DegreeTooLarge(usize),
    #[error("tolerance {tol:e} must be positive and at least {floor:e} at this precision")]
    BadTolerance { tol: f64, floor: f64 },
    #[error("{0}")]
    Invalid(String),
}

/// Every tunable of the proof pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct ProofSettings {
    pub precision: Precision,
    pub remez: RemezConfig,
    pub margin_factor: Float,
    /// Allowed relative deviation of node residuals from `δ̂`.
    pub equioscillation_tol: f64,
    /// Interior samples for the sign self-test and the disproof scan.
    pub sign_samples: usize,
    /// Residual grid has `residual_grid_factor · grid_multiplier · (k + 2) + 1` points.
    pub residual_grid_factor: usize,
    pub alpha_override: Option<Float>,
    pub beta_override: Option<Float>,
    pub quad: QuadConfig,
    /// Record per-stage wall-clock times in the report (breaks byte-identity).
    pub wall_clock: bool,
}

impl ProofSettings {
    pub fn new(precision: Precision) -> ProofSettings {
        ProofSettings {
            precision,
            remez: RemezConfig::default(),
            margin_factor: precision.float(DEFAULT_MARGIN),
            equioscillation_tol: 1e-6,
            sign_samples: 32,
            residual_grid_factor: 2,
            alpha_override: None,
            beta_override: None,
            quad: QuadConfig::default(),
            wall_clock: false,
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.precision.digits() < MIN_CERTIFY_DIGITS {
            return Err(ConfigError::PrecisionTooLow(self.precision.digits()));
        }
        if !(self.margin_factor > 1 && self.margin_factor <= 2) {
            return Err(ConfigError::BadMargin(to_sci_string(&self.margin_factor)));
        }
        let floor = 10f64.powi(-(self.precision.digits() as i32) + 10);
        let tol = self.remez.tol;
        if !(tol >= floor && tol < 1.0) {
            return Err(ConfigError::BadTolerance { tol, floor });
        }
        if self.remez.grid_multiplier < 4 {
            return Err(ConfigError::Invalid(
                "grid multiplier must be at least 4".into(),
            ));
        }
        if self.remez.max_iterations == 0 {
            return Err(ConfigError::Invalid(
                "iteration cap must be positive".into(),
            ));
        }
        if self.equioscillation_tol.is_nan() || self.equioscillation_tol <= 0.0 {
            return Err(ConfigError::Invalid(
                "equioscillation tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

impl Default for ProofSettings {
    fn default() -> Self {
        ProofSettings::new(Precision::default())
    }
}

/// Values of `f` below `−10^(−(p − 15))` count as a disproof.
fn witness_threshold(precision: Precision) -> Float {
    -precision.pow10_neg(precision.digits() as i32 - 15)
}

/// Scans `f` at interior Chebyshev points for a value below the threshold.
fn witness_scan(
    f: &Expression,
    a: &Float,
    b: &Float,
    ctx: &EvalContext,
    samples: usize,
) -> Option<Witness> {
    let threshold = witness_threshold(ctx.precision);
    chebyshev_interior(a, b, samples.max(2))
        .into_iter()
        .find_map(|x| {
            let v = f.evaluate_with(&x, ctx).ok()?;
            (v < threshold).then_some(Witness {
                kind: WitnessKind::InteriorSample,
                x,
                value: v,
            })
        })
}

/// Runs the full pipeline. Stage failures after validation become
/// `inconclusive` (or `disproven` when a concrete witness exists); only
/// malformed input is an error.
pub fn prove_inequality(
    f: &Expression,
    a: &Float,
    b: &Float,
    n: &Rational,
    m: &Rational,
    degree: usize,
    settings: &ProofSettings,
) -> Result<ProofReport, ConfigError> {
    settings.validate()?;
    if a >= b {
        return Err(ConfigError::EmptyInterval);
    }
    for (name, e) in [("n", n), ("m", m)] {
        if *e < 0 {
            return Err(ConfigError::NegativeExponent {
                name,
                value: e.to_string(),
            });
        }
    }
    if degree > MAX_DEGREE {
        return Err(ConfigError::DegreeTooLarge(degree));
    }
    let precision = settings.precision;
    let bits = precision.bits();
    let a = Float::with_val(bits, a);
    let b = Float::with_val(bits, b);
    let ctx = EvalContext {
        precision,
        quad: settings.quad.clone(),
    };
    let mut report = ProofReport::new(f, &a, &b, n, m, degree, settings);
    let mut clock = StageClock::new(settings.wall_clock);

    // Endpoint limits.
    let limits = endpoint_limit(
        f,
        &a,
        &b,
        n,
        m,
        Endpoint::A,
        &ctx,
        settings.alpha_override.as_ref(),
    )
    .and_then(|alpha| {
        endpoint_limit(
            f,
            &a,
            &b,
            n,
            m,
            Endpoint::B,
            &ctx,
            settings.beta_override.as_ref(),
        )
        .map(|beta| (alpha, beta))
    });
    clock.lap(&mut report.counts, Stage::Limits, 0);
    let (alpha, beta) = match limits {
        Ok(pair) => pair,
        Err(e) => {
            let witness = witness_scan(f, &a, &b, &ctx, settings.sign_samples);
            return Ok(report.finish_with(Stage::Limits, e.to_string(), witness));
        }
    };
    report.alpha = Some(alpha.clone());
    report.beta = Some(beta.clone());

    match precondition_check(&alpha.value, &beta.value) {
        Err(e) => return Ok(report.finish_with(Stage::Precondition, e.to_string(), None)),
        Ok(Precondition::DisprovenAlpha) => {
            let witness = Witness {
                kind: WitnessKind::NegativeAlpha,
                x: a.clone(),
                value: alpha.value.clone(),
            };
            return Ok(report.finish_with(
                Stage::Precondition,
                "alpha < 0: f is negative immediately to the right of a".into(),
                Some(witness),
            ));
        }
        Ok(Precondition::DisprovenBeta) => {
            let witness = Witness {
                kind: WitnessKind::NegativeBeta,
                x: b.clone(),
                value: beta.value.clone(),
            };
            return Ok(report.finish_with(
                Stage::Precondition,
                "beta < 0: f is negative immediately to the left of b".into(),
                Some(witness),
            ));
        }
        Ok(Precondition::Proceed) => {}
    }

    let g = match build_g(f, &a, &b, n, m, alpha, beta, &ctx) {
        Ok(g) => g,
        Err(e) => return Ok(report.finish_with(Stage::BuildG, e.to_string(), None)),
    };
    clock.lap(&mut report.counts, Stage::BuildG, g.evaluations());
    let mut seen = g.evaluations();

    // Sign self-test and disproof scan.
    let signs = match sign_equivalence_check(&g, settings.sign_samples) {
        Ok(s) => s,
        Err(e) => return Ok(report.finish_with(Stage::SignCheck, e.to_string(), None)),
    };
    clock.lap(&mut report.counts, Stage::SignCheck, g.evaluations() - seen);
    seen = g.evaluations();
    if let Some((x, v)) = &signs.min_f {
        if *v < witness_threshold(precision) {
            let witness = Witness {
                kind: WitnessKind::InteriorSample,
                x: x.clone(),
                value: v.clone(),
            };
            return Ok(report.finish_with(
                Stage::SignCheck,
                "f is negative at an interior sample".into(),
                Some(witness),
            ));
        }
    }
    if !signs.passed() {
        let msg = format!(
            "sign of g differs from sign of f at {} of {} samples",
            signs.violations.len(),
            signs.samples
        );
        return Ok(report.finish_with(Stage::SignCheck, msg, None));
    }

    let eval = |x: &Float| g.evaluate(x);
    let result = minimax(&eval, &a, &b, degree, &settings.remez, precision);
    clock.lap(&mut report.counts, Stage::Minimax, g.evaluations() - seen);
    seen = g.evaluations();
    let result = match result {
        Ok(r) => r,
        Err(e) => return Ok(report.finish_with(Stage::Minimax, e.to_string(), None)),
    };
    report.minimax = Some(result.clone());

    let scale = {
        let (al, be) = (g.alpha().value.clone().abs(), g.beta().value.clone().abs());
        if al > be {
            al
        } else {
            be
        }
    };
    let floor = absolute_floor(precision, &scale);
    let verification = verify_equioscillation(&result, &eval, settings.equioscillation_tol, &floor);
    clock.lap(
        &mut report.counts,
        Stage::Equioscillation,
        g.evaluations() - seen,
    );
    seen = g.evaluations();
    match verification {
        Ok(v) => {
            let passed = v.passed;
            let offending = v.offending.clone();
            report.equioscillation = Some(v);
            if !passed {
                let msg = format!("equioscillation check failed at node indices {offending:?}");
                return Ok(report.finish_with(Stage::Equioscillation, msg, None));
            }
        }
        Err(e) => return Ok(report.finish_with(Stage::Equioscillation, e.to_string(), None)),
    }

    let grid =
        settings.residual_grid_factor.max(1) * settings.remez.grid_multiplier * (degree + 2) + 1;
    let residuals = residual_check(
        &eval,
        &result.polynomial,
        &result.delta_hat,
        grid,
        &result.nodes,
    );
    clock.lap(
        &mut report.counts,
        Stage::ResidualCheck,
        g.evaluations() - seen,
    );
    match residuals {
        Ok(rc) => {
            let passed = rc.passed;
            let msg = format!(
                "max |g − P| = {} at x = {} exceeds δ̂·(1 + 1e-6) = {}",
                to_sci_string(&rc.max_residual),
                to_sci_string(&rc.max_location),
                to_sci_string(&rc.threshold)
            );
            report.residual_check = Some(rc);
            if !passed {
                return Ok(report.finish_with(Stage::ResidualCheck, msg, None));
            }
        }
        Err(e) => return Ok(report.finish_with(Stage::ResidualCheck, e.to_string(), None)),
    }

    let certificate = certify_positive(
        &result.polynomial,
        &result.delta_hat,
        &settings.margin_factor,
        precision,
    );
    clock.lap(&mut report.counts, Stage::Certify, 0);
    match certificate {
        Ok(c) => {
            report.certificate = Some(c);
            report.verdict = Verdict::Proven;
            Ok(report)
        }
        Err(e) => Ok(report.finish_with(Stage::Certify, e.to_string(), None)),
    }
}

/// Per-stage evaluation counts and optional wall-clock times.
struct StageClock {
    enabled: bool,
    last: Instant,
}

impl StageClock {
    fn new(enabled: bool) -> StageClock {
        StageClock {
            enabled,
            last: Instant::now(),
        }
    }

    fn lap(&mut self, counts: &mut StageCounts, stage: Stage, evaluations: usize) {
        counts.record(stage, evaluations);
        if self.enabled {
            let now = Instant::now();
            counts.record_time(stage, now - self.last);
            self.last = now;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fl(v: f64) -> Float {
        Precision::default().float(v)
    }

    fn run(f: &str, a: f64, b: f64, n: i32, m: i32, k: usize) -> ProofReport {
        let f = Expression::parse(f).unwrap();
        prove_inequality(
            &f,
            &fl(a),
            &fl(b),
            &Rational::from(n),
            &Rational::from(m),
            k,
            &ProofSettings::default(),
        )
        .unwrap()
    }

    #[test]
    fn negative_slope_is_disproven() {
        let r = run("-x", 0.0, 1.0, 1, 0, 1);
        assert_eq!(r.verdict, Verdict::Disproven);
        assert_eq!(r.witness.as_ref().unwrap().kind, WitnessKind::NegativeAlpha);
    }

    #[test]
    fn negative_end_is_disproven() {
        let r = run("x - 2", 0.0, 1.0, 0, 0, 1);
        assert_eq!(r.verdict, Verdict::Disproven);
        assert_eq!(r.witness.as_ref().unwrap().kind, WitnessKind::NegativeAlpha);
        let r = run("1/2 - x", 0.0, 1.0, 0, 0, 1);
        assert_eq!(r.verdict, Verdict::Disproven);
        assert_eq!(r.witness.as_ref().unwrap().kind, WitnessKind::NegativeBeta);
    }

    #[test]
    fn interior_dip_is_disproven() {
        let r = run("(x - 1/2)^2 - 1/100", 0.0, 1.0, 0, 0, 2);
        assert_eq!(r.verdict, Verdict::Disproven);
        assert_eq!(
            r.witness.as_ref().unwrap().kind,
            WitnessKind::InteriorSample
        );
    }

    #[test]
    fn simple_product_is_proven() {
        let r = run("x*(1-x)*(2+sin(3*x))", 0.0, 1.0, 1, 1, 4);
        assert_eq!(r.verdict, Verdict::Proven, "{:?}", r.message);
        let cert = r.certificate.unwrap();
        assert!(cert.global_min_bound > 0);
    }

    #[test]
    fn wrong_multiplicity_is_inconclusive() {
        let r = run("x^2*(1-x)", 0.0, 1.0, 1, 1, 2);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert_eq!(r.failed_stage, Some(Stage::Limits));
    }

    #[test]
    fn configuration_errors() {
        let f = Expression::parse("x").unwrap();
        let one = Rational::from(1);
        let err = prove_inequality(
            &f,
            &fl(1.0),
            &fl(0.0),
            &one,
            &one,
            1,
            &ProofSettings::default(),
        )
        .unwrap_err();
        assert_eq!(err, ConfigError::EmptyInterval);
        let low = ProofSettings::new(Precision::new(20).unwrap());
        let err = prove_inequality(&f, &fl(0.0), &fl(1.0), &one, &one, 1, &low).unwrap_err();
        assert_eq!(err, ConfigError::PrecisionTooLow(20));
    }
}
