//! The quotient `g(x) = f(x) / ((x − a)ⁿ (b − x)ᵐ)` on `[a, b]`, extended to the
//! endpoints by its limits `α = g(a⁺)` and `β = g(b⁻)`.
//!
//! Since the denominator is positive on `(a, b)`, `g > 0` on `[a, b]` implies
//! `f ≥ 0` there, with roots allowed only at the endpoints.
//!
//! Limits come from one of three sources, chosen per endpoint:
//!
//! * Taylor coefficients when the exponent at that endpoint is an integer:
//!   `α = f⁽ⁿ⁾(a) / (n! (b − a)ᵐ)` and `β = (−1)ᵐ f⁽ᵐ⁾(b) / (m! (b − a)ⁿ)`;
//! * Richardson extrapolation of the quotient along `a + (b − a) 4^(−j)`,
//!   used for real exponents and whenever a symbolic derivative cannot be
//!   evaluated at the endpoint;
//! * values supplied by the caller.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rug::float::Constant;
use rug::{Float, Rational};
use serde::Serialize;
use thiserror::Error;

use crate::expr::{eval_pow, EvalContext, EvalError, Expression};
use crate::precision::to_sci_string;

/// Relative agreement required between successive extrapolated limits.
const EXTRAPOLATION_TOL: f64 = 1e-8;
/// Growth exponents beyond this magnitude mean the supplied exponent is wrong.
const GROWTH_THRESHOLD: f64 = 0.2;
/// Relative distance from an endpoint inside which `g` is blended linearly.
const BLEND_WIDTH: f64 = 1e-8;
/// Sampling levels `j` of the extrapolation sequence `(b − a) 4^(−j)`.
const FIRST_LEVEL: i32 = 3;
const LAST_LEVEL: i32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    A,
    B,
}

impl Endpoint {
    fn exponent_name(self) -> &'static str {
        match self {
            Endpoint::A => "n",
            Endpoint::B => "m",
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Endpoint::A => "a",
            Endpoint::B => "b",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitMethod {
    Taylor,
    Numeric,
    UserSupplied,
}

impl fmt::Display for LimitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LimitMethod::Taylor => "taylor",
            LimitMethod::Numeric => "numeric",
            LimitMethod::UserSupplied => "user_supplied",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitError {
    #[error("interval is empty: need a < b")]
    EmptyInterval,
    #[error("exponent {name} = {value} must be non-negative")]
    NegativeExponent { name: &'static str, value: String },
    #[error("Taylor limits need an integer exponent, got {0}")]
    NonIntegerExponent(String),
    #[error(
        "derivative of order {order} does not vanish at {endpoint} (value {value}); {} is larger than the root multiplicity",
        endpoint.exponent_name()
    )]
    NonVanishing {
        endpoint: Endpoint,
        order: u32,
        value: String,
    },
    #[error("limit at {endpoint} is zero; {hint}")]
    ZeroLimit {
        endpoint: Endpoint,
        growth_exponent: Option<f64>,
        hint: String,
    },
    #[error("quotient diverges at {endpoint} (growth exponent {growth_exponent:.3}); {hint}")]
    Divergent {
        endpoint: Endpoint,
        growth_exponent: f64,
        hint: String,
    },
    #[error("limit at {endpoint} is not finite")]
    NonFinite { endpoint: Endpoint },
    #[error(
        "extrapolation at {endpoint} did not stabilise (last estimates {last} and {previous})"
    )]
    NoConvergence {
        endpoint: Endpoint,
        last: String,
        previous: String,
    },
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
}

/// One endpoint limit together with how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointLimit {
    pub value: Float,
    pub method: LimitMethod,
    /// Numeric estimate computed alongside a Taylor limit, when it succeeded.
    pub cross_check: Option<Float>,
}

impl EndpointLimit {
    pub fn supplied(value: Float) -> EndpointLimit {
        EndpointLimit {
            value,
            method: LimitMethod::UserSupplied,
            cross_check: None,
        }
    }
}

/// Result of the extrapolation scheme at one endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericLimit {
    pub value: Float,
    /// `e` in `q(h) ~ h^e` estimated from the last two raw quotients.
    pub growth_exponent: f64,
    /// Sequence values consumed before the diagonal stabilised.
    pub levels_used: usize,
}

/// `|v|` below this counts as zero: `10^(−2d/5)` at `d` digits (`10⁻²⁰` at 50).
pub fn vanish_tolerance(ctx: &EvalContext) -> Float {
    let d = ctx.precision.digits() as i32;
    ctx.precision.pow10_neg(2 * d / 5)
}

fn check_interval(a: &Float, b: &Float) -> Result<(), LimitError> {
    if a < b {
        Ok(())
    } else {
        Err(LimitError::EmptyInterval)
    }
}

fn check_exponent(name: &'static str, e: &Rational) -> Result<(), LimitError> {
    if *e < 0 {
        return Err(LimitError::NegativeExponent {
            name,
            value: e.to_string(),
        });
    }
    Ok(())
}

fn integer_exponent(e: &Rational) -> Option<u32> {
    if e.denom() == &1u32 {
        e.numer().to_u32()
    } else {
        None
    }
}

fn rational_pow(base: &Float, e: &Rational) -> Result<Float, EvalError> {
    eval_pow(base.clone(), e)
}

fn factorial(k: u32, bits: u32) -> Float {
    let mut acc = Float::with_val(bits, 1);
    for i in 2..=k {
        acc *= i;
    }
    acc
}

/// Taylor limit at one endpoint; the exponent at that endpoint must be an integer.
pub fn taylor_limit(
    f: &Expression,
    a: &Float,
    b: &Float,
    n: &Rational,
    m: &Rational,
    endpoint: Endpoint,
    ctx: &EvalContext,
) -> Result<Float, LimitError> {
    check_interval(a, b)?;
    check_exponent("n", n)?;
    check_exponent("m", m)?;
    let bits = ctx.precision.bits();
    let (own, other, at) = match endpoint {
        Endpoint::A => (n, m, a),
        Endpoint::B => (m, n, b),
    };
    let order =
        integer_exponent(own).ok_or_else(|| LimitError::NonIntegerExponent(own.to_string()))?;
    let tol = vanish_tolerance(ctx);
    let mut derivative = f.clone();
    for j in 0..order {
        let value = derivative.evaluate_with(at, ctx)?;
        if Float::with_val(bits, value.abs_ref()) > tol {
            return Err(LimitError::NonVanishing {
                endpoint,
                order: j,
                value: to_sci_string(&value),
            });
        }
        derivative = derivative.differentiate(1).expect("order one is valid");
    }
    let top = derivative.evaluate_with(at, ctx)?;
    let width = Float::with_val(bits, b - a);
    let mut limit = top / factorial(order, bits);
    limit /= rational_pow(&width, other)?;
    if endpoint == Endpoint::B && order % 2 == 1 {
        limit = -limit;
    }
    if !limit.is_finite() {
        return Err(LimitError::NonFinite { endpoint });
    }
    if Float::with_val(bits, limit.abs_ref()) <= tol {
        return Err(LimitError::ZeroLimit {
            endpoint,
            growth_exponent: None,
            hint: format!(
                "{} = {} is smaller than the root multiplicity",
                endpoint.exponent_name(),
                own
            ),
        });
    }
    Ok(limit)
}

/// `(α, β)` by Taylor coefficients; both exponents must be integers.
pub fn endpoint_limits_taylor(
    f: &Expression,
    a: &Float,
    b: &Float,
    n: u32,
    m: u32,
    ctx: &EvalContext,
) -> Result<(Float, Float), LimitError> {
    let (n, m) = (Rational::from(n), Rational::from(m));
    Ok((
        taylor_limit(f, a, b, &n, &m, Endpoint::A, ctx)?,
        taylor_limit(f, a, b, &n, &m, Endpoint::B, ctx)?,
    ))
}

/// Raw quotient at distance `h` from the endpoint, using `h` itself for the
/// vanishing factor so that no cancellation enters the denominator.
#[allow(clippy::too_many_arguments)]
fn quotient_at_offset(
    f: &Expression,
    a: &Float,
    b: &Float,
    n: &Rational,
    m: &Rational,
    endpoint: Endpoint,
    h: &Float,
    ctx: &EvalContext,
) -> Result<Float, EvalError> {
    let bits = ctx.precision.bits();
    let width = Float::with_val(bits, b - a);
    let far = Float::with_val(bits, &width - h);
    let (x, near_factor, far_factor) = match endpoint {
        Endpoint::A => (
            Float::with_val(bits, a + h),
            rational_pow(h, n)?,
            rational_pow(&far, m)?,
        ),
        Endpoint::B => (
            Float::with_val(bits, b - h),
            rational_pow(h, m)?,
            rational_pow(&far, n)?,
        ),
    };
    let value = f.evaluate_with(&x, ctx)?;
    Ok(value / near_factor / far_factor)
}

/// Extrapolated limit at one endpoint for any real exponents.
///
/// The quotient is sampled at `h_j = (b − a) 4^(−j)`, `j = 3…12`, and a
/// Richardson tableau removes error terms in powers of `√h_j`, which covers
/// both integer and half-integer expansions.
pub fn numeric_limit(
    f: &Expression,
    a: &Float,
    b: &Float,
    n: &Rational,
    m: &Rational,
    endpoint: Endpoint,
    ctx: &EvalContext,
) -> Result<NumericLimit, LimitError> {
    check_interval(a, b)?;
    check_exponent("n", n)?;
    check_exponent("m", m)?;
    let bits = ctx.precision.bits();
    let width = Float::with_val(bits, b - a);
    let mut raw = Vec::new();
    for j in FIRST_LEVEL..=LAST_LEVEL {
        let h = Float::with_val(
            bits,
            &width * Float::with_val(bits, Float::i_exp(1, -2 * j)),
        );
        raw.push(quotient_at_offset(f, a, b, n, m, endpoint, &h, ctx)?);
    }
    let own = match endpoint {
        Endpoint::A => n,
        Endpoint::B => m,
    };
    let name = endpoint.exponent_name();
    let last = &raw[raw.len() - 1];
    let previous = &raw[raw.len() - 2];
    if last.is_zero() || previous.is_zero() {
        return Err(LimitError::ZeroLimit {
            endpoint,
            growth_exponent: None,
            hint: format!(
                "the quotient vanishes identically near {endpoint}; {name} = {own} is too small"
            ),
        });
    }
    let ratio = Float::with_val(bits, last / previous).abs().to_f64();
    let growth = -ratio.ln() / 4f64.ln();
    let suggested = own.to_f64() + growth;
    if growth < -GROWTH_THRESHOLD {
        return Err(LimitError::Divergent {
            endpoint,
            growth_exponent: growth,
            hint: format!("{name} = {own} is too large; the data suggest {name} ≈ {suggested:.3}"),
        });
    }
    if growth > GROWTH_THRESHOLD {
        return Err(LimitError::ZeroLimit {
            endpoint,
            growth_exponent: Some(growth),
            hint: format!("{name} = {own} is too small; the data suggest {name} ≈ {suggested:.3}"),
        });
    }

    let mut rows: Vec<Vec<Float>> = Vec::new();
    let mut diagonal: Vec<Float> = Vec::new();
    let tol = Float::with_val(bits, EXTRAPOLATION_TOL);
    for (r, q) in raw.iter().enumerate() {
        let mut row = vec![q.clone()];
        for i in 1..=r {
            let scale = Float::with_val(bits, Float::i_exp(1, i as i32));
            let mut t = Float::with_val(bits, &scale * &row[i - 1]);
            t -= &rows[r - 1][i - 1];
            t /= scale - 1u32;
            row.push(t);
        }
        diagonal.push(row[r].clone());
        rows.push(row);
        if r >= 2 {
            let d = &diagonal[r];
            let spread = Float::with_val(bits, d - &diagonal[r - 1]).abs();
            if spread <= Float::with_val(bits, d.abs_ref()) * &tol {
                if !d.is_finite() {
                    return Err(LimitError::NonFinite { endpoint });
                }
                if Float::with_val(bits, d.abs_ref()) <= vanish_tolerance(ctx) {
                    return Err(LimitError::ZeroLimit {
                        endpoint,
                        growth_exponent: Some(growth),
                        hint: format!("{name} = {own} is too small"),
                    });
                }
                return Ok(NumericLimit {
                    value: d.clone(),
                    growth_exponent: growth,
                    levels_used: r + 1,
                });
            }
        }
    }
    let k = diagonal.len();
    Err(LimitError::NoConvergence {
        endpoint,
        last: to_sci_string(&diagonal[k - 1]),
        previous: to_sci_string(&diagonal[k - 2]),
    })
}

/// `(α, β)` by extrapolation.
pub fn endpoint_limits_numeric(
    f: &Expression,
    a: &Float,
    b: &Float,
    n: &Rational,
    m: &Rational,
    ctx: &EvalContext,
) -> Result<(Float, Float), LimitError> {
    Ok((
        numeric_limit(f, a, b, n, m, Endpoint::A, ctx)?.value,
        numeric_limit(f, a, b, n, m, Endpoint::B, ctx)?.value,
    ))
}

/// Limit at one endpoint by the preferred method.
///
/// An override wins. Otherwise an integer exponent selects the Taylor formula,
/// with extrapolation as a cross-check; a domain error in a symbolic
/// derivative (e.g. `1/√(1 − x)` at `x = 1`) falls back to extrapolation.
#[allow(clippy::too_many_arguments)]
pub fn endpoint_limit(
    f: &Expression,
    a: &Float,
    b: &Float,
    n: &Rational,
    m: &Rational,
    endpoint: Endpoint,
    ctx: &EvalContext,
    supplied: Option<&Float>,
) -> Result<EndpointLimit, LimitError> {
    check_interval(a, b)?;
    check_exponent("n", n)?;
    check_exponent("m", m)?;
    if let Some(v) = supplied {
        return Ok(EndpointLimit::supplied(Float::with_val(
            ctx.precision.bits(),
            v,
        )));
    }
    let own = match endpoint {
        Endpoint::A => n,
        Endpoint::B => m,
    };
    if integer_exponent(own).is_some() {
        match taylor_limit(f, a, b, n, m, endpoint, ctx) {
            Ok(value) => {
                let cross_check = numeric_limit(f, a, b, n, m, endpoint, ctx)
                    .ok()
                    .map(|r| r.value);
                return Ok(EndpointLimit {
                    value,
                    method: LimitMethod::Taylor,
                    cross_check,
                });
            }
            Err(LimitError::Eval(EvalError::Domain { .. })) => {}
            Err(other) => return Err(other),
        }
    }
    let numeric = numeric_limit(f, a, b, n, m, endpoint, ctx)?;
    Ok(EndpointLimit {
        value: numeric.value,
        method: LimitMethod::Numeric,
        cross_check: None,
    })
}

/// The continuous quotient function on `[a, b]`. Immutable once built.
#[derive(Debug, Clone)]
pub struct GFunction {
    f: Expression,
    a: Float,
    b: Float,
    n: Rational,
    m: Rational,
    alpha: EndpointLimit,
    beta: EndpointLimit,
    ctx: EvalContext,
    /// `(x₀, g(x₀))` at distance `(b − a)·10⁻⁸` inside each endpoint.
    anchor_a: (Float, Float),
    anchor_b: (Float, Float),
    evaluations: Arc<AtomicUsize>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("interval is empty: need a < b")]
    EmptyInterval,
    #[error("limit at {endpoint} must be finite and non-zero, got {value}")]
    BadLimit { endpoint: Endpoint, value: String },
    #[error("exponent {name} = {value} must be non-negative")]
    NegativeExponent { name: &'static str, value: String },
    #[error("evaluation near the endpoints failed: {0}")]
    Eval(#[from] EvalError),
}

/// Builds `g` from `f`, the segment, the exponents and endpoint limits.
#[allow(clippy::too_many_arguments)]
pub fn build_g(
    f: &Expression,
    a: &Float,
    b: &Float,
    n: &Rational,
    m: &Rational,
    alpha: EndpointLimit,
    beta: EndpointLimit,
    ctx: &EvalContext,
) -> Result<GFunction, BuildError> {
    if a >= b {
        return Err(BuildError::EmptyInterval);
    }
    for (name, e) in [("n", n), ("m", m)] {
        if *e < 0 {
            return Err(BuildError::NegativeExponent {
                name,
                value: e.to_string(),
            });
        }
    }
    for (endpoint, limit) in [(Endpoint::A, &alpha), (Endpoint::B, &beta)] {
        if !limit.value.is_finite() || limit.value.is_zero() {
            return Err(BuildError::BadLimit {
                endpoint,
                value: to_sci_string(&limit.value),
            });
        }
    }
    let bits = ctx.precision.bits();
    let a = Float::with_val(bits, a);
    let b = Float::with_val(bits, b);
    let offset = Float::with_val(bits, &b - &a) * Float::with_val(bits, BLEND_WIDTH);
    let mut g = GFunction {
        f: f.clone(),
        anchor_a: (Float::with_val(bits, &a + &offset), Float::new(bits)),
        anchor_b: (Float::with_val(bits, &b - &offset), Float::new(bits)),
        a,
        b,
        n: n.clone(),
        m: m.clone(),
        alpha,
        beta,
        ctx: ctx.clone(),
        evaluations: Arc::new(AtomicUsize::new(0)),
    };
    g.anchor_a.1 = g.quotient(&g.anchor_a.0.clone())?;
    g.anchor_b.1 = g.quotient(&g.anchor_b.0.clone())?;
    Ok(g)
}

impl GFunction {
    pub fn f(&self) -> &Expression {
        &self.f
    }

    pub fn a(&self) -> &Float {
        &self.a
    }

    pub fn b(&self) -> &Float {
        &self.b
    }

    pub fn n(&self) -> &Rational {
        &self.n
    }

    pub fn m(&self) -> &Rational {
        &self.m
    }

    pub fn alpha(&self) -> &EndpointLimit {
        &self.alpha
    }

    pub fn beta(&self) -> &EndpointLimit {
        &self.beta
    }

    pub fn context(&self) -> &EvalContext {
        &self.ctx
    }

    /// Number of evaluations of `f` made through this function and its clones.
    pub fn evaluations(&self) -> usize {
        self.evaluations.load(Ordering::Relaxed)
    }

    /// `f(x) / ((x − a)ⁿ (b − x)ᵐ)` without any endpoint treatment.
    pub fn quotient(&self, x: &Float) -> Result<Float, EvalError> {
        let bits = self.ctx.precision.bits();
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        let value = self.f.evaluate_with(x, &self.ctx)?;
        let left = rational_pow(&Float::with_val(bits, x - &self.a), &self.n)?;
        let right = rational_pow(&Float::with_val(bits, &self.b - x), &self.m)?;
        let denom = left * right;
        if denom.is_zero() {
            return Err(EvalError::Domain {
                op: "g",
                detail: "denominator vanishes".into(),
            });
        }
        Ok(value / denom)
    }

    /// `g(x)` for `x ∈ [a, b]`.
    pub fn evaluate(&self, x: &Float) -> Result<Float, EvalError> {
        let bits = self.ctx.precision.bits();
        if *x < self.a || *x > self.b {
            return Err(EvalError::Domain {
                op: "g",
                detail: format!("{} lies outside [a, b]", to_sci_string(x)),
            });
        }
        if *x == self.a {
            return Ok(Float::with_val(bits, &self.alpha.value));
        }
        if *x == self.b {
            return Ok(Float::with_val(bits, &self.beta.value));
        }
        if *x < self.anchor_a.0 {
            return Ok(blend(&self.a, &self.alpha.value, &self.anchor_a, x));
        }
        if *x > self.anchor_b.0 {
            return Ok(blend(&self.b, &self.beta.value, &self.anchor_b, x));
        }
        self.quotient(x)
    }
}

/// `limit + (g₀ − limit)·(x − end)/(x₀ − end)`.
fn blend(end: &Float, limit: &Float, anchor: &(Float, Float), x: &Float) -> Float {
    let bits = limit.prec();
    let t = Float::with_val(bits, x - end) / Float::with_val(bits, &anchor.0 - end);
    let step = Float::with_val(bits, &anchor.1 - limit) * t;
    step + limit
}

/// `count` Chebyshev points strictly inside `(a, b)`.
pub fn chebyshev_interior(a: &Float, b: &Float, count: usize) -> Vec<Float> {
    let bits = a.prec().max(b.prec());
    let mid = Float::with_val(bits, a + b) / 2u32;
    let half = Float::with_val(bits, b - a) / 2u32;
    let pi = Float::with_val(bits, Constant::Pi);
    (0..count)
        .map(|i| {
            let theta = Float::with_val(bits, &pi * (2 * i as u32 + 1)) / (2 * count as u32);
            let c = theta.cos();
            Float::with_val(bits, &mid - Float::with_val(bits, &half * &c))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignViolation {
    pub x: Float,
    pub f: Float,
    pub g: Float,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignReport {
    pub samples: usize,
    pub violations: Vec<SignViolation>,
    /// Sample with the smallest value of `f`, as `(x, f(x))`.
    pub min_f: Option<(Float, Float)>,
}

impl SignReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `sign g(x) = sign f(x)` at `samples` interior Chebyshev points.
pub fn sign_equivalence_check(g: &GFunction, samples: usize) -> Result<SignReport, EvalError> {
    let samples = samples.max(2);
    let mut violations = Vec::new();
    let mut min_f: Option<(Float, Float)> = None;
    for x in chebyshev_interior(g.a(), g.b(), samples) {
        let fv = g.f.evaluate_with(&x, &g.ctx)?;
        let gv = g.evaluate(&x)?;
        if min_f.as_ref().is_none_or(|(_, v)| fv < *v) {
            min_f = Some((x.clone(), fv.clone()));
        }
        if fv.cmp0() != gv.cmp0() {
            violations.push(SignViolation { x, f: fv, g: gv });
        }
    }
    Ok(SignReport {
        samples,
        violations,
        min_f,
    })
}
