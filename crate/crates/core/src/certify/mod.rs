//! Positivity certificates and the end-to-end proof pipeline.
//!
//! With `|g − P| ≤ δ` on `[a, b]`, a certified `P(x) − δ > 0` gives `g > 0`,
//! hence `f ≥ 0` (roots allowed only at `a` and `b`). The lower bounds for `P`
//! come from interval arithmetic with outward rounding; `δ` itself is the
//! Remez estimate inflated by a margin factor and checked on a sample grid.

pub mod interval;
mod pipeline;
mod report;

use rug::float::Round;
use rug::Float;
use thiserror::Error;

use crate::expr::EvalError;
use crate::precision::{to_sci_string, Precision};
use crate::remez::{chebyshev_grid, Polynomial};
use interval::{clenshaw, derivative_coefficients, Interval};

pub use pipeline::{prove_inequality, ConfigError, ProofSettings};
pub use report::{ProofReport, Stage, StageCounts, Verdict, Witness, WitnessKind, CAVEAT};

/// Certification refuses to run below this many decimal digits.
pub const MIN_CERTIFY_DIGITS: u32 = 30;
/// Subdivision depth cap.
pub const MAX_DEPTH: u32 = 47;
/// Relative width below which a subinterval is not split further.
pub const MIN_RELATIVE_WIDTH: f64 = 1e-14;
/// Default inflation of `δ` before certification.
pub const DEFAULT_MARGIN: f64 = 1.0 + 1e-6;
/// Relative slack allowed by the sampled residual check.
pub const RESIDUAL_SLACK: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertifyError {
    #[error("certification needs at least {MIN_CERTIFY_DIGITS} digits, got {0}")]
    PrecisionTooLow(u32),
    #[error("margin factor {0} must lie in (1, 2]")]
    BadMargin(String),
    #[error("delta must be non-negative, got {0}")]
    NegativeDelta(String),
    #[error(
        "positivity not certified on [{left}, {right}]: lower bound {bound}{}",
        if *.witness { " (P − δ·margin ≤ 0 at the midpoint)" } else { " at the subdivision limit" }
    )]
    NotCertified {
        left: String,
        right: String,
        bound: String,
        /// True when a point value shows `P − δ·margin ≤ 0`.
        witness: bool,
    },
}

/// A tiling of `[a, b]` with certified positive lower bounds of `P − δ·margin`.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivityCertificate {
    pub polynomial: Polynomial,
    pub delta: Float,
    pub margin_factor: Float,
    /// `(left, right, lower bound)`, consecutive and tiling `[a, b]`.
    pub subintervals: Vec<(Float, Float, Float)>,
    pub global_min_bound: Float,
}

/// Encloses `P` over `[lo, hi]`: direct interval Clenshaw intersected with
/// the mean-value form around the midpoint.
fn enclose(
    coeffs: &[Interval],
    deriv: &[Interval],
    a: &Float,
    b: &Float,
    lo: &Float,
    hi: &Float,
    bits: u32,
) -> Interval {
    let x = Interval::new(bits, lo, hi);
    let ab = Interval::point(bits, a).add(&Interval::point(bits, b));
    let width = Interval::point(bits, b).sub(&Interval::point(bits, a));
    let s = x.scale_pow2(1).sub(&ab).div_positive(&width);
    let direct = clenshaw(coeffs, &s);
    let centre = Float::with_val(bits, &s.lo + &s.hi) / 2u32;
    let c = Interval::point(bits, &centre);
    let mean_value = clenshaw(coeffs, &c).add(&clenshaw(deriv, &s).mul(&s.sub(&c)));
    direct.intersect(&mean_value).unwrap_or(direct)
}

/// Certifies `P(x) − δ·margin > 0` on the polynomial's segment by adaptive
/// bisection.
pub fn certify_positive(
    p: &Polynomial,
    delta: &Float,
    margin_factor: &Float,
    precision: Precision,
) -> Result<PositivityCertificate, CertifyError> {
    if precision.digits() < MIN_CERTIFY_DIGITS {
        return Err(CertifyError::PrecisionTooLow(precision.digits()));
    }
    if !(*margin_factor > 1 && *margin_factor <= 2) {
        return Err(CertifyError::BadMargin(to_sci_string(margin_factor)));
    }
    if delta.is_sign_negative() && !delta.is_zero() {
        return Err(CertifyError::NegativeDelta(to_sci_string(delta)));
    }
    let bits = precision.bits();
    let (a, b) = p.segment();
    let coeffs: Vec<Interval> = p
        .coefficients()
        .iter()
        .map(|c| Interval::point(bits, c))
        .collect();
    let deriv = derivative_coefficients(&coeffs);
    let shift = Float::with_val_round(bits, delta * margin_factor, Round::Up).0;
    let min_width = Float::with_val(bits, b - a) * Float::with_val(bits, MIN_RELATIVE_WIDTH);

    let lower = |lo: &Float, hi: &Float| -> Float {
        let e = enclose(&coeffs, &deriv, a, b, lo, hi, bits);
        Float::with_val_round(bits, &e.lo - &shift, Round::Down).0
    };

    let mut leaves = Vec::new();
    let mut stack = vec![(Float::with_val(bits, a), Float::with_val(bits, b), 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let bound = lower(&lo, &hi);
        if bound.is_sign_positive() && !bound.is_zero() {
            leaves.push((lo, hi, bound));
            continue;
        }
        let mid = Float::with_val(bits, &lo + &hi) / 2u32;
        let at_mid = lower(&mid, &mid);
        let upper_mid = {
            let e = enclose(&coeffs, &deriv, a, b, &mid, &mid, bits);
            Float::with_val_round(bits, &e.hi - &shift, Round::Up).0
        };
        let fail = |witness: bool, bound: &Float| CertifyError::NotCertified {
            left: to_sci_string(&lo),
            right: to_sci_string(&hi),
            bound: to_sci_string(bound),
            witness,
        };
        if upper_mid.is_sign_negative() || upper_mid.is_zero() {
            return Err(fail(true, &at_mid));
        }
        if depth >= MAX_DEPTH || Float::with_val(bits, &hi - &lo) < min_width {
            return Err(fail(false, &bound));
        }
        stack.push((mid.clone(), hi, depth + 1));
        stack.push((lo, mid, depth + 1));
    }
    let global_min_bound = leaves
        .iter()
        .map(|(_, _, v)| v.clone())
        .reduce(|acc, v| if v < acc { v } else { acc })
        .expect("at least one leaf");
    Ok(PositivityCertificate {
        polynomial: p.clone(),
        delta: Float::with_val(bits, delta),
        margin_factor: Float::with_val(bits, margin_factor),
        subintervals: leaves,
        global_min_bound,
    })
}

/// Sampled check of `|g − P| ≤ δ` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualCheck {
    pub points: usize,
    pub max_residual: Float,
    pub max_location: Float,
    /// `δ·(1 + 10⁻⁶)`.
    pub threshold: Float,
    pub passed: bool,
}

/// Evaluates `|g − P|` at `grid_size` Chebyshev points of the segment plus
/// `extra` (typically the reference nodes). Passes iff the maximum is at most
/// `δ·(1 + 10⁻⁶)`.
pub fn residual_check<G>(
    g: &G,
    p: &Polynomial,
    delta: &Float,
    grid_size: usize,
    extra: &[Float],
) -> Result<ResidualCheck, EvalError>
where
    G: Fn(&Float) -> Result<Float, EvalError> + Sync,
{
    use rayon::prelude::*;
    let bits = delta.prec();
    let (a, b) = p.segment();
    let size = grid_size.max(4 * (p.degree() + 2));
    let mut points = chebyshev_grid(a, b, size);
    points.extend(extra.iter().cloned());
    let residuals = points
        .par_iter()
        .map(|x| g(x).map(|v| Float::with_val(bits, v - p.evaluate(x)).abs()))
        .collect::<Result<Vec<_>, _>>()?;
    let (mut arg, mut max) = (0, Float::new(bits));
    for (i, r) in residuals.iter().enumerate() {
        if *r > max {
            max = r.clone();
            arg = i;
        }
    }
    let threshold = Float::with_val(bits, delta * Float::with_val(bits, 1.0 + RESIDUAL_SLACK));
    Ok(ResidualCheck {
        points: points.len(),
        passed: max <= threshold,
        max_location: points[arg].clone(),
        max_residual: max,
        threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precondition {
    Proceed,
    DisprovenAlpha,
    DisprovenBeta,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("endpoint limit {which} is zero: the exponents n, m do not match the root multiplicities")]
pub struct ZeroLimitError {
    pub which: &'static str,
}

/// Both limits must be positive for `g > 0` to be possible.
pub fn precondition_check(alpha: &Float, beta: &Float) -> Result<Precondition, ZeroLimitError> {
    if alpha.is_zero() {
        return Err(ZeroLimitError { which: "alpha" });
    }
    if beta.is_zero() {
        return Err(ZeroLimitError { which: "beta" });
    }
    Ok(if alpha.is_sign_negative() {
        Precondition::DisprovenAlpha
    } else if beta.is_sign_negative() {
        Precondition::DisprovenBeta
    } else {
        Precondition::Proceed
    })
}
