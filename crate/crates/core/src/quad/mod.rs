//! Quadrature for the Kurepa function
//! `K(x) = ∫₀^∞ e^(−t) (t^x − 1)/(t − 1) dt` and its derivatives
//! `K⁽ᵏ⁾(x) = ∫₀^∞ e^(−t) t^x logᵏ(t)/(t − 1) dt`, plus the inflection point of `K`.
//!
//! The half-line is split into four pieces:
//!
//! * `[0, 1 − ε]`: double-exponential (tanh-sinh) quadrature, which absorbs the
//!   algebraic/logarithmic endpoint behaviour of `t^x logᵏ t` at `t = 0`;
//! * `[1 − ε, 1 + ε]`: the integrand's power series in `u = t − 1`, integrated
//!   termwise against precomputed moments of `e^(−t)` (no quotient is formed);
//! * `[1 + ε, T]`: adaptive Gauss–Legendre panels;
//! * `[T, ∞)`: dropped, with an explicit analytic bound added to the error.
//!
//! Every piece is computed with 20 guard digits above the requested precision.

mod gauss;
mod series;
mod tanh_sinh;

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rug::float::Round;
use rug::ops::Pow;
use rug::Float;
use thiserror::Error;

use crate::precision::{to_sci_string, Precision};

pub use gauss::{rule as gauss_legendre_rule, GaussLegendre};

/// Extra decimal digits carried internally by the quadrature.
const GUARD_DIGITS: u32 = 20;
/// Number of panel refinements allowed below an initial panel.
const MAX_PANEL_DEPTH: u32 = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("Kurepa integrals require x >= 0")]
    NegativeArgument,
    #[error("derivative order {0} is not supported")]
    UnsupportedOrder(u32),
    #[error(
        "precision unreachable: error bound {error_bound} exceeds target {target} after {nodes_used} nodes"
    )]
    PrecisionUnreachable {
        error_bound: String,
        target: String,
        nodes_used: usize,
    },
    #[error("second derivative of K shows no sign change on [0, 1] (K''(0) = {at_zero}, K''(1) = {at_one})")]
    NoSignChange { at_zero: String, at_one: String },
    #[error("invalid quadrature configuration: {0}")]
    BadConfig(String),
}

/// Tunable knobs of the quadrature scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadConfig {
    /// Gauss–Legendre points per panel on `[1 + ε, T]`.
    pub nodes_per_panel: usize,
    /// Half-width `ε` of the series window around the removable singularity.
    pub series_halfwidth: f64,
    /// Fixed tail cutoff `T`; `None` picks the smallest adequate integer.
    pub tail_cutoff: Option<f64>,
    /// Extra tanh-sinh levels computed after the error target is met.
    pub extra_levels: u32,
    /// Hard cap on integrand evaluations per integral.
    pub node_budget: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            nodes_per_panel: 32,
            series_halfwidth: 0.125,
            tail_cutoff: None,
            extra_levels: 0,
            node_budget: 200_000,
        }
    }
}

impl QuadConfig {
    /// The same scheme with every node count doubled.
    pub fn refined(&self) -> QuadConfig {
        QuadConfig {
            nodes_per_panel: self.nodes_per_panel * 2,
            extra_levels: self.extra_levels + 1,
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<(), QuadError> {
        if self.nodes_per_panel < 4 {
            return Err(QuadError::BadConfig(
                "nodes_per_panel must be at least 4".into(),
            ));
        }
        if !(self.series_halfwidth > 0.0 && self.series_halfwidth <= 0.5) {
            return Err(QuadError::BadConfig(
                "series_halfwidth must lie in (0, 0.5]".into(),
            ));
        }
        if let Some(t) = self.tail_cutoff {
            if !(t.is_finite() && t > 1.0 + self.series_halfwidth) {
                return Err(QuadError::BadConfig(
                    "tail_cutoff must exceed 1 + series_halfwidth".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Value of one integral with its error accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureResult {
    pub value: Float,
    pub error_bound: Float,
    pub nodes_used: usize,
    pub tail_cutoff: Float,
}

/// `K(x)` with the default configuration.
pub fn kurepa(x: &Float, precision: Precision) -> Result<QuadratureResult, QuadError> {
    kurepa_family(x, 0, precision, &QuadConfig::default())
}

/// `K⁽ᵏ⁾(x)` for `order ∈ {1, 2, 3}` with the default configuration.
pub fn kurepa_derivative(
    x: &Float,
    order: u32,
    precision: Precision,
) -> Result<QuadratureResult, QuadError> {
    kurepa_derivative_with(x, order, precision, &QuadConfig::default())
}

pub fn kurepa_derivative_with(
    x: &Float,
    order: u32,
    precision: Precision,
    config: &QuadConfig,
) -> Result<QuadratureResult, QuadError> {
    if !(1..=3).contains(&order) {
        return Err(QuadError::UnsupportedOrder(order));
    }
    kurepa_family(x, order, precision, config)
}

type MemoKey = (u32, String, u32, String);
const MEMO_CAPACITY: usize = 16_384;

fn memo() -> &'static Mutex<HashMap<MemoKey, QuadratureResult>> {
    static MEMO: OnceLock<Mutex<HashMap<MemoKey, QuadratureResult>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `K` (order 0) or any derivative `K⁽ᵏ⁾` (order k ≥ 1) at `x ≥ 0`.
///
/// Results are memoised per `(order, x, precision, config)`; the computation is
/// deterministic so cached and fresh values are bit-identical.
pub fn kurepa_family(
    x: &Float,
    order: u32,
    precision: Precision,
    config: &QuadConfig,
) -> Result<QuadratureResult, QuadError> {
    if x.is_nan() || (x.is_sign_negative() && !x.is_zero()) {
        return Err(QuadError::NegativeArgument);
    }
    if order > 16 {
        return Err(QuadError::UnsupportedOrder(order));
    }
    config.validate()?;
    let key = (
        order,
        x.to_string_radix(16, None),
        precision.digits(),
        format!("{config:?}"),
    );
    if let Some(hit) = memo().lock().expect("quadrature memo").get(&key) {
        return Ok(hit.clone());
    }
    let result = integrate(x, order, precision, config)?;
    let mut table = memo().lock().expect("quadrature memo");
    if table.len() >= MEMO_CAPACITY {
        table.clear();
    }
    table.insert(key, result.clone());
    Ok(result)
}

/// Integrand data at one quadrature node: `weight · e^(−t)/(t − 1)` and `ln t`.
#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub weight: Float,
    pub ln_t: Float,
}

/// Accumulates `Σ weight · h(t)` over `nodes`, where `h(t) = t^x − 1` for
/// order 0 and `t^x lnᵏ t` otherwise. Returns `(sum, Σ|terms|)`.
pub(crate) fn accumulate(nodes: &[Node], x: &Float, order: u32, bits: u32) -> (Float, Float) {
    let mut sum = Float::new(bits);
    let mut mass = Float::new(bits);
    let mut arg = Float::new(bits);
    for node in nodes {
        arg.assign_mul(x, &node.ln_t);
        let mut term = if order == 0 {
            Float::with_val(bits, arg.exp_m1_ref())
        } else {
            let mut v = Float::with_val(bits, arg.exp_ref());
            v *= Float::with_val(bits, (&node.ln_t).pow(order));
            v
        };
        term *= &node.weight;
        mass += &*term.as_abs();
        sum += &term;
    }
    (sum, mass)
}

trait AssignMul {
    fn assign_mul(&mut self, a: &Float, b: &Float);
}

impl AssignMul for Float {
    fn assign_mul(&mut self, a: &Float, b: &Float) {
        use rug::Assign;
        self.assign(a * b);
    }
}

fn target_exponent(precision: Precision) -> i32 {
    precision.digits() as i32 + 10
}

fn integrate(
    x: &Float,
    order: u32,
    precision: Precision,
    config: &QuadConfig,
) -> Result<QuadratureResult, QuadError> {
    let work = precision.widened(GUARD_DIGITS);
    let bits = work.bits();
    let x = Float::with_val(bits, x);
    let x_f64 = x.to_f64();
    let eps = Float::with_val(bits, config.series_halfwidth);
    let tol = work.pow10_neg(target_exponent(precision));
    let piece_tol = Float::with_val(bits, &tol / 4u32);

    let near = tanh_sinh::integrate(&x, order, work, &eps, config, &piece_tol)?;
    let window = series::integrate(&x, order, work, &eps);

    let tail_cutoff = match config.tail_cutoff {
        Some(t) => t,
        None => choose_tail_cutoff(x_f64, order, precision),
    };
    let far = panels(
        &x,
        order,
        work,
        1.0 + config.series_halfwidth,
        tail_cutoff,
        config,
        &piece_tol,
        near.nodes,
    )?;
    let tail = tail_bound(&x, order, &Float::with_val(bits, tail_cutoff));

    let mut value = Float::with_val(bits, &near.value + &window.value);
    value += &far.value;
    let mass = Float::with_val(bits, &near.mass + &far.mass) + &*window.value.as_abs();
    let roundoff = mass * Float::with_val(bits, Float::i_exp(1, -(bits as i32) + 12));
    let mut error_bound = Float::with_val(bits, &near.error + &window.error);
    error_bound += &far.error;
    error_bound += &tail;
    error_bound += &roundoff;

    let nodes_used = near.nodes + window.terms + far.nodes;
    let out_bits = precision.bits();
    let limit = precision.pow10_neg(precision.digits() as i32 - 10);
    if error_bound > limit {
        return Err(QuadError::PrecisionUnreachable {
            error_bound: to_sci_string(&error_bound),
            target: to_sci_string(&limit),
            nodes_used,
        });
    }
    Ok(QuadratureResult {
        value: Float::with_val(out_bits, &value),
        error_bound: Float::with_val_round(out_bits, &error_bound, Round::Up).0,
        nodes_used,
        tail_cutoff: Float::with_val(out_bits, tail_cutoff),
    })
}

pub(crate) struct PieceResult {
    pub value: Float,
    pub error: Float,
    pub mass: Float,
    pub nodes: usize,
}

/// Smallest integer `T` with `e^(−T) T^(x+1) < 10^(−p−10)` whose analytic tail
/// bound also meets that target.
fn choose_tail_cutoff(x: f64, order: u32, precision: Precision) -> f64 {
    let target = -(target_exponent(precision) as f64) * std::f64::consts::LN_10;
    let q = x + order as f64 - 1.0;
    let mut t = (2.0 * (x + order as f64 + 2.0)).max(4.0).ceil();
    loop {
        let spec = -t + (x + 1.0) * t.ln();
        let bound = std::f64::consts::LN_2 - t + q * t.ln() - (1.0 - q.max(0.0) / t).ln();
        if spec < target && bound < target {
            return t;
        }
        t += 1.0;
    }
}

/// Bound on `∫_T^∞ e^(−t) |t^x lnᵏ t| /(t − 1) dt` (or the order-0 integrand).
///
/// Uses `ln t ≤ t`, `1/(t−1) ≤ 2/t` and `∫_T^∞ e^(−t) t^q dt ≤ e^(−T) T^q /(1 − q/T)`.
fn tail_bound(x: &Float, order: u32, cutoff: &Float) -> Float {
    let bits = x.prec();
    let q = Float::with_val(bits, x + order) - 1u32;
    let mut bound = Float::with_val(bits, -cutoff).exp();
    bound *= Float::with_val(bits, cutoff.pow(&q));
    bound *= 2u32;
    if q.is_sign_positive() && !q.is_zero() {
        let denom = Float::with_val(bits, 1) - Float::with_val(bits, &q / cutoff);
        bound /= denom;
    }
    bound
}

fn panel_nodes(lo: f64, hi: f64, n: usize, bits: u32) -> std::sync::Arc<Vec<Node>> {
    type PanelKey = (u32, usize, u64, u64);
    type PanelCache = Mutex<HashMap<PanelKey, std::sync::Arc<Vec<Node>>>>;
    static CACHE: OnceLock<PanelCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (bits, n, lo.to_bits(), hi.to_bits());
    if let Some(hit) = cache.lock().expect("panel cache").get(&key) {
        return hit.clone();
    }
    let gl = gauss::rule(n, bits);
    let lo_f = Float::with_val(bits, lo);
    let hi_f = Float::with_val(bits, hi);
    let half = Float::with_val(bits, &hi_f - &lo_f) / 2u32;
    let mid = Float::with_val(bits, &hi_f + &lo_f) / 2u32;
    let nodes: Vec<Node> = gl
        .nodes
        .iter()
        .zip(&gl.weights)
        .map(|(xi, w)| {
            let t = Float::with_val(bits, &half * xi) + &mid;
            let mut weight = Float::with_val(bits, &half * w);
            weight *= Float::with_val(bits, -&t).exp();
            weight /= Float::with_val(bits, &t - 1u32);
            Node {
                weight,
                ln_t: t.ln(),
            }
        })
        .collect();
    let nodes = std::sync::Arc::new(nodes);
    let mut guard = cache.lock().expect("panel cache");
    if guard.len() > 100_000 {
        guard.clear();
    }
    guard.entry(key).or_insert(nodes).clone()
}

/// Initial panel breakpoints on `[start, end]`: widths double from the left
/// (the integrand's branch point at `t = 0` is closest there), capped at 4.
fn breakpoints(start: f64, end: f64) -> Vec<f64> {
    let mut points = vec![start];
    let mut current = start;
    while current < end {
        let next = (current + current.min(4.0)).min(end);
        points.push(next);
        current = next;
    }
    points
}

#[allow(clippy::too_many_arguments)]
fn panels(
    x: &Float,
    order: u32,
    work: Precision,
    start: f64,
    end: f64,
    config: &QuadConfig,
    tol: &Float,
    already_used: usize,
) -> Result<PieceResult, QuadError> {
    let bits = work.bits();
    let n = config.nodes_per_panel;
    let span = end - start;
    let mut value = Float::new(bits);
    let mut error = Float::new(bits);
    let mut mass = Float::new(bits);
    let mut nodes = 0usize;
    let over_budget = |used: usize, error: &Float| QuadError::PrecisionUnreachable {
        error_bound: to_sci_string(error),
        target: to_sci_string(tol),
        nodes_used: used,
    };

    let points = breakpoints(start, end);
    for pair in points.windows(2) {
        // Depth-first bisection; each stack entry carries its own estimate.
        let (whole, whole_mass) =
            accumulate(&panel_nodes(pair[0], pair[1], n, bits), x, order, bits);
        nodes += n;
        let mut stack = vec![(pair[0], pair[1], whole, whole_mass, 0u32)];
        while let Some((lo, hi, whole, _whole_mass, depth)) = stack.pop() {
            let mid = 0.5 * (lo + hi);
            let (left, left_mass) = accumulate(&panel_nodes(lo, mid, n, bits), x, order, bits);
            let (right, right_mass) = accumulate(&panel_nodes(mid, hi, n, bits), x, order, bits);
            nodes += 2 * n;
            if nodes + already_used > config.node_budget {
                return Err(over_budget(nodes + already_used, &error));
            }
            let refined = Float::with_val(bits, &left + &right);
            let estimate = Float::with_val(bits, &whole - &refined).abs();
            let share = Float::with_val(bits, tol * ((hi - lo) / span));
            if estimate <= share || depth >= MAX_PANEL_DEPTH {
                value += &refined;
                error += &estimate;
                mass += left_mass;
                mass += right_mass;
            } else {
                stack.push((mid, hi, right, right_mass, depth + 1));
                stack.push((lo, mid, left, left_mass, depth + 1));
            }
        }
    }
    Ok(PieceResult {
        value,
        error,
        mass,
        nodes,
    })
}

/// Inflection point `c` of `K` on `[0, 1]`, located by bisection on the sign of
/// `K''` down to a bracket narrower than `10⁻¹²`.
pub fn find_inflection(precision: Precision) -> Result<Float, QuadError> {
    find_inflection_with(precision, &QuadConfig::default())
}

pub fn find_inflection_with(precision: Precision, config: &QuadConfig) -> Result<Float, QuadError> {
    let bits = precision.bits();
    let second = |x: &Float| kurepa_family(x, 2, precision, config).map(|r| r.value);
    let mut lo = Float::new(bits);
    let mut hi = Float::with_val(bits, 1);
    let at_lo = second(&lo)?;
    let at_hi = second(&hi)?;
    if !(at_lo.is_sign_negative() && at_hi.is_sign_positive() && !at_hi.is_zero()) {
        return Err(QuadError::NoSignChange {
            at_zero: to_sci_string(&at_lo),
            at_one: to_sci_string(&at_hi),
        });
    }
    let width_target = precision.pow10_neg(12);
    while Float::with_val(bits, &hi - &lo) > width_target {
        let mid = Float::with_val(bits, &lo + &hi) / 2u32;
        let value = second(&mid)?;
        if value.is_sign_negative() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Float::with_val(bits, &lo + &hi) / 2u32)
}
