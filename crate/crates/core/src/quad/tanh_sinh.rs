//! Double-exponential quadrature on `[0, 1 − ε]`.
//!
//! With `t = L/(1 + e^(−2s))`, `s = (π/2) sinh τ` and `L = 1 − ε`, the integrand
//! decays doubly exponentially in `τ` at both ends, so the trapezoidal rule in
//! `τ` converges geometrically even with `t^x lnᵏ t` behaviour at `t = 0`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::float::Constant;
use rug::Float;

use super::{accumulate, Node, PieceResult, QuadConfig, QuadError};
use crate::precision::{to_sci_string, Precision};

const MIN_LEVEL: u32 = 3;
const MAX_LEVEL: u32 = 14;

type LevelKey = (u32, u64, u32, u32);
type LevelCache = Mutex<HashMap<LevelKey, Arc<Vec<Node>>>>;

fn cache() -> &'static LevelCache {
    static CACHE: OnceLock<LevelCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Half-range `τ_max` beyond which the transformed weights are below `10^(−digits)`.
fn tau_max(digits: u32, order: u32) -> f64 {
    let s = (digits as f64 + 20.0) * std::f64::consts::LN_10 + 10.0 + 5.0 * order as f64;
    (s / std::f64::consts::PI).asinh()
}

/// Nodes first appearing at `level`: every `τ = k h` for level 0, odd `k` afterwards.
fn level_nodes(level: u32, length: &Float, digits: u32, order: u32) -> Arc<Vec<Node>> {
    let bits = length.prec();
    let key = (bits, length.to_f64().to_bits(), level, order);
    if let Some(hit) = cache().lock().expect("tanh-sinh cache").get(&key) {
        return hit.clone();
    }
    let h = (0.5f64).powi(level as i32);
    let limit = tau_max(digits, order);
    let count = (limit / h).floor() as i64;
    let step = if level == 0 { 1 } else { 2 };
    let start = if level == 0 { -count } else { -count | 1 };
    let half_pi = Float::with_val(bits, Constant::Pi) / 2u32;
    let ln_length = Float::with_val(bits, length.ln_ref());
    let mut nodes = Vec::new();
    let mut k = start;
    while k <= count {
        let tau = Float::with_val(bits, k) * Float::with_val(bits, h);
        let s = Float::with_val(bits, &half_pi * Float::with_val(bits, tau.sinh_ref()));
        let decay = Float::with_val(bits, -Float::with_val(bits, &s * 2u32)).exp();
        // ln t = ln L − ln(1 + e^(−2s)) keeps full relative accuracy as t → 0.
        let ln_t = Float::with_val(bits, &ln_length - Float::with_val(bits, decay.ln_1p_ref()));
        let t = Float::with_val(bits, ln_t.exp_ref());
        let cosh_s = Float::with_val(bits, s.cosh_ref());
        let mut weight = Float::with_val(bits, length * Float::with_val(bits, tau.cosh_ref()));
        weight *= &half_pi;
        weight /= Float::with_val(bits, &cosh_s * &cosh_s) * 2u32;
        weight *= Float::with_val(bits, -&t).exp();
        weight /= Float::with_val(bits, &t - 1u32);
        if !weight.is_zero() {
            nodes.push(Node { weight, ln_t });
        }
        k += step;
    }
    let nodes = Arc::new(nodes);
    cache()
        .lock()
        .expect("tanh-sinh cache")
        .entry(key)
        .or_insert(nodes)
        .clone()
}

pub(crate) fn integrate(
    x: &Float,
    order: u32,
    work: Precision,
    eps: &Float,
    config: &QuadConfig,
    tol: &Float,
) -> Result<PieceResult, QuadError> {
    let bits = work.bits();
    let length = Float::with_val(bits, 1u32 - eps);
    let mut raw = Float::new(bits);
    let mut raw_mass = Float::new(bits);
    let mut estimates: Vec<Float> = Vec::new();
    let mut nodes_used = 0usize;
    let mut accepted_at: Option<u32> = None;
    let mut error = Float::with_val(bits, f64::INFINITY);

    for level in 0..=MAX_LEVEL {
        let nodes = level_nodes(level, &length, work.digits(), order);
        nodes_used += nodes.len();
        if nodes_used > config.node_budget {
            return Err(QuadError::PrecisionUnreachable {
                error_bound: to_sci_string(&error),
                target: to_sci_string(tol),
                nodes_used,
            });
        }
        let (sum, mass) = accumulate(&nodes, x, order, bits);
        raw += sum;
        raw_mass += mass;
        let h = Float::with_val(bits, Float::i_exp(1, -(level as i32)));
        estimates.push(Float::with_val(bits, &raw * &h));

        if estimates.len() >= 3 {
            let n = estimates.len();
            let d1 = Float::with_val(bits, &estimates[n - 1] - &estimates[n - 2]).abs();
            let d2 = Float::with_val(bits, &estimates[n - 2] - &estimates[n - 3]).abs();
            // Geometric convergence: the next correction is about d1²/d2.
            error = if d1.is_zero() || d2.is_zero() {
                d1
            } else {
                let e = Float::with_val(bits, &d1 * &d1) / &d2;
                if e > d1 {
                    d1
                } else {
                    e
                }
            };
        }
        match accepted_at {
            None if level >= MIN_LEVEL && error <= *tol => {
                accepted_at = Some(level);
                if config.extra_levels == 0 {
                    break;
                }
            }
            Some(at) if level >= at + config.extra_levels => break,
            _ => {}
        }
    }
    if accepted_at.is_none() {
        return Err(QuadError::PrecisionUnreachable {
            error_bound: to_sci_string(&error),
            target: to_sci_string(tol),
            nodes_used,
        });
    }
    let h = Float::with_val(bits, Float::i_exp(1, -((estimates.len() - 1) as i32)));
    Ok(PieceResult {
        value: estimates.pop().expect("at least one level"),
        error,
        mass: raw_mass * h,
        nodes: nodes_used,
    })
}
