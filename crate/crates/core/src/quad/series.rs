//! The window `[1 − ε, 1 + ε]` around the removable singularity at `t = 1`.
//!
//! With `u = t − 1` the integrand is `e^(−1) e^(−u) F(u)` where
//! `F(u) = ((1+u)^x − 1)/u` for order 0 and `F(u) = (1+u)^x u^(k−1) L(u)^k`
//! with `L(u) = ln(1+u)/u` for order `k ≥ 1`. `F` is expanded as a power series
//! and integrated against the moments `M_i = ∫ e^(−u) u^i du` over `[−ε, ε]`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::ops::Pow;
use rug::Float;

use crate::precision::Precision;

pub(crate) struct SeriesResult {
    pub value: Float,
    pub error: Float,
    pub terms: usize,
}

fn term_count(digits: u32, order: u32, eps: f64) -> usize {
    let needed = (digits as f64 + 20.0) * std::f64::consts::LN_10 / (1.0 / eps).ln();
    needed.ceil() as usize + 12 + 2 * order as usize
}

type MomentKey = (u32, u64, usize);
type MomentCache = Mutex<HashMap<MomentKey, Arc<Vec<Float>>>>;

/// `M_i = Σ_l (−1)^l / l! · J_{i+l}` with `J_q = ∫ u^q du = 2ε^(q+1)/(q+1)` for even `q`.
fn moments(eps: &Float, count: usize) -> Arc<Vec<Float>> {
    static CACHE: OnceLock<MomentCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let bits = eps.prec();
    let key = (bits, eps.to_f64().to_bits(), count);
    if let Some(hit) = cache.lock().expect("moment cache").get(&key) {
        return hit.clone();
    }
    let floor = Float::with_val(bits, Float::i_exp(1, -(bits as i32) - 16));
    let j = |q: usize| -> Float {
        if q % 2 == 1 {
            Float::new(bits)
        } else {
            let p = Float::with_val(bits, eps.pow((q + 1) as u32));
            p * 2u32 / (q as u32 + 1)
        }
    };
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut sum = Float::new(bits);
        let mut coeff = Float::with_val(bits, 1);
        let mut l = 0usize;
        loop {
            let jq = j(i + l);
            if !jq.is_zero() {
                let term = Float::with_val(bits, &coeff * &jq);
                let small = Float::with_val(bits, term.abs_ref()) < floor;
                sum += term;
                if small && l > 2 {
                    break;
                }
            }
            l += 1;
            coeff /= l as u32;
            coeff = -coeff;
        }
        out.push(sum);
    }
    let out = Arc::new(out);
    cache
        .lock()
        .expect("moment cache")
        .entry(key)
        .or_insert(out)
        .clone()
}

/// Coefficients of `(1+u)^x`: `C(x, i)`.
fn binomials(x: &Float, count: usize) -> Vec<Float> {
    let bits = x.prec();
    let mut out = Vec::with_capacity(count);
    let mut c = Float::with_val(bits, 1);
    out.push(c.clone());
    for i in 1..count {
        c *= Float::with_val(bits, x - (i as u32 - 1));
        c /= i as u32;
        out.push(c.clone());
    }
    out
}

/// Coefficients of `L(u)^k`, `L(u) = Σ (−1)^j u^j/(j+1)`.
fn log_ratio_power(order: u32, count: usize, bits: u32) -> Vec<Float> {
    let base: Vec<Float> = (0..count)
        .map(|j| {
            let v = Float::with_val(bits, 1) / (j as u32 + 1);
            if j % 2 == 1 {
                -v
            } else {
                v
            }
        })
        .collect();
    let mut acc = base.clone();
    for _ in 1..order {
        acc = convolve(&acc, &base, count);
    }
    acc
}

fn convolve(a: &[Float], b: &[Float], count: usize) -> Vec<Float> {
    let bits = a[0].prec();
    (0..count)
        .map(|n| {
            let mut s = Float::new(bits);
            for i in 0..=n {
                s += Float::with_val(bits, &a[i] * &b[n - i]);
            }
            s
        })
        .collect()
}

fn coefficients(x: &Float, order: u32, count: usize) -> Vec<Float> {
    let bits = x.prec();
    if order == 0 {
        let mut c = binomials(x, count + 1);
        c.remove(0);
        return c;
    }
    let shift = order as usize - 1;
    let body = convolve(
        &binomials(x, count),
        &log_ratio_power(order, count, bits),
        count - shift,
    );
    let mut out = vec![Float::new(bits); shift];
    out.extend(body);
    out
}

pub(crate) fn integrate(x: &Float, order: u32, work: Precision, eps: &Float) -> SeriesResult {
    let bits = work.bits();
    let count = term_count(work.digits(), order, eps.to_f64());
    let m = moments(eps, count);
    let s = coefficients(x, order, count);
    let mut value = Float::new(bits);
    let mut last = Vec::with_capacity(count);
    for (si, mi) in s.iter().zip(m.iter()) {
        let term = Float::with_val(bits, si * mi);
        last.push(Float::with_val(bits, term.abs_ref()));
        value += term;
    }
    let e_inv = Float::with_val(bits, -1).exp();
    value *= &e_inv;
    // Odd moments are tiny but non-zero; the remainder behaves like the last
    // pair of terms times a geometric factor below 2.
    let n = last.len();
    let tail = Float::with_val(bits, &last[n - 1] + &last[n - 2]) * 2u32 * &e_inv;
    SeriesResult {
        value,
        error: tail,
        terms: count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_closed_forms() {
        let p = Precision::new(40).unwrap();
        let bits = p.bits();
        let eps = Float::with_val(bits, 0.125);
        let m = moments(&eps, 3);
        // M_0 = e^ε − e^(−ε) = 2 sinh ε.
        let m0 = Float::with_val(bits, eps.sinh_ref()) * 2u32;
        assert!(Float::with_val(bits, &m[0] - &m0).abs() < p.pow10_neg(45));
        // M_1 = ∫ u e^(−u) = [−(u+1)e^(−u)] = (1−ε)e^ε − (1+ε)e^(−ε).
        let ee = Float::with_val(bits, eps.exp_ref());
        let em = Float::with_val(bits, (-eps.clone()).exp());
        let m1 =
            Float::with_val(bits, 1u32 - &eps) * &ee - Float::with_val(bits, 1u32 + &eps) * &em;
        assert!(Float::with_val(bits, &m[1] - &m1).abs() < p.pow10_neg(45));
    }

    #[test]
    fn order_one_coefficients_at_zero_are_log_ratio() {
        let bits = 128;
        let c = coefficients(&Float::new(bits), 1, 5);
        let expected = [1.0, -0.5, 1.0 / 3.0, -0.25, 0.2];
        for (a, b) in c.iter().zip(expected) {
            assert!((a.to_f64() - b).abs() < 1e-15);
        }
    }

    #[test]
    fn order_two_shifts_by_one() {
        let bits = 128;
        let c = coefficients(&Float::new(bits), 2, 4);
        // u · L(u)² = u − u² + (11/12) u³ ...
        assert!(c[0].is_zero());
        assert!((c[1].to_f64() - 1.0).abs() < 1e-15);
        assert!((c[2].to_f64() + 1.0).abs() < 1e-15);
        assert!((c[3].to_f64() - 11.0 / 12.0).abs() < 1e-15);
    }
}
