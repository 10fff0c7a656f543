//! Gauss–Legendre rules at arbitrary precision.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::float::Constant;
use rug::Float;

/// Nodes and weights of the `n`-point rule on [-1, 1], ascending.
#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
}

type RuleCache = Mutex<HashMap<(u32, usize), Arc<GaussLegendre>>>;

fn cache() -> &'static RuleCache {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached `n`-point rule with `bits` of mantissa.
pub fn rule(n: usize, bits: u32) -> Arc<GaussLegendre> {
    if let Some(r) = cache().lock().expect("rule cache").get(&(bits, n)) {
        return Arc::clone(r);
    }
    let built = Arc::new(build(n, bits));
    cache()
        .lock()
        .expect("rule cache")
        .entry((bits, n))
        .or_insert(built)
        .clone()
}

/// Legendre P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: &Float) -> (Float, Float) {
    let bits = x.prec();
    let mut p0 = Float::with_val(bits, 1);
    let mut p1 = x.clone();
    for k in 2..=n {
        let k_f = k as u32;
        // k P_k = (2k-1) x P_{k-1} - (k-1) P_{k-2}
        let mut next = Float::with_val(bits, x * &p1);
        next *= 2 * k_f - 1;
        next -= Float::with_val(bits, &p0 * (k_f - 1));
        next /= k_f;
        p0 = std::mem::replace(&mut p1, next);
    }
    // (1 - x^2) P_n' = n (P_{n-1} - x P_n)
    let one_minus_x2 = Float::with_val(bits, 1) - Float::with_val(bits, x * x);
    let mut dp = Float::with_val(bits, &p0 - Float::with_val(bits, x * &p1));
    dp *= n as u32;
    dp /= one_minus_x2;
    (p1, dp)
}

fn build(n: usize, bits: u32) -> GaussLegendre {
    assert!(n >= 2, "Gauss-Legendre rule needs at least two nodes");
    let work = bits + 32;
    let pi = Float::with_val(work, Constant::Pi);
    let tol = Float::with_val(work, Float::i_exp(1, -(bits as i32) - 8));
    let half = n.div_ceil(2);
    let mut positive = Vec::with_capacity(half);
    for i in 0..half {
        // Tricomi-style initial guess for the i-th largest root.
        let theta = Float::with_val(work, &pi * (4 * i as u32 + 3)) / (4 * n as u32 + 2);
        let mut x = theta.cos();
        for _ in 0..200 {
            let (p, dp) = legendre(n, &x);
            let step = Float::with_val(work, &p / &dp);
            x -= &step;
            if step.abs() <= tol {
                break;
            }
        }
        let (_, dp) = legendre(n, &x);
        let one_minus_x2 = Float::with_val(work, 1) - Float::with_val(work, &x * &x);
        let w = Float::with_val(work, 2) / (one_minus_x2 * Float::with_val(work, &dp * &dp));
        positive.push((x, w));
    }
    // `positive` runs from the largest root down; for odd n its last entry is
    // the centre root, which is pinned to exactly zero.
    let centre = (n % 2 == 1).then(|| positive.pop().expect("centre root"));
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (x, w) in positive.iter() {
        nodes.push(Float::with_val(bits, -x));
        weights.push(Float::with_val(bits, w));
    }
    if let Some((_, w)) = centre {
        nodes.push(Float::new(bits));
        weights.push(Float::with_val(bits, w));
    }
    for (x, w) in positive.iter().rev() {
        nodes.push(Float::with_val(bits, x));
        weights.push(Float::with_val(bits, w));
    }
    GaussLegendre { nodes, weights }
}
