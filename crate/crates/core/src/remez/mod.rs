//! Minimax polynomial approximation by the multi-point (second) Remez exchange.
//!
//! Each iteration solves the levelled system `g(t_i) − P(t_i) = (−1)^i h` on
//! `k + 2` reference nodes, then replaces every node by a local extremum of the
//! residual `r = g − P`. Extrema are seeded from a dense Chebyshev grid and
//! polished by golden-section search. The iteration stops once the residual
//! magnitudes at the new nodes agree to a relative tolerance.

mod polynomial;

use rayon::prelude::*;
use rug::float::Constant;
use rug::Float;
use thiserror::Error;

use crate::expr::EvalError;
use crate::precision::{to_sci_string, Precision};

pub use polynomial::{clenshaw, Polynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RemezError {
    #[error("interval is empty: need a < b")]
    EmptyInterval,
    #[error("tolerance {tol:e} is below the attainable {floor:e} at this precision")]
    ToleranceTooSmall { tol: f64, floor: f64 },
    #[error(
        "levelled system is singular (pivot {pivot} at step {step}); reference nodes coincide"
    )]
    Singular { step: usize, pivot: String },
    #[error("reference nodes must be strictly increasing (violated at index {index})")]
    CoincidentNodes { index: usize },
    #[error("alternation lost: found {found} alternating extrema, need {needed} (grid of {grid_size} points)")]
    AlternationLost {
        found: usize,
        needed: usize,
        grid_size: usize,
    },
    #[error("no convergence after {iterations} iterations; levelled errors {history:?}")]
    NoConvergence {
        iterations: usize,
        history: Vec<String>,
    },
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemezConfig {
    /// Relative spread of the residual magnitudes at the nodes that counts as levelled.
    pub tol: f64,
    pub max_iterations: usize,
    /// Search grid size is `grid_multiplier · (k + 2)`.
    pub grid_multiplier: usize,
}

impl Default for RemezConfig {
    fn default() -> Self {
        RemezConfig {
            tol: 1e-12,
            max_iterations: 50,
            grid_multiplier: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxResult {
    pub polynomial: Polynomial,
    /// Largest residual magnitude seen on the grid and at the nodes.
    pub delta_hat: Float,
    /// `k + 2` strictly increasing extremum locations of the final residual.
    pub nodes: Vec<Float>,
    /// `g(t_i) − P(t_i)` at `nodes`.
    pub node_residuals: Vec<Float>,
    /// Number of levelled solves performed.
    pub iterations: usize,
    /// `|h|` after each solve.
    pub levelled_error_history: Vec<Float>,
    /// Smallest residual magnitude at the nodes.
    pub lower_bound: Float,
    pub upper_bound: Float,
}

/// The `k + 2` Chebyshev extrema of `T_{k+1}` mapped to `[a, b]`, ascending.
pub fn initial_nodes(a: &Float, b: &Float, k: usize) -> Vec<Float> {
    let bits = a.prec().max(b.prec());
    let mid = Float::with_val(bits, a + b) / 2u32;
    let half = Float::with_val(bits, b - a) / 2u32;
    let pi = Float::with_val(bits, Constant::Pi);
    let last = k + 1;
    (0..=last)
        .map(|j| {
            if j == 0 {
                return Float::with_val(bits, a);
            }
            if j == last {
                return Float::with_val(bits, b);
            }
            // sin form keeps the set symmetric and hits the centre exactly.
            let num = 2 * j as i64 - last as i64;
            let angle = Float::with_val(bits, &pi * num) / (2 * last as u32);
            Float::with_val(bits, &half * angle.sin()) + &mid
        })
        .collect()
}

/// `count ≥ 2` Chebyshev extrema on `[a, b]`, endpoints included, ascending.
pub fn chebyshev_grid(a: &Float, b: &Float, count: usize) -> Vec<Float> {
    let bits = a.prec().max(b.prec());
    let count = count.max(2);
    let mid = Float::with_val(bits, a + b) / 2u32;
    let half = Float::with_val(bits, b - a) / 2u32;
    let pi = Float::with_val(bits, Constant::Pi);
    (0..count)
        .map(|i| {
            if i == 0 {
                return Float::with_val(bits, a);
            }
            if i == count - 1 {
                return Float::with_val(bits, b);
            }
            let angle = Float::with_val(bits, &pi * i as u32) / (count as u32 - 1);
            mid.clone() - Float::with_val(bits, &half * angle.cos())
        })
        .collect()
}

/// Solves `g_i = P(t_i) + (−1)^i h` for the degree-`k` polynomial `P` and `h`,
/// where `k + 2 = nodes.len()`, by Gaussian elimination with full pivoting.
pub fn solve_levelled_values(
    values: &[Float],
    nodes: &[Float],
    a: &Float,
    b: &Float,
) -> Result<(Polynomial, Float), RemezError> {
    let size = nodes.len();
    assert!(
        size >= 2 && values.len() == size,
        "need k + 2 nodes and values"
    );
    if let Some(index) = (1..size).find(|&i| nodes[i] <= nodes[i - 1]) {
        return Err(RemezError::CoincidentNodes { index });
    }
    let bits = values[0].prec().max(nodes[0].prec());
    let shell = Polynomial::constant(
        Float::with_val(bits, 1),
        Float::with_val(bits, a),
        Float::with_val(bits, b),
    );
    let mut matrix: Vec<Vec<Float>> = nodes
        .iter()
        .zip(values)
        .enumerate()
        .map(|(i, (t, g))| {
            let s = shell.to_unit(t);
            let mut row = Vec::with_capacity(size + 1);
            let mut t_prev = Float::with_val(bits, 1);
            let mut t_cur = s.clone();
            row.push(t_prev.clone());
            for _ in 1..size - 1 {
                row.push(t_cur.clone());
                let next = Float::with_val(bits, &s * &t_cur) * 2u32 - &t_prev;
                t_prev = std::mem::replace(&mut t_cur, next);
            }
            row.push(Float::with_val(bits, if i % 2 == 0 { 1 } else { -1 }));
            row.push(Float::with_val(bits, g));
            row
        })
        .collect();
    let solution = full_pivot_solve(&mut matrix, bits)?;
    let h = solution[size - 1].clone();
    let coefficients = solution[..size - 1].to_vec();
    Ok((
        Polynomial::new(
            coefficients,
            Float::with_val(bits, a),
            Float::with_val(bits, b),
        ),
        h,
    ))
}

/// Evaluates `g` at `nodes` and solves the levelled system.
pub fn solve_levelled_system<G>(
    g: &G,
    nodes: &[Float],
    a: &Float,
    b: &Float,
) -> Result<(Polynomial, Float), RemezError>
where
    G: Fn(&Float) -> Result<Float, EvalError> + Sync,
{
    let values = nodes.par_iter().map(g).collect::<Result<Vec<_>, _>>()?;
    solve_levelled_values(&values, nodes, a, b)
}

/// In-place elimination on the augmented `n × (n + 1)` matrix.
fn full_pivot_solve(m: &mut [Vec<Float>], bits: u32) -> Result<Vec<Float>, RemezError> {
    let n = m.len();
    let mut columns: Vec<usize> = (0..n).collect();
    let scale = m
        .iter()
        .flat_map(|row| row[..n].iter())
        .map(|v| v.clone().abs())
        .fold(Float::new(bits), |acc, v| if v > acc { v } else { acc });
    let tiny = scale * Float::with_val(bits, Float::i_exp(1, -(bits as i32) + 8));
    for step in 0..n {
        let (mut pr, mut pc) = (step, step);
        let mut best = Float::new(bits);
        for (r, row) in m.iter().enumerate().skip(step) {
            for (c, v) in row.iter().enumerate().take(n).skip(step) {
                let mag = Float::with_val(bits, v.abs_ref());
                if mag > best {
                    best = mag;
                    pr = r;
                    pc = c;
                }
            }
        }
        if best <= tiny {
            return Err(RemezError::Singular {
                step,
                pivot: to_sci_string(&best),
            });
        }
        m.swap(step, pr);
        if pc != step {
            for row in m.iter_mut() {
                row.swap(step, pc);
            }
            columns.swap(step, pc);
        }
        let pivot_row = m[step].clone();
        for row in m.iter_mut().skip(step + 1) {
            if row[step].is_zero() {
                continue;
            }
            let factor = Float::with_val(bits, &row[step] / &pivot_row[step]);
            for (v, p) in row.iter_mut().zip(&pivot_row).skip(step) {
                *v -= Float::with_val(bits, &factor * p);
            }
        }
    }
    let mut permuted = vec![Float::new(bits); n];
    for i in (0..n).rev() {
        let mut acc = m[i][n].clone();
        for j in i + 1..n {
            acc -= Float::with_val(bits, &m[i][j] * &permuted[j]);
        }
        permuted[i] = acc / &m[i][i];
    }
    let mut solution = vec![Float::new(bits); n];
    for (slot, value) in columns.iter().zip(permuted) {
        solution[*slot] = value;
    }
    Ok(solution)
}

/// The search grid with cached function values.
#[derive(Debug, Clone)]
pub struct SearchGrid {
    pub points: Vec<Float>,
    pub values: Vec<Float>,
}

impl SearchGrid {
    pub fn new<G>(g: &G, a: &Float, b: &Float, size: usize) -> Result<SearchGrid, RemezError>
    where
        G: Fn(&Float) -> Result<Float, EvalError> + Sync,
    {
        let points = chebyshev_grid(a, b, size);
        let values = points.par_iter().map(g).collect::<Result<Vec<_>, _>>()?;
        Ok(SearchGrid { points, values })
    }

    pub fn residuals(&self, p: &Polynomial) -> Vec<Float> {
        self.points
            .iter()
            .zip(&self.values)
            .map(|(x, v)| Float::with_val(v.prec(), v - p.evaluate(x)))
            .collect()
    }
}

/// A point with its function value and residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Extremum {
    pub x: Float,
    pub value: Float,
    pub residual: Float,
}

/// Maximises `sign · (g − P)` on `[lo, hi]` by golden-section search, starting
/// from a known point `start`; returns the best point seen.
fn golden_refine<G>(
    g: &G,
    p: &Polynomial,
    lo: &Float,
    hi: &Float,
    start: Extremum,
    width_tol: &Float,
) -> Result<Extremum, EvalError>
where
    G: Fn(&Float) -> Result<Float, EvalError> + Sync,
{
    let bits = start.value.prec();
    let positive = start.residual.is_sign_positive();
    let score = |r: &Float| if positive { r.clone() } else { -r.clone() };
    let probe = |x: Float| -> Result<Extremum, EvalError> {
        let value = g(&x)?;
        let residual = Float::with_val(bits, &value - p.evaluate(&x));
        Ok(Extremum { x, value, residual })
    };
    let inv_phi = (Float::with_val(bits, 5).sqrt() - 1u32) / 2u32;
    let mut best = start;
    let mut lo = lo.clone();
    let mut hi = hi.clone();
    let mut c = probe(Float::with_val(
        bits,
        &hi - Float::with_val(bits, &hi - &lo) * &inv_phi,
    ))?;
    let mut d = probe(Float::with_val(
        bits,
        &lo + Float::with_val(bits, &hi - &lo) * &inv_phi,
    ))?;
    while Float::with_val(bits, &hi - &lo) > *width_tol {
        if score(&c.residual) > score(&d.residual) {
            hi = d.x.clone();
            d = c;
            c = probe(Float::with_val(
                bits,
                &hi - Float::with_val(bits, &hi - &lo) * &inv_phi,
            ))?;
            if score(&d.residual) > score(&best.residual) {
                best = d.clone();
            }
        } else {
            lo = c.x.clone();
            c = d;
            d = probe(Float::with_val(
                bits,
                &lo + Float::with_val(bits, &hi - &lo) * &inv_phi,
            ))?;
            if score(&c.residual) > score(&best.residual) {
                best = c.clone();
            }
        }
    }
    for cand in [c, d] {
        if score(&cand.residual) > score(&best.residual) {
            best = cand;
        }
    }
    Ok(best)
}

/// One exchange: returns `k + 2` alternating local extrema of `g − P`,
/// always including the global extremum over the grid.
pub fn exchange<G>(
    g: &G,
    p: &Polynomial,
    grid: &SearchGrid,
    k: usize,
) -> Result<Vec<Extremum>, RemezError>
where
    G: Fn(&Float) -> Result<Float, EvalError> + Sync,
{
    let needed = k + 2;
    let residuals = grid.residuals(p);
    let count = grid.points.len();
    // Argmax of |r| over each maximal run of constant sign.
    let mut seeds: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < count {
        if residuals[i].is_zero() {
            i += 1;
            continue;
        }
        let sign = residuals[i].is_sign_positive();
        let mut arg = i;
        let mut j = i;
        while j < count && (residuals[j].is_zero() || residuals[j].is_sign_positive() == sign) {
            if residuals[j].as_abs().gt(&*residuals[arg].as_abs()) {
                arg = j;
            }
            j += 1;
        }
        seeds.push(arg);
        i = j;
    }
    if seeds.len() < needed {
        return Err(RemezError::AlternationLost {
            found: seeds.len(),
            needed,
            grid_size: count,
        });
    }
    let (a, b) = p.segment();
    let width_tol = Float::with_val(grid.points[0].prec(), b - a)
        * Float::with_val(grid.points[0].prec(), 1e-12);
    let refined = seeds
        .par_iter()
        .map(|&s| {
            let lo = &grid.points[s.saturating_sub(1)];
            let hi = &grid.points[(s + 1).min(count - 1)];
            let start = Extremum {
                x: grid.points[s].clone(),
                value: grid.values[s].clone(),
                residual: residuals[s].clone(),
            };
            golden_refine(g, p, lo, hi, start, &width_tol)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(reduce_alternation(refined, needed))
}

/// Trims an alternating list of extrema to `needed` entries without losing
/// the largest magnitude.
fn reduce_alternation(mut ext: Vec<Extremum>, needed: usize) -> Vec<Extremum> {
    while ext.len() > needed {
        if ext.len() == needed + 1 {
            let last = ext.len() - 1;
            if ext[0].residual.as_abs().lt(&*ext[last].residual.as_abs()) {
                ext.remove(0);
            } else {
                ext.pop();
            }
            continue;
        }
        let weakest = (0..ext.len())
            .min_by(|&i, &j| {
                ext[i]
                    .residual
                    .as_abs()
                    .partial_cmp(&*ext[j].residual.as_abs())
                    .expect("finite residuals")
            })
            .expect("non-empty");
        ext.remove(weakest);
        if weakest > 0 && weakest < ext.len() {
            // The neighbours now share a sign; keep the larger one.
            let (l, r) = (weakest - 1, weakest);
            if ext[l].residual.as_abs().lt(&*ext[r].residual.as_abs()) {
                ext.remove(l);
            } else {
                ext.remove(r);
            }
        }
    }
    ext
}

fn max_abs(values: &[Float], bits: u32) -> Float {
    values
        .iter()
        .map(|v| Float::with_val(bits, v.abs_ref()))
        .fold(Float::new(bits), |acc, v| if v > acc { v } else { acc })
}

/// Residuals below `10^(−(digits − 10)) · scale` count as zero.
pub fn absolute_floor(precision: Precision, scale: &Float) -> Float {
    let bits = precision.bits();
    let unit = if scale.is_zero() {
        Float::with_val(bits, 1)
    } else {
        Float::with_val(bits, scale)
    };
    precision.pow10_neg(precision.digits() as i32 - 10) * unit
}

/// Degree-`k` minimax approximation of `g` on `[a, b]`.
pub fn minimax<G>(
    g: &G,
    a: &Float,
    b: &Float,
    k: usize,
    config: &RemezConfig,
    precision: Precision,
) -> Result<MinimaxResult, RemezError>
where
    G: Fn(&Float) -> Result<Float, EvalError> + Sync,
{
    let bits = precision.bits();
    if a >= b {
        return Err(RemezError::EmptyInterval);
    }
    let floor = 10f64.powi(-(precision.digits() as i32) + 10);
    if config.tol.is_nan() || config.tol < floor {
        return Err(RemezError::ToleranceTooSmall {
            tol: config.tol,
            floor,
        });
    }
    let a = Float::with_val(bits, a);
    let b = Float::with_val(bits, b);
    let grid = SearchGrid::new(g, &a, &b, config.grid_multiplier.max(4) * (k + 2))?;
    let scale = max_abs(&grid.values, bits);
    let abs_floor = absolute_floor(precision, &scale);
    let tol = Float::with_val(bits, config.tol);

    let mut nodes = initial_nodes(&a, &b, k);
    let mut values = nodes.par_iter().map(g).collect::<Result<Vec<_>, _>>()?;
    let mut history = Vec::new();
    for iteration in 1..=config.max_iterations {
        let (p, h) = solve_levelled_values(&values, &nodes, &a, &b)?;
        history.push(Float::with_val(bits, h.abs_ref()));
        let grid_max = max_abs(&grid.residuals(&p), bits);
        if grid_max <= abs_floor {
            let node_residuals: Vec<Float> = nodes
                .iter()
                .zip(&values)
                .map(|(t, v)| Float::with_val(bits, v - p.evaluate(t)))
                .collect();
            let node_max = max_abs(&node_residuals, bits);
            let upper = if node_max > grid_max {
                node_max
            } else {
                grid_max
            };
            let lower = node_residuals
                .iter()
                .map(|r| Float::with_val(bits, r.abs_ref()))
                .fold(upper.clone(), |acc, v| if v < acc { v } else { acc });
            return Ok(MinimaxResult {
                polynomial: p,
                delta_hat: upper.clone(),
                nodes,
                node_residuals,
                iterations: iteration,
                levelled_error_history: history,
                lower_bound: lower,
                upper_bound: upper,
            });
        }
        let extrema = exchange(g, &p, &grid, k)?;
        let mags: Vec<Float> = extrema
            .iter()
            .map(|e| Float::with_val(bits, e.residual.abs_ref()))
            .collect();
        let node_max = max_abs(&mags, bits);
        let node_min = mags.iter().fold(
            node_max.clone(),
            |acc, v| if *v < acc { v.clone() } else { acc },
        );
        let upper = if node_max > grid_max {
            node_max.clone()
        } else {
            grid_max
        };
        let spread = Float::with_val(bits, &node_max - &node_min) / &node_max;
        nodes = extrema.iter().map(|e| e.x.clone()).collect();
        values = extrema.iter().map(|e| e.value.clone()).collect();
        if spread <= tol {
            return Ok(MinimaxResult {
                polynomial: p,
                delta_hat: upper.clone(),
                nodes,
                node_residuals: extrema.into_iter().map(|e| e.residual).collect(),
                iterations: iteration,
                levelled_error_history: history,
                lower_bound: node_min,
                upper_bound: upper,
            });
        }
    }
    Err(RemezError::NoConvergence {
        iterations: config.max_iterations,
        history: history.iter().map(to_sci_string).collect(),
    })
}

/// Outcome of checking the equioscillation property of a result.
#[derive(Debug, Clone, PartialEq)]
pub struct EquioscillationReport {
    pub passed: bool,
    /// `g(t_i) − P(t_i)` recomputed at each node.
    pub residuals: Vec<Float>,
    /// Nodes whose sign or magnitude violates the property.
    pub offending: Vec<usize>,
    /// `max_i | |r_i| − δ̂ | / δ̂`.
    pub relative_spread: Float,
    pub zero_residual: bool,
}

/// Recomputes the node residuals and checks that they alternate in sign with
/// magnitudes within `rel_tol` of `δ̂`. A result whose `δ̂` and node residuals
/// are all below `abs_floor` passes as an exact representation.
pub fn verify_equioscillation<G>(
    result: &MinimaxResult,
    g: &G,
    rel_tol: f64,
    abs_floor: &Float,
) -> Result<EquioscillationReport, EvalError>
where
    G: Fn(&Float) -> Result<Float, EvalError> + Sync,
{
    let bits = result.delta_hat.prec();
    let residuals = result
        .nodes
        .par_iter()
        .map(|t| g(t).map(|v| Float::with_val(bits, v - result.polynomial.evaluate(t))))
        .collect::<Result<Vec<_>, _>>()?;
    let delta = &result.delta_hat;
    if *delta <= *abs_floor && residuals.iter().all(|r| r.as_abs().le(abs_floor)) {
        return Ok(EquioscillationReport {
            passed: true,
            residuals,
            offending: Vec::new(),
            relative_spread: Float::new(bits),
            zero_residual: true,
        });
    }
    let tol = Float::with_val(bits, rel_tol);
    let mut offending = Vec::new();
    let mut spread = Float::new(bits);
    for (i, r) in residuals.iter().enumerate() {
        let dev = Float::with_val(bits, Float::with_val(bits, r.abs_ref()) - delta).abs() / delta;
        let sign_ok = i == 0 || (r.cmp0() != residuals[i - 1].cmp0() && !r.is_zero());
        if dev > tol || !sign_ok || r.is_zero() {
            offending.push(i);
        }
        if dev > spread {
            spread = dev;
        }
    }
    Ok(EquioscillationReport {
        passed: offending.is_empty(),
        residuals,
        offending,
        relative_spread: spread,
        zero_residual: false,
    })
}
