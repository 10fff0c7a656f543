//! Closed intervals of `Float` with outward directed rounding.

use std::cmp::Ordering;

use rug::float::Round;
use rug::ops::{AddAssignRound, DivAssignRound, MulAssignRound, SubAssignRound};
use rug::Float;

#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub lo: Float,
    pub hi: Float,
}

fn down(bits: u32, v: &Float) -> Float {
    Float::with_val_round(bits, v, Round::Down).0
}

fn up(bits: u32, v: &Float) -> Float {
    Float::with_val_round(bits, v, Round::Up).0
}

impl Interval {
    /// `[lo, hi]`, both ends rounded outward to `bits`.
    pub fn new(bits: u32, lo: &Float, hi: &Float) -> Interval {
        debug_assert!(lo <= hi, "interval ends out of order");
        Interval {
            lo: down(bits, lo),
            hi: up(bits, hi),
        }
    }

    pub fn point(bits: u32, x: &Float) -> Interval {
        Interval::new(bits, x, x)
    }

    pub fn zero(bits: u32) -> Interval {
        Interval {
            lo: Float::new(bits),
            hi: Float::new(bits),
        }
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec()
    }

    pub fn width(&self) -> Float {
        up(
            self.prec(),
            &Float::with_val(self.prec() + 2, &self.hi - &self.lo),
        )
    }

    pub fn contains(&self, x: &Float) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn add(&self, o: &Interval) -> Interval {
        let mut lo = self.lo.clone();
        lo.add_assign_round(&o.lo, Round::Down);
        let mut hi = self.hi.clone();
        hi.add_assign_round(&o.hi, Round::Up);
        Interval { lo, hi }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        let mut lo = self.lo.clone();
        lo.sub_assign_round(&o.hi, Round::Down);
        let mut hi = self.hi.clone();
        hi.sub_assign_round(&o.lo, Round::Up);
        Interval { lo, hi }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let products = [
            (&self.lo, &o.lo),
            (&self.lo, &o.hi),
            (&self.hi, &o.lo),
            (&self.hi, &o.hi),
        ];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (x, y) in products {
            let mut d = x.clone();
            d.mul_assign_round(y, Round::Down);
            let mut u = x.clone();
            u.mul_assign_round(y, Round::Up);
            if lo.as_ref().is_none_or(|l| d < *l) {
                lo = Some(d);
            }
            if hi.as_ref().is_none_or(|h| u > *h) {
                hi = Some(u);
            }
        }
        Interval {
            lo: lo.expect("four products"),
            hi: hi.expect("four products"),
        }
    }

    /// Division by an interval that lies strictly above zero.
    pub fn div_positive(&self, o: &Interval) -> Interval {
        assert!(
            o.lo.cmp0() == Some(Ordering::Greater),
            "divisor must be positive"
        );
        let mut lo = self.lo.clone();
        let lo_div = if lo.is_sign_negative() { &o.lo } else { &o.hi };
        lo.div_assign_round(lo_div, Round::Down);
        let mut hi = self.hi.clone();
        let hi_div = if hi.is_sign_negative() { &o.hi } else { &o.lo };
        hi.div_assign_round(hi_div, Round::Up);
        Interval { lo, hi }
    }

    /// Multiplication by the exact scalar `2^k`.
    pub fn scale_pow2(&self, k: i32) -> Interval {
        Interval {
            lo: Float::with_val(self.prec(), &self.lo << k),
            hi: Float::with_val(self.prec(), &self.hi << k),
        }
    }

    /// Intersection, or `None` if disjoint.
    pub fn intersect(&self, o: &Interval) -> Option<Interval> {
        let lo = if self.lo > o.lo { &self.lo } else { &o.lo };
        let hi = if self.hi < o.hi { &self.hi } else { &o.hi };
        (lo <= hi).then(|| Interval {
            lo: lo.clone(),
            hi: hi.clone(),
        })
    }
}

/// Enclosure of `Σ c_j T_j(s)` for all `s ∈ S`.
pub fn clenshaw(coefficients: &[Interval], s: &Interval) -> Interval {
    let bits = s.prec();
    let two_s = s.scale_pow2(1);
    let mut b1 = Interval::zero(bits);
    let mut b2 = Interval::zero(bits);
    for c in coefficients.iter().skip(1).rev() {
        let next = two_s.mul(&b1).sub(&b2).add(c);
        b2 = std::mem::replace(&mut b1, next);
    }
    s.mul(&b1).sub(&b2).add(&coefficients[0])
}

/// Chebyshev coefficients of `d/ds Σ c_j T_j(s)`, enclosed.
pub fn derivative_coefficients(c: &[Interval]) -> Vec<Interval> {
    let bits = c[0].prec();
    let n = c.len() - 1;
    if n == 0 {
        return vec![Interval::zero(bits)];
    }
    let mut d = vec![Interval::zero(bits); n + 1];
    for j in (1..=n).rev() {
        let two_j = Interval::point(bits, &Float::with_val(bits, 2 * j as u32));
        let next = if j < n {
            d[j + 1].clone()
        } else {
            Interval::zero(bits)
        };
        d[j - 1] = next.add(&c[j].mul(&two_j));
    }
    d[0] = d[0].scale_pow2(-1);
    d.truncate(n);
    d
}
