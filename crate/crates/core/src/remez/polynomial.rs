use rug::Float;

/// Polynomial in the Chebyshev basis of `[a, b]`:
/// `P(x) = Σ c_j T_j(s)` with `s = (2x − a − b)/(b − a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coefficients: Vec<Float>,
    a: Float,
    b: Float,
}

impl Polynomial {
    /// Panics if `coefficients` is empty or `a ≥ b`.
    pub fn new(coefficients: Vec<Float>, a: Float, b: Float) -> Polynomial {
        assert!(!coefficients.is_empty(), "polynomial needs a coefficient");
        assert!(a < b, "segment must satisfy a < b");
        Polynomial { coefficients, a, b }
    }

    pub fn constant(value: Float, a: Float, b: Float) -> Polynomial {
        Polynomial::new(vec![value], a, b)
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[Float] {
        &self.coefficients
    }

    pub fn segment(&self) -> (&Float, &Float) {
        (&self.a, &self.b)
    }

    fn prec(&self) -> u32 {
        self.coefficients[0].prec()
    }

    /// Maps `x ∈ [a, b]` to `s ∈ [−1, 1]`.
    pub fn to_unit(&self, x: &Float) -> Float {
        let bits = self.prec();
        let num = Float::with_val(bits, x * 2u32) - &self.a - &self.b;
        num / Float::with_val(bits, &self.b - &self.a)
    }

    /// Clenshaw recurrence at `x`.
    pub fn evaluate(&self, x: &Float) -> Float {
        let s = self.to_unit(x);
        clenshaw(&self.coefficients, &s)
    }

    /// Coefficients scaled by `c`.
    pub fn scaled(&self, c: &Float) -> Polynomial {
        Polynomial {
            coefficients: self
                .coefficients
                .iter()
                .map(|v| Float::with_val(v.prec(), v * c))
                .collect(),
            a: self.a.clone(),
            b: self.b.clone(),
        }
    }

    /// Coefficients of `P` in powers of `x`, lowest degree first.
    pub fn to_monomial(&self) -> Vec<Float> {
        let bits = self.prec();
        let width = Float::with_val(bits, &self.b - &self.a);
        let u = Float::with_val(bits, 2) / &width;
        let v = -Float::with_val(bits, &self.a + &self.b) / &width;
        let s = vec![v, u];
        let n = self.coefficients.len();
        let mut out = vec![Float::new(bits); n];
        let mut prev = vec![Float::with_val(bits, 1)];
        let mut cur = s.clone();
        for (j, c) in self.coefficients.iter().enumerate() {
            let t = match j {
                0 => &prev,
                _ => &cur,
            };
            for (o, tv) in out.iter_mut().zip(t) {
                *o += Float::with_val(bits, c * tv);
            }
            if j >= 1 {
                // T_{j+1} = 2 s T_j − T_{j−1}
                let mut next = poly_mul(&s, &cur, bits);
                for v in next.iter_mut() {
                    *v *= 2u32;
                }
                for (nv, pv) in next.iter_mut().zip(&prev) {
                    *nv -= pv;
                }
                prev = std::mem::replace(&mut cur, next);
            }
        }
        out
    }

    /// Builds the Chebyshev form on `[a, b]` from monomial coefficients in `x`.
    pub fn from_monomial(monomial: &[Float], a: Float, b: Float) -> Polynomial {
        assert!(!monomial.is_empty(), "polynomial needs a coefficient");
        let bits = monomial[0].prec().max(a.prec());
        let half_width = Float::with_val(bits, &b - &a) / 2u32;
        let centre = Float::with_val(bits, &a + &b) / 2u32;
        // Horner: acc ← acc·x + c_j, with x = half_width·s + centre.
        let mut acc = vec![Float::with_val(bits, monomial.last().expect("non-empty"))];
        for c in monomial.iter().rev().skip(1) {
            let mut times_s = mul_by_s(&acc, bits);
            for v in times_s.iter_mut() {
                *v *= &half_width;
            }
            for (t, av) in times_s.iter_mut().zip(&acc) {
                *t += Float::with_val(bits, av * &centre);
            }
            times_s[0] += c;
            acc = times_s;
        }
        Polynomial::new(acc, a, b)
    }
}

/// `Σ c_j T_j(s)`.
pub fn clenshaw(c: &[Float], s: &Float) -> Float {
    let bits = c[0].prec();
    let two_s = Float::with_val(bits, s * 2u32);
    let mut b1 = Float::new(bits);
    let mut b2 = Float::new(bits);
    for cj in c.iter().skip(1).rev() {
        let next = Float::with_val(bits, &two_s * &b1) - &b2 + cj;
        b2 = std::mem::replace(&mut b1, next);
    }
    Float::with_val(bits, s * &b1) - &b2 + &c[0]
}

fn poly_mul(p: &[Float], q: &[Float], bits: u32) -> Vec<Float> {
    let mut out = vec![Float::new(bits); p.len() + q.len() - 1];
    for (i, pi) in p.iter().enumerate() {
        for (j, qj) in q.iter().enumerate() {
            out[i + j] += Float::with_val(bits, pi * qj);
        }
    }
    out
}

/// Chebyshev coefficients of `s · Σ c_j T_j(s)`.
fn mul_by_s(c: &[Float], bits: u32) -> Vec<Float> {
    let mut out = vec![Float::new(bits); c.len() + 1];
    for (j, cj) in c.iter().enumerate() {
        if j == 0 {
            out[1] += cj;
        } else {
            let half = Float::with_val(bits, cj / 2u32);
            out[j + 1] += &half;
            out[j - 1] += &half;
        }
    }
    out
}
