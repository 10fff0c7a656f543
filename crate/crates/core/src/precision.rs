//! Working precision and decimal conversion helpers.

use std::fmt;

use rug::float::Round;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::Serialize;
use thiserror::Error;

/// Default number of significant decimal digits.
pub const DEFAULT_DIGITS: u32 = 50;
/// Smallest accepted working precision.
pub const MIN_DIGITS: u32 = 15;

const LOG2_10: f64 = std::f64::consts::LOG2_10;
const GUARD_BITS: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PrecisionError {
    #[error("precision of {0} decimal digits is below the minimum of {MIN_DIGITS}")]
    TooLow(u32),
    #[error("cannot parse {text:?} as a decimal number")]
    BadDecimal { text: String },
}

/// Working precision of all real arithmetic, in significant decimal digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Precision {
    decimal_digits: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Precision {
            decimal_digits: DEFAULT_DIGITS,
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} digits", self.decimal_digits)
    }
}

impl Precision {
    pub fn new(decimal_digits: u32) -> Result<Self, PrecisionError> {
        if decimal_digits < MIN_DIGITS {
            return Err(PrecisionError::TooLow(decimal_digits));
        }
        Ok(Precision { decimal_digits })
    }

    pub fn digits(self) -> u32 {
        self.decimal_digits
    }

    /// Mantissa bits used for a `Float` at this precision (includes guard bits).
    pub fn bits(self) -> u32 {
        (self.decimal_digits as f64 * LOG2_10).ceil() as u32 + GUARD_BITS
    }

    /// The same precision widened by `extra` decimal digits.
    pub fn widened(self, extra: u32) -> Precision {
        Precision {
            decimal_digits: self.decimal_digits + extra,
        }
    }

    pub fn zero(self) -> Float {
        Float::new(self.bits())
    }

    pub fn float<T>(self, value: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.bits(), value)
    }

    /// `10^(-k)` at this precision.
    pub fn pow10_neg(self, k: i32) -> Float {
        let ten = Float::with_val(self.bits(), 10);
        ten.pow(-k)
    }

    pub fn parse_decimal(self, text: &str) -> Result<Float, PrecisionError> {
        parse_decimal(text, self.bits())
    }
}

/// Parses a decimal (or simple fraction `p/q`) string into a `Float` with `bits`
/// of mantissa, rounding to nearest.
pub fn parse_decimal(text: &str, bits: u32) -> Result<Float, PrecisionError> {
    let trimmed = text.trim();
    let bad = || PrecisionError::BadDecimal {
        text: text.to_string(),
    };
    if let Some((num, den)) = trimmed.split_once('/') {
        let num = Float::parse(num.trim()).map_err(|_| bad())?;
        let den = Float::parse(den.trim()).map_err(|_| bad())?;
        let num = Float::with_val(bits + 32, num);
        let den = Float::with_val(bits + 32, den);
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(Float::with_val(bits, &num / &den));
    }
    let parsed = Float::parse(trimmed).map_err(|_| bad())?;
    let value = Float::with_val(bits, parsed);
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(value)
}

/// Renders `x` with `digits` significant decimal digits. Zero renders as `"0"`.
pub fn to_decimal_string(x: &Float, digits: u32) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits as usize))
}

/// Short scientific rendering used for error bounds and diagnostics.
pub fn to_sci_string(x: &Float) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(6))
}

/// Rounds `value` to `bits` in the given direction.
pub fn round_to(value: &Float, bits: u32, round: Round) -> Float {
    Float::with_val_round(bits, value, round).0
}

/// Parses a decimal (`"1.5"`, `"-2e-3"`) or fraction (`"3/2"`) string exactly.
pub fn parse_rational(text: &str) -> Result<Rational, PrecisionError> {
    let trimmed = text.trim();
    let bad = || PrecisionError::BadDecimal {
        text: text.to_string(),
    };
    if trimmed.contains('/') {
        return Rational::parse(trimmed)
            .map(Rational::from)
            .map_err(|_| bad());
    }
    let (mantissa, exponent) = match trimmed.find(['e', 'E']) {
        Some(i) => (
            &trimmed[..i],
            trimmed[i + 1..].parse::<i32>().map_err(|_| bad())?,
        ),
        None => (trimmed, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let numer = Integer::from_str_radix(&digits, 10).map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = Integer::from(10).pow(scale.unsigned_abs());
    let mut value = if scale >= 0 {
        Rational::from(numer * ten)
    } else {
        Rational::from((numer, ten))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}
