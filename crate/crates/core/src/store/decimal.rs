//! Exact decimal arithmetic with a canonical lexical form.
//!
//! Every decimal in the system is stored canonically: no exponent, no sign on
//! zero, at least one fractional digit, and no trailing zeros beyond that
//! (`0.5`, `1.0`, `-2.25`). Canonical representation makes structural equality
//! coincide with numeric equality, which the store relies on for set semantics
//! and byte-stable serialization.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

/// Max fractional digits accepted on input; keeps i128 arithmetic overflow-free.
const MAX_SCALE: u32 = 12;
/// Max absolute scaled magnitude accepted on input (10^18).
const MAX_UNITS: i128 = 1_000_000_000_000_000_000;
/// Fractional digits kept when a rational value does not terminate.
const ROUND_DIGITS: u32 = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecimalError {
    #[error("invalid decimal literal `{0}`")]
    Invalid(String),
    #[error("decimal literal `{0}` exceeds supported precision")]
    OutOfRange(String),
    #[error("division by zero")]
    DivisionByZero,
}

/// An exact decimal: `units / 10^scale`, always held in canonical form
/// (`scale >= 1`, no trailing zero unless the trim would drop below scale 1,
/// and zero is never negative).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Decimal {
    units: i128,
    scale: u32,
}

impl Decimal {
    fn canonical(mut units: i128, mut scale: u32) -> Decimal {
        if units == 0 {
            return Decimal { units: 0, scale: 1 };
        }
        while scale > 1 && units % 10 == 0 {
            units /= 10;
            scale -= 1;
        }
        if scale == 0 {
            units *= 10;
            scale = 1;
        }
        Decimal { units, scale }
    }

    /// Parses a plain decimal lexical form: `-?digits.digits` or `-?digits`.
    /// Integer-shaped input is accepted and normalized to one fractional digit.
    pub fn parse(text: &str) -> Result<Decimal, DecimalError> {
        let invalid = || DecimalError::Invalid(text.to_string());
        let (negative, digits) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text.strip_prefix('+').unwrap_or(text)),
        };
        let (int_part, frac_part) = match digits.split_once('.') {
            Some((i, f)) => (i, f),
            None => (digits, ""),
        };
        if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(invalid());
        }
        if !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(invalid());
        }
        if digits.contains('.') && frac_part.is_empty() {
            return Err(invalid());
        }
        // Trim for the range check so `0.5000000000000000` still parses.
        let frac_trimmed = frac_part.trim_end_matches('0');
        let scale = frac_trimmed.len() as u32;
        if scale > MAX_SCALE {
            return Err(DecimalError::OutOfRange(text.to_string()));
        }
        let mut units: i128 = 0;
        for b in int_part.bytes().chain(frac_trimmed.bytes()) {
            units = units
                .checked_mul(10)
                .and_then(|u| u.checked_add((b - b'0') as i128))
                .ok_or_else(|| DecimalError::OutOfRange(text.to_string()))?;
            if units > MAX_UNITS {
                return Err(DecimalError::OutOfRange(text.to_string()));
            }
        }
        if negative {
            units = -units;
        }
        Ok(Decimal::canonical(units, scale))
    }

    pub fn from_i64(value: i64) -> Decimal {
        Decimal::canonical(value as i128, 0)
    }

    /// Exact rational `numerator / denominator`, rendered per the canonical
    /// policy: exact expansion when the reduced denominator is of the form
    /// 2^a·5^b, otherwise rounded half-even to six fractional digits.
    pub fn from_ratio(numerator: i128, denominator: i128) -> Result<Decimal, DecimalError> {
        if denominator == 0 {
            return Err(DecimalError::DivisionByZero);
        }
        let (mut num, mut den) = (numerator, denominator);
        if den < 0 {
            num = -num;
            den = -den;
        }
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i128;
        num /= g;
        den /= g;
        let (twos, fives, rest) = factor_2_5(den);
        let scale = if rest == 1 {
            twos.max(fives)
        } else {
            ROUND_DIGITS
        };
        let shifted = num
            .checked_mul(pow10(scale))
            .ok_or(DecimalError::OutOfRange(format!("{numerator}/{denominator}")))?;
        let units = if rest == 1 {
            shifted / den // exact by construction
        } else {
            div_half_even(shifted, den)
        };
        if units.abs() > MAX_UNITS * 10 {
            return Err(DecimalError::OutOfRange(format!("{numerator}/{denominator}")));
        }
        Ok(Decimal::canonical(units, scale))
    }

    pub fn is_negative(&self) -> bool {
        self.units < 0
    }

    /// Numeric comparison against another decimal.
    pub fn cmp_value(&self, other: &Decimal) -> Ordering {
        let left = self.units * pow10(other.scale);
        let right = other.units * pow10(self.scale);
        left.cmp(&right)
    }

    /// Numeric comparison against an integer.
    pub fn cmp_i64(&self, value: i64) -> Ordering {
        self.units.cmp(&((value as i128) * pow10(self.scale)))
    }

    /// The value as an exact `(numerator, denominator)` pair.
    pub fn as_ratio(&self) -> (i128, i128) {
        (self.units, pow10(self.scale))
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_value(other)
    }
}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let magnitude = self.units.unsigned_abs();
        let divisor = pow10(self.scale) as u128;
        let int_part = magnitude / divisor;
        let frac_part = magnitude % divisor;
        if self.units < 0 {
            write!(f, "-")?;
        }
        write!(f, "{int_part}.{frac_part:0width$}", width = self.scale as usize)
    }
}

fn pow10(exp: u32) -> i128 {
    10i128.pow(exp)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

fn factor_2_5(mut den: i128) -> (u32, u32, i128) {
    let mut twos = 0;
    let mut fives = 0;
    while den % 2 == 0 {
        den /= 2;
        twos += 1;
    }
    while den % 5 == 0 {
        den /= 5;
        fives += 1;
    }
    (twos, fives, den)
}

/// Integer division rounding half-to-even; `den > 0`.
fn div_half_even(num: i128, den: i128) -> i128 {
    let sign = if num < 0 { -1 } else { 1 };
    let a = num.unsigned_abs();
    let d = den.unsigned_abs();
    let q = a / d;
    let r = a % d;
    let rounded = match (2 * r).cmp(&d) {
        Ordering::Less => q,
        Ordering::Greater => q + 1,
        Ordering::Equal => {
            if q % 2 == 0 {
                q
            } else {
                q + 1
            }
        }
    };
    sign * rounded as i128
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_canonicalizes_trailing_zeros() {
        assert_eq!(Decimal::parse("0.50").unwrap().to_string(), "0.5");
        assert_eq!(Decimal::parse("1.000").unwrap().to_string(), "1.0");
        assert_eq!(Decimal::parse("0.05").unwrap().to_string(), "0.05");
        assert_eq!(Decimal::parse("-2.250").unwrap().to_string(), "-2.25");
        assert_eq!(Decimal::parse("7").unwrap().to_string(), "7.0");
    }

    #[test]
    fn zero_is_never_negative() {
        assert_eq!(Decimal::parse("-0.0").unwrap().to_string(), "0.0");
        assert_eq!(Decimal::parse("-0.000").unwrap(), Decimal::parse("0.0").unwrap());
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["", ".", "1.", ".5", "1e3", "1.2.3", "--1", "0x1", "1 .0"] {
            assert!(Decimal::parse(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn rejects_excess_precision() {
        assert!(matches!(
            Decimal::parse("0.1234567890123"),
            Err(DecimalError::OutOfRange(_))
        ));
        assert!(Decimal::parse("99999999999999999999").is_err());
    }

    #[test]
    fn ratio_terminating_is_exact() {
        assert_eq!(Decimal::from_ratio(3, 6).unwrap().to_string(), "0.5");
        assert_eq!(Decimal::from_ratio(1, 8).unwrap().to_string(), "0.125");
        assert_eq!(Decimal::from_ratio(4, 2).unwrap().to_string(), "2.0");
        assert_eq!(Decimal::from_ratio(0, 20).unwrap().to_string(), "0.0");
        // terminating expansions longer than six digits stay exact
        assert_eq!(Decimal::from_ratio(1, 10_000_000).unwrap().to_string(), "0.0000001");
    }

    #[test]
    fn ratio_non_terminating_rounds_to_six_digits() {
        assert_eq!(Decimal::from_ratio(1, 3).unwrap().to_string(), "0.333333");
        assert_eq!(Decimal::from_ratio(2, 3).unwrap().to_string(), "0.666667");
        assert_eq!(Decimal::from_ratio(-2, 3).unwrap().to_string(), "-0.666667");
        assert_eq!(Decimal::from_ratio(1, 7).unwrap().to_string(), "0.142857");
    }

    #[test]
    fn half_even_tie_rounds_to_even() {
        assert_eq!(div_half_even(5, 10), 0);
        assert_eq!(div_half_even(15, 10), 2);
        assert_eq!(div_half_even(25, 10), 2);
        assert_eq!(div_half_even(-15, 10), -2);
        assert_eq!(div_half_even(-5, 10), 0);
    }

    #[test]
    fn ordering_is_numeric() {
        let a = Decimal::parse("0.5").unwrap();
        let b = Decimal::parse("0.45").unwrap();
        assert!(a > b);
        assert_eq!(Decimal::parse("1.0").unwrap().cmp_i64(1), Ordering::Equal);
        assert_eq!(Decimal::parse("0.9").unwrap().cmp_i64(1), Ordering::Less);
        assert_eq!(Decimal::parse("-0.1").unwrap().cmp_i64(0), Ordering::Less);
    }
}
