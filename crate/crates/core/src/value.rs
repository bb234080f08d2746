//! Exact non-negative rational utilities.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, Zero};

use crate::error::Error;

/// Largest number of fractional digits accepted in a decimal string.
const MAX_FRACTION_DIGITS: usize = 12;

/// A non-negative rational utility, always kept in lowest terms.
///
/// Arithmetic is exact. Overflow of the underlying 64-bit numerator or
/// denominator is treated as a bug and panics rather than wrapping.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Value(Ratio<i64>);

impl Value {
    pub const ZERO: Value = Value(Ratio::new_raw(0, 1));

    pub fn new(numer: i64, denom: i64) -> Result<Value, Error> {
        if denom == 0 {
            return Err(Error::Parse("zero denominator".into()));
        }
        let ratio = Ratio::new(numer, denom);
        if ratio < Ratio::zero() {
            return Err(Error::Parse(format!("negative value {numer}/{denom}")));
        }
        Ok(Value(ratio))
    }

    pub fn integer(n: u32) -> Value {
        Value(Ratio::from_integer(i64::from(n)))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn checked_add(self, rhs: Value) -> Option<Value> {
        self.0.checked_add(&rhs.0).map(Value)
    }

    /// `self / n`; `n` must be positive.
    pub fn div_count(self, n: usize) -> Value {
        assert!(n > 0, "division by zero agents");
        let n = i64::try_from(n).expect("agent count fits in i64");
        Value(self.0 / Ratio::from_integer(n))
    }
}

impl From<u32> for Value {
    fn from(n: u32) -> Value {
        Value::integer(n)
    }
}

impl Add for Value {
    type Output = Value;

    fn add(self, rhs: Value) -> Value {
        self.checked_add(rhs).expect("value overflow")
    }
}

impl AddAssign for Value {
    fn add_assign(&mut self, rhs: Value) {
        *self = *self + rhs;
    }
}

impl Mul for Value {
    type Output = Value;

    fn mul(self, rhs: Value) -> Value {
        Value(self.0.checked_mul(&rhs.0).expect("value overflow"))
    }
}

impl Sum for Value {
    fn sum<I: Iterator<Item = Value>>(iter: I) -> Value {
        iter.fold(Value::ZERO, |acc, v| acc + v)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_digits(s: &str, original: &str) -> Result<i64, Error> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("malformed value `{original}`")));
    }
    s.parse::<i64>()
        .map_err(|_| Error::Parse(format!("value `{original}` is out of range")))
}

/// Accepts `12`, `12.5` and `3/4`. Signs, exponents and whitespace are rejected.
impl FromStr for Value {
    type Err = Error;

    fn from_str(s: &str) -> Result<Value, Error> {
        if let Some((numer, denom)) = s.split_once('/') {
            return Value::new(parse_digits(numer, s)?, parse_digits(denom, s)?);
        }
        match s.split_once('.') {
            None => Value::new(parse_digits(s, s)?, 1),
            Some((int, frac)) => {
                if frac.is_empty() || frac.len() > MAX_FRACTION_DIGITS {
                    return Err(Error::Parse(format!("malformed decimal `{s}`")));
                }
                let int = if int.is_empty() { 0 } else { parse_digits(int, s)? };
                let frac_value = parse_digits(frac, s)?;
                let scale = 10i64.pow(frac.len() as u32);
                let numer = int
                    .checked_mul(scale)
                    .and_then(|x| x.checked_add(frac_value))
                    .ok_or_else(|| Error::Parse(format!("value `{s}` is out of range")))?;
                Value::new(numer, scale)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_decimals_and_fractions() {
        assert_eq!("30".parse::<Value>().unwrap(), Value::from(30));
        assert_eq!("2.50".parse::<Value>().unwrap(), Value::new(5, 2).unwrap());
        assert_eq!(".5".parse::<Value>().unwrap(), Value::new(1, 2).unwrap());
        assert_eq!("6/4".parse::<Value>().unwrap(), Value::new(3, 2).unwrap());
    }

    #[test]
    fn rejects_signs_and_garbage() {
        for bad in ["-1", "+1", "1e3", "", "1.", "a", "1/0", " 1", "1.2.3"] {
            assert!(bad.parse::<Value>().is_err(), "{bad:?} should not parse");
        }
        assert!(Value::new(-1, 2).is_err());
    }

    #[test]
    fn third_is_exact() {
        let third = Value::new(1, 3).unwrap();
        assert_eq!(third + third + third, Value::from(1));
        assert_eq!(Value::from(35).div_count(2).to_string(), "35/2");
    }

    #[test]
    fn display_round_trips() {
        for v in [Value::ZERO, Value::from(17), Value::new(7, 12).unwrap()] {
            assert_eq!(v.to_string().parse::<Value>().unwrap(), v);
        }
    }
}
