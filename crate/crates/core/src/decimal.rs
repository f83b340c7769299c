//! Exact decimal numbers used as numeric right operands and event values.

use std::fmt;
use std::str::FromStr;

use bigdecimal::BigDecimal;

use crate::error::{Error, Result};

/// Largest accepted decimal exponent magnitude. Anything beyond this would
/// make plain-notation output unreasonably large.
const MAX_EXPONENT: i64 = 4096;

/// Arbitrary precision decimal, always stored in normalised form so that
/// structural equality, hashing and ordering agree with numeric value.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Decimal(BigDecimal);

impl Decimal {
    fn from_big(value: BigDecimal) -> Self {
        Decimal(value.normalized())
    }

    /// Exact midpoint `(self + other) / 2`. Halving a terminating decimal
    /// always terminates, so no rounding happens.
    pub fn midpoint(&self, other: &Decimal) -> Decimal {
        Decimal::from_big((&self.0 + &other.0).half())
    }

    /// `self + n` for a small integer offset.
    pub fn offset(&self, n: i64) -> Decimal {
        Decimal::from_big(&self.0 + BigDecimal::from(n))
    }

    /// Linear interpolation `self + (other - self) * num / den`, exact when
    /// `den` only has factors 2 and 5.
    pub(crate) fn lerp(&self, other: &Decimal, num: i64, den: i64) -> Decimal {
        let span = &other.0 - &self.0;
        let step = span * BigDecimal::from(num) / BigDecimal::from(den);
        Decimal::from_big(&self.0 + step)
    }
}

impl FromStr for Decimal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        if trimmed.is_empty() {
            return Err(Error::schema("empty numeric literal"));
        }
        let lowered = trimmed.to_ascii_lowercase();
        if lowered.contains("nan") || lowered.contains("inf") {
            return Err(Error::schema(format!("`{trimmed}` is not a finite number")));
        }
        let value = BigDecimal::from_str(trimmed)
            .map_err(|e| Error::schema(format!("invalid number `{trimmed}`: {e}")))?;
        let (_, scale) = value.as_bigint_and_exponent();
        if scale.abs() > MAX_EXPONENT {
            return Err(Error::schema(format!(
                "number `{trimmed}` exceeds the supported exponent range"
            )));
        }
        Ok(Decimal::from_big(value))
    }
}

impl From<i64> for Decimal {
    fn from(n: i64) -> Self {
        Decimal::from_big(BigDecimal::from(n))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.to_plain_string())
    }
}

impl fmt::Debug for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    #[test]
    fn equal_values_are_structurally_equal() {
        assert_eq!(d("1.50"), d("1.5"));
        assert_eq!(d("1e2"), d("100"));
        assert_eq!(d("100").to_string(), "100");
        assert_eq!(d("0.000"), Decimal::from(0));
    }

    #[test]
    fn ordering_is_exact() {
        assert!(d("0.1") < d("0.10000000000000000000000001"));
        assert!(d("-3") < d("-2.9999"));
    }

    #[test]
    fn midpoint_is_exact() {
        assert_eq!(d("18").midpoint(&d("65")), d("41.5"));
        assert_eq!(d("0.1").midpoint(&d("0.2")), d("0.15"));
        assert_eq!(d("1").lerp(&d("2"), 1, 4), d("1.25"));
    }

    #[test]
    fn rejects_non_finite() {
        assert!("NaN".parse::<Decimal>().is_err());
        assert!("Infinity".parse::<Decimal>().is_err());
        assert!("1e99999".parse::<Decimal>().is_err());
        assert!("".parse::<Decimal>().is_err());
    }
}
