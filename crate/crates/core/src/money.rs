//! Exact two-digit fixed-point money.
//!
//! Balances are stored as integer hundredths so that ledger arithmetic never
//! touches binary floating point. Multiplication by a decimal ratio rounds
//! half away from zero to the nearest hundredth.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rust_decimal::prelude::ToPrimitive;
use rust_decimal::{Decimal, RoundingStrategy};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoneyError {
    #[error("currency mismatch: {left} vs {right}")]
    CurrencyMismatch { left: Currency, right: Currency },
    #[error("invalid amount {0:?}: expected at most two fractional digits")]
    Parse(String),
    #[error("invalid currency tag {0:?}")]
    BadCurrency(String),
    #[error("amount overflow")]
    Overflow,
}

/// Short ASCII currency tag such as `FLR` or `USD`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Currency {
    len: u8,
    bytes: [u8; 7],
}

impl Currency {
    pub const FLORIN: Currency = Currency::from_static("FLR");
    pub const DOLLAR: Currency = Currency::from_static("USD");

    const fn from_static(tag: &str) -> Currency {
        let src = tag.as_bytes();
        let mut bytes = [0u8; 7];
        let mut i = 0;
        while i < src.len() {
            bytes[i] = src[i];
            i += 1;
        }
        Currency {
            len: src.len() as u8,
            bytes,
        }
    }

    pub fn new(tag: &str) -> Result<Currency, MoneyError> {
        if tag.is_empty() || tag.len() > 7 || !tag.bytes().all(|b| b.is_ascii_alphanumeric()) {
            return Err(MoneyError::BadCurrency(tag.to_string()));
        }
        Ok(Currency::from_static(tag))
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.bytes[..self.len as usize]).expect("ascii tag")
    }
}

impl Default for Currency {
    fn default() -> Self {
        Currency::FLORIN
    }
}

impl fmt::Display for Currency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Currency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Currency({})", self.as_str())
    }
}

impl Serialize for Currency {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Currency {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Currency::new(&s).map_err(de::Error::custom)
    }
}

/// A signed amount in hundredths of a currency unit.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Money {
    cents: i64,
    currency: Currency,
}

impl Money {
    pub const fn from_cents(cents: i64, currency: Currency) -> Money {
        Money { cents, currency }
    }

    pub const fn zero(currency: Currency) -> Money {
        Money { cents: 0, currency }
    }

    /// Whole units, e.g. `Money::units(100, FLR)` is 100.00.
    pub fn units(units: i64, currency: Currency) -> Money {
        Money::from_cents(units * 100, currency)
    }

    pub fn parse(text: &str, currency: Currency) -> Result<Money, MoneyError> {
        Ok(Money::from_cents(parse_cents(text)?, currency))
    }

    /// Converts an exact decimal; errors if it carries more than two digits.
    pub fn from_decimal(value: Decimal, currency: Currency) -> Result<Money, MoneyError> {
        let scaled = value * Decimal::ONE_HUNDRED;
        if scaled.fract() != Decimal::ZERO {
            return Err(MoneyError::Parse(value.to_string()));
        }
        let cents = scaled.to_i64().ok_or(MoneyError::Overflow)?;
        Ok(Money::from_cents(cents, currency))
    }

    /// Rounds a decimal half away from zero to the nearest hundredth.
    pub fn from_decimal_rounded(value: Decimal, currency: Currency) -> Result<Money, MoneyError> {
        let rounded = value.round_dp_with_strategy(2, RoundingStrategy::MidpointAwayFromZero);
        Money::from_decimal(rounded, currency)
    }

    pub fn cents(&self) -> i64 {
        self.cents
    }

    pub fn currency(&self) -> Currency {
        self.currency
    }

    pub fn to_decimal(&self) -> Decimal {
        Decimal::new(self.cents, 2)
    }

    pub fn to_f64(&self) -> f64 {
        self.cents as f64 / 100.0
    }

    pub fn is_zero(&self) -> bool {
        self.cents == 0
    }

    pub fn is_positive(&self) -> bool {
        self.cents > 0
    }

    pub fn is_negative(&self) -> bool {
        self.cents < 0
    }

    fn same_currency(&self, other: &Money) -> Result<(), MoneyError> {
        if self.currency != other.currency {
            return Err(MoneyError::CurrencyMismatch {
                left: self.currency,
                right: other.currency,
            });
        }
        Ok(())
    }

    pub fn checked_add(self, other: Money) -> Result<Money, MoneyError> {
        self.same_currency(&other)?;
        let cents = self
            .cents
            .checked_add(other.cents)
            .ok_or(MoneyError::Overflow)?;
        Ok(Money::from_cents(cents, self.currency))
    }

    pub fn checked_sub(self, other: Money) -> Result<Money, MoneyError> {
        self.same_currency(&other)?;
        let cents = self
            .cents
            .checked_sub(other.cents)
            .ok_or(MoneyError::Overflow)?;
        Ok(Money::from_cents(cents, self.currency))
    }


    pub fn abs(self) -> Money {
        Money::from_cents(self.cents.abs(), self.currency)
    }

    /// `self × ratio`, rounded half away from zero to the cent.
    pub fn mul_ratio(self, ratio: Decimal) -> Money {
        let product = (self.to_decimal() * ratio)
            .round_dp_with_strategy(2, RoundingStrategy::MidpointAwayFromZero);
        let cents = (product * Decimal::ONE_HUNDRED)
            .to_i64()
            .expect("ratio product fits in i64 cents");
        Money::from_cents(cents, self.currency)
    }

    pub fn min(self, other: Money) -> Money {
        if other.cents < self.cents {
            other
        } else {
            self
        }
    }

    /// Sums an iterator of amounts that share `currency`.
    pub fn sum<I: IntoIterator<Item = Money>>(
        currency: Currency,
        items: I,
    ) -> Result<Money, MoneyError> {
        items
            .into_iter()
            .try_fold(Money::zero(currency), |acc, m| acc.checked_add(m))
    }
}

impl PartialOrd for Money {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.currency != other.currency {
            return None;
        }
        Some(self.cents.cmp(&other.cents))
    }
}

impl std::ops::Neg for Money {
    type Output = Money;

    fn neg(self) -> Money {
        Money::from_cents(-self.cents, self.currency)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.cents < 0 { "-" } else { "" };
        let abs = self.cents.unsigned_abs();
        write!(f, "{}{}.{:02}", sign, abs / 100, abs % 100)
    }
}

impl fmt::Debug for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self, self.currency)
    }
}

impl Serialize for Money {
    /// As a decimal string; the currency is carried by the enclosing document.
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn parse_cents(text: &str) -> Result<i64, MoneyError> {
    let bad = || MoneyError::Parse(text.to_string());
    let t = text.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if frac_part.len() > 2
        || !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    let units: i64 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().map_err(|_| bad())?
    };
    let frac: i64 = match frac_part.len() {
        0 => 0,
        1 => frac_part.parse::<i64>().map_err(|_| bad())? * 10,
        _ => frac_part.parse().map_err(|_| bad())?,
    };
    let cents = units
        .checked_mul(100)
        .and_then(|c| c.checked_add(frac))
        .ok_or(MoneyError::Overflow)?;
    Ok(if neg { -cents } else { cents })
}

/// An amount without a currency tag, as written in scenario files.
///
/// Accepts either a string (`"100.38"`) or a JSON number with at most two
/// fractional digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Amount(pub i64);

impl Amount {
    pub fn in_currency(self, currency: Currency) -> Money {
        Money::from_cents(self.0, currency)
    }
}

impl FromStr for Amount {
    type Err = MoneyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_cents(s).map(Amount)
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Money::from_cents(self.0, Currency::default()).fmt(f)
    }
}

impl From<Money> for Amount {
    fn from(m: Money) -> Self {
        Amount(m.cents)
    }
}

impl Serialize for Amount {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Amount {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
            Float(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => s.parse().map_err(de::Error::custom),
            Raw::Int(i) => i
                .checked_mul(100)
                .map(Amount)
                .ok_or_else(|| de::Error::custom("amount overflow")),
            Raw::Float(x) => {
                let scaled = x * 100.0;
                let rounded = scaled.round();
                if (scaled - rounded).abs() > 1e-6 || !rounded.is_finite() {
                    return Err(de::Error::custom(format!(
                        "amount {x} has more than two fractional digits"
                    )));
                }
                Ok(Amount(rounded as i64))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dec(s: &str) -> Decimal {
        Decimal::from_str_exact(s).unwrap()
    }

    const F: Currency = Currency::FLORIN;

    #[test]
    fn parse_and_display() {
        assert_eq!(Money::parse("100.38", F).unwrap().cents(), 10038);
        assert_eq!(Money::parse("0.5", F).unwrap().cents(), 50);
        assert_eq!(Money::parse("-9.62", F).unwrap().to_string(), "-9.62");
        assert_eq!(Money::parse("-0.05", F).unwrap().to_string(), "-0.05");
        assert!(Money::parse("1.234", F).is_err());
        assert!(Money::parse("abc", F).is_err());
        assert!(Money::parse("", F).is_err());
    }

    #[test]
    fn currency_mismatch_is_an_error() {
        let a = Money::units(1, F);
        let b = Money::units(1, Currency::DOLLAR);
        assert!(matches!(
            a.checked_add(b),
            Err(MoneyError::CurrencyMismatch { .. })
        ));
        assert_eq!(a.partial_cmp(&b), None);
    }

    #[test]
    fn ratio_rounds_half_away_from_zero() {
        let m = Money::parse("0.25", F).unwrap();
        assert_eq!(m.mul_ratio(dec("0.5")).cents(), 13);
        assert_eq!((-m).mul_ratio(dec("0.5")).cents(), -13);
        assert_eq!(Money::units(100, F).mul_ratio(dec("0.25")).cents(), 2500);
    }

    #[test]
    fn amount_accepts_numbers_and_strings() {
        let a: Amount = serde_json::from_str("\"100.38\"").unwrap();
        let b: Amount = serde_json::from_str("100.38").unwrap();
        let c: Amount = serde_json::from_str("100").unwrap();
        assert_eq!(a, b);
        assert_eq!(c, Amount(10000));
        assert!(serde_json::from_str::<Amount>("1.005").is_err());
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(cents in -10_000_000_000i64..10_000_000_000i64) {
            let m = Money::from_cents(cents, F);
            prop_assert_eq!(Money::parse(&m.to_string(), F).unwrap(), m);
        }
    }
}
