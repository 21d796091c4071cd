//! Exact money, rate and headcount arithmetic.
//!
//! Money inputs (parameters, incomes, thresholds) are whole cents. Anything
//! derived from rates or fractional headcounts is carried as an exact rational
//! number of cents ([`Amount`]) and only rounded when it becomes a reported
//! threshold or table entry. No binary floating point touches a money path.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// Exact rational used for every derived quantity.
pub type Exact = Ratio<i128>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid decimal `{0}`")]
pub struct DecimalError(pub String);

/// Parses a plain decimal literal (`-12.345`, `0.15`, `7`) into an exact ratio.
pub fn parse_decimal(s: &str) -> Result<Exact, DecimalError> {
    let err = || DecimalError(s.to_string());
    let t = s.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    if body.is_empty() {
        return Err(err());
    }
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(err());
    }
    if frac_part.len() > 18 || int_part.len() > 18 {
        return Err(err());
    }
    let int_val: i128 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().map_err(|_| err())?
    };
    let frac_val: i128 = if frac_part.is_empty() {
        0
    } else {
        frac_part.parse().map_err(|_| err())?
    };
    let scale = 10i128.pow(frac_part.len() as u32);
    let value = Exact::new(int_val * scale + frac_val, scale);
    Ok(if neg { -value } else { value })
}

fn ceil_ratio(x: &Exact) -> i128 {
    x.numer().div_ceil(x.denom())
}

fn floor_ratio(x: &Exact) -> i128 {
    x.numer().div_floor(x.denom())
}

/// Whole cents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_cents(cents: i64) -> Self {
        Money(cents)
    }

    pub const fn from_dollars(dollars: i64) -> Self {
        Money(dollars * 100)
    }

    pub const fn cents(self) -> i64 {
        self.0
    }

    pub fn dollars_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }

    /// Nearest whole dollar, halves away from zero.
    pub fn round_dollars(self) -> i64 {
        let q = self.0.div_euclid(100);
        let r = self.0.rem_euclid(100);
        if r >= 50 {
            q + 1
        } else {
            q
        }
    }

    pub fn to_amount(self) -> Amount {
        Amount(Exact::from_integer(self.0 as i128))
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

impl FromStr for Money {
    type Err = DecimalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = parse_decimal(s)? * Exact::from_integer(100);
        if !v.is_integer() {
            return Err(DecimalError(s.to_string()));
        }
        i64::try_from(v.to_integer())
            .map(Money)
            .map_err(|_| DecimalError(s.to_string()))
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(de::Error::custom)
    }
}

/// An exact, possibly fractional, number of cents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Amount(Exact);

impl Amount {
    pub fn zero() -> Self {
        Amount(Exact::zero())
    }

    pub fn from_cents_ratio(r: Exact) -> Self {
        Amount(r)
    }

    pub fn as_ratio(&self) -> &Exact {
        &self.0
    }

    /// Smallest whole-cent value not below this amount.
    pub fn ceil_cents(self) -> Money {
        Money(ceil_ratio(&self.0) as i64)
    }

    pub fn floor_cents(self) -> Money {
        Money(floor_ratio(&self.0) as i64)
    }

    /// Nearest cent, halves rounded up.
    pub fn round_cents(self) -> Money {
        let twice = self.0 * Exact::from_integer(2) + Exact::from_integer(1);
        Money(floor_ratio(&(twice / Exact::from_integer(2))) as i64)
    }

    pub fn dollars_f64(self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN) / 100.0
    }

    pub fn max(self, other: Amount) -> Amount {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Amount) -> Amount {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Ratio of two amounts.
    pub fn ratio(self, denom: Amount) -> Exact {
        self.0 / denom.0
    }

    pub fn scale(self, factor: Exact) -> Amount {
        Amount(self.0 * factor)
    }
}

impl From<Money> for Amount {
    fn from(m: Money) -> Self {
        m.to_amount()
    }
}

impl Add for Amount {
    type Output = Amount;
    fn add(self, rhs: Amount) -> Amount {
        Amount(self.0 + rhs.0)
    }
}

impl Sub for Amount {
    type Output = Amount;
    fn sub(self, rhs: Amount) -> Amount {
        Amount(self.0 - rhs.0)
    }
}

impl Neg for Amount {
    type Output = Amount;
    fn neg(self) -> Amount {
        Amount(-self.0)
    }
}

impl Mul<Rate> for Amount {
    type Output = Amount;
    fn mul(self, rhs: Rate) -> Amount {
        Amount(self.0 * rhs.0)
    }
}

impl Mul<Headcount> for Money {
    type Output = Amount;
    fn mul(self, rhs: Headcount) -> Amount {
        Amount(Exact::from_integer(self.0 as i128) * rhs.0)
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.round_cents().fmt(f)
    }
}

/// A fraction such as a marginal tax rate or a refundability rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rate(Exact);

impl Rate {
    pub fn new(r: Exact) -> Self {
        Rate(r)
    }

    pub fn percent(p: i64) -> Self {
        Rate(Exact::new(p as i128, 100))
    }

    pub fn as_ratio(&self) -> &Exact {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_ratio_decimal(&self.0))
    }
}

impl FromStr for Rate {
    type Err = DecimalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_decimal(s).map(Rate)
    }
}

impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(de::Error::custom)
    }
}

/// A nonnegative, possibly fractional, number of people (dependents or
/// exemption headcount).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Headcount(Exact);

impl Headcount {
    pub fn new(r: Exact) -> Option<Self> {
        if r.is_negative() {
            None
        } else {
            Some(Headcount(r))
        }
    }

    pub fn whole(n: u32) -> Self {
        Headcount(Exact::from_integer(n as i128))
    }

    /// `hundredths / 100`, e.g. 189 → 1.89.
    pub fn from_hundredths(hundredths: u32) -> Self {
        Headcount(Exact::new(hundredths as i128, 100))
    }

    pub fn as_ratio(&self) -> &Exact {
        &self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Rounded to two decimal places, halves up.
    pub fn rounded_to_hundredths(self) -> Self {
        let scaled = self.0 * Exact::from_integer(100);
        let twice = scaled * Exact::from_integer(2) + Exact::from_integer(1);
        let n = floor_ratio(&(twice / Exact::from_integer(2)));
        Headcount(Exact::new(n, 100))
    }

    pub fn plus_whole(self, n: u32) -> Self {
        Headcount(self.0 + Exact::from_integer(n as i128))
    }
}

impl fmt::Display for Headcount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_ratio_decimal(&self.0))
    }
}

impl FromStr for Headcount {
    type Err = DecimalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_decimal(s).and_then(|r| Headcount::new(r).ok_or_else(|| DecimalError(s.to_string())))
    }
}

impl Serialize for Headcount {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Headcount {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(de::Error::custom)
    }
}

/// Terminating decimals print exactly; anything else prints 12 places.
fn format_ratio_decimal(r: &Exact) -> String {
    let den = *r.denom();
    let terminating = (0..=30u32).find(|&p| 10i128.checked_pow(p).is_some_and(|s| s % den == 0));
    let places = terminating.unwrap_or(12);
    let scale = 10i128.pow(places);
    let scaled = (r * Exact::from_integer(scale)).round().to_integer();
    insert_point(scaled, places)
}

fn insert_point(scaled: i128, places: u32) -> String {
    let sign = if scaled < 0 { "-" } else { "" };
    let abs = scaled.unsigned_abs();
    if places == 0 {
        return format!("{sign}{abs}");
    }
    let scale = 10u128.pow(places);
    let frac = format!("{:0width$}", abs % scale, width = places as usize);
    format!("{sign}{}.{}", abs / scale, frac)
}

impl PartialOrd<Money> for Amount {
    fn partial_cmp(&self, other: &Money) -> Option<Ordering> {
        Some(self.cmp(&other.to_amount()))
    }
}

impl PartialEq<Money> for Amount {
    fn eq(&self, other: &Money) -> bool {
        *self == other.to_amount()
    }
}
