//! Exact numeric types.
//!
//! Utilities are fixed-point integers in millionths ("micros"). Expected
//! utilities are exact rationals over those units, so equal outcomes compare
//! equal without any float tolerance.

use std::fmt;
use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Fixed-point scale of utilities: one unit of utility is `MICROS` micros.
pub const MICROS: i64 = 1_000_000;

/// Largest absolute utility accepted, in utility units.
pub const MAX_ABS_UTILITY: f64 = 1e9;

/// Converts a real utility to micros, rounding to the nearest millionth.
pub fn to_micros(value: f64) -> Option<i64> {
    if !value.is_finite() || value.abs() > MAX_ABS_UTILITY {
        return None;
    }
    Some((value * MICROS as f64).round() as i64)
}

pub fn from_micros(micros: i64) -> f64 {
    micros as f64 / MICROS as f64
}

/// An exact (expected) utility, in utility units.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactUtility(BigRational);

impl ExactUtility {
    pub fn zero() -> Self {
        ExactUtility(BigRational::zero())
    }

    pub fn from_micros(micros: i64) -> Self {
        ExactUtility(BigRational::new(BigInt::from(micros), BigInt::from(MICROS)))
    }

    /// `numer / denom` micros.
    pub fn from_scaled_micros(numer: BigInt, denom: BigInt) -> Self {
        ExactUtility(BigRational::new(numer, denom * BigInt::from(MICROS)))
    }

    pub fn from_micros_ratio(micros: BigRational) -> Self {
        ExactUtility(micros / BigRational::from_integer(BigInt::from(MICROS)))
    }

    /// Parses a plain decimal literal such as `-0.75` exactly.
    pub fn from_decimal(text: &str) -> Option<Self> {
        parse_decimal(text).map(|(n, d)| ExactUtility(BigRational::new(n, d)))
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Value in micros, rounded half away from zero.
    pub fn round_micros(&self) -> BigInt {
        (&self.0 * BigRational::from_integer(BigInt::from(MICROS)))
            .round()
            .to_integer()
    }

    /// Fixed six-decimal rendering, e.g. `-0.750000`.
    pub fn to_fixed6(&self) -> String {
        let micros = self.round_micros();
        let sign = if micros.is_negative() { "-" } else { "" };
        let (whole, frac) = micros.abs().div_rem(&BigInt::from(MICROS));
        format!("{sign}{whole}.{frac:06}")
    }
}

impl fmt::Display for ExactUtility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_fixed6())
    }
}

impl fmt::Debug for ExactUtility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactUtility({})", self.0)
    }
}

impl Add for ExactUtility {
    type Output = ExactUtility;
    fn add(self, rhs: Self) -> Self {
        ExactUtility(self.0 + rhs.0)
    }
}

impl Sub for ExactUtility {
    type Output = ExactUtility;
    fn sub(self, rhs: Self) -> Self {
        ExactUtility(self.0 - rhs.0)
    }
}

impl From<BigRational> for ExactUtility {
    fn from(value: BigRational) -> Self {
        ExactUtility(value)
    }
}

/// A probability held as an exact fraction `numer / denom` with `numer <= denom`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Probability(Ratio<u64>);

impl Probability {
    pub const ZERO: Probability = Probability(Ratio::new_raw(0, 1));
    pub const ONE: Probability = Probability(Ratio::new_raw(1, 1));
    pub const HALF: Probability = Probability(Ratio::new_raw(1, 2));

    pub fn new(numer: u64, denom: u64) -> Result<Self> {
        if denom == 0 || numer > denom {
            return Err(Error::InvalidProbability(format!("{numer}/{denom}")));
        }
        Ok(Probability(Ratio::new(numer, denom)))
    }

    /// Parses a decimal literal like `0.5` or `1` exactly.
    pub fn from_decimal(text: &str) -> Result<Self> {
        let bad = || Error::InvalidProbability(text.to_string());
        let (n, d) = parse_decimal(text).ok_or_else(bad)?;
        let n = n.to_u64().ok_or_else(bad)?;
        let d = d.to_u64().ok_or_else(bad)?;
        Probability::new(n, d).map_err(|_| bad())
    }

    /// Takes the shortest decimal that round-trips to `value`, so `0.1` means 1/10.
    pub fn from_f64(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidProbability(value.to_string()));
        }
        Probability::from_decimal(&value.to_string())
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

impl fmt::Debug for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Probability({}/{})", self.numer(), self.denom())
    }
}

/// Splits `[-]digits[.digits]` into an exact fraction.
fn parse_decimal(text: &str) -> Option<(BigInt, BigInt)> {
    let text = text.trim();
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole
        .chars()
        .chain(frac.chars())
        .all(|c| c.is_ascii_digit())
        || frac.len() > 18
    {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let mut numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    if negative {
        numer = -numer;
    }
    let denom = BigInt::from(10u64.pow(frac.len() as u32));
    Some((numer, denom))
}
