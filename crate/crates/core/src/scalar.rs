//! Numeric letter domains.
//!
//! Dense-order theories, numeric aggregates and witness construction are
//! written once against [`Scalar`]. Exact rationals are the default domain;
//! `f64` is available through [`ordered_float::OrderedFloat`] for pipelines
//! that prefer speed over bit-exact guard evaluation.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio, Rational64};
use num_traits::{Num, Signed, ToPrimitive, Zero};
use ordered_float::OrderedFloat;

/// A totally ordered numeric domain usable as stream letters.
pub trait Scalar:
    Clone + Ord + Hash + Debug + Display + Num + Send + Sync + 'static
{
    /// Whether strictly between any two distinct values there is a third.
    /// Dense-order satisfiability and witness pumping are only sound for
    /// dense domains.
    const DENSE: bool;

    fn from_int(value: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Parses integer (`-3`), fraction (`3/2`) or decimal (`1.25`) text.
    /// Implementations over exact domains must not round.
    fn parse_exact(text: &str) -> Option<Self>;

    /// Text that [`Scalar::parse_exact`] reads back to the same value.
    fn to_exact_string(&self) -> String {
        self.to_string()
    }

    /// Integers become JSON numbers, other exact values `"p/q"` strings.
    fn to_json(&self) -> serde_json::Value {
        let text = self.to_exact_string();
        match text.parse::<i64>() {
            Ok(i) => serde_json::Value::from(i),
            Err(_) => serde_json::Value::String(text),
        }
    }

    fn midpoint(a: &Self, b: &Self) -> Self {
        (a.clone() + b.clone()) / (Self::one() + Self::one())
    }
}

fn split_decimal(text: &str) -> Option<(bool, &str, &str)> {
    let text = text.trim();
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    let digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if (int_part.is_empty() && frac_part.is_empty()) || !digits(int_part) || !digits(frac_part) {
        return None;
    }
    Some((neg, int_part, frac_part))
}

fn parse_big_ratio(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    let (neg, int_part, frac_part) = split_decimal(text)?;
    let mut digits = String::with_capacity(int_part.len() + frac_part.len());
    digits.push_str(int_part);
    digits.push_str(frac_part);
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10u8), frac_part.len());
    let value = BigRational::new(numer, denom);
    Some(if neg { -value } else { value })
}

impl Scalar for BigRational {
    const DENSE: bool = true;

    fn from_int(value: i64) -> Self {
        BigRational::from_integer(BigInt::from(value))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            if self.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    }

    fn parse_exact(text: &str) -> Option<Self> {
        parse_big_ratio(text)
    }
}

impl Scalar for Rational64 {
    const DENSE: bool = true;

    fn from_int(value: i64) -> Self {
        Ratio::from_integer(value)
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }

    fn parse_exact(text: &str) -> Option<Self> {
        let big = parse_big_ratio(text)?;
        let numer = big.numer().to_i64()?;
        let denom = big.denom().to_i64()?;
        Some(Ratio::new(numer, denom))
    }
}

impl Scalar for OrderedFloat<f64> {
    const DENSE: bool = true;

    fn from_int(value: i64) -> Self {
        OrderedFloat(value as f64)
    }

    fn to_f64(&self) -> f64 {
        self.0
    }

    fn parse_exact(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((num, den)) = text.split_once('/') {
            let num: f64 = num.trim().parse().ok()?;
            let den: f64 = den.trim().parse().ok()?;
            if den == 0.0 {
                return None;
            }
            return Some(OrderedFloat(num / den));
        }
        split_decimal(text)?;
        text.parse::<f64>().ok().map(OrderedFloat)
    }

    fn to_exact_string(&self) -> String {
        // `{:?}` keeps a decimal point and round-trips through `parse`.
        format!("{:?}", self.0)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::from(self.0)
    }
}
