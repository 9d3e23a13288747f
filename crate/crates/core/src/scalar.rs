//! Exact rational and binary float scalars behind one trait.
//!
//! Every probability and every leakage ratio is a [`Scalar`]. Rational mode is
//! exact; float mode compares with a single relative tolerance [`TOLERANCE`].

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary-precision rational in canonical reduced form.
pub type Rational = BigRational;

/// Relative tolerance for every float-mode equality and stochasticity check.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rational,
    Float,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Rational => "rational",
            Mode::Float => "float",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rational" => Ok(Mode::Rational),
            "float" => Ok(Mode::Float),
            other => Err(Error::Parse(other.to_string())),
        }
    }
}

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    const MODE: Mode;

    /// `num / den`; `den` must be nonzero.
    fn frac(num: i64, den: i64) -> Self;

    /// Parses `a/b`, an integer, or a decimal literal such as `0.6` or `1e-3`.
    fn parse(text: &str) -> Result<Self>;

    /// Converts a finite float. Rational mode keeps the exact binary value.
    fn from_f64(value: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// `a/b` (or an integer) in rational mode, shortest round-trip float text otherwise.
    fn to_repr(&self) -> String;

    /// Equality up to the mode tolerance; exact for rationals.
    fn approx_eq(&self, other: &Self) -> bool;

    /// Largest integer not above the value, snapping to a nearby integer in float mode.
    fn floor_int(&self) -> u64;

    /// Whether the value is an integer, up to the mode tolerance.
    fn is_integral(&self) -> bool;

    /// Exact hashable form, available only in rational mode.
    fn exact_key(&self) -> Option<(BigInt, BigInt)>;

    fn from_u64(n: u64) -> Self {
        let mut out = Self::zero();
        let mut acc = Self::one();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                out = out + acc.clone();
            }
            acc = acc.clone() + acc;
            n >>= 1;
        }
        out
    }

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Natural log of a positive ratio, for presentation.
    fn ln(&self) -> f64 {
        self.to_f64().ln()
    }

    fn recip(&self) -> Self {
        Self::one() / self.clone()
    }
}

/// `a <= b` up to the mode tolerance.
pub fn le<S: Scalar>(a: &S, b: &S) -> bool {
    a <= b || a.approx_eq(b)
}

/// `a > b` beyond the mode tolerance.
pub fn gt<S: Scalar>(a: &S, b: &S) -> bool {
    !le(a, b)
}

/// `a >= b` up to the mode tolerance.
pub fn ge<S: Scalar>(a: &S, b: &S) -> bool {
    le(b, a)
}

pub fn sum<'a, S: Scalar>(values: impl IntoIterator<Item = &'a S>) -> S {
    values
        .into_iter()
        .fold(S::zero(), |acc, v| acc + v.clone())
}

pub fn max_of<'a, S: Scalar>(values: impl IntoIterator<Item = &'a S>) -> Option<S> {
    values.into_iter().fold(None, |best: Option<S>, v| match best {
        Some(b) if b >= *v => Some(b),
        _ => Some(v.clone()),
    })
}

pub fn min_of<'a, S: Scalar>(values: impl IntoIterator<Item = &'a S>) -> Option<S> {
    values.into_iter().fold(None, |best: Option<S>, v| match best {
        Some(b) if b <= *v => Some(b),
        _ => Some(v.clone()),
    })
}

fn bad(text: &str) -> Error {
    Error::Parse(text.to_string())
}

/// Exact value of a decimal literal with optional sign, fraction and exponent.
fn parse_decimal(text: &str) -> Result<Rational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (
            &text[..pos],
            text[pos + 1..].parse::<i32>().map_err(|_| bad(text))?,
        ),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(bad(text));
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(&all_digits).map_err(|_| bad(text))?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u8);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

fn parse_fraction(text: &str) -> Result<Option<(String, String)>> {
    match text.split_once('/') {
        Some((n, d)) => {
            let (n, d) = (n.trim(), d.trim());
            if n.is_empty() || d.is_empty() {
                return Err(bad(text));
            }
            Ok(Some((n.to_string(), d.to_string())))
        }
        None => Ok(None),
    }
}

impl Scalar for Rational {
    const MODE: Mode = Mode::Rational;

    fn frac(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        match parse_fraction(text)? {
            Some((n, d)) => {
                let n = parse_decimal(&n)?;
                let d = parse_decimal(&d)?;
                if d.is_zero() {
                    return Err(bad(text));
                }
                Ok(n / d)
            }
            None => parse_decimal(text),
        }
    }

    fn from_f64(value: f64) -> Option<Self> {
        Rational::from_float(value)
    }

    fn to_f64(&self) -> f64 {
        if let Some(v) = ToPrimitive::to_f64(self) {
            if v.is_finite() {
                return v;
            }
        }
        self.numer().to_f64().unwrap_or(f64::NAN) / self.denom().to_f64().unwrap_or(f64::NAN)
    }

    fn to_repr(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn floor_int(&self) -> u64 {
        self.floor().to_integer().to_u64().unwrap_or(u64::MAX)
    }

    fn is_integral(&self) -> bool {
        self.is_integer()
    }

    fn exact_key(&self) -> Option<(BigInt, BigInt)> {
        Some((self.numer().clone(), self.denom().clone()))
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn recip(&self) -> Self {
        Rational::recip(self)
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;

    fn frac(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let value = match parse_fraction(text)? {
            Some((n, d)) => {
                let n: f64 = n.parse().map_err(|_| bad(text))?;
                let d: f64 = d.parse().map_err(|_| bad(text))?;
                if d == 0.0 {
                    return Err(bad(text));
                }
                n / d
            }
            None => text.parse().map_err(|_| bad(text))?,
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(bad(text))
        }
    }

    fn from_f64(value: f64) -> Option<Self> {
        value.is_finite().then_some(value)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_repr(&self) -> String {
        format!("{self:?}")
    }

    fn approx_eq(&self, other: &Self) -> bool {
        let scale = 1f64.max(self.abs()).max(other.abs());
        (self - other).abs() <= TOLERANCE * scale
    }

    fn floor_int(&self) -> u64 {
        let nearest = self.round();
        if self.approx_eq(&nearest) {
            nearest.max(0.0) as u64
        } else {
            self.floor().max(0.0) as u64
        }
    }

    fn is_integral(&self) -> bool {
        self.approx_eq(&self.round())
    }

    fn exact_key(&self) -> Option<(BigInt, BigInt)> {
        None
    }
}
