//! Exact rational time values.
//!
//! Every constant, timestamp and clock value is an exact rational. Text
//! input uses decimal strings (`"15"`, `"-3"`, `"0.25"`) or fractions
//! (`"7/3"`); output prefers the decimal form whenever it is exact.

use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use thiserror::Error;

/// Exact rational number, always kept in lowest terms with a positive
/// denominator.
pub type Rational = Ratio<i128>;

const MAX_INTEGER_DIGITS: usize = 12;
const MAX_FRACTION_DIGITS: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty number")]
    Empty,
    #[error("invalid number `{0}`")]
    Invalid(String),
    #[error("number `{0}` has too many digits")]
    TooLong(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Builds an integer-valued rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(n as i128)
}

/// Builds `num / den`, reduced.
pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(num as i128, den as i128)
}

fn parse_digits(s: &str, max: usize, whole: &str) -> Result<i128, ParseRationalError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseRationalError::Invalid(whole.to_owned()));
    }
    let trimmed = s.trim_start_matches('0');
    if trimmed.len() > max {
        return Err(ParseRationalError::TooLong(whole.to_owned()));
    }
    Ok(trimmed.parse::<i128>().unwrap_or(0))
}

/// Parses a decimal (`-12.5`) or fraction (`25/2`) string.
pub fn parse_rational(input: &str) -> Result<Rational, ParseRationalError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let (negative, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let magnitude = if let Some((num, den)) = body.split_once('/') {
        let n = parse_digits(num, MAX_INTEGER_DIGITS, input)?;
        let d = parse_digits(den, MAX_FRACTION_DIGITS, input)?;
        if d == 0 {
            return Err(ParseRationalError::ZeroDenominator(input.to_owned()));
        }
        Rational::new(n, d)
    } else if let Some((whole, fraction)) = body.split_once('.') {
        let w = if whole.is_empty() && !fraction.is_empty() {
            0
        } else {
            parse_digits(whole, MAX_INTEGER_DIGITS, input)?
        };
        if fraction.len() > MAX_FRACTION_DIGITS {
            return Err(ParseRationalError::TooLong(input.to_owned()));
        }
        let f = parse_digits(fraction, MAX_FRACTION_DIGITS, input)?;
        let scale = 10i128.pow(fraction.len() as u32);
        Rational::new(w * scale + f, scale)
    } else {
        Rational::from_integer(parse_digits(body, MAX_INTEGER_DIGITS, input)?)
    };
    Ok(if negative { -magnitude } else { magnitude })
}

/// Renders a rational as an exact decimal when possible, else as `p/q`.
pub fn format_rational(r: &Rational) -> String {
    Display(r).to_string()
}

/// Display adaptor for [`Rational`] using the same rules as
/// [`format_rational`].
pub struct Display<'a>(pub &'a Rational);

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.0;
        if r.is_integer() {
            return write!(f, "{}", r.numer());
        }
        let mut den = *r.denom();
        let (mut twos, mut fives) = (0u32, 0u32);
        while den.is_even() {
            den /= 2;
            twos += 1;
        }
        while den % 5 == 0 {
            den /= 5;
            fives += 1;
        }
        let digits = twos.max(fives);
        if den != 1 || digits as usize > MAX_FRACTION_DIGITS {
            return write!(f, "{}/{}", r.numer(), r.denom());
        }
        let scale = 10i128.pow(digits);
        let scaled = (r * Rational::from_integer(scale)).to_integer();
        let sign = if r.is_negative() { "-" } else { "" };
        let abs = scaled.abs();
        let whole = abs / scale;
        let fraction = abs % scale;
        write!(
            f,
            "{sign}{whole}.{fraction:0width$}",
            width = digits as usize
        )
    }
}

/// Half of the distance between two rationals, used to pick interior points.
pub fn midpoint(a: &Rational, b: &Rational) -> Rational {
    (a + b) / Rational::from_integer(2)
}

pub fn is_nonnegative(r: &Rational) -> bool {
    !r.is_negative() || r.is_zero()
}
