//! Scalar backends: `f64` for numerics and `BigRational` for exact decisions.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// Absolute tolerance used by the float backend for coefficient comparisons.
pub const FLOAT_TOL: f64 = 1e-12;

/// Arithmetic shared by the float and the exact rational backend.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// `true` when arithmetic is exact.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    /// Converts a double. The rational backend takes the exact binary value.
    fn from_f64(v: f64) -> Self;

    fn from_rational(v: &BigRational) -> Self;

    fn to_f64(&self) -> f64;

    fn to_rational(&self) -> BigRational;

    /// Binomial coefficient `C(n, k)`; zero when `k > n`.
    fn binomial(n: usize, k: usize) -> Self;

    /// Equality up to the backend tolerance (exact for rationals).
    fn is_close(&self, other: &Self) -> bool;

    /// `self <= other` up to the backend tolerance.
    fn le_tol(&self, other: &Self) -> bool {
        self <= other || self.is_close(other)
    }

    fn is_negligible(&self) -> bool {
        self.is_close(&Self::zero())
    }

    /// JSON form: a number for floats, a decimal (or `p/q`) string for rationals.
    fn to_json(&self) -> serde_json::Value;

    /// Accepts JSON numbers and numeric strings.
    fn from_json(value: &serde_json::Value) -> Option<Self> {
        let rational = match value {
            serde_json::Value::Number(n) => parse_rational(&n.to_string())?,
            serde_json::Value::String(s) => parse_rational(s)?,
            _ => return None,
        };
        Some(Self::from_rational(&rational))
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn from_rational(v: &BigRational) -> Self {
        ToPrimitive::to_f64(v).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_rational(&self) -> BigRational {
        BigRational::from_float(*self).unwrap_or_else(BigRational::zero)
    }

    fn binomial(n: usize, k: usize) -> Self {
        if k > n {
            return 0.0;
        }
        let k = k.min(n - k);
        let mut acc = 1.0f64;
        for i in 0..k {
            acc = acc * (n - i) as f64 / (i + 1) as f64;
        }
        acc.round_if_integer()
    }

    fn is_close(&self, other: &Self) -> bool {
        (self - other).abs() <= FLOAT_TOL
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::from(*self)
    }
}

trait RoundIfInteger {
    fn round_if_integer(self) -> Self;
}

impl RoundIfInteger for f64 {
    // Binomials below 2^53 are integers; the multiplicative formula can leave 1 ulp noise.
    fn round_if_integer(self) -> Self {
        if self < 9.0e15 {
            self.round()
        } else {
            self
        }
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite float")
    }

    fn from_rational(v: &BigRational) -> Self {
        v.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> BigRational {
        self.clone()
    }

    fn binomial(n: usize, k: usize) -> Self {
        if k > n {
            return BigRational::zero();
        }
        let k = k.min(n - k);
        let mut acc = BigInt::one();
        for i in 0..k {
            acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
        }
        BigRational::from_integer(acc)
    }

    fn is_close(&self, other: &Self) -> bool {
        self == other
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(format_rational(self))
    }
}

/// Parses `"p/q"`, integers and decimals (with optional exponent) exactly.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_rational(num)?;
        let den = parse_rational(den)?;
        if den.is_zero() {
            return None;
        }
        return Some(num / den);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str_radix(&all_digits, 10).ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Some(if negative { -value } else { value })
}

/// Renders a rational as a terminating decimal when possible, else as `p/q`.
pub fn format_rational(value: &BigRational) -> String {
    let mut den = value.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", value.numer(), value.denom());
    }
    let places = twos.max(fives);
    let scaled = value * BigRational::from_integer(num_traits::pow(BigInt::from(10), places));
    let digits = scaled.to_integer();
    if places == 0 {
        return digits.to_string();
    }
    let negative = digits.is_negative();
    let mut body = digits.abs().to_string();
    if body.len() <= places {
        body = format!("{}{}", "0".repeat(places + 1 - body.len()), body);
    }
    let split = body.len() - places;
    format!("{}{}.{}", if negative { "-" } else { "" }, &body[..split], &body[split..])
}

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros trimmed.
pub fn fmt_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    let rendered = if (-5..12).contains(&exponent) {
        let decimals = (11 - exponent).max(0) as usize;
        let s = format!("{x:.decimals$}");
        trim_fraction(&s)
    } else {
        let s = format!("{x:.11e}");
        let (mantissa, exp) = s.split_once('e').expect("exponent form");
        format!("{}e{}", trim_fraction(mantissa), exp)
    };
    if rendered == "-0" {
        "0".to_string()
    } else {
        rendered
    }
}

fn trim_fraction(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}
