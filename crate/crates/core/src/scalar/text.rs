//! Lossless text forms: `p/q` for exact rationals, decimal with an `@bits`
//! precision tag for floats, `re±imi` for complex values.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{normalize_precision, ExactComplex, FloatComplex, Scalar, ScalarMode};
use crate::error::{QmplError, Result};

fn parse_err(s: &str, why: &str) -> QmplError {
    QmplError::Parse(format!("{s:?}: {why}"))
}

/// Parses a real literal: integer, `p/q`, or decimal with optional exponent.
pub(crate) fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(parse_err(s, "empty number"));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| parse_err(s, "bad numerator"))?;
        let q: BigInt = q.trim().parse().map_err(|_| parse_err(s, "bad denominator"))?;
        if q.is_zero() {
            return Err(parse_err(s, "zero denominator"));
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..]
                .trim_start_matches('+')
                .parse()
                .map_err(|_| parse_err(s, "bad exponent"))?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(parse_err(s, "no digits"));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(parse_err(s, "not a number"));
    }
    let all: BigInt = format!("{int_part}{frac_part}")
        .parse()
        .map_err(|_| parse_err(s, "not a number"))?;
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(all);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -value } else { value })
}

/// Splits `a+bi` into real and imaginary literal parts.
fn split_complex(s: &str) -> Result<(BigRational, BigRational)> {
    let Some(body) = s.strip_suffix('i') else {
        return Ok((parse_rational(s)?, BigRational::zero()));
    };
    let bytes = body.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            split = Some(i);
            break;
        }
    }
    let (re, im) = match split {
        Some(i) => (parse_rational(&body[..i])?, &body[i..]),
        None => (BigRational::zero(), body),
    };
    let im = match im.trim() {
        "" | "+" => BigRational::one(),
        "-" => -BigRational::one(),
        other => parse_rational(other)?,
    };
    Ok((re, im))
}

pub(crate) fn parse_scalar(s: &str, mode: ScalarMode) -> Result<Scalar> {
    let s = s.trim();
    let (body, tag) = match s.rsplit_once('@') {
        Some((b, t)) => {
            let bits: u32 = t.trim().parse().map_err(|_| parse_err(s, "bad precision tag"))?;
            (b, Some(bits))
        }
        None => (s, None),
    };
    let (re, im) = split_complex(body.trim())?;
    match (mode, tag) {
        (ScalarMode::Exact, None) => Ok(Scalar::Exact(ExactComplex::new(re, im))),
        (ScalarMode::Exact, Some(_)) => Err(QmplError::ModeMismatch(format!(
            "{s:?} is a float literal but exact mode was requested"
        ))),
        (ScalarMode::Float { precision_bits }, tag) => Ok(Scalar::Float(
            FloatComplex::from_rationals(&re, &im, tag.unwrap_or(precision_bits)),
        )),
    }
}

/// Decimal digits needed so that decimal → binary recovers the same float.
fn digits_for(precision_bits: u32) -> usize {
    (precision_bits as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1
}

fn pow10(e: usize) -> BigInt {
    num_traits::pow(BigInt::from(10), e)
}

/// Scientific notation with `digits` significant digits, round-half-even.
pub(crate) fn format_decimal(r: &BigRational, digits: usize) -> String {
    if r.is_zero() {
        return "0".into();
    }
    let a = r.abs();
    let mut e10 =
        ((a.numer().bits() as f64 - a.denom().bits() as f64) * std::f64::consts::LOG10_2).floor() as i64;
    let scale = |e: i64| -> BigRational {
        if e >= 0 {
            BigRational::from_integer(pow10(e as usize))
        } else {
            BigRational::new(BigInt::one(), pow10((-e) as usize))
        }
    };
    while a >= scale(e10 + 1) {
        e10 += 1;
    }
    while a < scale(e10) {
        e10 -= 1;
    }
    let scaled = &a * scale(digits as i64 - 1 - e10);
    let (q, rem) = scaled.numer().div_rem(scaled.denom());
    let twice: BigInt = rem * 2;
    let mut n = match twice.cmp(scaled.denom()) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => {
            if q.is_even() {
                q
            } else {
                q + 1
            }
        }
    };
    if n == pow10(digits) {
        n /= 10;
        e10 += 1;
    }
    let ds = n.to_string();
    let (lead, rest) = ds.split_at(1);
    let rest = rest.trim_end_matches('0');
    let sign = if r.is_negative() { "-" } else { "" };
    if rest.is_empty() {
        format!("{sign}{lead}e{e10}")
    } else {
        format!("{sign}{lead}.{rest}e{e10}")
    }
}

fn join_complex(re: String, im: Option<String>) -> String {
    match im {
        None => re,
        Some(im) => match im.strip_prefix('-') {
            Some(abs) => format!("{re}-{abs}i"),
            None => format!("{re}+{im}i"),
        },
    }
}

pub(crate) fn format_scalar(s: &Scalar) -> String {
    match s {
        Scalar::Exact(x) => {
            let im = (!x.im.is_zero()).then(|| x.im.to_string());
            join_complex(x.re.to_string(), im)
        }
        Scalar::Float(x) => {
            let bits = normalize_precision(x.precision_bits());
            let d = digits_for(bits);
            let (re, im) = x.to_rationals();
            let im = (!im.is_zero()).then(|| format_decimal(&im, d));
            format!("{}@{bits}", join_complex(format_decimal(&re, d), im))
        }
    }
}
