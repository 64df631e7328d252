//! The numeric currency of the crate.
//!
//! A [`Scalar`] is either an exact complex rational or a complex binary float
//! with an explicit precision. The two never mix: every binary operation on
//! scalars of different modes is rejected with [`QmplError::ModeMismatch`].
//! Series kernels are generic over [`Field`] and see one concrete type.

mod exact;
mod field;
mod float;
mod text;

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

pub use exact::ExactComplex;
pub use field::Field;
pub use float::{normalize_precision, FloatComplex, MIN_PRECISION_BITS};
pub(crate) use text::parse_rational as parse_rational_text;

use crate::error::{QmplError, Result};

/// Which representation a computation runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarMode {
    Exact,
    Float { precision_bits: u32 },
}

impl ScalarMode {
    pub fn float(precision_bits: u32) -> Self {
        ScalarMode::Float {
            precision_bits: normalize_precision(precision_bits),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScalarMode::Exact => "exact",
            ScalarMode::Float { .. } => "float",
        }
    }

    pub fn precision_bits(&self) -> Option<u32> {
        match self {
            ScalarMode::Exact => None,
            ScalarMode::Float { precision_bits } => Some(*precision_bits),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(ExactComplex),
    Float(FloatComplex),
}

/// Inputs of one computation, converted to a single concrete field.
pub(crate) enum Unified {
    Exact(Vec<ExactComplex>),
    Float(Vec<FloatComplex>),
}

/// Checks that all scalars share a mode. Floats of different precision are
/// brought to the largest one.
pub(crate) fn unify(values: &[&Scalar]) -> Result<Unified> {
    let Some(first) = values.first() else {
        return Ok(Unified::Exact(Vec::new()));
    };
    match first {
        Scalar::Exact(_) => values
            .iter()
            .map(|v| match v {
                Scalar::Exact(x) => Ok(x.clone()),
                Scalar::Float(_) => Err(mismatch()),
            })
            .collect::<Result<Vec<_>>>()
            .map(Unified::Exact),
        Scalar::Float(_) => {
            let mut prec = 0;
            for v in values {
                match v {
                    Scalar::Float(x) => prec = prec.max(x.precision_bits()),
                    Scalar::Exact(_) => return Err(mismatch()),
                }
            }
            Ok(Unified::Float(
                values
                    .iter()
                    .map(|v| match v {
                        Scalar::Float(x) if x.precision_bits() == prec => x.clone(),
                        Scalar::Float(x) => x.with_precision(prec),
                        Scalar::Exact(_) => unreachable!(),
                    })
                    .collect(),
            ))
        }
    }
}

fn mismatch() -> QmplError {
    QmplError::ModeMismatch("exact and float scalars cannot be combined".into())
}

macro_rules! binary_op {
    ($name:ident, $op:ident) => {
        pub fn $name(&self, rhs: &Scalar) -> Result<Scalar> {
            match unify(&[self, rhs])? {
                Unified::Exact(v) => Ok(Scalar::Exact(v[0].$op(&v[1]))),
                Unified::Float(v) => Ok(Scalar::Float(v[0].$op(&v[1]))),
            }
        }
    };
}

impl Scalar {
    pub fn exact(r: BigRational) -> Self {
        Scalar::Exact(ExactComplex::real(r))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::Exact(ExactComplex::from_ratio(num, den))
    }

    pub fn integer(v: i64) -> Self {
        Scalar::ratio(v, 1)
    }

    /// Builds a real scalar of the given mode from an exact rational.
    pub fn from_rational(r: &BigRational, mode: ScalarMode) -> Self {
        match mode {
            ScalarMode::Exact => Scalar::exact(r.clone()),
            ScalarMode::Float { precision_bits } => Scalar::Float(FloatComplex::from_rationals(
                r,
                &BigRational::from_integer(0.into()),
                precision_bits,
            )),
        }
    }

    pub fn mode(&self) -> ScalarMode {
        match self {
            Scalar::Exact(_) => ScalarMode::Exact,
            Scalar::Float(x) => ScalarMode::Float {
                precision_bits: x.precision_bits(),
            },
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    binary_op!(try_add, add);
    binary_op!(try_sub, sub);
    binary_op!(try_mul, mul);

    pub fn try_div(&self, rhs: &Scalar) -> Result<Scalar> {
        let zero = || QmplError::SingularPoint("division by zero".into());
        match unify(&[self, rhs])? {
            Unified::Exact(v) => v[0].checked_div(&v[1]).map(Scalar::Exact).ok_or_else(zero),
            Unified::Float(v) => v[0].checked_div(&v[1]).map(Scalar::Float).ok_or_else(zero),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(x) => Scalar::Exact(x.neg()),
            Scalar::Float(x) => Scalar::Float(x.neg()),
        }
    }

    pub fn pow(&self, e: u32) -> Scalar {
        match self {
            Scalar::Exact(x) => Scalar::Exact(x.pow(e)),
            Scalar::Float(x) => Scalar::Float(x.pow(e)),
        }
    }

    /// Zero of the same mode and precision.
    pub fn zero_like(&self) -> Scalar {
        match self {
            Scalar::Exact(x) => Scalar::Exact(x.zero_like()),
            Scalar::Float(x) => Scalar::Float(x.zero_like()),
        }
    }

    pub fn one_like(&self) -> Scalar {
        match self {
            Scalar::Exact(x) => Scalar::Exact(x.one_like()),
            Scalar::Float(x) => Scalar::Float(x.one_like()),
        }
    }

    pub fn from_rational_like(&self, r: &BigRational) -> Scalar {
        match self {
            Scalar::Exact(x) => Scalar::Exact(x.from_rational_like(r)),
            Scalar::Float(x) => Scalar::Float(x.from_rational_like(r)),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(x) => x.is_zero(),
            Scalar::Float(x) => x.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Exact(x) => x.is_one(),
            Scalar::Float(x) => x.is_one(),
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            Scalar::Exact(x) => x.is_real(),
            Scalar::Float(x) => x.is_real(),
        }
    }

    pub fn re_f64(&self) -> f64 {
        match self {
            Scalar::Exact(x) => x.re_f64(),
            Scalar::Float(x) => x.re_f64(),
        }
    }

    pub fn abs_f64(&self) -> f64 {
        match self {
            Scalar::Exact(x) => x.abs_f64(),
            Scalar::Float(x) => x.abs_f64(),
        }
    }

    pub fn abs_cmp_one(&self) -> Ordering {
        match self {
            Scalar::Exact(x) => x.abs_cmp_one(),
            Scalar::Float(x) => x.abs_cmp_one(),
        }
    }

    /// Real and imaginary parts as exact rationals; exact for both modes
    /// because binary floats are dyadic rationals.
    pub fn to_rationals(&self) -> (BigRational, BigRational) {
        match self {
            Scalar::Exact(x) => (x.re.clone(), x.im.clone()),
            Scalar::Float(x) => x.to_rationals(),
        }
    }

    /// Converts to another mode. Exact → float rounds; float → exact is
    /// rejected because it would invent exactness that was never there.
    pub fn to_mode(&self, mode: ScalarMode) -> Result<Scalar> {
        match (self, mode) {
            (Scalar::Exact(_), ScalarMode::Exact) => Ok(self.clone()),
            (Scalar::Exact(x), ScalarMode::Float { precision_bits }) => Ok(Scalar::Float(
                FloatComplex::from_rationals(&x.re, &x.im, precision_bits),
            )),
            (Scalar::Float(x), ScalarMode::Float { precision_bits }) => {
                Ok(Scalar::Float(x.with_precision(precision_bits)))
            }
            (Scalar::Float(_), ScalarMode::Exact) => Err(QmplError::ModeMismatch(
                "float values cannot be promoted to exact mode".into(),
            )),
        }
    }

    /// Parses `p/q`, decimals, and complex forms like `1/2-3/4i`. A trailing
    /// `@bits` tag marks a float literal and sets its precision.
    pub fn parse(s: &str, mode: ScalarMode) -> Result<Scalar> {
        text::parse_scalar(s, mode)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::format_scalar(self))
    }
}

impl Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Text with an `@bits` tag reads back as a float of that precision,
/// anything else as exact.
impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let mode = match s.rsplit_once('@') {
            Some((_, bits)) => ScalarMode::float(bits.trim().parse().map_err(serde::de::Error::custom)?),
            None => ScalarMode::Exact,
        };
        Scalar::parse(&s, mode).map_err(serde::de::Error::custom)
    }
}
