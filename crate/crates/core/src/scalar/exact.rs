use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::field::Field;

/// Complex number with arbitrary-size rational parts. Never rounds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExactComplex {
    pub re: BigRational,
    pub im: BigRational,
}

impl ExactComplex {
    pub fn real(re: BigRational) -> Self {
        ExactComplex {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn new(re: BigRational, im: BigRational) -> Self {
        ExactComplex { re, im }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::real(BigRational::new(num.into(), den.into()))
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// All `n`-th roots of `self`, when every one of them is a Gaussian rational.
    ///
    /// That happens for `n = 1`, for `self = 0`, for `n = 2` with `±s²`, and for
    /// `n = 4` with `s⁴`, `s` rational. Anything else needs float mode.
    pub fn rational_roots(&self, n: u32) -> Option<Vec<ExactComplex>> {
        if n == 0 {
            return None;
        }
        if n == 1 {
            return Some(vec![self.clone()]);
        }
        if self.re.is_zero() && self.im.is_zero() {
            return Some(vec![self.clone(); n as usize]);
        }
        if !self.im.is_zero() {
            return None;
        }
        let x = &self.re;
        let i_unit = ExactComplex::new(BigRational::zero(), BigRational::one());
        match n {
            2 => {
                let s = exact_root(&x.abs(), 2)?;
                let base = if x.is_negative() {
                    i_unit.mul(&ExactComplex::real(s))
                } else {
                    ExactComplex::real(s)
                };
                Some(vec![base.clone(), base.neg()])
            }
            4 if x.is_positive() => {
                let s = ExactComplex::real(exact_root(x, 4)?);
                let is = i_unit.mul(&s);
                Some(vec![s.clone(), is.clone(), s.neg(), is.neg()])
            }
            _ => None,
        }
    }
}

/// Exact `n`-th root of a nonnegative rational, if it is rational.
fn exact_root(x: &BigRational, n: u32) -> Option<BigRational> {
    let p = x.numer().nth_root(n);
    let q = x.denom().nth_root(n);
    if num_traits::pow(p.clone(), n as usize) == *x.numer()
        && num_traits::pow(q.clone(), n as usize) == *x.denom()
    {
        Some(BigRational::new(p, q))
    } else {
        None
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    r.to_f64().unwrap_or_else(|| {
        // Out of f64 range: fall back to bit lengths.
        let shift = r.numer().bits() as i64 - r.denom().bits() as i64;
        let sign = if r.numer().sign() == Sign::Minus { -1.0 } else { 1.0 };
        sign * 2f64.powi(shift.clamp(-1100, 1100) as i32)
    })
}

impl Field for ExactComplex {
    const EXACT: bool = true;

    fn zero_like(&self) -> Self {
        ExactComplex::real(BigRational::zero())
    }

    fn one_like(&self) -> Self {
        ExactComplex::real(BigRational::one())
    }

    fn from_rational_like(&self, r: &BigRational) -> Self {
        ExactComplex::real(r.clone())
    }

    fn add(&self, rhs: &Self) -> Self {
        let im = if self.im.is_zero() && rhs.im.is_zero() {
            BigRational::zero()
        } else {
            &self.im + &rhs.im
        };
        ExactComplex::new(&self.re + &rhs.re, im)
    }

    fn sub(&self, rhs: &Self) -> Self {
        let im = if self.im.is_zero() && rhs.im.is_zero() {
            BigRational::zero()
        } else {
            &self.im - &rhs.im
        };
        ExactComplex::new(&self.re - &rhs.re, im)
    }

    fn mul(&self, rhs: &Self) -> Self {
        if self.im.is_zero() && rhs.im.is_zero() {
            return ExactComplex::real(&self.re * &rhs.re);
        }
        ExactComplex::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }

    fn neg(&self) -> Self {
        ExactComplex::new(-&self.re, -&self.im)
    }

    fn checked_div(&self, rhs: &Self) -> Option<Self> {
        if rhs.is_zero() {
            return None;
        }
        if rhs.im.is_zero() {
            let im = if self.im.is_zero() {
                BigRational::zero()
            } else {
                &self.im / &rhs.re
            };
            return Some(ExactComplex::new(&self.re / &rhs.re, im));
        }
        let n = rhs.norm_sqr();
        let re = (&self.re * &rhs.re + &self.im * &rhs.im) / &n;
        let im = (&self.im * &rhs.re - &self.re * &rhs.im) / &n;
        Some(ExactComplex::new(re, im))
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    fn re_f64(&self) -> f64 {
        ratio_to_f64(&self.re)
    }

    fn abs_f64(&self) -> f64 {
        if self.im.is_zero() {
            return ratio_to_f64(&self.re).abs();
        }
        ratio_to_f64(&self.norm_sqr()).sqrt()
    }

    fn abs_cmp_one(&self) -> Ordering {
        self.norm_sqr().cmp(&BigRational::one())
    }

    fn from_i64_like(&self, v: i64) -> Self {
        ExactComplex::real(BigRational::from_integer(BigInt::from(v)))
    }
}
