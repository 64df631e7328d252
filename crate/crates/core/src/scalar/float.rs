use std::cmp::Ordering;

use astro_float::{BigFloat, Consts, RoundingMode, Sign as FloatSign};
use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::field::Field;

#[cfg(not(target_pointer_width = "64"))]
compile_error!("float mode assumes 64-bit astro-float mantissa words");

const RM: RoundingMode = RoundingMode::ToEven;
const WORD_BITS: usize = 64;

/// Smallest supported precision; anything smaller is raised to it.
pub const MIN_PRECISION_BITS: u32 = 53;

/// Precisions are stored rounded up to whole mantissa words, matching what
/// the backend actually carries.
pub fn normalize_precision(bits: u32) -> u32 {
    let bits = bits.max(MIN_PRECISION_BITS) as usize;
    (bits.div_ceil(WORD_BITS) * WORD_BITS) as u32
}

/// Complex binary floating value with a fixed working precision.
#[derive(Debug, Clone)]
pub struct FloatComplex {
    pub re: BigFloat,
    pub im: BigFloat,
    prec: usize,
}

fn zero_float(prec: usize) -> BigFloat {
    BigFloat::from_word(0, prec)
}

fn biguint_to_float(u: &BigUint) -> BigFloat {
    let words = u.to_u64_digits();
    if words.is_empty() {
        return zero_float(WORD_BITS);
    }
    BigFloat::from_words(&words, FloatSign::Pos, (words.len() * WORD_BITS) as i32)
}

/// Correctly rounded conversion of a rational to `prec` bits.
pub fn rational_to_float(r: &BigRational, prec: usize) -> BigFloat {
    if r.is_zero() {
        return zero_float(prec);
    }
    let num = biguint_to_float(r.numer().magnitude());
    let den = biguint_to_float(r.denom().magnitude());
    let mut q = num.div(&den, prec, RM);
    if r.is_negative() {
        q.inv_sign();
    }
    q
}

/// Exact value of a float as a rational.
pub fn float_to_rational(x: &BigFloat) -> BigRational {
    let Some((words, _bits, sign, exp, _)) = x.as_raw_parts() else {
        return BigRational::zero();
    };
    if x.is_zero() {
        return BigRational::zero();
    }
    let mag = BigUint::from_slice(
        &words
            .iter()
            .flat_map(|w| [(*w & 0xffff_ffff) as u32, (*w >> 32) as u32])
            .collect::<Vec<_>>(),
    );
    let shift = exp as i64 - (words.len() * WORD_BITS) as i64;
    let mut value = BigRational::from_integer(BigInt::from_biguint(Sign::Plus, mag));
    let two = BigRational::from_integer(BigInt::from(2));
    if shift >= 0 {
        value *= num_traits::pow(two, shift as usize);
    } else {
        value /= num_traits::pow(two, (-shift) as usize);
    }
    if sign == FloatSign::Neg {
        -value
    } else {
        value
    }
}

fn float_to_f64(x: &BigFloat) -> f64 {
    let Some((words, _, sign, exp, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    if x.is_zero() || words.is_empty() {
        return 0.0;
    }
    let top = words[words.len() - 1] as f64 / 2f64.powi(WORD_BITS as i32);
    let v = top * 2f64.powi(exp.clamp(-1100, 1100));
    if sign == FloatSign::Neg {
        -v
    } else {
        v
    }
}

fn new_consts() -> Consts {
    Consts::new().expect("astro-float constants cache")
}

impl FloatComplex {
    pub fn new(re: BigFloat, im: BigFloat, precision_bits: u32) -> Self {
        let prec = normalize_precision(precision_bits) as usize;
        FloatComplex { re, im, prec }
    }

    pub fn from_rationals(re: &BigRational, im: &BigRational, precision_bits: u32) -> Self {
        let prec = normalize_precision(precision_bits) as usize;
        FloatComplex {
            re: rational_to_float(re, prec),
            im: rational_to_float(im, prec),
            prec,
        }
    }

    pub fn precision_bits(&self) -> u32 {
        self.prec as u32
    }

    /// Re-rounds to another precision.
    pub fn with_precision(&self, precision_bits: u32) -> Self {
        let prec = normalize_precision(precision_bits) as usize;
        let mut re = self.re.clone();
        let mut im = self.im.clone();
        // set_precision only fails on allocation errors
        let _ = re.set_precision(prec, RM);
        let _ = im.set_precision(prec, RM);
        FloatComplex { re, im, prec }
    }

    pub fn to_rationals(&self) -> (BigRational, BigRational) {
        (float_to_rational(&self.re), float_to_rational(&self.im))
    }

    pub fn norm_sqr(&self) -> BigFloat {
        let a = self.re.mul(&self.re, self.prec, RM);
        let b = self.im.mul(&self.im, self.prec, RM);
        a.add(&b, self.prec, RM)
    }

    /// All `n` complex `n`-th roots, principal root first, then rotated by
    /// successive powers of the primitive root of unity `exp(2πi/n)`.
    pub fn roots(&self, n: u32) -> Vec<FloatComplex> {
        assert!(n >= 1);
        if self.is_zero() {
            return vec![self.clone(); n as usize];
        }
        // guard bits for the transcendental steps
        let wp = self.prec + 64;
        let mut cc = new_consts();
        let pi = cc.pi(wp, RM);
        let re = self.re.clone();
        let im = self.im.clone();
        let modulus = self.norm_sqr().sqrt(wp, RM);
        let nf = BigFloat::from_word(n as u64, wp);
        let log_mod = modulus.ln(wp, RM, &mut cc);
        let root_mod = log_mod.div(&nf, wp, RM).exp(wp, RM, &mut cc);
        let arg = if re.is_zero() {
            let half_pi = pi.div(&BigFloat::from_word(2, wp), wp, RM);
            if im.is_negative() {
                half_pi.neg()
            } else {
                half_pi
            }
        } else {
            let base = im.div(&re, wp, RM).atan(wp, RM, &mut cc);
            if re.is_positive() {
                base
            } else if im.is_negative() {
                base.sub(&pi, wp, RM)
            } else {
                base.add(&pi, wp, RM)
            }
        };
        let two_pi = pi.mul(&BigFloat::from_word(2, wp), wp, RM);
        (0..n)
            .map(|k| {
                let angle = arg
                    .add(&two_pi.mul(&BigFloat::from_word(k as u64, wp), wp, RM), wp, RM)
                    .div(&nf, wp, RM);
                let c = angle.cos(wp, RM, &mut cc).mul(&root_mod, wp, RM);
                let s = angle.sin(wp, RM, &mut cc).mul(&root_mod, wp, RM);
                FloatComplex::new(c, s, self.prec as u32).with_precision(self.prec as u32)
            })
            .collect()
    }
}

impl PartialEq for FloatComplex {
    fn eq(&self, other: &Self) -> bool {
        self.re.cmp(&other.re) == Some(0) && self.im.cmp(&other.im) == Some(0)
    }
}

impl Field for FloatComplex {
    const EXACT: bool = false;

    fn zero_like(&self) -> Self {
        FloatComplex {
            re: zero_float(self.prec),
            im: zero_float(self.prec),
            prec: self.prec,
        }
    }

    fn one_like(&self) -> Self {
        FloatComplex {
            re: BigFloat::from_word(1, self.prec),
            im: zero_float(self.prec),
            prec: self.prec,
        }
    }

    fn from_rational_like(&self, r: &BigRational) -> Self {
        FloatComplex {
            re: rational_to_float(r, self.prec),
            im: zero_float(self.prec),
            prec: self.prec,
        }
    }

    fn add(&self, rhs: &Self) -> Self {
        let p = self.prec;
        FloatComplex {
            re: self.re.add(&rhs.re, p, RM),
            im: self.im.add(&rhs.im, p, RM),
            prec: p,
        }
    }

    fn sub(&self, rhs: &Self) -> Self {
        let p = self.prec;
        FloatComplex {
            re: self.re.sub(&rhs.re, p, RM),
            im: self.im.sub(&rhs.im, p, RM),
            prec: p,
        }
    }

    fn mul(&self, rhs: &Self) -> Self {
        let p = self.prec;
        if self.im.is_zero() && rhs.im.is_zero() {
            return FloatComplex {
                re: self.re.mul(&rhs.re, p, RM),
                im: zero_float(p),
                prec: p,
            };
        }
        let ac = self.re.mul(&rhs.re, p, RM);
        let bd = self.im.mul(&rhs.im, p, RM);
        let ad = self.re.mul(&rhs.im, p, RM);
        let bc = self.im.mul(&rhs.re, p, RM);
        FloatComplex {
            re: ac.sub(&bd, p, RM),
            im: ad.add(&bc, p, RM),
            prec: p,
        }
    }

    fn neg(&self) -> Self {
        FloatComplex {
            re: self.re.neg(),
            im: self.im.neg(),
            prec: self.prec,
        }
    }

    fn checked_div(&self, rhs: &Self) -> Option<Self> {
        if rhs.is_zero() {
            return None;
        }
        let p = self.prec;
        if rhs.im.is_zero() {
            return Some(FloatComplex {
                re: self.re.div(&rhs.re, p, RM),
                im: if self.im.is_zero() {
                    zero_float(p)
                } else {
                    self.im.div(&rhs.re, p, RM)
                },
                prec: p,
            });
        }
        let n = rhs.norm_sqr();
        let re = self
            .re
            .mul(&rhs.re, p, RM)
            .add(&self.im.mul(&rhs.im, p, RM), p, RM)
            .div(&n, p, RM);
        let im = self
            .im
            .mul(&rhs.re, p, RM)
            .sub(&self.re.mul(&rhs.im, p, RM), p, RM)
            .div(&n, p, RM);
        Some(FloatComplex { re, im, prec: p })
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn is_one(&self) -> bool {
        self.im.is_zero() && self.re.cmp(&BigFloat::from_word(1, self.prec)) == Some(0)
    }

    fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    fn re_f64(&self) -> f64 {
        float_to_f64(&self.re)
    }

    fn abs_f64(&self) -> f64 {
        let a = float_to_f64(&self.re);
        let b = float_to_f64(&self.im);
        a.hypot(b)
    }

    fn abs_cmp_one(&self) -> Ordering {
        let one = BigFloat::from_word(1, self.prec);
        match self.norm_sqr().cmp(&one) {
            Some(c) if c < 0 => Ordering::Less,
            Some(0) => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }
}
