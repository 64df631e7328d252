//! Seeded parameter generation. Every value is a small rational so exact
//! mode stays cheap; float mode converts the same rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::eval::Composition;

/// Nonzero rational with denominator at most `max_den` and modulus at most
/// `max_abs_num / max_abs_den`.
pub(crate) fn rational(rng: &mut ChaCha8Rng, max_den: i64, max_abs: (i64, i64)) -> BigRational {
    loop {
        let den = rng.gen_range(1..=max_den);
        let bound = den * max_abs.0 / max_abs.1;
        if bound < 1 {
            continue;
        }
        let mut num = rng.gen_range(1..=bound);
        if rng.gen_bool(0.5) {
            num = -num;
        }
        return BigRational::new(BigInt::from(num), BigInt::from(den));
    }
}

/// Rational in `[lo, hi]` on the grid with denominator `den`.
pub(crate) fn rational_in(rng: &mut ChaCha8Rng, lo: (i64, i64), hi: (i64, i64), den: i64) -> BigRational {
    let a = (lo.0 * den).div_euclid(lo.1);
    let b = (hi.0 * den).div_euclid(hi.1);
    BigRational::new(BigInt::from(rng.gen_range(a..=b)), BigInt::from(den))
}

/// Composition of depth at most `max_depth` and weight at most `max_weight`.
pub(crate) fn composition(rng: &mut ChaCha8Rng, max_depth: usize, max_weight: u32) -> Composition {
    loop {
        let depth = rng.gen_range(1..=max_depth);
        let v: Vec<u32> = (0..depth).map(|_| rng.gen_range(1..=max_weight)).collect();
        if v.iter().sum::<u32>() <= max_weight {
            return Composition::new(v).expect("positive indices");
        }
    }
}
