use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;

/// Arithmetic shared by the exact and the floating scalar representations.
///
/// Series kernels are written once against this trait. Constructors that
/// need a precision take it from an existing value (`*_like`), so a kernel
/// never has to know which mode it runs in.
pub trait Field: Clone + fmt::Debug + PartialEq + Send + Sync {
    const EXACT: bool;

    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_rational_like(&self, r: &BigRational) -> Self;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    /// `None` when `rhs` is zero.
    fn checked_div(&self, rhs: &Self) -> Option<Self>;

    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;
    /// True when the imaginary part vanishes.
    fn is_real(&self) -> bool;
    /// Real part, rounded to `f64`.
    fn re_f64(&self) -> f64;
    /// Modulus, rounded to `f64`. Only used for bounds and reporting.
    fn abs_f64(&self) -> f64;
    /// Compares the modulus with one; exact in exact mode.
    fn abs_cmp_one(&self) -> Ordering;

    fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = self.one_like();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    fn from_i64_like(&self, v: i64) -> Self {
        self.from_rational_like(&BigRational::from_integer(v.into()))
    }
}
