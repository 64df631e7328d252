//! q-calculus primitives: the deformation parameter, q-brackets, the
//! q-derivative, and Jackson integrals.

mod jackson;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use jackson::{
    jackson_integral, jackson_iterated, minimal_lattice_cap, IntegrationWord, IteratedResult,
    JacksonConfig, JacksonResult, Letter, SingularPolicy,
};

use crate::error::{QmplError, Result};
use crate::scalar::Scalar;

/// Which side of the unit circle `q` lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `|q| < 1`
    Inside,
    /// `|q| > 1`
    Outside,
}

/// Deformation parameter with its regime. `|q| = 1` is rejected: it holds
/// every root of unity, where `1 - q^k` vanishes for some `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct QParam {
    q: Scalar,
    regime: Regime,
}

impl QParam {
    pub fn new(q: Scalar) -> Result<Self> {
        if q.is_zero() {
            return Err(QmplError::InvalidParameter("q must be nonzero".into()));
        }
        if q.is_one() {
            return Err(QmplError::InvalidParameter("q = 1 is the undeformed case".into()));
        }
        let regime = match q.abs_cmp_one() {
            Ordering::Less => Regime::Inside,
            Ordering::Greater => Regime::Outside,
            Ordering::Equal => {
                return Err(QmplError::InvalidParameter(format!(
                    "|q| = 1 is not supported (q = {q})"
                )))
            }
        };
        Ok(QParam { q, regime })
    }

    pub fn q(&self) -> &Scalar {
        &self.q
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn abs_f64(&self) -> f64 {
        self.q.abs_f64()
    }

    /// `q^n` as a new parameter.
    pub fn power(&self, n: u32) -> Result<QParam> {
        QParam::new(self.q.pow(n))
    }
}

/// `[k]_q = (1 - q^k) / (1 - q)`.
pub fn q_bracket(k: u32, q: &QParam) -> Result<Scalar> {
    if k == 0 {
        return Err(QmplError::InvalidParameter("q-bracket needs k >= 1".into()));
    }
    let one = q.q.one_like();
    let num = one.try_sub(&q.q.pow(k))?;
    let den = one.try_sub(&q.q)?;
    num.try_div(&den)
        .map_err(|_| QmplError::InvalidParameter("q = 1".into()))
}

/// `D_q f(z0) = (f(q z0) - f(z0)) / ((q - 1) z0)`.
pub fn q_derivative<F>(f: F, z0: &Scalar, q: &QParam) -> Result<Scalar>
where
    F: Fn(&Scalar) -> Result<Scalar>,
{
    if z0.is_zero() {
        return Err(QmplError::SingularPoint(
            "q-derivative is undefined at z0 = 0".into(),
        ));
    }
    let shifted = f(&q.q.try_mul(z0)?)?;
    let base = f(z0)?;
    let den = q.q.try_sub(&q.q.one_like())?.try_mul(z0)?;
    shifted.try_sub(&base)?.try_div(&den)
}
