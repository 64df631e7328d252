//! Truncated evaluation of q-deformed and classical multiple polylogarithms
//! and of q-deformed multiple zeta values.
//!
//! Every evaluator sums `0 < k1 < .. < km <= K` with the cutoff `K` on the
//! outermost index, and reports an upper bound on the discarded tail.

mod bounds;
mod checks;
mod kernel;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use bounds::{chain_tail, classical_tail, max_suffix_product, mzv_tail, qmpl_tail, rounding_budget};
pub use checks::{check_derivative_relation, classical_limit_check};

use crate::error::{QmplError, Result};
use crate::qcalc::{QParam, Regime};
use crate::scalar::{unify, Scalar, Unified};
use kernel::{abs_nested_sum, nested_sum, Base};

/// Index tuple `(n1, .., nm)` with every `n_i >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Composition(Vec<u32>);

impl Composition {
    pub fn new(indices: Vec<u32>) -> Result<Self> {
        if indices.is_empty() {
            return Err(QmplError::InvalidParameter("composition must be non-empty".into()));
        }
        if indices.contains(&0) {
            return Err(QmplError::InvalidParameter(format!(
                "composition indices must be >= 1, got {indices:?}"
            )));
        }
        Ok(Composition(indices))
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    /// Indices with slot `j` (0-based) lowered by one; may contain a zero.
    pub(crate) fn lowered(&self, j: usize) -> Vec<u32> {
        let mut v = self.0.clone();
        v[j] -= 1;
        v
    }
}

impl TryFrom<Vec<u32>> for Composition {
    type Error = QmplError;
    fn try_from(v: Vec<u32>) -> Result<Self> {
        Composition::new(v)
    }
}

impl From<Composition> for Vec<u32> {
    fn from(c: Composition) -> Self {
        c.0
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for Composition {
    type Err = QmplError;

    /// Accepts `1,2`, `(1,2)` or `[1, 2]`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches(['(', '[']).trim_end_matches([')', ']']);
        let indices = t
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<u32>()
                    .map_err(|_| QmplError::Parse(format!("bad composition {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Composition::new(indices)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    GeometricBound,
    /// Skip the bound; results report an unbounded tail.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationSpec {
    /// Cutoff on the outermost summation index.
    pub cutoff: usize,
    pub tail: TailMethod,
}

impl TruncationSpec {
    pub fn new(cutoff: usize) -> Self {
        TruncationSpec {
            cutoff,
            tail: TailMethod::GeometricBound,
        }
    }

    fn check(&self, depth: usize) -> Result<()> {
        if self.cutoff < depth {
            return Err(QmplError::Truncation(format!(
                "cutoff {} is below the depth {depth}; the truncated sum would be empty",
                self.cutoff
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailBound {
    Finite(f64),
    Unbounded,
}

impl TailBound {
    fn from_f64(v: f64) -> Self {
        if v.is_finite() {
            TailBound::Finite(v)
        } else {
            TailBound::Unbounded
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            TailBound::Finite(v) => *v,
            TailBound::Unbounded => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, TailBound::Finite(_))
    }
}

impl Serialize for TailBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TailBound::Finite(v) => s.serialize_f64(*v),
            TailBound::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

impl<'de> Deserialize<'de> for TailBound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) if s == "unbounded" => Ok(TailBound::Unbounded),
            serde_json::Value::Number(n) => Ok(TailBound::Finite(n.as_f64().unwrap_or(f64::MAX))),
            other => Err(serde::de::Error::custom(format!("bad tail bound {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: Scalar,
    /// Bound on `|full series - value|` from the discarded terms.
    pub tail_bound: TailBound,
    /// Number of index chains in the truncated sum, `C(K, m)` (saturating).
    pub terms_summed: u64,
    /// Bound on the floating-point rounding in `value`; zero in exact mode.
    pub rounding_bound: f64,
}

fn binomial_saturating(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    c as u64
}

/// The truncated nested sum in whatever mode the inputs share. `q = None`
/// selects the classical denominators `k^n`.
pub(crate) fn truncated_sum(indices: &[u32], z: &[Scalar], q: Option<&Scalar>, cutoff: usize) -> Result<Scalar> {
    if indices.len() != z.len() {
        return Err(QmplError::InvalidParameter(format!(
            "{} arguments for a composition of depth {}",
            z.len(),
            indices.len()
        )));
    }
    let mut all: Vec<&Scalar> = z.iter().collect();
    all.extend(q);
    match unify(&all)? {
        Unified::Exact(mut v) => {
            let base = if q.is_some() { v.pop() } else { None };
            let b = base.as_ref().map_or(Base::Classical, Base::Deformed);
            nested_sum(indices, &v, b, cutoff).map(Scalar::Exact)
        }
        Unified::Float(mut v) => {
            let base = if q.is_some() { v.pop() } else { None };
            let b = base.as_ref().map_or(Base::Classical, Base::Deformed);
            nested_sum(indices, &v, b, cutoff).map(Scalar::Float)
        }
    }
}

/// Lower bound on `|1 - q^k|` from `|q|` alone.
fn denominator_floor(q_abs: f64, k: usize) -> f64 {
    (1.0 - q_abs.powi(k as i32)).abs()
}

/// Rounding allowance for a float evaluation of the truncated sum.
///
/// Each term is a product of about `weight + depth` rounded factors; `q^k`
/// accumulates `k` roundings and `1 - q^k` amplifies them by at most
/// `|q| / ||q| - 1|`. The prefix sums add `K` more per level.
pub(crate) fn rounding_allowance(indices: &[u32], z: &[Scalar], q: Option<&Scalar>, cutoff: usize) -> f64 {
    let prec = match z.first().and_then(|s| s.mode().precision_bits()) {
        Some(p) => p,
        None => return 0.0,
    };
    let abs_z: Vec<f64> = z.iter().map(Scalar::abs_f64).collect();
    let weight: u32 = indices.iter().sum();
    let depth = indices.len() as u64;
    let (magnitude, cond) = match q {
        Some(q) => {
            let qa = q.abs_f64();
            let m = abs_nested_sum(indices, &abs_z, |k| denominator_floor(qa, k), cutoff);
            (m, 1.0 + qa / (qa - 1.0).abs())
        }
        None => (abs_nested_sum(indices, &abs_z, |k| k as f64, cutoff), 1.0),
    };
    let ops = 4 * (depth + weight as u64 + 2) * (cutoff as u64 + 1);
    rounding_budget(magnitude.max(f64::MIN_POSITIVE), ops, prec) * cond
}

/// First slot `j` (0-based) whose suffix product `z_j ··· z_m` violates the
/// bound; `allow_unit` admits modulus exactly one.
fn suffix_violation(z: &[Scalar], allow_unit: bool) -> Result<Option<usize>> {
    let mut p = z.last().map(Scalar::one_like).unwrap_or_else(|| Scalar::integer(1));
    for (j, zj) in z.iter().enumerate().rev() {
        p = p.try_mul(zj)?;
        match p.abs_cmp_one() {
            std::cmp::Ordering::Less => {}
            std::cmp::Ordering::Equal if allow_unit => {}
            _ => return Ok(Some(j)),
        }
    }
    Ok(None)
}

fn domain_error(j: usize) -> QmplError {
    QmplError::Domain(format!(
        "suffix product |z_{} ··· z_m| is outside the convergence domain",
        j + 1
    ))
}

fn check_arity(comp: &Composition, z: &[Scalar]) -> Result<()> {
    if comp.depth() != z.len() {
        return Err(QmplError::InvalidParameter(format!(
            "{} arguments for composition {comp}",
            z.len()
        )));
    }
    Ok(())
}

fn qmpl_inner(comp: &Composition, z: &[Scalar], q: &QParam, trunc: &TruncationSpec, checked: bool) -> Result<EvalResult> {
    check_arity(comp, z)?;
    trunc.check(comp.depth())?;
    let allow_unit = q.regime() == Regime::Outside;
    let violation = suffix_violation(z, allow_unit)?;
    if checked {
        if let Some(j) = violation {
            return Err(domain_error(j));
        }
    }
    let value = truncated_sum(comp.indices(), z, Some(q.q()), trunc.cutoff)?;
    let tail_bound = match (violation, trunc.tail) {
        (None, TailMethod::GeometricBound) => {
            let abs_z: Vec<f64> = z.iter().map(Scalar::abs_f64).collect();
            TailBound::from_f64(qmpl_tail(comp.indices(), &abs_z, q.abs_f64(), trunc.cutoff))
        }
        _ => TailBound::Unbounded,
    };
    Ok(EvalResult {
        value,
        tail_bound,
        terms_summed: binomial_saturating(trunc.cutoff, comp.depth()),
        rounding_bound: rounding_allowance(comp.indices(), z, Some(q.q()), trunc.cutoff),
    })
}

/// `Li_{n1..nm}(z1..zm; q)` truncated at `trunc.cutoff`.
///
/// Requires every suffix product `|z_j ··· z_m|` to be below one, or at most
/// one when `|q| > 1`.
pub fn eval_qmpl(comp: &Composition, z: &[Scalar], q: &QParam, trunc: &TruncationSpec) -> Result<EvalResult> {
    qmpl_inner(comp, z, q, trunc, true)
}

/// As [`eval_qmpl`], but outside the convergence domain the truncated value
/// is still returned, with an unbounded tail.
pub fn eval_qmpl_unchecked(comp: &Composition, z: &[Scalar], q: &QParam, trunc: &TruncationSpec) -> Result<EvalResult> {
    qmpl_inner(comp, z, q, trunc, false)
}

/// Classical `Li_{n1..nm}(z1..zm)` truncated at `trunc.cutoff`.
///
/// Suffix products must be below one in modulus, except for the multiple
/// zeta case: all arguments equal to one and `n_m > 1`.
pub fn eval_classical_mpl(comp: &Composition, z: &[Scalar], trunc: &TruncationSpec) -> Result<EvalResult> {
    check_arity(comp, z)?;
    trunc.check(comp.depth())?;
    let all_ones = z.iter().all(Scalar::is_one);
    let last = *comp.indices().last().expect("non-empty");
    let tail = if all_ones {
        if last < 2 {
            return Err(QmplError::Domain(format!(
                "multiple zeta series {comp} diverges: the last index must exceed 1"
            )));
        }
        mzv_tail(comp.indices(), trunc.cutoff)
    } else {
        if let Some(j) = suffix_violation(z, false)? {
            return Err(domain_error(j));
        }
        let abs_z: Vec<f64> = z.iter().map(Scalar::abs_f64).collect();
        classical_tail(comp.indices(), &abs_z, trunc.cutoff)
    };
    let value = truncated_sum(comp.indices(), z, None, trunc.cutoff)?;
    Ok(EvalResult {
        value,
        tail_bound: match trunc.tail {
            TailMethod::GeometricBound => TailBound::from_f64(tail),
            TailMethod::None => TailBound::Unbounded,
        },
        terms_summed: binomial_saturating(trunc.cutoff, comp.depth()),
        rounding_bound: rounding_allowance(comp.indices(), z, None, trunc.cutoff),
    })
}

/// `ζ_q(n1..nm)`: all arguments one. Only convergent for `|q| > 1`.
pub fn eval_qmzv(comp: &Composition, q: &QParam, trunc: &TruncationSpec) -> Result<EvalResult> {
    if q.regime() == Regime::Inside {
        return Err(QmplError::DivergentSeries(format!(
            "ζ_q{comp} diverges for |q| < 1 (terms tend to 1); use the formal ζ_q word algebra instead"
        )));
    }
    let one = q.q().one_like();
    let z = vec![one; comp.depth()];
    eval_qmpl(comp, &z, q, trunc)
}

/// Smallest cutoff (up to `max_cutoff`) whose q-deformed tail bound is at
/// most `target`. Returns `None` when no such cutoff exists in range.
pub fn auto_cutoff(comp: &Composition, abs_z: &[f64], q_abs: f64, target: f64, max_cutoff: usize) -> Option<usize> {
    let ok = |k: usize| qmpl_tail(comp.indices(), abs_z, q_abs, k) <= target;
    let mut hi = comp.depth().max(1);
    while !ok(hi) {
        if hi >= max_cutoff {
            return None;
        }
        hi = (hi * 2).min(max_cutoff);
    }
    let mut lo = comp.depth().max(1);
    if ok(lo) {
        return Some(lo);
    }
    // invariant: !ok(lo), ok(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ScalarMode;

    fn comp(v: &[u32]) -> Composition {
        Composition::new(v.to_vec()).unwrap()
    }

    fn qp(n: i64, d: i64) -> QParam {
        QParam::new(Scalar::ratio(n, d)).unwrap()
    }

    #[test]
    fn composition_basics() {
        let c = comp(&[1, 2, 3]);
        assert_eq!((c.weight(), c.depth()), (6, 3));
        assert_eq!(c.to_string(), "(1,2,3)");
        assert_eq!("(1, 2,3)".parse::<Composition>().unwrap(), c);
        assert_eq!("[2]".parse::<Composition>().unwrap(), comp(&[2]));
        assert!(Composition::new(vec![]).is_err());
        assert!(Composition::new(vec![1, 0]).is_err());
        assert_eq!(c.lowered(0), vec![0, 2, 3]);
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, "[1,2,3]");
        assert!(serde_json::from_str::<Composition>("[0]").is_err());
    }

    #[test]
    fn depth_one_hand_value() {
        // 1 + 1/3 + 1/7
        let r = eval_qmpl(&comp(&[1]), &[Scalar::ratio(1, 2)], &qp(1, 2), &TruncationSpec::new(3)).unwrap();
        assert_eq!(r.value, Scalar::ratio(31, 21));
        assert_eq!(r.terms_summed, 3);
        assert_eq!(r.rounding_bound, 0.0);
        assert!(r.tail_bound.is_finite());
    }

    #[test]
    fn zero_argument() {
        let r = eval_qmpl(&comp(&[1]), &[Scalar::integer(0)], &qp(1, 3), &TruncationSpec::new(10)).unwrap();
        assert!(r.value.is_zero());
        let r = eval_classical_mpl(&comp(&[1]), &[Scalar::integer(0)], &TruncationSpec::new(10)).unwrap();
        assert!(r.value.is_zero());
    }

    #[test]
    fn domain_and_regime_errors() {
        let t = TruncationSpec::new(10);
        let e = eval_qmpl(&comp(&[1]), &[Scalar::integer(1)], &qp(1, 2), &t);
        assert!(matches!(e, Err(QmplError::Domain(_))));
        let r = eval_qmpl_unchecked(&comp(&[1]), &[Scalar::integer(1)], &qp(1, 2), &t).unwrap();
        assert_eq!(r.tail_bound, TailBound::Unbounded);
        // outside regime admits unit arguments
        assert!(eval_qmpl(&comp(&[1, 1]), &[Scalar::integer(1), Scalar::integer(1)], &qp(2, 1), &t).is_ok());
        let e = eval_qmzv(&comp(&[2]), &qp(1, 2), &t);
        assert!(matches!(e, Err(QmplError::DivergentSeries(_))));
        let e = eval_classical_mpl(&comp(&[1]), &[Scalar::integer(1)], &t);
        assert!(matches!(e, Err(QmplError::Domain(_))));
        let e = eval_qmpl(&comp(&[1, 1]), &[Scalar::ratio(1, 2)], &qp(1, 2), &t);
        assert!(matches!(e, Err(QmplError::InvalidParameter(_))));
        let e = eval_qmpl(&comp(&[1, 1]), &vec![Scalar::ratio(1, 2); 2], &qp(1, 2), &TruncationSpec::new(1));
        assert!(matches!(e, Err(QmplError::Truncation(_))));
        let f = Scalar::ratio(1, 2).to_mode(ScalarMode::float(64)).unwrap();
        let e = eval_qmpl(&comp(&[1]), &[f], &qp(1, 2), &t);
        assert!(matches!(e, Err(QmplError::ModeMismatch(_))));
    }

    #[test]
    fn qmzv_two_at_q_two() {
        // Σ 1/(2^k - 1)^2 = 1 + 1/9 + 1/49 + 1/225 + ...
        let r = eval_qmzv(&comp(&[2]), &qp(2, 1), &TruncationSpec::new(20)).unwrap();
        let direct: f64 = (1..=60).map(|k| 1.0 / (2f64.powi(k) - 1.0).powi(2)).sum();
        assert!((r.value.re_f64() - direct).abs() < 1e-11);
        assert!((r.value.re_f64() - 1.1373387363).abs() < 1e-9);
        assert!(r.tail_bound.as_f64() < 4f64.powi(-20) * 4.0);
    }

    #[test]
    fn classical_values() {
        let r = eval_classical_mpl(&comp(&[2]), &[Scalar::ratio(1, 2)], &TruncationSpec::new(60)).unwrap();
        assert!((r.value.re_f64() - 0.5822405265).abs() < 1e-10);
        assert!(r.tail_bound.as_f64() < 1e-18);
        let r = eval_classical_mpl(&comp(&[2]), &[Scalar::integer(1)], &TruncationSpec::new(2000)).unwrap();
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        let err = zeta2 - r.value.re_f64();
        assert!(err > 0.0 && err <= r.tail_bound.as_f64());
    }

    #[test]
    fn float_matches_exact_within_rounding() {
        let c = comp(&[1, 2]);
        let z = [Scalar::ratio(-1, 3), Scalar::ratio(2, 5)];
        let q = qp(3, 4);
        let t = TruncationSpec::new(30);
        let exact = eval_qmpl(&c, &z, &q, &t).unwrap();
        let m = ScalarMode::float(128);
        let zf: Vec<Scalar> = z.iter().map(|s| s.to_mode(m).unwrap()).collect();
        let qf = QParam::new(q.q().to_mode(m).unwrap()).unwrap();
        let float = eval_qmpl(&c, &zf, &qf, &t).unwrap();
        let d = float.value.try_sub(&exact.value.to_mode(m).unwrap()).unwrap().abs_f64();
        assert!(d <= float.rounding_bound, "{d} > {}", float.rounding_bound);
        assert!(float.rounding_bound < 1e-30);
    }

    #[test]
    fn tail_bound_covers_doubling() {
        let c = comp(&[1, 1]);
        let z = [Scalar::ratio(3, 4), Scalar::ratio(2, 3)];
        let q = qp(1, 2);
        let a = eval_qmpl(&c, &z, &q, &TruncationSpec::new(20)).unwrap();
        let b = eval_qmpl(&c, &z, &q, &TruncationSpec::new(40)).unwrap();
        let d = b.value.try_sub(&a.value).unwrap().abs_f64();
        assert!(d <= a.tail_bound.as_f64());
    }

    #[test]
    fn auto_cutoff_reaches_target() {
        let c = comp(&[2]);
        let k = auto_cutoff(&c, &[1.0], 2.0, 1e-20, 10_000).unwrap();
        assert!(qmpl_tail(&[2], &[1.0], 2.0, k) <= 1e-20);
        assert!(qmpl_tail(&[2], &[1.0], 2.0, k - 1) > 1e-20);
        assert_eq!(auto_cutoff(&c, &[1.0], 0.5, 1e-20, 10_000), None);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial_saturating(40, 2), 780);
        assert_eq!(binomial_saturating(3, 5), 0);
        assert_eq!(binomial_saturating(100_000, 50), u64::MAX);
    }
}
