//! Jackson q-integrals over the geometric lattice `{a q^i : i >= 0}`.
//!
//! The lattice is truncated at `lattice_cap`; the caller fixes a tail
//! threshold and the cap must push `|q|^(cap+1)` below it. Unlike the
//! classical integral, the lattice contains the endpoint `t = 1`, where
//! `dt/(1-t)` has a pole. What happens there is the caller's choice
//! ([`SingularPolicy`]).

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{QParam, Regime};
use crate::error::{QmplError, Result};
use crate::scalar::{unify, Field, Scalar, Unified};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularPolicy {
    /// A pole on the lattice is an error.
    #[default]
    Error,
    /// Lattice points at poles are skipped and counted.
    DropSingularPoints,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacksonConfig {
    pub lattice_cap: usize,
    pub policy: SingularPolicy,
    /// Required bound on `|q|^(lattice_cap + 1)`.
    pub tail_threshold: f64,
}

impl Default for JacksonConfig {
    fn default() -> Self {
        JacksonConfig {
            lattice_cap: 40_000,
            policy: SingularPolicy::Error,
            tail_threshold: 1e-12,
        }
    }
}

/// Smallest cap with `|q|^(cap+1) <= threshold`.
pub fn minimal_lattice_cap(q_abs: f64, threshold: f64) -> usize {
    if q_abs <= 0.0 || threshold >= 1.0 {
        return 0;
    }
    let n = (threshold.ln() / q_abs.ln()).ceil();
    (n as usize).saturating_sub(1)
}

fn check_lattice(q: &QParam, cfg: &JacksonConfig) -> Result<()> {
    if q.regime() == Regime::Outside {
        return Err(QmplError::UnsupportedRegime(
            "Jackson integration is only defined for |q| < 1".into(),
        ));
    }
    let (re, im) = q.q().to_rationals();
    if !im.is_zero() || !re.is_positive() {
        return Err(QmplError::InvalidParameter(
            "the Jackson lattice needs real 0 < q < 1".into(),
        ));
    }
    let tail = q.abs_f64().powf(cfg.lattice_cap as f64 + 1.0);
    if tail > cfg.tail_threshold {
        return Err(QmplError::InvalidParameter(format!(
            "lattice cap {} leaves |q|^(cap+1) = {tail:e} above the tail threshold {:e}",
            cfg.lattice_cap, cfg.tail_threshold
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacksonResult {
    pub value: Scalar,
    /// The truncated tail is at most `tail_factor · sup|f|` on `(0, a]`.
    pub tail_factor: f64,
    /// Lattice points skipped under [`SingularPolicy::DropSingularPoints`].
    pub omitted: usize,
}

/// `a (1-q) Σ_{i=0..cap} q^i f(a q^i)`.
pub fn jackson_integral<F>(f: F, a: &Scalar, q: &QParam, cfg: &JacksonConfig) -> Result<JacksonResult>
where
    F: Fn(&Scalar) -> Result<Scalar>,
{
    check_lattice(q, cfg)?;
    let (a_re, a_im) = a.to_rationals();
    if !a_im.is_zero() || !a_re.is_positive() || a_re > BigRational::one() {
        return Err(QmplError::InvalidParameter(
            "the upper limit must satisfy 0 < a <= 1".into(),
        ));
    }
    let qv = q.q();
    let mut t = a.clone();
    let mut weight = qv.one_like();
    let mut sum = qv.zero_like();
    let mut omitted = 0;
    for i in 0..=cfg.lattice_cap {
        match f(&t) {
            Ok(v) => sum = sum.try_add(&weight.try_mul(&v)?)?,
            Err(QmplError::SingularPoint(_)) => match cfg.policy {
                SingularPolicy::Error => return Err(QmplError::SingularLatticePoint { index: i }),
                SingularPolicy::DropSingularPoints => omitted += 1,
            },
            Err(e) => return Err(e),
        }
        t = t.try_mul(qv)?;
        weight = weight.try_mul(qv)?;
    }
    let scale = a.try_mul(&qv.one_like().try_sub(qv)?)?;
    let tail_factor = a.abs_f64() * q.abs_f64().powf(cfg.lattice_cap as f64 + 1.0);
    Ok(JacksonResult {
        value: scale.try_mul(&sum)?,
        tail_factor,
        omitted,
    })
}

/// Integration letter of an iterated integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Letter {
    /// `dt / t`
    Omega0,
    /// `dt / (1 - t)`
    Omega1,
}

/// Letters from the innermost (smallest `t`) to the outermost variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntegrationWord(Vec<Letter>);

impl IntegrationWord {
    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        if letters.is_empty() {
            return Err(QmplError::InvalidParameter("empty integration word".into()));
        }
        Ok(IntegrationWord(letters))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.len()
    }

    /// Word of the classical MZV integral: each index `n` contributes
    /// `dt/(1-t)` followed by `n-1` copies of `dt/t`.
    pub fn for_composition(indices: &[u32]) -> Result<Self> {
        let mut letters = Vec::new();
        for &n in indices {
            if n == 0 {
                return Err(QmplError::InvalidParameter("index 0 in composition".into()));
            }
            letters.push(Letter::Omega1);
            letters.extend(std::iter::repeat(Letter::Omega0).take(n as usize - 1));
        }
        IntegrationWord::new(letters)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IteratedResult {
    pub value: Scalar,
    /// Lattice tuples dropped because an `Omega1` letter sat at `t = 1`.
    pub omitted: u128,
    /// Geometric extrapolation of the truncated tail from the boundary layer
    /// of the lattice.
    pub tail_estimate: f64,
    /// Whether `tail_estimate` is below the configured threshold.
    pub converged: bool,
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Nested Jackson sum over `t1 <= t2 <= .. <= tw` on the lattice `t = q^i`,
/// each level weighted by `(1-q) t ω(t)`.
///
/// With lattice indices `i1 >= i2 >= .. >= iw`, suffix sums give the value in
/// `O(w · cap)` operations.
pub fn jackson_iterated(word: &IntegrationWord, q: &QParam, cfg: &JacksonConfig) -> Result<IteratedResult> {
    check_lattice(q, cfg)?;
    let outer_omega1 = word.0.iter().rposition(|l| *l == Letter::Omega1);
    if outer_omega1.is_some() && cfg.policy == SingularPolicy::Error {
        return Err(QmplError::SingularLatticePoint { index: 0 });
    }
    let (value, boundary) = match unify(&[q.q()])? {
        Unified::Exact(v) => {
            let (s, b) = iterated_kernel(&word.0, &v[0], cfg.lattice_cap);
            (Scalar::Exact(s), b)
        }
        Unified::Float(v) => {
            let (s, b) = iterated_kernel(&word.0, &v[0], cfg.lattice_cap);
            (Scalar::Float(s), b)
        }
    };
    let omitted = match outer_omega1 {
        // i_L = 0 forces every outer index to 0; the L-1 inner ones are free.
        Some(l) => binomial(cfg.lattice_cap as u128 + l as u128, l as u128),
        None => 0,
    };
    let qa = q.abs_f64();
    let tail_estimate = boundary * qa / (1.0 - qa);
    let scale = value.abs_f64().max(1.0);
    Ok(IteratedResult {
        value,
        omitted,
        tail_estimate,
        converged: tail_estimate <= cfg.tail_threshold * scale,
    })
}

/// Returns the truncated nested sum and `|boundary|`, the contribution of
/// tuples whose innermost index sits at the cap.
fn iterated_kernel<F: Field>(letters: &[Letter], q: &F, cap: usize) -> (F, f64) {
    let one = q.one_like();
    let one_minus_q = one.sub(q);
    // level weights per lattice index
    let mut t = one.clone();
    let mut omega0 = Vec::with_capacity(cap + 1);
    let mut omega1 = Vec::with_capacity(cap + 1);
    for i in 0..=cap {
        omega0.push(one_minus_q.clone());
        let w1 = if i == 0 {
            // dropped pole at t = 1
            q.zero_like()
        } else {
            one_minus_q
                .mul(&t)
                .checked_div(&one.sub(&t))
                .expect("1 - q^i != 0 for i >= 1")
        };
        omega1.push(w1);
        t = t.mul(q);
    }
    let weights = |l: &Letter| match l {
        Letter::Omega0 => &omega0,
        Letter::Omega1 => &omega1,
    };

    let mut sums: Vec<F> = vec![one.clone(); cap + 1];
    let mut boundary: Vec<F> = vec![q.zero_like(); cap + 1];
    boundary[cap] = one.clone();
    for letter in letters {
        let w = weights(letter);
        let mut acc = q.zero_like();
        let mut acc_b = q.zero_like();
        for i in (0..=cap).rev() {
            acc = acc.add(&w[i].mul(&sums[i]));
            acc_b = acc_b.add(&w[i].mul(&boundary[i]));
            sums[i] = acc.clone();
            boundary[i] = acc_b.clone();
        }
    }
    (sums[0].clone(), boundary[0].abs_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ScalarMode;

    fn cfg(cap: usize, policy: SingularPolicy) -> JacksonConfig {
        JacksonConfig {
            lattice_cap: cap,
            policy,
            tail_threshold: 1e-12,
        }
    }

    fn qp(n: i64, d: i64) -> QParam {
        QParam::new(Scalar::ratio(n, d)).unwrap()
    }

    #[test]
    fn constant_integrand_is_geometric() {
        let q = qp(1, 3);
        let r = jackson_integral(|t| Ok(t.one_like()), &Scalar::integer(1), &q, &cfg(30, SingularPolicy::Error)).unwrap();
        // 1 - q^(cap+1) exactly
        let expect = Scalar::integer(1).try_sub(&Scalar::ratio(1, 3).pow(31)).unwrap();
        assert_eq!(r.value, expect);
        assert!(r.tail_factor > 0.0);
        let missing = Scalar::integer(1).try_sub(&r.value).unwrap().abs_f64();
        assert!(missing <= r.tail_factor * 1.0000001);
    }

    #[test]
    fn identity_integrand_two_thirds() {
        let q = qp(1, 2);
        let r = jackson_integral(|t| Ok(t.clone()), &Scalar::integer(1), &q, &cfg(60, SingularPolicy::Error)).unwrap();
        assert!((r.value.re_f64() - 2.0 / 3.0).abs() < 1e-17);
    }

    #[test]
    fn pole_at_one_is_reported() {
        let q = qp(1, 2);
        let f = |t: &Scalar| t.one_like().try_div(&t.one_like().try_sub(t)?);
        let err = jackson_integral(f, &Scalar::integer(1), &q, &cfg(60, SingularPolicy::Error)).unwrap_err();
        assert_eq!(err, QmplError::SingularLatticePoint { index: 0 });
        let dropped = jackson_integral(f, &Scalar::integer(1), &q, &cfg(60, SingularPolicy::DropSingularPoints)).unwrap();
        assert_eq!(dropped.omitted, 1);
    }

    #[test]
    fn outside_regime_and_bad_limits() {
        let c = cfg(60, SingularPolicy::Error);
        let err = jackson_integral(|t| Ok(t.clone()), &Scalar::integer(1), &qp(3, 2), &c).unwrap_err();
        assert!(matches!(err, QmplError::UnsupportedRegime(_)));
        assert!(jackson_integral(|t| Ok(t.clone()), &Scalar::integer(2), &qp(1, 2), &c).is_err());
        assert!(jackson_integral(|t| Ok(t.clone()), &Scalar::integer(1), &qp(1, 2), &cfg(5, SingularPolicy::Error)).is_err());
        let w = IntegrationWord::new(vec![Letter::Omega0]).unwrap();
        assert!(matches!(jackson_iterated(&w, &qp(3, 2), &c), Err(QmplError::UnsupportedRegime(_))));
    }

    #[test]
    fn cap_helper() {
        let cap = minimal_lattice_cap(0.5, 1e-12);
        assert!(0.5f64.powi(cap as i32 + 1) <= 1e-12);
        assert!(0.5f64.powi(cap as i32) > 1e-12);
    }

    #[test]
    fn single_omega0_does_not_converge() {
        let q = qp(1, 2);
        let w = IntegrationWord::new(vec![Letter::Omega0]).unwrap();
        let r = jackson_iterated(&w, &q, &cfg(50, SingularPolicy::DropSingularPoints)).unwrap();
        // (1-q)(cap+1)
        assert_eq!(r.value, Scalar::ratio(51, 2));
        assert!(!r.converged);
        assert_eq!(r.omitted, 0);
    }

    #[test]
    fn zeta2_word_needs_a_policy() {
        let q = qp(1, 2);
        let w = IntegrationWord::new(vec![Letter::Omega1, Letter::Omega0]).unwrap();
        let err = jackson_iterated(&w, &q, &cfg(50, SingularPolicy::Error)).unwrap_err();
        assert_eq!(err, QmplError::SingularLatticePoint { index: 0 });
        let ok = jackson_iterated(&w, &q, &cfg(50, SingularPolicy::DropSingularPoints)).unwrap();
        assert_eq!(ok.omitted, 1);
        assert!(ok.converged);
    }

    /// Brute-force double lattice sum for [Omega1, Omega0], dropping t1 = 1.
    fn zeta2_double_sum(q: f64, cap: usize) -> f64 {
        let mut total = 0.0;
        for i2 in 0..=cap {
            let t2 = q.powi(i2 as i32);
            let outer = (1.0 - q) * t2 / t2;
            let mut inner = 0.0;
            for i1 in i2.max(1)..=cap {
                let t1 = q.powi(i1 as i32);
                inner += (1.0 - q) * t1 / (1.0 - t1);
            }
            total += outer * inner;
        }
        total
    }

    #[test]
    fn nested_sum_matches_brute_force() {
        let qf = 0.9;
        let cap = minimal_lattice_cap(qf, 1e-12);
        let q = QParam::new(Scalar::from_rational(&BigRational::new(9.into(), 10.into()), ScalarMode::float(128))).unwrap();
        let w = IntegrationWord::new(vec![Letter::Omega1, Letter::Omega0]).unwrap();
        let r = jackson_iterated(&w, &q, &cfg(cap, SingularPolicy::DropSingularPoints)).unwrap();
        let oracle = zeta2_double_sum(qf, cap);
        assert!((r.value.re_f64() - oracle).abs() < 1e-10, "{} vs {oracle}", r.value);
        assert_eq!(r.omitted, 1);
    }

    #[test]
    fn composition_words() {
        let w = IntegrationWord::for_composition(&[1, 2]).unwrap();
        assert_eq!(w.letters(), &[Letter::Omega1, Letter::Omega1, Letter::Omega0]);
        assert!(IntegrationWord::new(vec![]).is_err());
    }

    #[test]
    fn polynomial_integral_approaches_riemann_first_order() {
        // ∫_0^1 (3t^2 + 1) dt = 2
        let f = |t: &Scalar| {
            let three = t.from_rational_like(&BigRational::from_integer(3.into()));
            t.pow(2).try_mul(&three)?.try_add(&t.one_like())
        };
        let mode = ScalarMode::float(128);
        let errs: Vec<f64> = (4..=10)
            .map(|j| {
                let qv = 1.0 - 2f64.powi(-j);
                let q = QParam::new(
                    Scalar::from_rational(
                        &(BigRational::one() - BigRational::new(1.into(), (1i64 << j).into())),
                        mode,
                    ),
                )
                .unwrap();
                let cap = minimal_lattice_cap(qv, 1e-30);
                let c = JacksonConfig { lattice_cap: cap, policy: SingularPolicy::Error, tail_threshold: 1e-30 };
                let one = Scalar::integer(1).to_mode(mode).unwrap();
                let r = jackson_integral(f, &one, &q, &c).unwrap();
                (r.value.re_f64() - 2.0).abs()
            })
            .collect();
        for w in errs.windows(2) {
            let ratio = w[1] / w[0];
            assert!((0.4..=0.6).contains(&ratio), "ratio {ratio}");
        }
    }
}
