use serde_json::json;

use super::{eval_classical_mpl, rounding_allowance, truncated_sum, Composition, TruncationSpec};
use crate::error::{QmplError, Result};
use crate::params;
use crate::qcalc::{q_derivative, QParam};
use crate::report::{Deviation, Verdict, VerificationReport};
use crate::scalar::Scalar;

fn mode_params(s: &Scalar) -> (String, Option<u32>) {
    let m = s.mode();
    (m.name().to_string(), m.precision_bits())
}

fn strings(z: &[Scalar]) -> Vec<String> {
    z.iter().map(Scalar::to_string).collect()
}

/// Checks the derivative relation in slot `j` (1-based) on the truncated
/// series: `D_{z_j} Li_n(z) = Li_{n - e_j}(z) / ((1 - q) z_j)`.
///
/// The identity holds term by term, so exact inputs give an exact zero.
pub fn check_derivative_relation(
    comp: &Composition,
    j: usize,
    z: &[Scalar],
    q: &QParam,
    trunc: &TruncationSpec,
) -> Result<VerificationReport> {
    if j == 0 || j > comp.depth() {
        return Err(QmplError::InvalidParameter(format!(
            "slot {j} out of range for composition {comp}"
        )));
    }
    if z.len() != comp.depth() {
        return Err(QmplError::InvalidParameter(format!(
            "{} arguments for composition {comp}",
            z.len()
        )));
    }
    trunc.check(comp.depth())?;
    let slot = j - 1;
    let zj = &z[slot];
    if zj.is_zero() {
        return Err(QmplError::SingularPoint(format!("z_{j} = 0")));
    }
    let k = trunc.cutoff;
    let with_slot = |w: &Scalar| -> Vec<Scalar> {
        let mut v = z.to_vec();
        v[slot] = w.clone();
        v
    };
    let lhs = q_derivative(
        |w| truncated_sum(comp.indices(), &with_slot(w), Some(q.q()), k),
        zj,
        q,
    )?;
    let lowered = comp.lowered(slot);
    let one = q.q().one_like();
    let scale = one.try_sub(q.q())?.try_mul(zj)?;
    let rhs = truncated_sum(&lowered, z, Some(q.q()), k)?.try_div(&scale)?;

    let budget = if lhs.is_exact() {
        0.0
    } else {
        let shifted = with_slot(&q.q().try_mul(zj)?);
        let spread = scale.abs_f64();
        (rounding_allowance(comp.indices(), &shifted, Some(q.q()), k)
            + rounding_allowance(comp.indices(), z, Some(q.q()), k)
            + rounding_allowance(&lowered, z, Some(q.q()), k))
            / spread
            * 4.0
    };
    let (mode, bits) = mode_params(zj);
    let p = params! {
        "comp" => comp.indices(),
        "slot" => j,
        "z" => strings(z),
        "q" => q.q().to_string(),
        "K" => k,
        "mode" => mode,
        "precision_bits" => bits,
    };
    VerificationReport::compare("derivative", p, &lhs, &rhs, budget)
}

/// Whether the trailing half of the observed error ratios matches the step
/// ratios of `1 - q` within 0.1.
fn first_order_trend(deviations: &[f64], steps: &[f64]) -> (bool, Vec<f64>) {
    let ratios: Vec<f64> = deviations.windows(2).map(|w| w[1] / w[0]).collect();
    let start = ratios.len() / 2;
    let ok = ratios.len() >= 1
        && ratios[start..]
            .iter()
            .zip(&steps[start..])
            .all(|(r, s)| r.is_finite() && (r - s).abs() <= 0.1);
    (ok, ratios)
}

/// Measures `d_j = |(1 - q_j)^w Li_n(z; q_j) - Li_n(z)|` along a sequence of
/// `q` approaching one and judges whether `d_j` shrinks at first order in
/// `1 - q`.
///
/// The verdict needs at least two points; a single `q` yields `Unsupported`.
/// The budget is the first-order envelope `2 d_1 (1 - q_last)/(1 - q_1)` plus
/// the truncation and rounding allowances.
pub fn classical_limit_check(
    comp: &Composition,
    z: &[Scalar],
    q_sequence: &[QParam],
    trunc: &TruncationSpec,
) -> Result<VerificationReport> {
    let Some(first_q) = q_sequence.first() else {
        return Err(QmplError::InvalidParameter("empty q sequence".into()));
    };
    let classical = eval_classical_mpl(comp, z, trunc)?;
    let w = comp.weight();
    let mut deviations = Vec::with_capacity(q_sequence.len());
    let mut gaps = Vec::with_capacity(q_sequence.len());
    let mut allowance: f64 = 0.0;
    let mut last_rescaled = None;
    for q in q_sequence {
        let r = super::eval_qmpl(comp, z, q, trunc)?;
        let gap = q.q().one_like().try_sub(q.q())?;
        let factor = gap.pow(w);
        let rescaled = factor.try_mul(&r.value)?;
        let d = rescaled.try_sub(&classical.value)?.abs_f64();
        let f = factor.abs_f64();
        allowance = allowance.max(f * (r.tail_bound.as_f64() + r.rounding_bound));
        deviations.push(d);
        gaps.push(gap.abs_f64());
        last_rescaled = Some(rescaled);
    }
    let steps: Vec<f64> = gaps.windows(2).map(|g| g[1] / g[0]).collect();
    allowance += classical.tail_bound.as_f64() + classical.rounding_bound;
    let last_d = *deviations.last().expect("non-empty");
    let (mode, bits) = mode_params(first_q.q());
    let p = params! {
        "comp" => comp.indices(),
        "z" => strings(z),
        "q" => q_sequence.iter().map(|q| q.q().to_string()).collect::<Vec<_>>(),
        "K" => trunc.cutoff,
        "mode" => mode,
        "precision_bits" => bits,
    };
    let lhs = last_rescaled.expect("non-empty").to_string();
    let rhs = classical.value.to_string();

    let (verdict, budget, ratios) = if deviations.len() < 2 {
        (Verdict::Unsupported, allowance, Vec::new())
    } else {
        let envelope = 2.0 * deviations[0] * gaps[gaps.len() - 1] / gaps[0] + allowance;
        let (trend, ratios) = first_order_trend(&deviations, &steps);
        let verdict = if trend && last_d <= envelope {
            Verdict::TolerancePass
        } else {
            Verdict::Fail
        };
        (verdict, envelope, ratios)
    };
    let deviation = Deviation::Value(last_d);
    Ok(VerificationReport::judged("limit", p, lhs, rhs, deviation, budget, verdict).with_details(json!({
        "deviations": deviations,
        "ratios": ratios,
        "expected_ratios": steps,
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ScalarMode;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn comp(v: &[u32]) -> Composition {
        Composition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn derivative_depth_one_exact() {
        let q = QParam::new(Scalar::ratio(1, 2)).unwrap();
        let r = check_derivative_relation(&comp(&[2]), 1, &[Scalar::ratio(1, 3)], &q, &TruncationSpec::new(12)).unwrap();
        assert_eq!(r.verdict, Verdict::ExactPass);
        assert_eq!(r.deviation, Deviation::ExactZero);
    }

    #[test]
    fn derivative_lowered_to_zero() {
        let q = QParam::new(Scalar::ratio(2, 5)).unwrap();
        let z = [Scalar::ratio(-1, 4)];
        let r = check_derivative_relation(&comp(&[1]), 1, &z, &q, &TruncationSpec::new(10)).unwrap();
        assert_eq!(r.verdict, Verdict::ExactPass);
        // lowered series is Σ z^k, truncated
        let geo = truncated_sum(&[0], &z, Some(q.q()), 10).unwrap();
        let direct = (1..=10).fold(Scalar::integer(0), |a, k| a.try_add(&z[0].pow(k)).unwrap());
        assert_eq!(geo, direct);
    }

    #[test]
    fn derivative_depth_two_both_slots() {
        let q = QParam::new(Scalar::ratio(3, 7)).unwrap();
        let z = [Scalar::ratio(1, 2), Scalar::ratio(-2, 3)];
        for j in 1..=2 {
            let r = check_derivative_relation(&comp(&[1, 1]), j, &z, &q, &TruncationSpec::new(9)).unwrap();
            assert_eq!(r.verdict, Verdict::ExactPass, "slot {j}");
        }
        assert!(check_derivative_relation(&comp(&[1, 1]), 3, &z, &q, &TruncationSpec::new(9)).is_err());
        let zero = [Scalar::integer(0), Scalar::ratio(1, 2)];
        assert!(matches!(
            check_derivative_relation(&comp(&[1, 1]), 1, &zero, &q, &TruncationSpec::new(9)),
            Err(QmplError::SingularPoint(_))
        ));
    }

    #[test]
    fn derivative_float_within_budget() {
        let m = ScalarMode::float(128);
        let q = QParam::new(Scalar::ratio(1, 3).to_mode(m).unwrap()).unwrap();
        let z = [Scalar::ratio(1, 5).to_mode(m).unwrap(), Scalar::ratio(1, 2).to_mode(m).unwrap()];
        let r = check_derivative_relation(&comp(&[2, 1]), 2, &z, &q, &TruncationSpec::new(20)).unwrap();
        assert_eq!(r.verdict, Verdict::TolerancePass, "{r:?}");
    }

    fn sweep(m: ScalarMode) -> Vec<QParam> {
        (4..=12)
            .map(|j| {
                let q = BigRational::new(BigInt::from((1u64 << j) - 1), BigInt::from(1u64 << j));
                QParam::new(Scalar::from_rational(&q, m)).unwrap()
            })
            .collect()
    }

    #[test]
    fn limit_li1_half() {
        let m = ScalarMode::float(128);
        let z = [Scalar::ratio(1, 2).to_mode(m).unwrap()];
        let r = classical_limit_check(&comp(&[1]), &z, &sweep(m), &TruncationSpec::new(200)).unwrap();
        assert_eq!(r.verdict, Verdict::TolerancePass, "{r:?}");
        let value: f64 = r.rhs.split('@').next().unwrap().parse().unwrap();
        assert!((value - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn limit_single_q_is_unsupported() {
        let m = ScalarMode::float(128);
        let z = [Scalar::ratio(1, 2).to_mode(m).unwrap()];
        let qs = &sweep(m)[..1];
        let r = classical_limit_check(&comp(&[2]), &z, qs, &TruncationSpec::new(200)).unwrap();
        assert_eq!(r.verdict, Verdict::Unsupported);
        assert!(r.deviation.as_f64() > 0.0);
    }

    #[test]
    fn li1_derivative_closed_form_without_extra_z() {
        // D_q Li_1(z; q) = 1/((1-q)(1-z)) under the k >= 1 convention
        let q = QParam::new(Scalar::ratio(1, 2)).unwrap();
        let z0 = Scalar::ratio(1, 3);
        let trunc = TruncationSpec::new(30);
        let li1 = |z: &Scalar| Ok(crate::eval::eval_qmpl(&comp(&[1]), std::slice::from_ref(z), &q, &trunc)?.value);
        let d = crate::qcalc::q_derivative(li1, &z0, &q).unwrap();
        // truncated: Σ_{k=1}^{30} z^(k-1) / (1-q)
        let geo: BigRational = (0..30).map(|e| BigRational::new(1.into(), BigInt::from(3).pow(e))).sum();
        assert_eq!(d, Scalar::exact(geo * BigRational::from_integer(2.into())));
        assert!((d.re_f64() - 3.0).abs() < 1e-13);
    }
}
