use num_rational::BigRational;
use serde::Serialize;

use crate::error::{QmplError, Result};
use crate::eval::{eval_qmpl, Composition, TruncationSpec};
use crate::params;
use crate::qcalc::QParam;
use crate::report::VerificationReport;
use crate::scalar::{Scalar, ScalarMode};

/// One right-hand term: `coefficient · Li_comp(roots; q)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionTerm {
    #[serde(serialize_with = "ratio_string")]
    pub coefficient: BigRational,
    pub roots: Vec<Scalar>,
}

/// `Li_comp(x; q^n) = Σ_terms coefficient · Li_comp(y; q)` over all tuples
/// with `y_i^n = x_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionRelation {
    pub comp: Composition,
    pub n: u32,
    pub x: Vec<Scalar>,
    pub terms: Vec<DistributionTerm>,
    /// Built by the general-composition expander rather than one of the two
    /// proven cases.
    pub experimental: bool,
}

fn ratio_string<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// All `n`-th roots of `x` in its own mode.
fn nth_roots(x: &Scalar, n: u32) -> Result<Vec<Scalar>> {
    match x {
        Scalar::Exact(e) => e
            .rational_roots(n)
            .map(|v| v.into_iter().map(Scalar::Exact).collect())
            .ok_or_else(|| {
                QmplError::Unrepresentable(format!(
                    "the {n}-th roots of {x} are not all rational; use float mode"
                ))
            }),
        Scalar::Float(f) => Ok(f.roots(n).into_iter().map(Scalar::Float).collect()),
    }
}

/// Expands the distribution relation of degree `n`.
///
/// Only `(2)` and `(1,1)` are accepted unless `experimental` is set; the
/// general expander uses the same root-of-unity averaging and its output is
/// meant to be checked numerically, never assumed.
///
/// Every root tuple carries `1/n^depth`: summing `y^k` over the `n`-th roots
/// of `x` gives `n x^{k/n}` when `n | k` and zero otherwise, once per slot.
pub fn distribution_expand(comp: &Composition, x: &[Scalar], n: u32, experimental: bool) -> Result<DistributionRelation> {
    if n == 0 {
        return Err(QmplError::InvalidParameter("n must be >= 1".into()));
    }
    if x.len() != comp.depth() {
        return Err(QmplError::InvalidParameter(format!(
            "{} arguments for composition {comp}",
            x.len()
        )));
    }
    let proven = matches!(comp.indices(), [2] | [1, 1]);
    if !proven && !experimental {
        return Err(QmplError::InvalidParameter(format!(
            "distribution relation for {comp} is not established; pass the experimental flag"
        )));
    }
    let per_slot = x.iter().map(|xi| nth_roots(xi, n)).collect::<Result<Vec<_>>>()?;
    let coefficient = BigRational::new(1.into(), num_traits::pow(num_bigint::BigInt::from(n), comp.depth()));
    // cartesian product of the per-slot root lists, first slot slowest
    let mut tuples: Vec<Vec<Scalar>> = vec![Vec::new()];
    for roots in &per_slot {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                roots.iter().map(move |r| {
                    let mut t = t.clone();
                    t.push(r.clone());
                    t
                })
            })
            .collect();
    }
    Ok(DistributionRelation {
        comp: comp.clone(),
        n,
        x: x.to_vec(),
        terms: tuples
            .into_iter()
            .map(|roots| DistributionTerm {
                coefficient: coefficient.clone(),
                roots,
            })
            .collect(),
        experimental: !proven,
    })
}

/// Checks a relation with the left side cut at `⌊K/n⌋` and the right side at
/// `K`. With this matching the identity holds term by term, so the exact
/// residual is zero; float residuals are compared with the tail bounds of
/// both sides plus their rounding allowances.
pub fn verify_distribution(rel: &DistributionRelation, q: &QParam, k: usize) -> Result<VerificationReport> {
    let m = k / rel.n as usize;
    let qn = q.power(rel.n)?;
    let lhs_r = eval_qmpl(&rel.comp, &rel.x, &qn, &TruncationSpec::new(m))?;
    let like = q.q();
    let mut rhs = like.zero_like();
    let mut tail = lhs_r.tail_bound.as_f64();
    let mut rounding = lhs_r.rounding_bound;
    for t in &rel.terms {
        let r = eval_qmpl(&rel.comp, &t.roots, q, &TruncationSpec::new(k))?;
        let c = like.from_rational_like(&t.coefficient);
        let ca = c.abs_f64();
        tail += ca * r.tail_bound.as_f64();
        rounding += ca * r.rounding_bound;
        rhs = rhs.try_add(&c.try_mul(&r.value)?)?;
    }
    let lhs = lhs_r.value;
    // root approximations perturb y^k by about k ulps, which the per-term
    // allowances already scale with; double them for the summation
    let budget = if lhs.is_exact() { 0.0 } else { tail + 2.0 * rounding };
    let mode: ScalarMode = like.mode();
    let p = params! {
        "comp" => rel.comp.indices(),
        "n" => rel.n,
        "x" => rel.x.iter().map(Scalar::to_string).collect::<Vec<_>>(),
        "q" => like.to_string(),
        "K" => k,
        "M" => m,
        "mode" => mode.name(),
        "precision_bits" => mode.precision_bits(),
    };
    Ok(VerificationReport::compare("distribution", p, &lhs, &rhs, budget)?.with_details(serde_json::json!({
        "tail": tail,
        "rounding": rounding,
        "root_tuples": rel.terms.len(),
        "experimental": rel.experimental,
    })))
}
