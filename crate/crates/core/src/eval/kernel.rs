use crate::error::{QmplError, Result};
use crate::scalar::Field;

/// Denominator family of the nested sum.
pub(crate) enum Base<'a, F> {
    /// `1 - q^k`
    Deformed(&'a F),
    /// `k`
    Classical,
}

/// `Σ_{0<k1<..<km<=cutoff} Π z_j^{k_j} / d_{k_j}^{n_j}`.
///
/// Prefix sums `S_j(k) = Σ_{k'<=k} t_j(k') S_{j-1}(k'-1)` make this
/// `O(m · cutoff)` rather than `O(cutoff^m)`. Indices may be zero.
pub(crate) fn nested_sum<F: Field>(indices: &[u32], z: &[F], base: Base<'_, F>, cutoff: usize) -> Result<F> {
    debug_assert_eq!(indices.len(), z.len());
    let Some(first) = z.first() else {
        return Err(QmplError::InvalidParameter("empty composition".into()));
    };
    let one = first.one_like();
    if cutoff == 0 {
        return Ok(first.zero_like());
    }

    // inverse base denominators 1/d_k for k = 1..=cutoff
    let mut inv = Vec::with_capacity(cutoff + 1);
    inv.push(one.clone());
    let max_index = indices.iter().copied().max().unwrap_or(0);
    if max_index > 0 {
        let mut qk = one.clone();
        for k in 1..=cutoff {
            let d = match &base {
                Base::Deformed(q) => {
                    qk = qk.mul(q);
                    one.sub(&qk)
                }
                Base::Classical => one.from_i64_like(k as i64),
            };
            let i = one.checked_div(&d).ok_or_else(|| {
                QmplError::InvalidParameter(format!("1 - q^{k} vanishes: q is a root of unity"))
            })?;
            inv.push(i);
        }
    }

    let mut prev: Option<Vec<F>> = None;
    for (j, (&n, zj)) in indices.iter().zip(z).enumerate() {
        let mut cur = Vec::with_capacity(cutoff + 1);
        cur.push(one.zero_like());
        let mut acc = one.zero_like();
        let mut zpow = one.clone();
        for k in 1..=cutoff {
            zpow = zpow.mul(zj);
            // chains of length j+1 need k >= j+1
            if k > j {
                let mut term = match n {
                    0 => zpow.clone(),
                    1 => zpow.mul(&inv[k]),
                    _ => zpow.mul(&inv[k].pow(n)),
                };
                if let Some(p) = &prev {
                    term = term.mul(&p[k - 1]);
                }
                acc = acc.add(&term);
            }
            cur.push(acc.clone());
        }
        prev = Some(cur);
    }
    Ok(prev.expect("non-empty").pop().expect("cutoff >= 1"))
}

/// `Σ |term|` of the same truncated sum, in `f64`; the magnitude that float
/// rounding errors scale with.
pub(crate) fn abs_nested_sum(indices: &[u32], abs_z: &[f64], abs_d: impl Fn(usize) -> f64, cutoff: usize) -> f64 {
    let mut prev: Option<Vec<f64>> = None;
    for (j, (&n, &a)) in indices.iter().zip(abs_z).enumerate() {
        let mut cur = vec![0.0; cutoff + 1];
        let mut acc = 0.0;
        let mut zpow = 1.0;
        for k in 1..=cutoff {
            zpow *= a;
            if k > j {
                let mut t = zpow / abs_d(k).powi(n as i32);
                if let Some(p) = &prev {
                    t *= p[k - 1];
                }
                acc += t;
            }
            cur[k] = acc;
        }
        prev = Some(cur);
    }
    prev.map(|p| p[cutoff]).unwrap_or(0.0)
}
