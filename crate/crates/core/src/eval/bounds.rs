//! Tail bounds for truncated nested sums. All bounds are computed in `f64`
//! from moduli of the inputs; they are upper bounds, not estimates.

/// `Σ_{s > cutoff} C(s-1, m-1) ρ^s`: the number of strictly increasing
/// `m`-chains with largest element `s`, weighted by `ρ^s`.
///
/// Bounds the tail of `Σ_{k1<..<km} Π a_j^{k_j}` when every suffix product
/// of the `a_j` is at most `ρ`.
pub fn chain_tail(rho: f64, depth: usize, cutoff: usize) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    if rho >= 1.0 || depth == 0 {
        return f64::INFINITY;
    }
    let m = depth as f64;
    let mut s = (cutoff + 1).max(depth) as f64;
    // ln C(s-1, m-1) + s ln ρ
    let mut log_t = (1..depth)
        .map(|i| ((s - m + i as f64) / i as f64).ln())
        .sum::<f64>()
        + s * rho.ln();
    let mut total = 0.0;
    let mut last = f64::INFINITY;
    for _ in 0..10_000_000 {
        let ratio = rho * s / (s - m + 1.0);
        let t = log_t.exp();
        if ratio < 1.0 {
            // ratios decrease from here on, so the rest is dominated by a
            // geometric series; keep summing until that bound is tight
            last = t / (1.0 - ratio);
            if last <= 1e-3 * (total + t) || last < f64::MIN_POSITIVE {
                return total + last;
            }
        }
        total += t;
        log_t += ratio.ln();
        s += 1.0;
    }
    total + last
}

/// Largest suffix product `|a_j · a_{j+1} ··· a_m|`.
pub fn max_suffix_product(abs_args: &[f64]) -> f64 {
    let mut p = 1.0;
    let mut best: f64 = 0.0;
    for a in abs_args.iter().rev() {
        p *= a;
        best = best.max(p);
    }
    best
}

/// Tail bound for the q-deformed sum cut at `cutoff`.
///
/// Inside (`|q|<1`): `|1-q^k| >= 1-|q|`. Outside: `|1-q^k|^{-1} <= c |q|^{-k}`
/// with `c = |q|/(|q|-1)`, which folds into the arguments.
pub fn qmpl_tail(indices: &[u32], abs_z: &[f64], q_abs: f64, cutoff: usize) -> f64 {
    let weight: u32 = indices.iter().sum();
    if q_abs < 1.0 {
        let c = 1.0 / (1.0 - q_abs);
        c.powi(weight as i32) * chain_tail(max_suffix_product(abs_z), indices.len(), cutoff)
    } else {
        let c = q_abs / (q_abs - 1.0);
        let scaled: Vec<f64> = abs_z
            .iter()
            .zip(indices)
            .map(|(a, &n)| a * q_abs.powi(-(n as i32)))
            .collect();
        c.powi(weight as i32) * chain_tail(max_suffix_product(&scaled), indices.len(), cutoff)
    }
}

/// Tail bound for the classical sum with `|suffix products| < 1`.
pub fn classical_tail(indices: &[u32], abs_z: &[f64], cutoff: usize) -> f64 {
    let last = *indices.last().unwrap_or(&0) as i32;
    chain_tail(max_suffix_product(abs_z), indices.len(), cutoff) / ((cutoff + 1) as f64).powi(last)
}

/// Tail bound for the multiple zeta series (all arguments 1, last index >= 2).
///
/// The inner chain below `k` is at most `H_{k-1}^{m-1}/(m-1)!`, with
/// `H_{k-1} <= 1 + ln k`; the outer sum is compared with an integral once the
/// summand decreases.
pub fn mzv_tail(indices: &[u32], cutoff: usize) -> f64 {
    let s = *indices.last().unwrap_or(&0) as f64;
    if s < 2.0 {
        return f64::INFINITY;
    }
    let p = indices.len() - 1;
    let pf = p as f64;
    let fact: f64 = (1..=p).map(|i| i as f64).product();
    let g = |t: f64| (1.0 + t.ln()).powi(p as i32) * t.powf(-s);
    // g decreases once 1 + ln t >= p / s
    let start = ((pf / s - 1.0).exp().ceil() as usize).max(cutoff).max(1);
    let explicit: f64 = ((cutoff + 1)..=start).map(|k| g(k as f64)).sum();
    let x = (start as f64).ln();
    let a = s - 1.0;
    let mut integral = 0.0;
    let mut falling = 1.0;
    for i in 0..=p {
        integral += falling * (1.0 + x).powi((p - i) as i32) / a.powi(i as i32 + 1);
        falling *= (p - i) as f64;
    }
    integral *= (-a * x).exp();
    (explicit + integral) / fact
}

/// Rounding allowance for a float computation: `ops` roundings, each of
/// relative size `2^-prec`, on quantities no larger than `magnitude`.
pub fn rounding_budget(magnitude: f64, ops: u64, precision_bits: u32) -> f64 {
    magnitude * ops as f64 * 2f64.powi(1 - precision_bits as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_chain_tail(rho: f64, depth: usize, cutoff: usize, horizon: usize) -> f64 {
        fn count(len: usize, max: usize) -> f64 {
            // number of strictly increasing `len`-chains in 1..=max ending exactly at max
            let mut c = 1.0;
            for i in 0..len.saturating_sub(1) {
                c *= (max - 1 - i) as f64 / (i + 1) as f64;
            }
            c
        }
        ((cutoff + 1).max(depth)..horizon)
            .map(|s| count(depth, s) * rho.powi(s as i32))
            .sum()
    }

    #[test]
    fn chain_tail_dominates_brute_force() {
        for &(rho, m, k) in &[(0.5, 1, 10), (0.5, 2, 10), (0.9, 3, 5), (0.25, 3, 40), (0.7, 2, 1)] {
            let b = chain_tail(rho, m, k);
            let brute = brute_chain_tail(rho, m, k, 4000);
            assert!(b >= brute * (1.0 - 1e-12), "{rho} {m} {k}: {b} < {brute}");
            assert!(b <= brute * 1.5 + 1e-300, "{rho} {m} {k}: {b} loose vs {brute}");
        }
        assert_eq!(chain_tail(0.0, 2, 3), 0.0);
        assert!(chain_tail(1.0, 1, 3).is_infinite());
    }

    #[test]
    fn depth_one_geometric() {
        // Σ_{s>K} ρ^s = ρ^{K+1}/(1-ρ)
        let b = chain_tail(0.5, 1, 10);
        assert!((b - 0.5f64.powi(11) / 0.5).abs() < 1e-15);
    }

    #[test]
    fn mzv_tail_depth_one() {
        // Σ_{k>K} 1/k^2 <= 1/K
        let b = mzv_tail(&[2], 100);
        let brute: f64 = (101..2_000_000).map(|k| 1.0 / (k as f64).powi(2)).sum();
        assert!(b >= brute && b <= 0.0101, "{b} {brute}");
    }

    #[test]
    fn mzv_tail_depth_two() {
        // ζ(1,2) tail at K = 50 against a long brute-force sum
        let k_max = 200_000usize;
        let mut h = 0.0;
        let mut brute = 0.0;
        for k in 1..=k_max {
            if k > 50 {
                brute += h / (k as f64).powi(2);
            }
            h += 1.0 / k as f64;
        }
        assert!(mzv_tail(&[1, 2], 50) >= brute);
        assert!(mzv_tail(&[1], 50).is_infinite());
    }

    #[test]
    fn suffix_products() {
        assert_eq!(max_suffix_product(&[2.0, 0.25]), 0.5);
        assert_eq!(max_suffix_product(&[0.5, 0.5]), 0.5);
    }
}
