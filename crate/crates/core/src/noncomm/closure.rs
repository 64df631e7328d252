//! Finds the product of two ordered q-MPL series as a combination of ordered
//! q-MPL series, exactly over Q(q).
//!
//! The linear system is solved over Q at a few rational specialisations of
//! `q`; the coefficients are then lifted to constants or Laurent monomials
//! in `q` and the lifted combination is checked symbolically, coefficient by
//! coefficient, against the product series.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::ratfunc::RatFunc;
use super::series::{multiply_series, ordered_series, ordered_series_at, FormalSeries, Monomial, VarId};
use crate::error::{QmplError, Result};
use crate::eval::Composition;
use crate::params;
use crate::report::{Deviation, Verdict, VerificationReport};

/// Candidate spaces beyond this size are refused rather than solved.
const MAX_CANDIDATES: usize = 20_000;

/// Laurent exponents tried when lifting a specialised coefficient.
const MAX_Q_EXPONENT: i64 = 32;

/// An ordered q-MPL symbol: indices with one formal slot product each. No
/// indices means the unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct OrderedSymbol {
    pub indices: Vec<u32>,
    pub slots: Vec<Monomial>,
}

impl OrderedSymbol {
    pub fn new(indices: Vec<u32>, slots: Vec<Monomial>) -> Result<Self> {
        if indices.len() != slots.len() {
            return Err(QmplError::InvalidParameter("one slot per index".into()));
        }
        if indices.contains(&0) || slots.iter().any(Monomial::is_one) {
            return Err(QmplError::InvalidParameter(
                "indices must be >= 1 and slots must contain a generator".into(),
            ));
        }
        Ok(OrderedSymbol { indices, slots })
    }

    pub fn unit() -> Self {
        OrderedSymbol {
            indices: Vec::new(),
            slots: Vec::new(),
        }
    }

    /// `Li_comp(z_{ids[0]}, .., z_{ids[m-1]})`.
    pub fn from_vars(comp: &Composition, ids: &[VarId]) -> Result<Self> {
        Self::new(comp.indices().to_vec(), ids.iter().map(|v| Monomial::var(*v)).collect())
    }

    pub fn weight(&self) -> u32 {
        self.indices.iter().sum()
    }

    pub fn depth(&self) -> usize {
        self.indices.len()
    }

    pub fn series(&self, degree_cap: u32) -> Result<FormalSeries> {
        ordered_series(&self.indices, &self.slots, degree_cap)
    }
}

impl fmt::Display for OrderedSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.indices.is_empty() {
            return f.write_str("1");
        }
        let idx: Vec<String> = self.indices.iter().map(u32::to_string).collect();
        let slots: Vec<String> = self.slots.iter().map(Monomial::to_string).collect();
        write!(f, "Li_{{{}}}({})", idx.join(","), slots.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientRing {
    /// Every coefficient is a rational constant.
    Rational,
    /// Some coefficient is `c · q^e` with `e != 0`.
    LaurentPolynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureTerm {
    pub symbol: OrderedSymbol,
    pub coefficient: RatFunc,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureOutcome {
    pub terms: Vec<ClosureTerm>,
    /// `None` when no combination was found.
    pub ring: Option<CoefficientRing>,
    /// The candidate series are linearly independent up to the cap.
    pub unique: bool,
    pub candidates: usize,
    pub equations: usize,
    pub failure: Option<String>,
}

impl ClosureOutcome {
    pub fn closed(&self) -> bool {
        self.failure.is_none()
    }

    pub fn combination_text(&self) -> String {
        if !self.closed() {
            return "no combination".into();
        }
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|t| match t.coefficient.as_constant() {
                Some(c) if c.is_one() => t.symbol.to_string(),
                Some(c) => format!("{c}*{}", t.symbol),
                None => format!("({})*{}", t.coefficient, t.symbol),
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

fn compositions(weight: u32, depth: usize) -> Vec<Vec<u32>> {
    if depth == 0 {
        return if weight == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 1..=weight.saturating_sub(depth as u32 - 1) {
        for mut rest in compositions(weight - first, depth - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Slot sequences of the quasi-shuffle of `a` and `b`: order-preserving
/// interleavings, with adjacent slots of `a` and `b` optionally merged.
fn interleavings(a: &[Monomial], b: &[Monomial]) -> BTreeSet<Vec<Monomial>> {
    let (Some((x, a0)), Some((y, b0))) = (a.split_last(), b.split_last()) else {
        return BTreeSet::from([a.iter().chain(b).cloned().collect()]);
    };
    let mut out = BTreeSet::new();
    for (rest, last) in [
        (interleavings(a0, b), x.clone()),
        (interleavings(a, b0), y.clone()),
        (interleavings(a0, b0), x.times(y)),
    ] {
        for mut w in rest {
            w.push(last.clone());
            out.insert(w);
        }
    }
    out
}

/// Symbols of total weight, depth at most the summed depths, slots drawn
/// from the input slots and the pairwise merges of a slot of `a` with a slot
/// of `b`.
///
/// Symbols whose slots follow the quasi-shuffle pattern come first. When
/// the truncated system is underdetermined (repeated variables leave few
/// monomials) the pivots then land on them and the free candidates are set
/// to zero.
fn candidates(a: &OrderedSymbol, b: &OrderedSymbol) -> Result<Vec<OrderedSymbol>> {
    let weight = a.weight() + b.weight();
    if weight == 0 {
        return Ok(vec![OrderedSymbol::unit()]);
    }
    let mut pool: BTreeSet<Monomial> = a.slots.iter().chain(&b.slots).cloned().collect();
    for x in &a.slots {
        for y in &b.slots {
            pool.insert(x.times(y));
        }
    }
    let pool: Vec<Monomial> = pool.into_iter().collect();
    let mut out = Vec::new();
    for depth in 1..=(a.depth() + b.depth()) {
        let comps = compositions(weight, depth);
        let count = comps.len().saturating_mul(pool.len().saturating_pow(depth as u32));
        if out.len().saturating_add(count) > MAX_CANDIDATES {
            return Err(QmplError::InvalidParameter(format!(
                "closure candidate space exceeds {MAX_CANDIDATES} symbols"
            )));
        }
        for comp in comps {
            let mut idx = vec![0usize; depth];
            loop {
                out.push(OrderedSymbol {
                    indices: comp.clone(),
                    slots: idx.iter().map(|&i| pool[i].clone()).collect(),
                });
                // odometer over pool^depth
                let mut p = depth;
                loop {
                    if p == 0 {
                        break;
                    }
                    p -= 1;
                    idx[p] += 1;
                    if idx[p] < pool.len() {
                        break;
                    }
                    idx[p] = 0;
                }
                if idx.iter().all(|&i| i == 0) {
                    break;
                }
            }
        }
    }
    let preferred = interleavings(&a.slots, &b.slots);
    out.sort_by_key(|c| !preferred.contains(&c.slots));
    Ok(out)
}

/// Solves `M x = rhs` over Q. Returns the solution with free variables set to
/// zero and the rank, or `None` when inconsistent.
fn solve_rational(mut m: Vec<Vec<BigRational>>, mut rhs: Vec<BigRational>, ncols: usize) -> Option<(Vec<BigRational>, usize)> {
    let nrows = m.len();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        rhs.swap(row, p);
        let inv = m[row][col].recip();
        for c in col..ncols {
            m[row][c] *= &inv;
        }
        rhs[row] *= &inv;
        for r in 0..nrows {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..ncols {
                    let t = &f * &m[row][c];
                    m[r][c] -= t;
                }
                let t = &f * &rhs[row];
                rhs[r] -= t;
            }
        }
        pivots.push(col);
        row += 1;
        if row == nrows {
            break;
        }
    }
    if rhs[row..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); ncols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = rhs[r].clone();
    }
    Some((x, pivots.len()))
}

/// 2^61 - 1.
const PRIME: u64 = (1 << 61) - 1;

fn mod_p(r: &BigRational) -> Option<u64> {
    let p = BigInt::from(PRIME);
    let red = |x: &BigInt| -> u64 { u64::try_from(((x % &p) + &p) % &p).expect("reduced below p") };
    let den = red(r.denom());
    (den != 0).then(|| mul_mod(red(r.numer()), inv_mod(den)))
}

fn mul_mod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn inv_mod(a: u64) -> u64 {
    // Fermat
    let (mut base, mut e, mut acc) = (a, PRIME - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base);
        }
        base = mul_mod(base, base);
        e >>= 1;
    }
    acc
}

/// Gauss-Jordan modulo [`PRIME`]: the solution with free variables zero and
/// the rank, or `None` when inconsistent mod p.
fn solve_mod(mut m: Vec<Vec<u64>>, mut rhs: Vec<u64>, ncols: usize) -> Option<(Vec<u64>, usize)> {
    let nrows = m.len();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == nrows {
            break;
        }
        let Some(p) = (row..nrows).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(row, p);
        rhs.swap(row, p);
        let inv = inv_mod(m[row][col]);
        for c in col..ncols {
            m[row][c] = mul_mod(m[row][c], inv);
        }
        rhs[row] = mul_mod(rhs[row], inv);
        for r in 0..nrows {
            let f = m[r][col];
            if r != row && f != 0 {
                for c in col..ncols {
                    m[r][c] = (m[r][c] + PRIME - mul_mod(f, m[row][c])) % PRIME;
                }
                rhs[r] = (rhs[r] + PRIME - mul_mod(f, rhs[row])) % PRIME;
            }
        }
        pivots.push(col);
        row += 1;
    }
    if rhs[row..].iter().any(|v| *v != 0) {
        return None;
    }
    let mut x = vec![0; ncols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = rhs[r];
    }
    Some((x, pivots.len()))
}

/// Solves over Q. The support of the solution and the rank are found
/// modulo a prime first; the exact solve then runs on the support columns
/// only. Rank mod p never exceeds the rank over Q, so a full rank mod p
/// proves uniqueness. Falls back to the full exact solve if the modular
/// step is inconclusive.
fn solve_sparse(m: Vec<Vec<BigRational>>, rhs: Vec<BigRational>, ncols: usize) -> Option<(Vec<BigRational>, usize)> {
    let modular = || -> Option<(Vec<u64>, usize)> {
        let mm = m.iter().map(|r| r.iter().map(mod_p).collect::<Option<Vec<_>>>()).collect::<Option<Vec<_>>>()?;
        let rr = rhs.iter().map(mod_p).collect::<Option<Vec<_>>>()?;
        solve_mod(mm, rr, ncols)
    };
    if let Some((xm, rank)) = modular() {
        let support: Vec<usize> = (0..ncols).filter(|&c| xm[c] != 0).collect();
        let sub: Vec<Vec<BigRational>> = m.iter().map(|r| support.iter().map(|&c| r[c].clone()).collect()).collect();
        if let Some((xs, _)) = solve_rational(sub, rhs.clone(), support.len()) {
            let mut x = vec![BigRational::zero(); ncols];
            for (v, &c) in xs.into_iter().zip(&support) {
                x[c] = v;
            }
            return Some((x, rank));
        }
    }
    solve_rational(m, rhs, ncols)
}

fn specialisation_points() -> Vec<BigRational> {
    [(2, 1), (3, 1), (-2, 1)]
        .iter()
        .map(|&(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
        .collect()
}


/// Lifts specialised values `c(q_i)` to a constant or `c · q^e`.
fn lift(values: &[BigRational], points: &[BigRational]) -> Option<RatFunc> {
    if values.iter().all(|v| *v == values[0]) {
        return Some(RatFunc::constant(values[0].clone()));
    }
    for e in (-MAX_Q_EXPONENT..=MAX_Q_EXPONENT).filter(|e| *e != 0) {
        let pw = |q: &BigRational| {
            if e > 0 {
                num_traits::pow(q.clone(), e as usize)
            } else {
                num_traits::pow(q.recip(), (-e) as usize)
            }
        };
        let c = &values[0] / pw(&points[0]);
        if values.iter().zip(points).all(|(v, q)| *v == &c * pw(q)) {
            return Some(RatFunc::monomial(c, e));
        }
    }
    None
}

/// Searches for `a · b = Σ c_i L_i` up to total degree `degree_cap`.
pub fn solve_ordered_closure(a: &OrderedSymbol, b: &OrderedSymbol, degree_cap: u32) -> Result<ClosureOutcome> {
    let product = multiply_series(&a.series(degree_cap)?, &b.series(degree_cap)?)?;
    if product.is_empty() {
        return Err(QmplError::InvalidParameter(format!(
            "degree cap {degree_cap} is below the minimal degree of {a} * {b}"
        )));
    }
    let points = specialisation_points();
    // candidate series specialised at each point; the symbolic series is only
    // built for the terms that enter the solution
    let all = candidates(a, b)?;
    let numeric: Vec<Vec<BTreeMap<Monomial, BigRational>>> = all
        .par_iter()
        .map(|c| {
            points
                .iter()
                .map(|q0| ordered_series_at(&c.indices, &c.slots, degree_cap, q0))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let (cands, cand_values): (Vec<OrderedSymbol>, Vec<Vec<BTreeMap<Monomial, BigRational>>>) = all
        .into_iter()
        .zip(numeric)
        .filter(|(_, v)| !v[0].is_empty())
        .unzip();
    let monomials: BTreeSet<Monomial> = product
        .iter()
        .map(|(m, _)| m.clone())
        .chain(cand_values.iter().flat_map(|v| v[0].keys().cloned()))
        .collect();
    let n = cands.len();
    let mut outcome = ClosureOutcome {
        terms: Vec::new(),
        ring: None,
        unique: false,
        candidates: n,
        equations: monomials.len(),
        failure: None,
    };

    let mut solutions: Vec<Vec<BigRational>> = Vec::new();
    for (pi, q0) in points.iter().enumerate() {
        let zero = BigRational::zero();
        let matrix: Vec<Vec<BigRational>> = monomials
            .iter()
            .map(|m| cand_values.iter().map(|v| v[pi].get(m).unwrap_or(&zero).clone()).collect())
            .collect();
        let rhs: Vec<BigRational> = monomials
            .iter()
            .map(|m| product.coefficient(m).eval(q0).expect("no pole at a non-root of unity"))
            .collect();
        match solve_sparse(matrix, rhs, n) {
            Some((x, rank)) => {
                outcome.unique = rank == n;
                solutions.push(x);
            }
            None => {
                outcome.failure = Some(format!("no combination of the candidates at q = {q0}"));
                return Ok(outcome);
            }
        }
    }

    let mut terms = Vec::new();
    for i in 0..n {
        let vals: Vec<BigRational> = solutions.iter().map(|s| s[i].clone()).collect();
        if vals.iter().all(Zero::is_zero) {
            continue;
        }
        match lift(&vals, &points) {
            Some(c) => terms.push(ClosureTerm {
                symbol: cands[i].clone(),
                coefficient: c,
            }),
            None => {
                outcome.failure = Some(format!(
                    "coefficient of {} is not a Laurent monomial in q",
                    cands[i]
                ));
                return Ok(outcome);
            }
        }
    }

    // exact check over Q(q)
    let mut combo = FormalSeries::zero(degree_cap);
    for t in &terms {
        combo = combo.add(&t.symbol.series(degree_cap)?.scale(&t.coefficient))?;
    }
    let residual: Vec<&Monomial> = monomials
        .iter()
        .filter(|m| combo.coefficient(m) != product.coefficient(m))
        .collect();
    if !residual.is_empty() {
        outcome.failure = Some(format!(
            "lifted combination differs from the product at {} monomials",
            residual.len()
        ));
        return Ok(outcome);
    }
    outcome.ring = Some(if terms.iter().all(|t| t.coefficient.as_constant().is_some()) {
        CoefficientRing::Rational
    } else {
        CoefficientRing::LaurentPolynomial
    });
    outcome.terms = terms;
    Ok(outcome)
}

/// Closure check as a report. A missing combination is a `Fail` verdict, not
/// an error.
pub fn verify_ordered_closure(a: &OrderedSymbol, b: &OrderedSymbol, degree_cap: u32) -> Result<VerificationReport> {
    let outcome = solve_ordered_closure(a, b, degree_cap)?;
    let (deviation, verdict) = if outcome.closed() {
        (Deviation::ExactZero, Verdict::ExactPass)
    } else {
        (Deviation::Value(1.0), Verdict::Fail)
    };
    let p = params! {
        "a" => a.to_string(),
        "b" => b.to_string(),
        "degree_cap" => degree_cap,
        "mode" => "exact",
    };
    let details = json!({
        "combination": outcome.terms,
        "ring": outcome.ring,
        "unique": outcome.unique,
        "candidates": outcome.candidates,
        "equations": outcome.equations,
        "failure": outcome.failure,
    });
    Ok(VerificationReport::judged(
        "ordered_closure",
        p,
        format!("{a} * {b}"),
        outcome.combination_text(),
        deviation,
        0.0,
        verdict,
    )
    .with_details(details))
}

/// Coefficients of the combination keyed by symbol text, for tests and
/// tables.
pub fn coefficient_map(outcome: &ClosureOutcome) -> BTreeMap<String, String> {
    outcome
        .terms
        .iter()
        .map(|t| (t.symbol.to_string(), t.coefficient.to_string()))
        .collect()
}
