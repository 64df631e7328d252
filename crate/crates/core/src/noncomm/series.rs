use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::ratfunc::RatFunc;
use crate::error::{QmplError, Result};

/// Generator id; `z_i z_j = q z_j z_i` for `i < j`.
pub type VarId = u32;

/// Commutative exponent vector in increasing-id order, which is the normal
/// form of a monomial in q-commuting variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
pub struct Monomial(BTreeMap<VarId, u32>);

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(id: VarId) -> Self {
        Monomial(BTreeMap::from([(id, 1)]))
    }

    pub fn from_exponents(e: impl IntoIterator<Item = (VarId, u32)>) -> Self {
        let mut m = BTreeMap::new();
        for (v, k) in e {
            if k > 0 {
                *m.entry(v).or_insert(0) += k;
            }
        }
        Monomial(m)
    }

    pub fn exponents(&self) -> &BTreeMap<VarId, u32> {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// Commutative product of exponent vectors; ordering factors are the
    /// caller's business.
    pub fn times(&self, other: &Monomial) -> Monomial {
        let mut m = self.0.clone();
        for (v, e) in &other.0 {
            *m.entry(*v).or_insert(0) += e;
        }
        Monomial(m)
    }

    pub fn pow(&self, k: u32) -> Monomial {
        Monomial(self.0.iter().map(|(v, e)| (*v, e * k)).collect())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(v, e)| if *e == 1 { format!("z{v}") } else { format!("z{v}^{e}") })
            .collect();
        f.write_str(&parts.join("*"))
    }
}

/// `q^q_exponent · monomial`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct NormalMonomial {
    pub q_exponent: i64,
    pub monomial: Monomial,
}

/// Sorts a word of generators into increasing-id order. Moving a larger id
/// left past a smaller one costs `q^-1`, so the exponent is minus the
/// inversion count.
pub fn normalize_monomial(word: &[VarId]) -> NormalMonomial {
    let mut inversions: i64 = 0;
    for (i, a) in word.iter().enumerate() {
        inversions += word[i + 1..].iter().filter(|b| *b < a).count() as i64;
    }
    NormalMonomial {
        q_exponent: -inversions,
        monomial: Monomial::from_exponents(word.iter().map(|v| (*v, 1))),
    }
}

/// Inversions created by writing `a` (normal) then `b` (normal): pairs with
/// the id from `a` larger, weighted by exponents.
pub fn cross_inversions(a: &Monomial, b: &Monomial) -> u64 {
    let mut n = 0u64;
    for (i, ei) in &a.0 {
        for (_, fj) in b.0.range(..*i) {
            n += *ei as u64 * *fj as u64;
        }
    }
    n
}

/// Truncated series `Σ c_m · m` over normal monomials of degree at most the
/// cap, with exact rational-function coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalSeries {
    degree_cap: u32,
    coeffs: BTreeMap<Monomial, RatFunc>,
}

impl FormalSeries {
    pub fn zero(degree_cap: u32) -> Self {
        FormalSeries {
            degree_cap,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn unit(degree_cap: u32) -> Self {
        let mut s = Self::zero(degree_cap);
        s.add_term(Monomial::one(), RatFunc::one());
        s
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    /// Adds `c · m`; terms above the cap are dropped.
    pub fn add_term(&mut self, m: Monomial, c: RatFunc) {
        if m.degree() > self.degree_cap || c.is_zero() {
            return;
        }
        match self.coeffs.entry(m) {
            Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn coefficient(&self, m: &Monomial) -> RatFunc {
        self.coeffs.get(m).cloned().unwrap_or_else(RatFunc::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &RatFunc)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &FormalSeries) -> Result<FormalSeries> {
        check_caps(self, other)?;
        let mut out = self.clone();
        for (m, c) in &other.coeffs {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &RatFunc) -> FormalSeries {
        let mut out = Self::zero(self.degree_cap);
        for (m, x) in &self.coeffs {
            out.add_term(m.clone(), x.mul(c));
        }
        out
    }

    /// Substitutes commuting rational values for the generators and a
    /// rational `q`. `None` at a pole.
    pub fn evaluate(&self, q: &BigRational, values: &BTreeMap<VarId, BigRational>) -> Option<BigRational> {
        let mut total = BigRational::from_integer(0.into());
        for (m, c) in &self.coeffs {
            let mut v = c.eval(q)?;
            for (id, e) in m.exponents() {
                v *= num_traits::pow(values.get(id)?.clone(), *e as usize);
            }
            total += v;
        }
        Some(total)
    }
}

fn check_caps(a: &FormalSeries, b: &FormalSeries) -> Result<()> {
    if a.degree_cap != b.degree_cap {
        return Err(QmplError::InvalidParameter(format!(
            "degree caps differ: {} vs {}",
            a.degree_cap, b.degree_cap
        )));
    }
    Ok(())
}

/// Product in the q-commuting algebra: `m_a · m_b = q^{-inv} (m_a m_b)` with
/// `inv` the weighted count of ids in `m_a` exceeding ids in `m_b`.
pub fn multiply_series(a: &FormalSeries, b: &FormalSeries) -> Result<FormalSeries> {
    check_caps(a, b)?;
    let mut out = FormalSeries::zero(a.degree_cap);
    for (ma, ca) in &a.coeffs {
        for (mb, cb) in &b.coeffs {
            if ma.degree() + mb.degree() > a.degree_cap {
                continue;
            }
            let inv = cross_inversions(ma, mb) as i64;
            out.add_term(ma.times(mb), ca.mul(cb).shifted(-inv));
        }
    }
    Ok(out)
}

/// Expands `Σ_{0<k1<..<km} Π slot_j^{k_j} / Π (1-q^{k_j})^{n_j}` up to the
/// degree cap. Slot `j` is a formal product of generators raised to `k_j`,
/// and the monomial is read in increasing-id order. Empty `indices` give
/// the unit series.
pub fn ordered_series(indices: &[u32], slots: &[Monomial], degree_cap: u32) -> Result<FormalSeries> {
    if indices.len() != slots.len() {
        return Err(QmplError::InvalidParameter("one slot per index".into()));
    }
    if slots.iter().any(Monomial::is_one) {
        return Err(QmplError::InvalidParameter("slots must contain a generator".into()));
    }
    if indices.is_empty() {
        return Ok(FormalSeries::unit(degree_cap));
    }
    let mut out = FormalSeries::zero(degree_cap);
    let ctx = Chains::new(indices, slots, degree_cap);
    ctx.walk(
        0,
        1,
        0,
        Monomial::one(),
        RatFunc::one(),
        &|c: &RatFunc, k, n| c.mul(&RatFunc::inv_one_minus_q_pow(k, n)),
        &mut |m, c| out.add_term(m, c),
    );
    Ok(out)
}

/// [`ordered_series`] with `q` specialised to a rational that is not a root
/// of unity. Zero coefficients are dropped.
pub fn ordered_series_at(
    indices: &[u32],
    slots: &[Monomial],
    degree_cap: u32,
    q: &BigRational,
) -> Result<BTreeMap<Monomial, BigRational>> {
    if indices.len() != slots.len() {
        return Err(QmplError::InvalidParameter("one slot per index".into()));
    }
    if slots.iter().any(Monomial::is_one) {
        return Err(QmplError::InvalidParameter("slots must contain a generator".into()));
    }
    let one = BigRational::one();
    let mut out: BTreeMap<Monomial, BigRational> = BTreeMap::new();
    if indices.is_empty() {
        out.insert(Monomial::one(), one);
        return Ok(out);
    }
    let ctx = Chains::new(indices, slots, degree_cap);
    ctx.walk(
        0,
        1,
        0,
        Monomial::one(),
        one.clone(),
        &|c: &BigRational, k, n| {
            let d = &one - num_traits::pow(q.clone(), k as usize);
            c / num_traits::pow(d, n as usize)
        },
        &mut |m, c| *out.entry(m).or_insert_with(BigRational::zero) += c,
    );
    out.retain(|_, c| !c.is_zero());
    Ok(out)
}

struct Chains<'a> {
    indices: &'a [u32],
    slots: &'a [Monomial],
    degs: Vec<u32>,
    cap: u32,
}

impl<'a> Chains<'a> {
    fn new(indices: &'a [u32], slots: &'a [Monomial], cap: u32) -> Self {
        Chains {
            indices,
            slots,
            degs: slots.iter().map(Monomial::degree).collect(),
            cap,
        }
    }

    /// Smallest degree slots `from..` can add when the previous index is `k`.
    fn rest_min(&self, from: usize, k: u32) -> u32 {
        self.degs[from..].iter().enumerate().map(|(i, d)| d * (k + 1 + i as u32)).sum()
    }

    /// Visits every chain `lo <= k_j < k_{j+1} < ..` within the cap; `step`
    /// folds in the factor for index `k` with exponent `n`.
    #[allow(clippy::too_many_arguments)]
    fn walk<C>(
        &self,
        j: usize,
        lo: u32,
        used: u32,
        mono: Monomial,
        coeff: C,
        step: &impl Fn(&C, u32, u32) -> C,
        emit: &mut impl FnMut(Monomial, C),
    ) {
        if j == self.indices.len() {
            emit(mono, coeff);
            return;
        }
        let mut k = lo;
        while used + self.degs[j] * k + self.rest_min(j + 1, k) <= self.cap {
            self.walk(
                j + 1,
                k + 1,
                used + self.degs[j] * k,
                mono.times(&self.slots[j].pow(k)),
                step(&coeff, k, self.indices[j]),
                step,
                emit,
            );
            k += 1;
        }
    }
}

/// [`ordered_series`] with one generator per slot: `slot_order[j]` is the
/// variable whose exponent is `k_j`.
pub fn ordered_qmpl_series(comp: &crate::eval::Composition, slot_order: &[VarId], degree_cap: u32) -> Result<FormalSeries> {
    let slots: Vec<Monomial> = slot_order.iter().map(|v| Monomial::var(*v)).collect();
    ordered_series(comp.indices(), &slots, degree_cap)
}
