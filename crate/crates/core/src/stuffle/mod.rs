//! The commutative quasi-shuffle (stuffle) algebra of q-MPL symbols and the
//! distribution relations.
//!
//! A symbol `Li_{n1..nm}(a1..am; q)` is an [`IndexedWord`]: one letter per
//! depth slot, each carrying an index and a formal argument. Arguments stay
//! formal ([`ArgExpr`]) so products are exact and mode-free; they are bound to
//! numbers only when a word is evaluated against an [`Env`].

mod distribution;

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

pub use distribution::{distribution_expand, verify_distribution, DistributionRelation, DistributionTerm};

use crate::error::{QmplError, Result};
use crate::eval::{rounding_allowance, rounding_budget, truncated_sum, TruncationSpec};
use crate::params;
use crate::qcalc::QParam;
use crate::report::VerificationReport;
use crate::scalar::Scalar;

/// Numeric values for the named variables of formal arguments.
pub type Env = BTreeMap<String, Scalar>;

/// A formal argument: `factor · Π var^exp`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArgExpr {
    #[serde(with = "ratio_text")]
    pub factor: BigRational,
    pub vars: BTreeMap<String, u32>,
}

mod ratio_text {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        crate::scalar::parse_rational_text(&s).map_err(serde::de::Error::custom)
    }
}

impl ArgExpr {
    pub fn var(name: &str) -> Self {
        ArgExpr {
            factor: BigRational::one(),
            vars: BTreeMap::from([(name.to_string(), 1)]),
        }
    }

    pub fn constant(c: BigRational) -> Self {
        ArgExpr {
            factor: c,
            vars: BTreeMap::new(),
        }
    }

    pub fn mul(&self, other: &ArgExpr) -> ArgExpr {
        let mut vars = self.vars.clone();
        for (v, e) in &other.vars {
            *vars.entry(v.clone()).or_insert(0) += e;
        }
        ArgExpr {
            factor: &self.factor * &other.factor,
            vars,
        }
    }

    /// Binds the variables. `like` fixes the scalar mode of the result.
    pub fn evaluate(&self, env: &Env, like: &Scalar) -> Result<Scalar> {
        let mut acc = like.from_rational_like(&self.factor);
        for (v, e) in &self.vars {
            let val = env
                .get(v)
                .ok_or_else(|| QmplError::InvalidParameter(format!("unbound variable {v}")))?;
            acc = acc.try_mul(&val.pow(*e))?;
        }
        Ok(acc)
    }
}

impl fmt::Display for ArgExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.factor.is_one() || self.vars.is_empty() {
            parts.push(self.factor.to_string());
        }
        for (v, e) in &self.vars {
            parts.push(if *e == 1 { v.clone() } else { format!("{v}^{e}") });
        }
        f.write_str(&parts.join("*"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub index: u32,
    pub arg: ArgExpr,
}

impl Letter {
    fn merge(&self, other: &Letter) -> Letter {
        Letter {
            index: self.index + other.index,
            arg: self.arg.mul(&other.arg),
        }
    }
}

/// The symbol `Li_{n1..nm}(a1..am; q)`; letter `j` is summed over `k_j`
/// with `k1 < .. < km`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndexedWord(Vec<Letter>);

impl IndexedWord {
    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        if letters.is_empty() {
            return Err(QmplError::InvalidParameter("a word needs at least one letter".into()));
        }
        if letters.iter().any(|l| l.index == 0) {
            return Err(QmplError::InvalidParameter("letter indices must be >= 1".into()));
        }
        Ok(IndexedWord(letters))
    }

    /// `Li_{indices}(vars)` with one named variable per slot.
    pub fn from_vars(indices: &[u32], vars: &[&str]) -> Result<Self> {
        if indices.len() != vars.len() {
            return Err(QmplError::InvalidParameter("one variable per index".into()));
        }
        Self::new(
            indices
                .iter()
                .zip(vars)
                .map(|(&index, v)| Letter {
                    index,
                    arg: ArgExpr::var(v),
                })
                .collect(),
        )
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn indices(&self) -> Vec<u32> {
        self.0.iter().map(|l| l.index).collect()
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().map(|l| l.index).sum()
    }

    pub fn args(&self, env: &Env, like: &Scalar) -> Result<Vec<Scalar>> {
        self.0.iter().map(|l| l.arg.evaluate(env, like)).collect()
    }

    /// Truncated value at `q` with cutoff `k` on the outermost index. The
    /// convergence domain is not checked: stuffle terms of in-domain factors
    /// may leave it, yet the truncated identity stays exact.
    pub fn evaluate(&self, env: &Env, q: &QParam, k: usize) -> Result<Scalar> {
        truncated_sum(&self.indices(), &self.args(env, q.q())?, Some(q.q()), k)
    }
}

impl fmt::Display for IndexedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.0.iter().map(|l| l.index.to_string()).collect();
        let args: Vec<String> = self.0.iter().map(|l| l.arg.to_string()).collect();
        write!(f, "Li_{{{}}}({})", idx.join(","), args.join(", "))
    }
}

/// Finite rational combination of words. The empty word stands for the
/// constant 1, which makes the algebra unital.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QmplExpr {
    terms: BTreeMap<Vec<Letter>, BigRational>,
}

impl QmplExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_letters(Vec::new())
    }

    pub fn word(w: &IndexedWord) -> Self {
        Self::from_letters(w.0.clone())
    }

    fn from_letters(l: Vec<Letter>) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(l, BigRational::one());
        QmplExpr { terms }
    }

    fn add_term(&mut self, letters: Vec<Letter>, c: BigRational) {
        match self.terms.entry(letters) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
        }
    }

    pub fn add(&self, other: &QmplExpr) -> QmplExpr {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), v.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> QmplExpr {
        if c.is_zero() {
            return QmplExpr::zero();
        }
        QmplExpr {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    /// Bilinear extension of the stuffle product.
    pub fn stuffle(&self, other: &QmplExpr) -> QmplExpr {
        let mut out = QmplExpr::zero();
        for (u, cu) in &self.terms {
            for (v, cv) in &other.terms {
                let c = cu * cv;
                for (w, n) in quasi_shuffle(u, v) {
                    out.add_term(w, &c * BigRational::from_integer(n.into()));
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms with non-empty words, plus the constant term if any.
    pub fn terms(&self) -> impl Iterator<Item = (&[Letter], &BigRational)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn coefficient(&self, w: &IndexedWord) -> BigRational {
        self.terms.get(&w.0).cloned().unwrap_or_else(BigRational::zero)
    }

    /// `Σ c_w · w` evaluated at cutoff `k`, and the accumulated rounding
    /// allowance in float mode.
    pub fn evaluate(&self, env: &Env, q: &QParam, k: usize) -> Result<(Scalar, f64)> {
        let like = q.q();
        let mut total = like.zero_like();
        let mut rounding = 0.0;
        for (letters, c) in &self.terms {
            let c_s = like.from_rational_like(c);
            if letters.is_empty() {
                total = total.try_add(&c_s)?;
                continue;
            }
            let w = IndexedWord(letters.clone());
            let args = w.args(env, like)?;
            let v = truncated_sum(&w.indices(), &args, Some(like), k)?;
            rounding += c_s.abs_f64() * rounding_allowance(&w.indices(), &args, Some(like), k);
            total = total.try_add(&c_s.try_mul(&v)?)?;
        }
        Ok((total, rounding))
    }
}

impl fmt::Display for QmplExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| {
                let w = if k.is_empty() {
                    "1".to_string()
                } else {
                    IndexedWord(k.clone()).to_string()
                };
                if c.is_one() {
                    w
                } else {
                    format!("{c}*{w}")
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Multiset of quasi-shuffles of `u` and `v` with multiplicities.
///
/// `qsh(ua, vb) = qsh(u, vb)a + qsh(ua, v)b + qsh(u, v)[a+b]`, tabulated
/// over prefix lengths.
fn quasi_shuffle(u: &[Letter], v: &[Letter]) -> BTreeMap<Vec<Letter>, u64> {
    let (p, r) = (u.len(), v.len());
    let mut table: Vec<Vec<BTreeMap<Vec<Letter>, u64>>> = vec![vec![BTreeMap::new(); r + 1]; p + 1];
    for i in 0..=p {
        for j in 0..=r {
            let cell = if i == 0 || j == 0 {
                let mut m = BTreeMap::new();
                let w: Vec<Letter> = u[..i].iter().chain(&v[..j]).cloned().collect();
                m.insert(w, 1);
                m
            } else {
                let mut m: BTreeMap<Vec<Letter>, u64> = BTreeMap::new();
                let steps = [
                    (&table[i - 1][j], u[i - 1].clone()),
                    (&table[i][j - 1], v[j - 1].clone()),
                    (&table[i - 1][j - 1], u[i - 1].merge(&v[j - 1])),
                ];
                for (prev, last) in steps {
                    for (w, n) in prev {
                        let mut w = w.clone();
                        w.push(last.clone());
                        *m.entry(w).or_insert(0) += n;
                    }
                }
                m
            };
            table[i][j] = cell;
        }
    }
    std::mem::take(&mut table[p][r])
}

/// The quasi-shuffle product of two words as a rational combination.
pub fn stuffle_product(a: &IndexedWord, b: &IndexedWord) -> QmplExpr {
    QmplExpr::word(a).stuffle(&QmplExpr::word(b))
}

/// Evaluates `Li(a) · Li(b)` and the stuffle expansion, both at the same
/// outer cutoff. The product grid `[1..K]^2` splits exactly into the
/// interleavings and merges, so exact inputs give an exact zero.
pub fn verify_stuffle_numeric(
    a: &IndexedWord,
    b: &IndexedWord,
    env: &Env,
    q: &QParam,
    trunc: &TruncationSpec,
) -> Result<VerificationReport> {
    let k = trunc.cutoff;
    if k < a.depth().max(b.depth()) {
        return Err(QmplError::Truncation(format!("cutoff {k} below word depth")));
    }
    let like = q.q();
    let (args_a, args_b) = (a.args(env, like)?, b.args(env, like)?);
    let va = truncated_sum(&a.indices(), &args_a, Some(like), k)?;
    let vb = truncated_sum(&b.indices(), &args_b, Some(like), k)?;
    let lhs = va.try_mul(&vb)?;
    let expansion = stuffle_product(a, b);
    let (rhs, rhs_rounding) = expansion.evaluate(env, q, k)?;
    let budget = if lhs.is_exact() {
        0.0
    } else {
        let ra = rounding_allowance(&a.indices(), &args_a, Some(like), k);
        let rb = rounding_allowance(&b.indices(), &args_b, Some(like), k);
        let (ma, mb) = (va.abs_f64(), vb.abs_f64());
        let prec = like.mode().precision_bits().unwrap_or(u32::MAX);
        2.0 * ((ma + ra) * rb + mb * ra + rounding_budget(lhs.abs_f64(), 1, prec) + rhs_rounding)
    };
    let env_text: BTreeMap<&String, String> = env.iter().map(|(k, v)| (k, v.to_string())).collect();
    let mode = like.mode();
    let p = params! {
        "a" => a.to_string(),
        "b" => b.to_string(),
        "z" => env_text,
        "q" => like.to_string(),
        "K" => k,
        "mode" => mode.name(),
        "precision_bits" => mode.precision_bits(),
    };
    Ok(VerificationReport::compare("stuffle", p, &lhs, &rhs, budget)?
        .with_details(serde_json::json!({ "expansion": expansion.to_string(), "terms": expansion.len() })))
}
