//! Exact rational functions of `q` whose denominators are products of
//! cyclotomic polynomials, the only denominators the q-MPL series produce.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

/// Polynomial over Q, lowest degree first, no trailing zeros.
pub(crate) type Poly = Vec<BigRational>;

fn trim(p: &mut Poly) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

fn poly_add(a: &[BigRational], b: &[BigRational]) -> Poly {
    let mut out: Poly = (0..a.len().max(b.len()))
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(BigRational::zero);
            match b.get(i) {
                Some(y) => x + y,
                None => x,
            }
        })
        .collect();
    trim(&mut out);
    out
}

/// `a / b` when `b` (monic) divides `a` exactly.
fn poly_div_exact(a: &[BigRational], b: &[BigRational]) -> Option<Poly> {
    if a.is_empty() {
        return Some(Vec::new());
    }
    if a.len() < b.len() {
        return None;
    }
    let mut rem = a.to_vec();
    let db = b.len() - 1;
    let mut quot = vec![BigRational::zero(); a.len() - db];
    for i in (0..quot.len()).rev() {
        let c = rem[i + db].clone();
        if c.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            rem[i + j] -= &c * bj;
        }
        quot[i] = c;
    }
    if rem.iter().all(Zero::is_zero) {
        trim(&mut quot);
        Some(quot)
    } else {
        None
    }
}

fn poly_eval(p: &[BigRational], x: &BigRational) -> BigRational {
    p.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

fn int_poly(coeffs: &[i64]) -> Poly {
    let mut p: Poly = coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect();
    trim(&mut p);
    p
}

/// The cyclotomic polynomial `Φ_d`, from `q^d - 1 = Π_{e | d} Φ_e`.
/// Memoised per thread.
pub(crate) fn cyclotomic(d: u32) -> Poly {
    thread_local! {
        static CACHE: RefCell<HashMap<u32, Poly>> = RefCell::new(HashMap::new());
    }
    if let Some(p) = CACHE.with(|c| c.borrow().get(&d).cloned()) {
        return p;
    }
    let mut p = vec![0i64; d as usize + 1];
    p[0] = -1;
    p[d as usize] = 1;
    let mut p = int_poly(&p);
    for e in 1..d {
        if d % e == 0 {
            p = poly_div_exact(&p, &cyclotomic(e)).expect("cyclotomic factorisation");
        }
    }
    CACHE.with(|c| c.borrow_mut().insert(d, p.clone()));
    p
}

fn divisors(k: u32) -> impl Iterator<Item = u32> {
    (1..=k).filter(move |d| k % d == 0)
}

/// `q^shift · num(q) / Π Φ_d(q)^{m_d}`, kept reduced: `num(0) != 0` and no
/// `Φ_d` in the denominator divides `num`. The reduced form is unique, so
/// structural equality is equality of functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatFunc {
    shift: i64,
    num: Poly,
    den: BTreeMap<u32, u32>,
}

impl RatFunc {
    pub fn zero() -> Self {
        RatFunc {
            shift: 0,
            num: Vec::new(),
            den: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(c, 0)
    }

    /// `c · q^e`.
    pub fn monomial(c: BigRational, e: i64) -> Self {
        RatFunc {
            shift: e,
            num: vec![c],
            den: BTreeMap::new(),
        }
        .normalized()
    }

    /// `1 / (1 - q^k)^n`.
    pub fn inv_one_minus_q_pow(k: u32, n: u32) -> Self {
        assert!(k >= 1);
        // 1 - q^k = -Π_{d | k} Φ_d
        let sign = if n % 2 == 1 { -BigRational::one() } else { BigRational::one() };
        let den = divisors(k).map(|d| (d, n)).filter(|(_, m)| *m > 0).collect();
        RatFunc {
            shift: 0,
            num: vec![sign],
            den,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    fn normalized(mut self) -> Self {
        trim(&mut self.num);
        if self.num.is_empty() {
            return Self::zero();
        }
        let lead_zeros = self.num.iter().take_while(|c| c.is_zero()).count();
        if lead_zeros > 0 {
            self.num.drain(..lead_zeros);
            self.shift += lead_zeros as i64;
        }
        self.den.retain(|_, m| *m > 0);
        self
    }

    fn reduced(mut self) -> Self {
        let ds: Vec<u32> = self.den.keys().copied().collect();
        for d in ds {
            let phi = cyclotomic(d);
            while self.den[&d] > 0 {
                match poly_div_exact(&self.num, &phi) {
                    Some(q) => {
                        self.num = q;
                        *self.den.get_mut(&d).expect("present") -= 1;
                    }
                    None => break,
                }
            }
        }
        self.normalized()
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut den = self.den.clone();
        for (d, m) in &other.den {
            *den.entry(*d).or_insert(0) += m;
        }
        RatFunc {
            shift: self.shift + other.shift,
            num: poly_mul(&self.num, &other.num),
            den,
        }
        .reduced()
    }

    /// Multiplies by `q^e`.
    pub fn shifted(&self, e: i64) -> RatFunc {
        if self.is_zero() {
            return Self::zero();
        }
        let mut r = self.clone();
        r.shift += e;
        r
    }

    pub fn scale(&self, c: &BigRational) -> RatFunc {
        RatFunc {
            shift: self.shift,
            num: self.num.iter().map(|x| x * c).collect(),
            den: self.den.clone(),
        }
        .normalized()
    }

    pub fn neg(&self) -> RatFunc {
        self.scale(&-BigRational::one())
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let mut den = self.den.clone();
        for (d, m) in &other.den {
            let e = den.entry(*d).or_insert(0);
            *e = (*e).max(*m);
        }
        let lift = |r: &RatFunc| -> Poly {
            let mut p = r.num.clone();
            for (d, m) in &den {
                let have = r.den.get(d).copied().unwrap_or(0);
                if *m > have {
                    let phi = cyclotomic(*d);
                    for _ in have..*m {
                        p = poly_mul(&p, &phi);
                    }
                }
            }
            p
        };
        let (pa, pb) = (lift(self), lift(other));
        let shift = self.shift.min(other.shift);
        let pad = |p: Poly, s: i64| -> Poly {
            let mut v = vec![BigRational::zero(); (s - shift) as usize];
            v.extend(p);
            v
        };
        RatFunc {
            shift,
            num: poly_add(&pad(pa, self.shift), &pad(pb, other.shift)),
            den,
        }
        .normalized()
        .reduced()
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        self.add(&other.neg())
    }

    /// Value at a rational point; `None` at a pole.
    pub fn eval(&self, q: &BigRational) -> Option<BigRational> {
        if self.is_zero() {
            return Some(BigRational::zero());
        }
        let mut den = BigRational::one();
        for (d, m) in &self.den {
            den *= num_traits::pow(poly_eval(&cyclotomic(*d), q), *m as usize);
        }
        if den.is_zero() || (q.is_zero() && self.shift < 0) {
            return None;
        }
        let qs = if self.shift >= 0 {
            num_traits::pow(q.clone(), self.shift as usize)
        } else {
            num_traits::pow(q.recip(), (-self.shift) as usize)
        };
        Some(poly_eval(&self.num, q) * qs / den)
    }

    /// The value when this is a constant.
    pub fn as_constant(&self) -> Option<BigRational> {
        if self.is_zero() {
            return Some(BigRational::zero());
        }
        (self.shift == 0 && self.num.len() == 1 && self.den.is_empty()).then(|| self.num[0].clone())
    }

    /// `(c, e)` when this is `c · q^e`.
    pub fn as_laurent_monomial(&self) -> Option<(BigRational, i64)> {
        (self.num.len() == 1 && self.den.is_empty()).then(|| (self.num[0].clone(), self.shift))
    }

    /// Expanded numerator and denominator coefficient arrays, lowest degree
    /// first, with the power of `q` moved to whichever side keeps both
    /// polynomial.
    pub fn expanded(&self) -> (Poly, Poly) {
        if self.is_zero() {
            return (Vec::new(), vec![BigRational::one()]);
        }
        let mut den = vec![BigRational::one()];
        for (d, m) in &self.den {
            let phi = cyclotomic(*d);
            for _ in 0..*m {
                den = poly_mul(&den, &phi);
            }
        }
        let mut num = self.num.clone();
        if self.shift >= 0 {
            let mut v = vec![BigRational::zero(); self.shift as usize];
            v.extend(num);
            num = v;
        } else {
            let mut v = vec![BigRational::zero(); (-self.shift) as usize];
            v.extend(den);
            den = v;
        }
        // lowest denominator coefficient positive, as in products of (1 - q^k)
        if den.iter().find(|c| !c.is_zero()).is_some_and(Signed::is_negative) {
            num = num.iter().map(|c| -c).collect();
            den = den.iter().map(|c| -c).collect();
        }
        (num, den)
    }
}

pub(crate) fn poly_to_string(p: &[BigRational]) -> String {
    let mut parts = Vec::new();
    for (i, c) in p.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mono = match i {
            0 => String::new(),
            1 => "q".to_string(),
            _ => format!("q^{i}"),
        };
        let abs = c.abs();
        let body = if mono.is_empty() {
            abs.to_string()
        } else if abs.is_one() {
            mono
        } else {
            format!("{abs}*{mono}")
        };
        let sign = if c.is_negative() { "-" } else { "+" };
        parts.push((sign, body));
    }
    if parts.is_empty() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (i, (sign, body)) in parts.into_iter().enumerate() {
        if i == 0 {
            if sign == "-" {
                s.push('-');
            }
        } else {
            s.push_str(if sign == "-" { " - " } else { " + " });
        }
        s.push_str(&body);
    }
    s
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (num, den) = self.expanded();
        let n = poly_to_string(&num);
        if den.len() == 1 && den[0].is_one() {
            return f.write_str(&n);
        }
        let n = if n.contains(' ') { format!("({n})") } else { n };
        write!(f, "{n}/({})", poly_to_string(&den))
    }
}

impl Serialize for RatFunc {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let (num, den) = self.expanded();
        let text = |p: Poly| p.iter().map(|c| c.to_string()).collect::<Vec<_>>();
        let mut st = s.serialize_struct("RatFunc", 2)?;
        st.serialize_field("numerator", &text(num))?;
        st.serialize_field("denominator", &text(den))?;
        st.end()
    }
}
