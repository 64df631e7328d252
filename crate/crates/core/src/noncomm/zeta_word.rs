use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::QmplError;
use crate::eval::Composition;

/// `q^q_exponent · ζ_q(letters[0]) ζ_q(letters[1]) ···` as a formal word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ZetaWord {
    pub q_exponent: i64,
    pub letters: Vec<Composition>,
}

/// Canonical letter order: weight, then indices lexicographically.
pub fn letter_order(a: &Composition, b: &Composition) -> Ordering {
    a.weight().cmp(&b.weight()).then_with(|| a.indices().cmp(b.indices()))
}

/// Exponent picked up when letter `right` moves left past `left`, with
/// `right` before `left` in canonical order.
fn exchange(left: &Composition, right: &Composition) -> i64 {
    -(left.weight() as i64 * right.weight() as i64)
}

impl ZetaWord {
    pub fn new(letters: Vec<Composition>) -> Self {
        ZetaWord { q_exponent: 0, letters }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new())
    }

    pub fn is_normal(&self) -> bool {
        self.letters.windows(2).all(|w| letter_order(&w[0], &w[1]) != Ordering::Greater)
    }

    pub fn weight(&self) -> u32 {
        self.letters.iter().map(Composition::weight).sum()
    }
}

impl fmt::Display for ZetaWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q_exponent != 0 {
            write!(f, "q^{} ", self.q_exponent)?;
        }
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self.letters.iter().map(|c| format!("ζ{c}")).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Letters separated by `;`, each a composition such as `3` or `1,1`.
/// Empty text is the empty word.
impl FromStr for ZetaWord {
    type Err = QmplError;

    fn from_str(s: &str) -> Result<Self, QmplError> {
        let letters = s
            .split(';')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(Composition::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ZetaWord::new(letters))
    }
}

/// How adjacent transpositions are scheduled. All give the same result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionStrategy {
    /// Bubble passes sweeping left to right.
    LeftToRight,
    /// Bubble passes sweeping right to left.
    RightToLeft,
    /// No rewriting: sums the exchange factor over inverted pairs, then sorts.
    PairCount,
}

pub fn zeta_word_normal_form(w: &ZetaWord) -> ZetaWord {
    zeta_word_normal_form_with(w, ReductionStrategy::LeftToRight)
}

pub fn zeta_word_normal_form_with(w: &ZetaWord, strategy: ReductionStrategy) -> ZetaWord {
    let mut letters = w.letters.clone();
    let mut e = w.q_exponent;
    let n = letters.len();
    match strategy {
        ReductionStrategy::LeftToRight => loop {
            let mut swapped = false;
            for i in 0..n.saturating_sub(1) {
                if letter_order(&letters[i], &letters[i + 1]) == Ordering::Greater {
                    e += exchange(&letters[i], &letters[i + 1]);
                    letters.swap(i, i + 1);
                    swapped = true;
                }
            }
            if !swapped {
                break;
            }
        },
        ReductionStrategy::RightToLeft => loop {
            let mut swapped = false;
            for i in (0..n.saturating_sub(1)).rev() {
                if letter_order(&letters[i], &letters[i + 1]) == Ordering::Greater {
                    e += exchange(&letters[i], &letters[i + 1]);
                    letters.swap(i, i + 1);
                    swapped = true;
                }
            }
            if !swapped {
                break;
            }
        },
        ReductionStrategy::PairCount => {
            for i in 0..n {
                for j in i + 1..n {
                    if letter_order(&letters[i], &letters[j]) == Ordering::Greater {
                        e += exchange(&letters[i], &letters[j]);
                    }
                }
            }
            letters.sort_by(letter_order);
        }
    }
    ZetaWord {
        q_exponent: e,
        letters,
    }
}

/// Concatenates and normalises.
pub fn zeta_word_product(u: &ZetaWord, v: &ZetaWord) -> ZetaWord {
    let mut letters = u.letters.clone();
    letters.extend(v.letters.iter().cloned());
    zeta_word_normal_form(&ZetaWord {
        q_exponent: u.q_exponent + v.q_exponent,
        letters,
    })
}
