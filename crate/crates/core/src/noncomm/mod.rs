//! Generators `z_i` with `z_i z_j = q z_j z_i` for `i < j`.
//!
//! Monomials are kept in increasing-id order with the q-power pulled into
//! the coefficient. Ordered q-MPL series are expanded to a degree cap with
//! exact rational-function coefficients, which lets the closure solver
//! express a product of two such series in the same family. Formal ζ_q words
//! obey a graded exchange rule and are reduced to a sorted normal form.

mod closure;
mod ratfunc;
mod series;
mod zeta_word;

pub use closure::{
    coefficient_map, solve_ordered_closure, verify_ordered_closure, ClosureOutcome, ClosureTerm, CoefficientRing,
    OrderedSymbol,
};
pub use ratfunc::RatFunc;
pub use series::{
    cross_inversions, multiply_series, normalize_monomial, ordered_qmpl_series, ordered_series, FormalSeries, Monomial,
    NormalMonomial, VarId,
};
pub use zeta_word::{
    letter_order, zeta_word_normal_form, zeta_word_normal_form_with, zeta_word_product, ReductionStrategy, ZetaWord,
};
