//! q-deformed multiple polylogarithms and q-deformed multiple zeta values.
//!
//! The crate evaluates the truncated nested series
//!
//! ```text
//! Li_{n1..nm}(z1..zm; q) = Σ_{0<k1<..<km} z1^k1 ··· zm^km / ((1-q^k1)^n1 ··· (1-q^km)^nm)
//! ```
//!
//! in exact rational or configurable-precision float arithmetic, and checks
//! the identities these functions satisfy: the q-derivative relation, the
//! quasi-shuffle product, distribution relations, classical limits, Jackson
//! integral representations, closure of ordered series in q-commuting
//! variables, and the graded exchange rule for ζ_q words.
//!
//! Module map:
//! - [`scalar`]: exact / float scalars
//! - [`qcalc`]: q-parameters, q-brackets, q-derivative, Jackson integrals
//! - [`eval`]: series evaluation, tail bounds, derivative and limit checks
//! - [`stuffle`]: quasi-shuffle algebra and distribution relations
//! - [`noncomm`]: q-commuting normal ordering, formal series, ζ_q words
//! - [`harness`]: seeded verification suites, tables, run configuration

pub mod error;
pub mod eval;
pub mod harness;
pub mod noncomm;
pub mod qcalc;
pub mod report;
pub mod scalar;
pub mod stuffle;

pub use error::{QmplError, Result};
pub use eval::{Composition, EvalResult, TailBound, TruncationSpec};
pub use qcalc::{QParam, Regime};
pub use report::{Deviation, Verdict, VerificationReport};
pub use scalar::{Scalar, ScalarMode};
