//! Structured outcome of one identity check.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Both sides are identical in exact arithmetic.
    ExactPass,
    /// Deviation is within the reported budget.
    TolerancePass,
    Fail,
    /// The check could not reach a verdict for these inputs.
    Unsupported,
}

impl Verdict {
    pub fn is_pass(self) -> bool {
        matches!(self, Verdict::ExactPass | Verdict::TolerancePass)
    }
}

/// `|lhs - rhs|`, or a flag that the two sides are exactly equal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Deviation {
    ExactZero,
    Value(f64),
}

impl Deviation {
    pub fn as_f64(&self) -> f64 {
        match self {
            Deviation::ExactZero => 0.0,
            Deviation::Value(v) => *v,
        }
    }
}

const EXACT_ZERO: &str = "exact-zero";

impl Serialize for Deviation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Deviation::ExactZero => s.serialize_str(EXACT_ZERO),
            Deviation::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Deviation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) if s == EXACT_ZERO => Ok(Deviation::ExactZero),
            Value::Number(n) => n
                .as_f64()
                .map(Deviation::Value)
                .ok_or_else(|| serde::de::Error::custom("deviation out of range")),
            other => Err(serde::de::Error::custom(format!("bad deviation {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub relation_id: String,
    pub parameters: Map<String, Value>,
    pub lhs: String,
    pub rhs: String,
    pub deviation: Deviation,
    pub tail_budget: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

/// Replaces non-finite budgets, which JSON cannot carry.
fn finite(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::MAX
    }
}

impl VerificationReport {
    /// Compares two sides of an identity.
    ///
    /// Exact operands must agree exactly (`ExactPass`, otherwise `Fail`);
    /// float operands pass when the deviation is within `budget`.
    pub fn compare(
        relation_id: impl Into<String>,
        parameters: Map<String, Value>,
        lhs: &Scalar,
        rhs: &Scalar,
        budget: f64,
    ) -> crate::Result<Self> {
        let diff = lhs.try_sub(rhs)?;
        let (deviation, verdict, budget) = if diff.is_exact() {
            if diff.is_zero() {
                (Deviation::ExactZero, Verdict::ExactPass, 0.0)
            } else {
                let d = diff.abs_f64();
                let d = if d > 0.0 { d } else { f64::MIN_POSITIVE };
                (Deviation::Value(d), Verdict::Fail, 0.0)
            }
        } else {
            let d = diff.abs_f64();
            let verdict = if d <= budget {
                Verdict::TolerancePass
            } else {
                Verdict::Fail
            };
            (Deviation::Value(d), verdict, budget)
        };
        Ok(VerificationReport {
            relation_id: relation_id.into(),
            parameters,
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            deviation,
            tail_budget: finite(budget),
            verdict,
            details: None,
        })
    }

    /// A report judged by a custom criterion rather than a two-sided comparison.
    pub fn judged(
        relation_id: impl Into<String>,
        parameters: Map<String, Value>,
        lhs: String,
        rhs: String,
        deviation: Deviation,
        tail_budget: f64,
        verdict: Verdict,
    ) -> Self {
        debug_assert!(verdict != Verdict::ExactPass || deviation == Deviation::ExactZero);
        VerificationReport {
            relation_id: relation_id.into(),
            parameters,
            lhs,
            rhs,
            deviation,
            tail_budget: finite(tail_budget),
            verdict,
            details: None,
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = Some(details);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict.is_pass()
    }
}

/// Builds a parameter map from `key => value` pairs.
#[macro_export]
macro_rules! params {
    ($($k:expr => $v:expr),* $(,)?) => {{
        let mut m = ::serde_json::Map::new();
        $( m.insert(($k).to_string(), ::serde_json::json!($v)); )*
        m
    }};
}
