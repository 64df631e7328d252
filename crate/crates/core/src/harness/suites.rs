use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::RunConfig;
use super::gen;
use crate::error::{QmplError, Result};
use crate::eval::{check_derivative_relation, classical_limit_check, rounding_budget, Composition, TruncationSpec};
use crate::noncomm::{
    verify_ordered_closure, zeta_word_normal_form_with, OrderedSymbol, ReductionStrategy, ZetaWord,
};
use crate::params;
use crate::qcalc::{jackson_integral, minimal_lattice_cap, JacksonConfig, QParam, SingularPolicy};
use crate::report::{Deviation, Verdict, VerificationReport};
use crate::scalar::{Scalar, ScalarMode};
use crate::stuffle::{distribution_expand, verify_distribution, verify_stuffle_numeric, Env, IndexedWord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Symmetry,
    Derivative,
    Distribution,
    Limit,
    Integral,
    OrderedClosure,
    Exchange,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Symmetry,
        Suite::Derivative,
        Suite::Distribution,
        Suite::Limit,
        Suite::Integral,
        Suite::OrderedClosure,
        Suite::Exchange,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Symmetry => "symmetry",
            Suite::Derivative => "derivative",
            Suite::Distribution => "distribution",
            Suite::Limit => "limit",
            Suite::Integral => "integral",
            Suite::OrderedClosure => "ordered_closure",
            Suite::Exchange => "exchange",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = QmplError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Suite::ALL.iter().map(|x| x.name()).collect();
                QmplError::Usage(format!("unknown suite '{s}'; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub exact_pass: usize,
    pub tolerance_pass: usize,
    pub fail: usize,
    pub unsupported: usize,
}

impl Summary {
    pub fn of(reports: &[VerificationReport]) -> Self {
        let mut s = Summary::default();
        for r in reports {
            match r.verdict {
                Verdict::ExactPass => s.exact_pass += 1,
                Verdict::TolerancePass => s.tolerance_pass += 1,
                Verdict::Fail => s.fail += 1,
                Verdict::Unsupported => s.unsupported += 1,
            }
        }
        s
    }
}

/// Reports of one suite, sorted canonically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRun {
    pub suite: Suite,
    pub count: usize,
    pub seed: u64,
    pub mode: String,
    pub precision_bits: Option<u32>,
    pub trunc: usize,
    pub summary: Summary,
    pub reports: Vec<VerificationReport>,
}

impl SuiteRun {
    pub fn all_passed(&self) -> bool {
        self.summary.fail == 0
    }
}

/// One generated instance, drawn before anything runs so the parameter
/// stream does not depend on scheduling.
#[derive(Debug, Clone)]
enum Case {
    Symmetry { n: u32, m: u32, x: BigRational, y: BigRational, q: BigRational },
    Derivative { comp: Composition, slot: usize, z: Vec<BigRational>, q: BigRational },
    Distribution { comp: Composition, x: Vec<BigRational>, n: u32, q: BigRational },
    Limit { comp: Composition, z: Vec<BigRational> },
    Integral { coeffs: Vec<BigRational>, a: BigRational, q: BigRational },
    Closure { n: u32, m: u32, vars: (u32, u32) },
    Exchange { word: ZetaWord },
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `|q| <= 1/2`, or `|q| >= 2` when `outside` is allowed and chosen.
fn q_value(rng: &mut ChaCha8Rng, outside: bool) -> BigRational {
    let r = gen::rational(rng, 12, (1, 2));
    if outside && rng.gen_bool(0.3) {
        r.recip()
    } else {
        r
    }
}

fn generate(suite: Suite, count: usize, cfg: &RunConfig) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(suite as u64 + 1);
    let exact = cfg.scalar_mode() == ScalarMode::Exact;
    (0..count)
        .map(|_| match suite {
            Suite::Symmetry => Case::Symmetry {
                n: rng.gen_range(1..=2),
                m: rng.gen_range(1..=2),
                x: gen::rational(&mut rng, 12, (1, 2)),
                y: gen::rational(&mut rng, 12, (1, 2)),
                q: gen::rational(&mut rng, 12, (1, 2)),
            },
            Suite::Derivative => {
                let comp = gen::composition(&mut rng, 3, 6);
                let slot = rng.gen_range(1..=comp.depth());
                let z = (0..comp.depth()).map(|_| gen::rational(&mut rng, 12, (1, 2))).collect();
                Case::Derivative { comp, slot, z, q: q_value(&mut rng, true) }
            }
            Suite::Distribution => {
                let comp = if rng.gen_bool(0.5) {
                    Composition::new(vec![2])
                } else {
                    Composition::new(vec![1, 1])
                }
                .expect("valid");
                // exact mode needs rational roots: x = ±s^2
                let n = if exact { 2 } else { rng.gen_range(2..=3) };
                let x = (0..comp.depth())
                    .map(|_| {
                        if exact {
                            let s = gen::rational(&mut rng, 6, (5, 6));
                            let sq = &s * &s;
                            if rng.gen_bool(0.25) {
                                -sq
                            } else {
                                sq
                            }
                        } else {
                            gen::rational(&mut rng, 12, (1, 2))
                        }
                    })
                    .collect();
                Case::Distribution { comp, x, n, q: gen::rational(&mut rng, 8, (1, 2)) }
            }
            Suite::Limit => {
                let choices: [&[u32]; 5] = [&[1], &[2], &[3], &[1, 1], &[2, 1]];
                let comp = Composition::new(choices[rng.gen_range(0..choices.len())].to_vec()).expect("valid");
                let z = (0..comp.depth()).map(|_| gen::rational_in(&mut rng, (1, 8), (1, 2), 8)).collect();
                Case::Limit { comp, z }
            }
            Suite::Integral => {
                let deg = rng.gen_range(0..=4);
                let coeffs = (0..=deg).map(|_| gen::rational(&mut rng, 6, (2, 1))).collect();
                Case::Integral {
                    coeffs,
                    a: gen::rational_in(&mut rng, (1, 4), (1, 1), 8),
                    q: gen::rational_in(&mut rng, (1, 8), (3, 4), 8),
                }
            }
            Suite::OrderedClosure => {
                let vars = if rng.gen_bool(0.8) { (1, 2) } else { (1, 1) };
                Case::Closure { n: rng.gen_range(1..=4), m: rng.gen_range(1..=4), vars }
            }
            Suite::Exchange => {
                let len = rng.gen_range(0..=6);
                let letters = (0..len).map(|_| gen::composition(&mut rng, 4, 4)).collect();
                Case::Exchange {
                    word: ZetaWord { q_exponent: rng.gen_range(-4..=4), letters },
                }
            }
        })
        .collect()
}

fn scalar(r: &BigRational, mode: ScalarMode) -> Scalar {
    Scalar::from_rational(r, mode)
}

fn q_param(r: &BigRational, mode: ScalarMode) -> Result<QParam> {
    QParam::new(scalar(r, mode))
}

fn run_case(case: &Case, cfg: &RunConfig) -> Result<VerificationReport> {
    let mode = cfg.scalar_mode();
    let trunc = TruncationSpec::new(cfg.trunc);
    match case {
        Case::Symmetry { n, m, x, y, q } => {
            let a = IndexedWord::from_vars(&[*n], &["x"])?;
            let b = IndexedWord::from_vars(&[*m], &["y"])?;
            let env: Env = [("x".to_string(), scalar(x, mode)), ("y".to_string(), scalar(y, mode))].into();
            verify_stuffle_numeric(&a, &b, &env, &q_param(q, mode)?, &trunc)
        }
        Case::Derivative { comp, slot, z, q } => {
            let z: Vec<Scalar> = z.iter().map(|v| scalar(v, mode)).collect();
            check_derivative_relation(comp, *slot, &z, &q_param(q, mode)?, &trunc)
        }
        Case::Distribution { comp, x, n, q } => {
            let x: Vec<Scalar> = x.iter().map(|v| scalar(v, mode)).collect();
            let rel = distribution_expand(comp, &x, *n, false)?;
            verify_distribution(&rel, &q_param(q, mode)?, cfg.trunc)
        }
        Case::Limit { comp, z } => {
            let z: Vec<Scalar> = z.iter().map(|v| scalar(v, mode)).collect();
            let qs = (4..=9)
                .map(|j| q_param(&(BigRational::one() - ratio(1, 1 << j)), mode))
                .collect::<Result<Vec<_>>>()?;
            classical_limit_check(comp, &z, &qs, &trunc)
        }
        Case::Integral { coeffs, a, q } => integral_case(coeffs, a, q, cfg),
        Case::Closure { n, m, vars } => {
            let a = OrderedSymbol::from_vars(&Composition::new(vec![*n])?, &[vars.0])?;
            let b = OrderedSymbol::from_vars(&Composition::new(vec![*m])?, &[vars.1])?;
            verify_ordered_closure(&a, &b, 12)
        }
        Case::Exchange { word } => Ok(exchange_case(word)),
    }
}

fn polynomial_text(coeffs: &[BigRational]) -> String {
    let parts: Vec<String> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| match i {
            0 => format!("{c}"),
            1 => format!("{c}*t"),
            _ => format!("{c}*t^{i}"),
        })
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// Jackson integral of a polynomial on `[0, a]` against the closed form of
/// the truncated lattice sum,
/// `Σ_i c_i a^(i+1) (1-q) (1 - q^((i+1)(cap+1))) / (1 - q^(i+1))`.
fn integral_case(coeffs: &[BigRational], a: &BigRational, q: &BigRational, cfg: &RunConfig) -> Result<VerificationReport> {
    let mode = cfg.scalar_mode();
    let qp = q_param(q, mode)?;
    let threshold = 1e-12;
    let cap = minimal_lattice_cap(qp.abs_f64(), threshold);
    if cap > cfg.lattice_cap {
        return Err(QmplError::InvalidParameter(format!(
            "lattice cap {cap} needed, configured limit {}",
            cfg.lattice_cap
        )));
    }
    let jc = JacksonConfig { lattice_cap: cap, policy: SingularPolicy::Error, tail_threshold: threshold };
    let cs: Vec<Scalar> = coeffs.iter().map(|c| scalar(c, mode)).collect();
    let f = |t: &Scalar| -> Result<Scalar> {
        let mut acc = t.zero_like();
        for c in cs.iter().rev() {
            acc = acc.try_mul(t)?.try_add(c)?;
        }
        Ok(acc)
    };
    let lhs = jackson_integral(f, &scalar(a, mode), &qp, &jc)?.value;
    let qs = qp.q();
    let one = qs.one_like();
    let one_minus_q = one.try_sub(qs)?;
    let av = scalar(a, mode);
    let mut rhs = qs.zero_like();
    for (i, c) in cs.iter().enumerate() {
        let e = i as u32 + 1;
        let lattice = one.try_sub(&qs.pow(e * (cap as u32 + 1)))?;
        let term = c
            .try_mul(&av.pow(e))?
            .try_mul(&one_minus_q)?
            .try_mul(&lattice)?
            .try_div(&one.try_sub(&qs.pow(e))?)?;
        rhs = rhs.try_add(&term)?;
    }
    let budget = match mode.precision_bits() {
        None => 0.0,
        Some(p) => {
            let mag: f64 = coeffs.iter().map(|c| scalar(c, ScalarMode::Exact).abs_f64()).sum::<f64>().max(1.0);
            2.0 * rounding_budget(mag, (4 * (cap + 1) * (coeffs.len() + 1)) as u64, p)
        }
    };
    let p = params! {
        "f" => polynomial_text(coeffs),
        "a" => av.to_string(),
        "q" => qs.to_string(),
        "lattice_cap" => cap,
        "mode" => mode.name(),
        "precision_bits" => mode.precision_bits(),
    };
    VerificationReport::compare("jackson_polynomial", p, &lhs, &rhs, budget)
}

/// Normal forms under the two bubble orders and the pair counter must agree.
fn exchange_case(word: &ZetaWord) -> VerificationReport {
    let l = zeta_word_normal_form_with(word, ReductionStrategy::LeftToRight);
    let r = zeta_word_normal_form_with(word, ReductionStrategy::RightToLeft);
    let c = zeta_word_normal_form_with(word, ReductionStrategy::PairCount);
    let ok = l == r && l == c;
    let (deviation, verdict) = if ok {
        (Deviation::ExactZero, Verdict::ExactPass)
    } else {
        let d = (l.q_exponent - r.q_exponent).abs().max((l.q_exponent - c.q_exponent).abs()).max(1);
        (Deviation::Value(d as f64), Verdict::Fail)
    };
    let p = params! { "word" => word.to_string(), "letters" => word.letters.len() };
    VerificationReport::judged("exchange", p, l.to_string(), r.to_string(), deviation, 0.0, verdict)
        .with_details(json!({ "pair_count": c.to_string(), "exponent_shift": l.q_exponent - word.q_exponent }))
}

fn error_report(suite: Suite, err: &QmplError) -> VerificationReport {
    VerificationReport::judged(
        suite.name(),
        params! { "error_kind" => err.kind() },
        String::new(),
        String::new(),
        Deviation::Value(f64::MAX),
        0.0,
        Verdict::Fail,
    )
    .with_details(json!({ "error": err.to_string() }))
}

fn sort_key(r: &VerificationReport) -> (String, String, String) {
    (
        r.relation_id.clone(),
        serde_json::to_string(&r.parameters).unwrap_or_default(),
        r.lhs.clone(),
    )
}

/// Runs `count` seeded instances of a suite in parallel and sorts the
/// reports by relation id and parameters.
pub fn run_suite(suite: Suite, count: usize, cfg: &RunConfig) -> SuiteRun {
    let cases = generate(suite, count, cfg);
    let mut reports: Vec<VerificationReport> = cases
        .par_iter()
        .map(|c| run_case(c, cfg).unwrap_or_else(|e| error_report(suite, &e)))
        .collect();
    reports.sort_by_cached_key(sort_key);
    let mode = cfg.scalar_mode();
    SuiteRun {
        suite,
        count,
        seed: cfg.seed,
        mode: mode.name().to_string(),
        precision_bits: mode.precision_bits(),
        trunc: cfg.trunc,
        summary: Summary::of(&reports),
        reports,
    }
}

/// Every suite in declaration order.
pub fn run_all(count: usize, cfg: &RunConfig) -> Vec<SuiteRun> {
    Suite::ALL.iter().map(|s| run_suite(*s, count, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ModeName;

    fn exact(trunc: usize) -> RunConfig {
        RunConfig { trunc, ..RunConfig::default() }
    }

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!(matches!("bogus".parse::<Suite>(), Err(QmplError::Usage(_))));
    }

    #[test]
    fn seed_fixes_parameters() {
        let a = run_suite(Suite::Symmetry, 5, &exact(12));
        let b = run_suite(Suite::Symmetry, 5, &exact(12));
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = run_suite(Suite::Symmetry, 5, &RunConfig { seed: 2, ..exact(12) });
        assert_ne!(a.reports, c.reports);
    }

    #[test]
    fn exact_suites_pass_exactly() {
        for s in [Suite::Symmetry, Suite::Derivative, Suite::Distribution, Suite::Integral, Suite::Exchange] {
            let run = run_suite(s, 6, &exact(12));
            assert_eq!(run.summary.exact_pass, 6, "{s}: {:?}", run.reports);
        }
    }

    #[test]
    fn float_suites_pass() {
        let cfg = RunConfig { mode: ModeName::Float, ..exact(30) };
        for s in [Suite::Symmetry, Suite::Derivative, Suite::Distribution, Suite::Integral] {
            let run = run_suite(s, 4, &cfg);
            assert_eq!(run.summary.tolerance_pass, 4, "{s}: {:?}", run.reports);
        }
    }

    #[test]
    fn limit_and_closure_pass() {
        let run = run_suite(Suite::Limit, 3, &exact(40));
        assert_eq!(run.summary.tolerance_pass, 3, "{:?}", run.reports);
        let run = run_suite(Suite::OrderedClosure, 3, &exact(40));
        assert_eq!(run.summary.exact_pass, 3, "{:?}", run.reports);
    }
}
