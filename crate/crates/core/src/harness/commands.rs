use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::{QmplError, Result};
use crate::eval::{
    classical_tail, eval_classical_mpl, eval_qmpl, eval_qmzv, mzv_tail, qmpl_tail, Composition, EvalResult,
    TailBound, TruncationSpec,
};
use crate::qcalc::QParam;
use crate::scalar::{Scalar, ScalarMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalKind {
    Qmpl,
    Classical,
    Qmzv,
}

impl FromStr for EvalKind {
    type Err = QmplError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qmpl" => Ok(EvalKind::Qmpl),
            "classical" => Ok(EvalKind::Classical),
            "qmzv" => Ok(EvalKind::Qmzv),
            _ => Err(QmplError::Usage(format!("unknown kind '{s}'; expected qmpl, classical or qmzv"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutput {
    pub kind: EvalKind,
    pub comp: Composition,
    pub z: Vec<Scalar>,
    pub q: Option<Scalar>,
    pub cutoff: usize,
    #[serde(flatten)]
    pub result: EvalResult,
}

/// Smallest `K` in `[start, max]` with `tail(K) <= target`, by doubling and
/// bisection. The tail bounds are nonincreasing in `K`.
fn smallest_cutoff(tail: impl Fn(usize) -> f64, start: usize, target: f64, max: usize) -> Result<usize> {
    if tail(start) <= target {
        return Ok(start);
    }
    let mut hi = start;
    let mut lo = loop {
        if hi >= max {
            return Err(QmplError::Truncation(format!(
                "no cutoff up to {max} brings the tail bound below {target:e}"
            )));
        }
        let prev = hi;
        hi = (hi * 2).min(max);
        if tail(hi) <= target {
            break prev;
        }
    };
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if tail(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn cutoff_for(kind: EvalKind, comp: &Composition, z: &[Scalar], q: Option<&QParam>, cfg: &RunConfig) -> Result<usize> {
    let Some(target) = cfg.tail_target else {
        return Ok(cfg.trunc);
    };
    let idx = comp.indices();
    let abs_z: Vec<f64> = z.iter().map(Scalar::abs_f64).collect();
    let start = cfg.trunc.max(comp.depth());
    match (kind, q) {
        (EvalKind::Classical, _) if z.iter().all(Scalar::is_one) => {
            smallest_cutoff(|k| mzv_tail(idx, k), start, target, cfg.max_trunc)
        }
        (EvalKind::Classical, _) => smallest_cutoff(|k| classical_tail(idx, &abs_z, k), start, target, cfg.max_trunc),
        (_, Some(q)) => {
            let qa = q.abs_f64();
            smallest_cutoff(|k| qmpl_tail(idx, &abs_z, qa, k), start, target, cfg.max_trunc)
        }
        (_, None) => Err(QmplError::Usage("q is required".into())),
    }
}

/// Evaluates one series. Inputs must already be in the configured mode.
pub fn eval_command(
    kind: EvalKind,
    comp: &Composition,
    z: &[Scalar],
    q: Option<&Scalar>,
    cfg: &RunConfig,
) -> Result<EvalOutput> {
    let q = match (kind, q) {
        (EvalKind::Classical, _) => None,
        (_, Some(q)) => Some(QParam::new(q.clone())?),
        (_, None) => return Err(QmplError::Usage("this kind needs q".into())),
    };
    let z: Vec<Scalar> = match kind {
        EvalKind::Qmzv => {
            if !z.is_empty() {
                return Err(QmplError::Usage("qmzv takes no z arguments".into()));
            }
            let one = Scalar::from_rational(&BigRational::one(), cfg.scalar_mode());
            vec![one; comp.depth()]
        }
        _ => z.to_vec(),
    };
    let cutoff = cutoff_for(kind, comp, &z, q.as_ref(), cfg)?;
    let trunc = TruncationSpec::new(cutoff);
    let result = match (kind, &q) {
        (EvalKind::Qmpl, Some(q)) => eval_qmpl(comp, &z, q, &trunc)?,
        (EvalKind::Qmzv, Some(q)) => eval_qmzv(comp, q, &trunc)?,
        (EvalKind::Classical, _) => eval_classical_mpl(comp, &z, &trunc)?,
        _ => unreachable!("q checked above"),
    };
    Ok(EvalOutput {
        kind,
        comp: comp.clone(),
        z: if kind == EvalKind::Qmzv { Vec::new() } else { z },
        q: q.map(|q| q.q().clone()),
        cutoff,
        result,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    QmzvGrid,
    LimitSweep,
}

impl FromStr for TableKind {
    type Err = QmplError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qmzv_grid" => Ok(TableKind::QmzvGrid),
            "limit_sweep" => Ok(TableKind::LimitSweep),
            _ => Err(QmplError::Usage(format!("unknown table '{s}'; expected qmzv_grid or limit_sweep"))),
        }
    }
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableKind::QmzvGrid => "qmzv_grid",
            TableKind::LimitSweep => "limit_sweep",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub q: Scalar,
    pub cutoff: usize,
    pub value: Scalar,
    /// `(1 - q)^weight · value`.
    pub rescaled: Scalar,
    pub tail_bound: TailBound,
    /// `|1 - q|^weight · tail_bound`.
    pub rescaled_tail_bound: TailBound,
    /// `|rescaled - classical|`; limit sweeps only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub kind: TableKind,
    pub comp: Composition,
    pub z: Vec<Scalar>,
    /// Classical value the sweep approaches; limit sweeps only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classical: Option<Scalar>,
    pub rows: Vec<TableRow>,
}

/// Parses a grid: comma-separated scalars, where an item `1-2^-a..b` or
/// `1+2^-a..b` expands to `1 ∓ 2^-j` for `j = a..=b`. Empty text is an empty
/// grid.
pub fn parse_grid(text: &str, mode: ScalarMode) -> Result<Vec<Scalar>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let compact: String = item.chars().filter(|c| !c.is_whitespace()).collect();
        let sweep = compact
            .strip_prefix("1-2^-")
            .map(|r| (-1, r))
            .or_else(|| compact.strip_prefix("1+2^-").map(|r| (1, r)));
        match sweep {
            Some((sign, range)) => {
                let (a, b) = range.split_once("..").unwrap_or((range, range));
                let parse = |s: &str| {
                    s.parse::<u32>()
                        .map_err(|_| QmplError::Parse(format!("bad exponent '{s}' in grid item '{item}'")))
                };
                let (a, b) = (parse(a)?, parse(b.trim_start_matches('='))?);
                for j in a..=b {
                    let step = BigRational::new(BigInt::from(sign), BigInt::from(2).pow(j));
                    out.push(Scalar::from_rational(&(BigRational::one() + step), mode));
                }
            }
            None => out.push(Scalar::parse(item, mode)?),
        }
    }
    Ok(out)
}

fn row(comp: &Composition, z: &[Scalar], q: &Scalar, cfg: &RunConfig, kind: TableKind) -> Result<TableRow> {
    let eval_kind = match kind {
        TableKind::QmzvGrid => EvalKind::Qmzv,
        TableKind::LimitSweep => EvalKind::Qmpl,
    };
    let z_in: &[Scalar] = if kind == TableKind::QmzvGrid { &[] } else { z };
    let out = eval_command(eval_kind, comp, z_in, Some(q), cfg)?;
    let gap = q.one_like().try_sub(q)?;
    let factor = gap.pow(comp.weight());
    let rescaled = factor.try_mul(&out.result.value)?;
    let rescaled_tail = match out.result.tail_bound {
        TailBound::Finite(t) => TailBound::Finite(t * factor.abs_f64()),
        TailBound::Unbounded => TailBound::Unbounded,
    };
    Ok(TableRow {
        q: q.clone(),
        cutoff: out.cutoff,
        value: out.result.value,
        rescaled,
        tail_bound: out.result.tail_bound,
        rescaled_tail_bound: rescaled_tail,
        deviation: None,
    })
}

/// One row per grid point, computed in parallel and kept in grid order.
pub fn table_command(kind: TableKind, comp: &Composition, z: &[Scalar], grid: &[Scalar], cfg: &RunConfig) -> Result<Table> {
    let classical = match kind {
        TableKind::QmzvGrid => None,
        TableKind::LimitSweep => Some(eval_command(EvalKind::Classical, comp, z, None, cfg)?.result.value),
    };
    let mut rows = grid
        .par_iter()
        .map(|q| row(comp, z, q, cfg, kind))
        .collect::<Result<Vec<_>>>()?;
    if let Some(c) = &classical {
        for r in &mut rows {
            r.deviation = Some(r.rescaled.try_sub(c)?.abs_f64());
        }
    }
    Ok(Table {
        kind,
        comp: comp.clone(),
        z: if kind == TableKind::QmzvGrid { Vec::new() } else { z.to_vec() },
        classical,
        rows,
    })
}
