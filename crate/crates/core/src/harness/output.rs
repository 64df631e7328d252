//! JSON and RFC-4180 CSV rendering. Both are deterministic for a given
//! input, which the reproducibility guarantee relies on.

use serde::Serialize;

use super::commands::{EvalOutput, Table};
use super::suites::SuiteRun;
use crate::error::{QmplError, Result};
use crate::report::VerificationReport;

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| QmplError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_string(rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).map_err(|e| QmplError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| QmplError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| QmplError::Io(e.to_string()))
}

fn json_text<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).unwrap_or_default()
}

const REPORT_HEADER: [&str; 8] = [
    "suite",
    "relation_id",
    "parameters",
    "lhs",
    "rhs",
    "deviation",
    "tail_budget",
    "verdict",
];

fn report_row(label: &str, r: &VerificationReport) -> Vec<String> {
    vec![
        label.to_string(),
        r.relation_id.clone(),
        json_text(&r.parameters),
        r.lhs.clone(),
        r.rhs.clone(),
        json_text(&r.deviation).trim_matches('"').to_string(),
        json_text(&r.tail_budget),
        json_text(&r.verdict).trim_matches('"').to_string(),
    ]
}

/// Reports under one label, e.g. a single closure check.
pub fn reports_csv(label: &str, reports: &[VerificationReport]) -> Result<String> {
    let mut rows = vec![REPORT_HEADER.map(String::from).to_vec()];
    rows.extend(reports.iter().map(|r| report_row(label, r)));
    csv_string(rows)
}

pub fn runs_csv(runs: &[SuiteRun]) -> Result<String> {
    let mut rows = vec![REPORT_HEADER.map(String::from).to_vec()];
    for run in runs {
        rows.extend(run.reports.iter().map(|r| report_row(run.suite.name(), r)));
    }
    csv_string(rows)
}

pub fn eval_csv(out: &EvalOutput) -> Result<String> {
    let header = ["kind", "comp", "z", "q", "cutoff", "value", "tail_bound", "terms_summed", "rounding_bound"];
    let row = vec![
        json_text(&out.kind).trim_matches('"').to_string(),
        out.comp.to_string(),
        out.z.iter().map(ToString::to_string).collect::<Vec<_>>().join(";"),
        out.q.as_ref().map(ToString::to_string).unwrap_or_default(),
        out.cutoff.to_string(),
        out.result.value.to_string(),
        json_text(&out.result.tail_bound).trim_matches('"').to_string(),
        out.result.terms_summed.to_string(),
        json_text(&out.result.rounding_bound),
    ];
    csv_string(vec![header.map(String::from).to_vec(), row])
}

pub fn table_csv(t: &Table) -> Result<String> {
    let mut header: Vec<String> = ["q", "cutoff", "value", "rescaled", "tail_bound", "rescaled_tail_bound"]
        .map(String::from)
        .to_vec();
    let sweep = t.classical.is_some();
    if sweep {
        header.extend(["classical".to_string(), "deviation".to_string()]);
    }
    let mut rows = vec![header];
    for r in &t.rows {
        let mut row = vec![
            r.q.to_string(),
            r.cutoff.to_string(),
            r.value.to_string(),
            r.rescaled.to_string(),
            json_text(&r.tail_bound).trim_matches('"').to_string(),
            json_text(&r.rescaled_tail_bound).trim_matches('"').to_string(),
        ];
        if let Some(c) = &t.classical {
            row.push(c.to_string());
            row.push(r.deviation.map(|d| json_text(&d)).unwrap_or_default());
        }
        rows.push(row);
    }
    csv_string(rows)
}
