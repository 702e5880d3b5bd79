//! Result rows, CSV output, and the markdown summary.

use crate::config::Params;
use std::io::Write;
use std::path::Path;

/// One measurement row. `pass` is always computed from the row's rule.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub claim: String,
    pub params: serde_json::Value,
    pub measured_lo: f64,
    pub measured_hi: f64,
    pub expected: f64,
    /// Where the expected value comes from: a closed form, an analytic
    /// bound, or an independently computed oracle.
    pub expected_src: &'static str,
    pub rule: String,
    pub pass: bool,
    pub runtime_ms: u128,
}

impl ResultRow {
    pub fn new(
        claim: &str,
        params: serde_json::Value,
        measured_lo: f64,
        measured_hi: f64,
        expected: f64,
        expected_src: &'static str,
        rule: impl Into<String>,
        pass: bool,
    ) -> ResultRow {
        ResultRow {
            claim: claim.to_string(),
            params,
            measured_lo,
            measured_hi,
            expected,
            expected_src,
            rule: rule.into(),
            pass,
            runtime_ms: 0,
        }
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub const CSV_HEADER: &str =
    "claim,param_json,measured_lo,measured_hi,expected,expected_src,rule,pass,runtime_ms";

pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.12},{:.12},{:.12},{},{},{},{}\n",
            r.claim,
            csv_escape(&r.params.to_string()),
            r.measured_lo,
            r.measured_hi,
            r.expected,
            r.expected_src,
            csv_escape(&r.rule),
            r.pass,
            r.runtime_ms
        ));
    }
    out
}

/// Writes atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("out")
    ));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

pub struct ClaimOutcome {
    pub id: String,
    pub params: Params,
    pub rows: Vec<ResultRow>,
    pub runtime_ms: u128,
    pub error: Option<String>,
}

impl ClaimOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.rows.iter().all(|r| r.pass)
    }
}

/// Markdown table with one line per claim.
pub fn summary_markdown(outcomes: &[ClaimOutcome]) -> String {
    let mut out = String::new();
    out.push_str("# Claim reproduction summary\n\n");
    out.push_str("| claim | rows | failed | runtime (ms) | status |\n");
    out.push_str("|---|---|---|---|---|\n");
    for o in outcomes {
        let failed = o.rows.iter().filter(|r| !r.pass).count();
        let status = match &o.error {
            Some(e) => format!("error: {e}"),
            None if failed == 0 => "pass".to_string(),
            None => "FAIL".to_string(),
        };
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} |\n",
            o.id,
            o.rows.len(),
            failed,
            o.runtime_ms,
            status
        ));
    }
    out
}

pub fn params_json(p: &Params) -> serde_json::Value {
    serde_json::Value::Object(
        p.iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect(),
    )
}
