//! Report assembly and rendering. JSON output is canonical: object keys are
//! sorted (serde_json's default map is ordered), exact rationals are "p/q"
//! strings, approximate values are fixed-point decimals with the declared
//! number of places. CSV output is the flat row table alone.

use num_bigint::BigUint;
use serde_json::{Map, Value};
use veronese::exactnum::{BigRat, Interval};
use veronese::exponents::{
    ExponentKind, ExponentReport, FormulaResult, FormulaValue, RatOrInf, Witness,
};

use crate::config::OutputFormat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Violation,
}

pub struct Report {
    /// Subcommand path, e.g. "estimate lambda".
    pub command: String,
    /// Evidence class of the rows: exact-formula, certified-scan,
    /// construction-certificate, or finite-scale-evidence.
    pub basis: &'static str,
    pub number: Option<String>,
    pub parameters: Map<String, Value>,
    pub rows: Vec<Map<String, Value>>,
    pub summary: Map<String, Value>,
    pub outcome: Outcome,
}

impl Report {
    pub fn new(command: &str, basis: &'static str) -> Report {
        Report {
            command: command.to_string(),
            basis,
            number: None,
            parameters: Map::new(),
            rows: Vec::new(),
            summary: Map::new(),
            outcome: Outcome::Ok,
        }
    }

    pub fn render(&self, format: OutputFormat, float_decimals: u8) -> String {
        match format {
            OutputFormat::Json => {
                let mut top = Map::new();
                top.insert("command".into(), Value::String(self.command.clone()));
                top.insert("basis".into(), Value::String(self.basis.into()));
                if let Some(n) = &self.number {
                    top.insert("number".into(), Value::String(n.clone()));
                }
                top.insert("parameters".into(), Value::Object(self.parameters.clone()));
                top.insert(
                    "rows".into(),
                    Value::Array(self.rows.iter().cloned().map(Value::Object).collect()),
                );
                top.insert("summary".into(), Value::Object(self.summary.clone()));
                top.insert(
                    "float_decimals".into(),
                    Value::Number(u64::from(float_decimals).into()),
                );
                top.insert(
                    "outcome".into(),
                    Value::String(
                        match self.outcome {
                            Outcome::Ok => "ok",
                            Outcome::Violation => "violation",
                        }
                        .into(),
                    ),
                );
                let mut s = serde_json::to_string_pretty(&Value::Object(top))
                    .expect("report serialization cannot fail");
                s.push('\n');
                s
            }
            OutputFormat::Csv => render_csv(&self.rows),
        }
    }
}

fn csv_field(v: &Value) -> String {
    let raw = match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    };
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw
    }
}

fn render_csv(rows: &[Map<String, Value>]) -> String {
    let mut columns: Vec<&str> = Vec::new();
    for row in rows {
        for key in row.keys() {
            if !columns.contains(&key.as_str()) {
                columns.push(key);
            }
        }
    }
    columns.sort_unstable();
    let mut out = String::new();
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        let line: Vec<String> = columns
            .iter()
            .map(|c| row.get(*c).map(csv_field).unwrap_or_default())
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

// --- value formatting -------------------------------------------------------

pub fn rat_value(r: &BigRat) -> Value {
    Value::String(format!("{}/{}", r.numer(), r.denom()))
}

pub fn rat_or_inf_value(r: &RatOrInf) -> Value {
    match r {
        RatOrInf::Finite(v) => rat_value(v),
        RatOrInf::Infinite => Value::String("inf".into()),
    }
}

pub fn float_value(x: f64, decimals: u8) -> Value {
    Value::String(format!("{x:.prec$}", prec = decimals as usize))
}

pub fn uint_value(x: &BigUint) -> Value {
    Value::String(x.to_string())
}

pub fn interval_fields(map: &mut Map<String, Value>, prefix: &str, iv: &Interval) {
    map.insert(format!("{prefix}_lo"), rat_value(iv.lo()));
    map.insert(format!("{prefix}_hi"), rat_value(iv.hi()));
}

/// Claim triple: {claim, value | lo/hi | lo}.
pub fn formula_value_fields(map: &mut Map<String, Value>, value: &FormulaValue) {
    match value {
        FormulaValue::Exact(v) => {
            map.insert("claim".into(), Value::String("exact".into()));
            map.insert("value".into(), rat_or_inf_value(v));
        }
        FormulaValue::Bracket { lo, hi } => {
            map.insert("claim".into(), Value::String("bracket".into()));
            map.insert("lo".into(), rat_value(lo));
            map.insert("hi".into(), rat_value(hi));
        }
        FormulaValue::AtLeast(lo) => {
            map.insert("claim".into(), Value::String("at-least".into()));
            map.insert("lo".into(), rat_value(lo));
        }
    }
}

pub fn kind_str(kind: ExponentKind) -> &'static str {
    match kind {
        ExponentKind::Lambda => "lambda",
        ExponentKind::LambdaHat => "lambda-hat",
        ExponentKind::W => "w",
        ExponentKind::WHat => "w-hat",
    }
}

pub fn witness_value(w: &Witness) -> Value {
    match w {
        Witness::X(x) => Value::String(x.to_string()),
        Witness::Coeffs(c) => Value::String(
            c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "),
        ),
    }
}

/// Rows and summary entries shared by every estimate-style report.
pub fn exponent_report_rows(
    report: &ExponentReport,
    decimals: u8,
    prefix: &str,
    rows: &mut Vec<Map<String, Value>>,
    summary: &mut Map<String, Value>,
) {
    for s in &report.samples {
        let mut row = Map::new();
        row.insert("kind".into(), Value::String(kind_str(report.kind).into()));
        row.insert("k".into(), report.k.into());
        row.insert("scale".into(), uint_value(&s.scale));
        row.insert("value".into(), float_value(s.value, decimals));
        row.insert("witness".into(), witness_value(&s.witness));
        rows.push(row);
    }
    let p = |name: &str| {
        if prefix.is_empty() {
            name.to_string()
        } else {
            format!("{prefix}_{name}")
        }
    };
    summary.insert(p("kind"), Value::String(kind_str(report.kind).into()));
    summary.insert(p("extrapolated"), float_value(report.extrapolated, decimals));
    summary.insert(p("tolerance"), float_value(report.tolerance, decimals));
    summary.insert(p("caveat"), Value::String(report.caveat.clone()));
    summary.insert(p("flagged_rational"), Value::Bool(report.flagged_rational));
}

pub fn formula_result_row(r: &FormulaResult) -> Map<String, Value> {
    let mut row = Map::new();
    row.insert("name".into(), Value::String(r.name.into()));
    for (key, v) in &r.inputs {
        row.insert(format!("input_{key}"), rat_or_inf_value(v));
    }
    formula_value_fields(&mut row, &r.value);
    row.insert("note".into(), Value::String(r.regime_note.clone()));
    if let Some(enc) = &r.enclosure {
        interval_fields(&mut row, "refined", enc);
    }
    row
}
