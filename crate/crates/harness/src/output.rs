//! Result emission: CSV and a flat key-value document, both deterministic,
//! plus the parse-back used by round-trip checks.

use crate::error::{HarnessError, Result};
use crate::scenario::{FringeTrace, SweepRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    KeyValue,
}

impl std::str::FromStr for OutputFormat {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "kv" => Ok(OutputFormat::KeyValue),
            other => Err(HarnessError::Config(format!(
                "unknown format `{other}` (expected csv or kv)"
            ))),
        }
    }
}

pub const CSV_HEADER: &str =
    "control,visibility,concurrence,distinguishability,c0,residual,quadrature_sum";

fn fmt(v: f64) -> String {
    // Values that round to zero at this precision print without a sign.
    let v = if v.abs() < 0.5e-12 { 0.0 } else { v };
    format!("{v:.12}")
}

/// Renders rows in the requested format (12 fixed decimals, deterministic
/// ordering).
pub fn emit_results(rows: &[SweepRow], format: OutputFormat) -> Result<String> {
    if rows.is_empty() {
        return Err(HarnessError::Config("no rows to emit".into()));
    }
    let mut out = String::new();
    match format {
        OutputFormat::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    fmt(r.control),
                    fmt(r.visibility),
                    fmt(r.concurrence),
                    fmt(r.distinguishability),
                    fmt(r.c0),
                    fmt(r.residual),
                    fmt(r.quadrature_sum),
                ));
            }
        }
        OutputFormat::KeyValue => {
            out.push_str("schema_version = 1\n");
            out.push_str(&format!("rows = {}\n", rows.len()));
            for (i, r) in rows.iter().enumerate() {
                out.push_str(&format!("row.{i}.control = {}\n", fmt(r.control)));
                out.push_str(&format!("row.{i}.visibility = {}\n", fmt(r.visibility)));
                out.push_str(&format!("row.{i}.concurrence = {}\n", fmt(r.concurrence)));
                out.push_str(&format!(
                    "row.{i}.distinguishability = {}\n",
                    fmt(r.distinguishability)
                ));
                out.push_str(&format!("row.{i}.c0 = {}\n", fmt(r.c0)));
                out.push_str(&format!("row.{i}.residual = {}\n", fmt(r.residual)));
                out.push_str(&format!(
                    "row.{i}.quadrature_sum = {}\n",
                    fmt(r.quadrature_sum)
                ));
            }
        }
    }
    Ok(out)
}

/// Parses the CSV form back into rows (round-trip oracle).
pub fn parse_results_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| HarnessError::Config("empty document".into()))?;
    if header != CSV_HEADER {
        return Err(HarnessError::Config(format!("unexpected header `{header}`")));
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| HarnessError::Config(format!("bad number `{f}`")))
            })
            .collect::<Result<_>>()?;
        if fields.len() != 7 {
            return Err(HarnessError::Config(format!(
                "expected 7 columns, got {}",
                fields.len()
            )));
        }
        rows.push(SweepRow {
            control: fields[0],
            visibility: fields[1],
            concurrence: fields[2],
            distinguishability: fields[3],
            c0: fields[4],
            residual: fields[5],
            quadrature_sum: fields[6],
        });
    }
    Ok(rows)
}

/// Per-theta fringe table: both detection probabilities for every sweep
/// point.
pub fn emit_fringes(traces: &[FringeTrace]) -> Result<String> {
    if traces.is_empty() {
        return Err(HarnessError::Config("no fringe traces to emit".into()));
    }
    let mut out = String::from("control,theta,p0,p1\n");
    for t in traces {
        for ((&theta, &p0), &p1) in t.thetas.iter().zip(&t.p0).zip(&t.p1) {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt(t.control),
                fmt(theta),
                fmt(p0),
                fmt(p1)
            ));
        }
    }
    Ok(out)
}
