//! Deterministic CSV/JSON serialization of experiment outputs.
//!
//! All floats are written with 9 significant digits through one formatter,
//! so reruns of the same config are byte-identical.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::{json, Map, Number, Value};
use soundfield::FieldSlice;

use crate::experiment::{Aggregate, CaseRecord, RunReport};

/// 9 significant digits, scientific notation; negative zero normalized.
pub fn fmt9(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.8e}")
}

/// Nearest f64 to the 9-significant-digit decimal form of `x`; applying it
/// twice is a no-op, which keeps JSON round-trips byte-identical.
pub fn round9(x: f64) -> f64 {
    fmt9(x).parse().expect("formatted float reparses")
}

/// Frequency component of output file names: integral Hz without a point,
/// otherwise with '.' replaced by 'p'.
pub fn freq_tag(f: f64) -> String {
    if f == f.trunc() && f.abs() < 1e15 {
        format!("{}", f as i64)
    } else {
        format!("{f}").replace('.', "p")
    }
}

pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => bail!("unknown report format {name:?} (expected csv or json)"),
        }
    }
}

pub const REPORT_HEADER: &str = "frequency_hz,method,seed,nmse_db,sparsity,iterations,converged";

pub fn report_csv(records: &[CaseRecord], aggregates: &[Aggregate]) -> String {
    let mut out = String::new();
    out.push_str(REPORT_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt9(r.frequency_hz),
            r.method,
            r.seed,
            fmt9(r.nmse_db),
            fmt9(r.sparsity),
            r.iterations,
            r.converged
        );
    }
    for a in aggregates {
        for (tag, v) in [
            ("mean", a.nmse_mean_db),
            ("min", a.nmse_min_db),
            ("max", a.nmse_max_db),
        ] {
            let _ = writeln!(
                out,
                "{},{},{},{},,,",
                fmt9(a.frequency_hz),
                a.method,
                tag,
                fmt9(v)
            );
        }
    }
    out
}

fn num(x: f64) -> Value {
    Value::Number(Number::from_f64(round9(x)).expect("finite float"))
}

pub fn report_json(records: &[CaseRecord], aggregates: &[Aggregate]) -> String {
    let recs: Vec<Value> = records
        .iter()
        .map(|r| {
            let mut m = Map::new();
            m.insert("frequency_hz".into(), num(r.frequency_hz));
            m.insert("method".into(), Value::String(r.method.clone()));
            m.insert("seed".into(), json!(r.seed));
            m.insert("nmse_db".into(), num(r.nmse_db));
            m.insert("sparsity".into(), num(r.sparsity));
            m.insert("iterations".into(), json!(r.iterations));
            m.insert("converged".into(), json!(r.converged));
            Value::Object(m)
        })
        .collect();
    let aggs: Vec<Value> = aggregates
        .iter()
        .map(|a| {
            let mut m = Map::new();
            m.insert("frequency_hz".into(), num(a.frequency_hz));
            m.insert("method".into(), Value::String(a.method.clone()));
            m.insert("num_seeds".into(), json!(a.num_seeds));
            m.insert("nmse_mean_db".into(), num(a.nmse_mean_db));
            m.insert("nmse_min_db".into(), num(a.nmse_min_db));
            m.insert("nmse_max_db".into(), num(a.nmse_max_db));
            Value::Object(m)
        })
        .collect();
    let doc = json!({ "records": recs, "aggregates": aggs });
    let mut text = serde_json::to_string_pretty(&doc).expect("json serialization");
    text.push('\n');
    text
}

/// Writes `report.csv` (or `report.json`) plus one γ vector file per case.
pub fn export_report(report: &RunReport, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let mut written = Vec::new();

    let (name, body) = match format {
        ReportFormat::Csv => ("report.csv", report_csv(&report.records, &report.aggregates)),
        ReportFormat::Json => ("report.json", report_json(&report.records, &report.aggregates)),
    };
    let path = dir.join(name);
    std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    written.push(path);

    for r in &report.records {
        let path = dir.join(format!(
            "gamma_{}_{}_{}.csv",
            freq_tag(r.frequency_hz),
            r.method,
            r.seed
        ));
        let mut body = String::from("index,gamma\n");
        for (i, g) in r.gamma.iter().enumerate() {
            let _ = writeln!(body, "{},{}", i, fmt9(*g));
        }
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    Ok(written)
}

/// Re-serializes a parsed `report.json`; used to verify round-trip
/// stability.
pub fn reexport_json(text: &str) -> Result<String> {
    let doc: Value = serde_json::from_str(text).context("parsing report.json")?;
    let recs = doc["records"].as_array().context("records array")?;
    let aggs = doc["aggregates"].as_array().context("aggregates array")?;
    let records: Vec<CaseRecord> = recs
        .iter()
        .map(|v| serde_json::from_value(v.clone()).context("record"))
        .collect::<Result<_>>()?;
    let aggregates: Vec<Aggregate> = aggs
        .iter()
        .map(|v| serde_json::from_value(v.clone()).context("aggregate"))
        .collect::<Result<_>>()?;
    Ok(report_json(&records, &aggregates))
}

/// `slice_<plane>_<freq>_<method>_<seed>.csv` with in-plane coordinates and
/// the per-point normalized squared error.
pub fn export_slice(
    slice: &FieldSlice,
    method: &str,
    seed: u64,
    dir: &Path,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let axis = slice.plane.axis.name();
    let (u_name, v_name) = match axis {
        "x" => ("y", "z"),
        "y" => ("x", "z"),
        _ => ("x", "y"),
    };
    let path = dir.join(format!(
        "slice_{}{}_{}_{}_{}.csv",
        axis,
        freq_tag(slice.plane.offset),
        freq_tag(slice.frequency),
        method,
        seed
    ));
    let mut body = format!(
        "{u_name},{v_name},re_true,im_true,re_est,im_est,norm_error\n"
    );
    for p in &slice.points {
        let _ = writeln!(
            body,
            "{},{},{},{},{},{},{}",
            fmt9(p.u),
            fmt9(p.v),
            fmt9(p.u_true.re),
            fmt9(p.u_true.im),
            fmt9(p.u_est.re),
            fmt9(p.u_est.im),
            fmt9(p.norm_error)
        );
    }
    std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
