//! CSV and JSON persistence.
//!
//! Floats are written with Rust's shortest round-trip representation, so
//! reading a file back reproduces every value bit for bit.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::montecarlo::StudyReport;
use crate::product_limit::ProductLimitFit;
use crate::truncation::TruncatedSample;

/// Reads a sample from CSV with header `x,y`. Row numbers in errors are
/// file line numbers (the header is line 1).
pub fn read_sample_csv<R: Read>(reader: R) -> Result<TruncatedSample> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "y" {
        return Err(Error::Parse {
            row: 1,
            message: format!("expected header 'x,y', found '{}'", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut pairs = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Parse { row: line, message: e.to_string() })?;
        if record.len() != 2 {
            return Err(Error::Parse { row: line, message: format!("expected 2 fields, found {}", record.len()) });
        }
        let parse = |field: &str, name: &str| -> Result<f64> {
            field.parse::<f64>().map_err(|_| Error::Parse {
                row: line,
                message: format!("{name} = '{field}' is not a number"),
            })
        };
        let x = parse(&record[0], "x")?;
        let y = parse(&record[1], "y")?;
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::Parse { row: line, message: format!("x = {x} must be finite and positive") });
        }
        if y.is_nan() || x > y {
            return Err(Error::Parse { row: line, message: format!("x = {x} exceeds y = {y}") });
        }
        pairs.push((x, y));
    }
    if pairs.is_empty() {
        return Err(Error::Parse { row: 1, message: "no data rows".into() });
    }
    TruncatedSample::new(pairs)
}

pub fn write_sample_csv<W: Write>(sample: &TruncatedSample, mut out: W) -> Result<()> {
    writeln!(out, "x,y")?;
    for (x, y) in sample.pairs() {
        writeln!(out, "{x:?},{y:?}")?;
    }
    Ok(())
}

/// Per-atom export `x,c_n,df`.
pub fn write_fit_csv<W: Write>(fit: &ProductLimitFit, mut out: W) -> Result<()> {
    writeln!(out, "x,c_n,df")?;
    for a in fit.atoms() {
        writeln!(out, "{:?},{:?},{:?}", a.x, a.c_n, a.df)?;
    }
    Ok(())
}

/// Estimator path `k,gamma1_hat`.
pub fn write_trace_csv<W: Write>(trace: &[(usize, f64)], mut out: W) -> Result<()> {
    writeln!(out, "k,gamma1_hat")?;
    for (k, g) in trace {
        writeln!(out, "{k},{g:?}")?;
    }
    Ok(())
}

pub const REPORT_HEADER: &str = "p,gamma1,N,mean_n,mean_k_star,abs_bias,rmse,completed";

pub fn write_report_csv<W: Write>(report: &StudyReport, mut out: W) -> Result<()> {
    writeln!(out, "{REPORT_HEADER}")?;
    for r in &report.rows {
        writeln!(
            out,
            "{:?},{:?},{},{:?},{:?},{:?},{:?},{}",
            r.p, r.gamma1, r.big_n, r.mean_n, r.mean_k_star, r.abs_bias, r.rmse, r.completed
        )?;
    }
    Ok(())
}

pub fn write_json<W: Write, T: serde::Serialize>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}
