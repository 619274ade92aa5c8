//! Plain-text histogram files.
//!
//! Both layouts share the same frame: `#` comment lines and blank lines
//! anywhere, exactly one `trials=<int>` header before the first data
//! row, then one row per occupied bin. Single-beam rows are `n,count`,
//! joint rows are `n1,n2,count`. Omitted bins are zero; listing a bin
//! twice is an error, as is anything malformed, each reported with its
//! line number. Comment lines above the header are treated as
//! provenance and handed back to the caller.
//!
//! Writers emit every bin of the stored range, zeros included, so a
//! parse of a written file reproduces the histogram exactly.

use std::collections::HashSet;
use std::fmt::Write as _;
use thiserror::Error;
use twinbeam::{CountHistogram, JointCountHistogram};

/// Largest accepted bin index in a single-beam file.
const MAX_BIN: usize = 1 << 20;
/// Largest accepted photon number per axis in a joint file: the dense
/// grid grows quadratically, so the cap is much tighter.
const MAX_JOINT_BIN: usize = 1023;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("missing trials=<count> header")]
    MissingTrials,
    #[error(transparent)]
    Invalid(#[from] twinbeam::Error),
}

fn line_err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Line { line, msg: msg.into() }
}

struct Scan<'a> {
    trials: u64,
    provenance: Vec<String>,
    rows: Vec<(usize, &'a str)>,
}

fn scan(text: &str) -> Result<Scan<'_>, FormatError> {
    let mut trials = None;
    let mut provenance = Vec::new();
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if trials.is_none() && rows.is_empty() {
                provenance.push(comment.trim_start().to_string());
            }
            continue;
        }
        if let Some(value) = line.strip_prefix("trials") {
            let value = value.trim_start();
            if let Some(number) = value.strip_prefix('=') {
                if trials.is_some() {
                    return Err(line_err(line_no, "trials header given twice"));
                }
                let parsed = number.trim().parse::<u64>().map_err(|e| {
                    line_err(line_no, format!("invalid trials count {:?}: {e}", number.trim()))
                })?;
                trials = Some(parsed);
                continue;
            }
        }
        if trials.is_none() {
            return Err(line_err(line_no, "data row before the trials=<count> header"));
        }
        rows.push((line_no, line));
    }
    let trials = trials.ok_or(FormatError::MissingTrials)?;
    Ok(Scan { trials, provenance, rows })
}

fn parse_field<T: std::str::FromStr>(
    line: usize,
    what: &str,
    field: &str,
) -> Result<T, FormatError>
where
    T::Err: std::fmt::Display,
{
    field
        .trim()
        .parse::<T>()
        .map_err(|e| line_err(line, format!("invalid {what} {:?}: {e}", field.trim())))
}

/// Parses a single-beam histogram, returning it with any provenance
/// comments found above the header.
pub fn parse_histogram(text: &str) -> Result<(CountHistogram, Vec<String>), FormatError> {
    let scan = scan(text)?;
    let mut counts: Vec<u64> = Vec::new();
    let mut seen = HashSet::new();
    for (line, row) in scan.rows {
        let mut fields = row.split(',');
        let (n_field, count_field) = match (fields.next(), fields.next(), fields.next()) {
            (Some(n), Some(c), None) => (n, c),
            _ => return Err(line_err(line, "expected exactly n,count")),
        };
        let n: usize = parse_field(line, "photon number", n_field)?;
        let count: u64 = parse_field(line, "count", count_field)?;
        if n > MAX_BIN {
            return Err(line_err(line, format!("photon number {n} exceeds limit {MAX_BIN}")));
        }
        if !seen.insert(n) {
            return Err(line_err(line, format!("photon number {n} listed twice")));
        }
        if n >= counts.len() {
            counts.resize(n + 1, 0);
        }
        counts[n] = count;
    }
    Ok((CountHistogram::new(counts, scan.trials)?, scan.provenance))
}

/// Parses a joint histogram; the grid side is one past the largest
/// photon number on either axis.
pub fn parse_joint_histogram(text: &str) -> Result<(JointCountHistogram, Vec<String>), FormatError> {
    let scan = scan(text)?;
    let mut cells: Vec<(usize, usize, u64)> = Vec::new();
    let mut seen = HashSet::new();
    let mut top = 0usize;
    for (line, row) in scan.rows {
        let mut fields = row.split(',');
        let (a, b, c) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), Some(c), None) => (a, b, c),
            _ => return Err(line_err(line, "expected exactly n1,n2,count")),
        };
        let n1: usize = parse_field(line, "signal photon number", a)?;
        let n2: usize = parse_field(line, "idler photon number", b)?;
        let count: u64 = parse_field(line, "count", c)?;
        for n in [n1, n2] {
            if n > MAX_JOINT_BIN {
                return Err(line_err(
                    line,
                    format!("photon number {n} exceeds joint limit {MAX_JOINT_BIN}"),
                ));
            }
        }
        if !seen.insert((n1, n2)) {
            return Err(line_err(line, format!("cell ({n1},{n2}) listed twice")));
        }
        top = top.max(n1).max(n2);
        cells.push((n1, n2, count));
    }
    let dim = top + 1;
    let mut counts = vec![0u64; dim * dim];
    for (n1, n2, count) in cells {
        counts[n1 * dim + n2] = count;
    }
    Ok((JointCountHistogram::from_flat(dim, counts, scan.trials)?, scan.provenance))
}

fn header(out: &mut String, comments: &[String], trials: u64) {
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let _ = writeln!(out, "trials={trials}");
}

/// Renders a single-beam histogram, bins in order and zeros included.
pub fn write_histogram(hist: &CountHistogram, comments: &[String]) -> String {
    let mut out = String::new();
    header(&mut out, comments, hist.trials());
    for (n, count) in hist.counts().iter().enumerate() {
        let _ = writeln!(out, "{n},{count}");
    }
    out
}

/// Renders a joint histogram row-major, zeros included.
pub fn write_joint_histogram(hist: &JointCountHistogram, comments: &[String]) -> String {
    let mut out = String::new();
    header(&mut out, comments, hist.trials());
    for n1 in 0..=hist.n_max() {
        for n2 in 0..=hist.n_max() {
            let _ = writeln!(out, "{n1},{n2},{}", hist.count(n1, n2));
        }
    }
    out
}
