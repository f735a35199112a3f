//! Text formats for matrices, labels and reports.
//!
//! * dense: CSV of `0`/`1`, optional header row, no header on output
//! * sparse: `"N D"` header, then one 0-based `"row col"` pair per one-entry
//! * labels: one non-negative integer per line
//! * reports: JSON

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baseline::GapResult;
use crate::error::{Error, Result};
use crate::matrix::BinaryMatrix;
use crate::model::PriorPolicy;
use crate::sampler::{AnnealingSchedule, RunReport};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

/// Non-empty lines with their 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn fields(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Dense,
    Sparse,
}

/// A file whose first non-empty line is exactly two whitespace-separated
/// integers (and no comma) is sparse; anything else is dense.
pub fn detect_format(text: &str) -> MatrixFormat {
    match lines(text).next() {
        Some((_, first)) if !first.contains(',') => {
            let parts: Vec<&str> = first.split_whitespace().collect();
            if parts.len() == 2 && parts.iter().all(|p| p.parse::<usize>().is_ok()) {
                MatrixFormat::Sparse
            } else {
                MatrixFormat::Dense
            }
        }
        _ => MatrixFormat::Dense,
    }
}

pub fn parse_matrix(text: &str) -> Result<BinaryMatrix> {
    match detect_format(text) {
        MatrixFormat::Dense => parse_dense(text),
        MatrixFormat::Sparse => parse_sparse(text),
    }
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<BinaryMatrix> {
    parse_matrix(&read(path.as_ref())?)
}

/// Dense CSV. The first row is taken as a header when one of its fields is
/// not an integer.
pub fn parse_dense(text: &str) -> Result<BinaryMatrix> {
    let mut body = lines(text).peekable();
    if let Some((_, first)) = body.peek() {
        if fields(first).iter().any(|f| f.parse::<i64>().is_err()) {
            body.next();
        }
    }
    let mut width = None;
    let mut values = Vec::new();
    let mut n_rows = 0;
    for (line_no, line) in body {
        let row = fields(line);
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::format(
                    format!("line {line_no}"),
                    format!("expected {w} columns, found {}", row.len()),
                ))
            }
            _ => {}
        }
        for (col, f) in row.iter().enumerate() {
            let v = match *f {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(Error::format(
                        format!("line {line_no} (row {n_rows}), column {col}"),
                        format!("value {other:?} is not 0 or 1"),
                    ))
                }
            };
            values.push(v);
        }
        n_rows += 1;
    }
    let width = width.ok_or_else(|| Error::format("input", "no data rows"))?;
    BinaryMatrix::from_vec(n_rows, width, values)
}

pub fn write_dense(m: &BinaryMatrix) -> String {
    let mut out = String::with_capacity(m.n_rows() * m.n_cols() * 2);
    for row in m.rows() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push(if *v == 1 { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

pub fn load_dense(path: impl AsRef<Path>) -> Result<BinaryMatrix> {
    parse_dense(&read(path.as_ref())?)
}

pub fn save_dense(path: impl AsRef<Path>, m: &BinaryMatrix) -> Result<()> {
    Ok(fs::write(path, write_dense(m))?)
}

fn parse_header(line_no: usize, line: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    match parts.as_slice() {
        [n, d] => match (n.parse(), d.parse()) {
            (Ok(n), Ok(d)) => Ok((n, d)),
            _ => Err(Error::format(
                format!("line {line_no}"),
                "header must be \"N D\"",
            )),
        },
        _ => Err(Error::format(
            format!("line {line_no}"),
            "header must be \"N D\"",
        )),
    }
}

pub fn parse_sparse(text: &str) -> Result<BinaryMatrix> {
    let mut body = lines(text);
    let (line_no, header) = body
        .next()
        .ok_or_else(|| Error::format("input", "missing \"N D\" header"))?;
    let (n, d) = parse_header(line_no, header)?;
    let mut m = BinaryMatrix::zeros(n, d)?;
    for (line_no, line) in body {
        let loc = || format!("line {line_no}");
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [r, c] = parts.as_slice() else {
            return Err(Error::format(loc(), "expected \"row col\""));
        };
        let (r, c): (usize, usize) = match (r.parse(), c.parse()) {
            (Ok(r), Ok(c)) => (r, c),
            _ => {
                return Err(Error::format(
                    loc(),
                    "indices must be non-negative integers",
                ))
            }
        };
        if r >= n || c >= d {
            return Err(Error::format(
                loc(),
                format!("index ({r}, {c}) out of range for {n}x{d}"),
            ));
        }
        if m.get(r, c) == 1 {
            return Err(Error::format(loc(), format!("duplicate entry ({r}, {c})")));
        }
        m.set(r, c, 1);
    }
    Ok(m)
}

pub fn write_sparse(m: &BinaryMatrix) -> String {
    let mut out = format!("{} {}\n", m.n_rows(), m.n_cols());
    for (i, row) in m.rows().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v == 1 {
                let _ = writeln!(out, "{i} {j}");
            }
        }
    }
    out
}

pub fn load_sparse(path: impl AsRef<Path>) -> Result<BinaryMatrix> {
    parse_sparse(&read(path.as_ref())?)
}

pub fn save_sparse(path: impl AsRef<Path>, m: &BinaryMatrix) -> Result<()> {
    Ok(fs::write(path, write_sparse(m))?)
}

pub fn parse_labels(text: &str) -> Result<Vec<usize>> {
    lines(text)
        .map(|(line_no, l)| {
            l.parse::<usize>().map_err(|_| {
                Error::format(
                    format!("line {line_no}"),
                    format!("label {l:?} is not a non-negative integer"),
                )
            })
        })
        .collect()
}

pub fn write_labels(labels: &[usize]) -> String {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        let _ = writeln!(out, "{l}");
    }
    out
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    parse_labels(&read(path.as_ref())?)
}

pub fn save_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    Ok(fs::write(path, write_labels(labels))?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperparamsEcho {
    pub alpha: f64,
    pub a_policy: PriorPolicy,
    pub b_policy: PriorPolicy,
}

/// Everything needed to reproduce and inspect one clustering run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub assignments: Vec<usize>,
    pub n_clusters: usize,
    pub seed: u64,
    pub k_init: usize,
    pub hyperparams: HyperparamsEcho,
    pub schedule: AnnealingSchedule,
    pub score_trace: Vec<f64>,
    pub k_trace: Vec<usize>,
    pub temp_trace: Vec<f64>,
    /// K×D fraction of members of each cluster carrying each feature.
    pub feature_frequencies: Vec<Vec<f64>>,
}

impl ReportFile {
    pub fn new(
        run: RunReport,
        a_policy: PriorPolicy,
        b_policy: PriorPolicy,
        feature_frequencies: Vec<Vec<f64>>,
    ) -> Self {
        Self {
            assignments: run.assignments,
            n_clusters: run.n_clusters,
            seed: run.seed,
            k_init: run.config.k_init,
            hyperparams: HyperparamsEcho {
                alpha: run.config.alpha,
                a_policy,
                b_policy,
            },
            schedule: run.config.schedule,
            score_trace: run.score_trace,
            k_trace: run.k_trace,
            temp_trace: run.temp_trace,
            feature_frequencies,
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn save_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    Ok(fs::write(path, to_json(value)?)?)
}

pub fn parse_report(text: &str) -> Result<ReportFile> {
    Ok(serde_json::from_str(text)?)
}

pub fn load_report(path: impl AsRef<Path>) -> Result<ReportFile> {
    parse_report(&read(path.as_ref())?)
}

/// JSON form of a [`GapResult`]; non-finite curve entries become `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReportFile {
    pub chosen_k: usize,
    pub k_max: usize,
    pub seed: u64,
    pub n_refs: usize,
    pub gap_curve: Vec<Option<f64>>,
    pub sk_curve: Vec<Option<f64>>,
    pub dispersion_curve: Vec<Option<f64>>,
    pub reference_curve: Vec<Option<f64>>,
    pub labels: Vec<usize>,
}

impl GapReportFile {
    pub fn new(result: &GapResult, seed: u64, n_refs: usize) -> Self {
        let finite = |v: &[f64]| v.iter().map(|x| x.is_finite().then_some(*x)).collect();
        Self {
            chosen_k: result.chosen_k,
            k_max: result.k_max(),
            seed,
            n_refs,
            gap_curve: finite(&result.gap_curve),
            sk_curve: finite(&result.sk_curve),
            dispersion_curve: finite(&result.dispersion_curve),
            reference_curve: finite(&result.reference_curve),
            labels: result.labels.clone(),
        }
    }
}

/// `cluster,size,f0,f1,...` header followed by one row per cluster.
pub fn write_frequencies_csv(freqs: &[Vec<f64>], sizes: &[usize]) -> String {
    let d = freqs.first().map_or(0, Vec::len);
    let mut out = String::from("cluster,size");
    for j in 0..d {
        let _ = write!(out, ",f{j}");
    }
    out.push('\n');
    for (k, (row, size)) in freqs.iter().zip(sizes).enumerate() {
        let _ = write!(out, "{k},{size}");
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Document-term counts: dense CSV of non-negative integers (optional header),
/// or a `"N V"` header followed by `"row col count"` triples.
pub fn parse_counts(text: &str) -> Result<Vec<Vec<u32>>> {
    if detect_format(text) == MatrixFormat::Sparse {
        let mut body = lines(text);
        let (line_no, header) = body.next().expect("detected header");
        let (n, v) = parse_header(line_no, header)?;
        let mut counts = vec![vec![0u32; v]; n];
        for (line_no, line) in body {
            let loc = || format!("line {line_no}");
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [r, c, x] = parts.as_slice() else {
                return Err(Error::format(loc(), "expected \"row col count\""));
            };
            let (r, c, x): (usize, usize, u32) = match (r.parse(), c.parse(), x.parse()) {
                (Ok(r), Ok(c), Ok(x)) => (r, c, x),
                _ => return Err(Error::format(loc(), "expected non-negative integers")),
            };
            if r >= n || c >= v {
                return Err(Error::format(
                    loc(),
                    format!("index ({r}, {c}) out of range"),
                ));
            }
            counts[r][c] += x;
        }
        return Ok(counts);
    }
    let mut body = lines(text).peekable();
    if let Some((_, first)) = body.peek() {
        if fields(first).iter().any(|f| f.parse::<i64>().is_err()) {
            body.next();
        }
    }
    let mut rows: Vec<Vec<u32>> = Vec::new();
    for (line_no, line) in body {
        let row = fields(line)
            .iter()
            .enumerate()
            .map(|(col, f)| {
                f.parse::<u32>().map_err(|_| {
                    Error::format(
                        format!("line {line_no}, column {col}"),
                        format!("count {f:?} is not a non-negative integer"),
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::format(
                    format!("line {line_no}"),
                    format!("expected {} columns, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

fn is_missing(field: &str) -> bool {
    matches!(field, "" | "NA" | "na" | "NaN" | "nan" | "?")
}

/// Real-valued CSV where empty, `NA`, `NaN` or `?` mark a missing value.
pub fn parse_real_matrix(text: &str) -> Result<Vec<Vec<Option<f64>>>> {
    let mut body = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();
    if let Some((_, first)) = body.peek() {
        if fields(first)
            .iter()
            .any(|f| !is_missing(f) && f.parse::<f64>().is_err())
        {
            body.next();
        }
    }
    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    for (line_no, line) in body {
        let row = fields(line)
            .iter()
            .enumerate()
            .map(|(col, f)| {
                if is_missing(f) {
                    Ok(None)
                } else {
                    f.parse::<f64>().map(Some).map_err(|_| {
                        Error::format(
                            format!("line {line_no}, column {col}"),
                            format!("value {f:?} is not a number"),
                        )
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::format(
                    format!("line {line_no}"),
                    format!("expected {} columns, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_text(path: impl AsRef<Path>) -> Result<String> {
    read(path.as_ref())
}
