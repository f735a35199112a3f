//! Turning raw count and measurement tables into binary matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::BinaryMatrix;

/// Vocabulary filter for document-term counts: a term is kept when some
/// document uses it at least `min_peak_count` times and at least
/// `min_doc_freq` documents contain it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermFilter {
    pub min_peak_count: u32,
    pub min_doc_freq: usize,
}

impl Default for TermFilter {
    /// "more than once in a document" and "in more than 10 documents".
    fn default() -> Self {
        Self {
            min_peak_count: 2,
            min_doc_freq: 11,
        }
    }
}

impl TermFilter {
    /// Presence matrix over the kept terms, and the kept column indices.
    pub fn apply(&self, counts: &[Vec<u32>]) -> Result<(BinaryMatrix, Vec<usize>)> {
        let v = counts.first().map_or(0, Vec::len);
        if counts.iter().any(|r| r.len() != v) {
            return Err(Error::invalid("count rows have different lengths"));
        }
        let kept: Vec<usize> = (0..v)
            .filter(|&j| {
                let df = counts.iter().filter(|r| r[j] >= 1).count();
                let peak = counts.iter().map(|r| r[j]).max().unwrap_or(0);
                peak >= self.min_peak_count && df >= self.min_doc_freq
            })
            .collect();
        if kept.is_empty() {
            return Err(Error::invalid("no term passes the filter"));
        }
        let values = counts
            .iter()
            .flat_map(|r| kept.iter().map(move |&j| u8::from(r[j] >= 1)))
            .collect();
        let m = BinaryMatrix::from_vec(counts.len(), kept.len(), values)?;
        Ok((m, kept))
    }
}

pub fn term_filter(counts: &[Vec<u32>]) -> Result<(BinaryMatrix, Vec<usize>)> {
    TermFilter::default().apply(counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// 1 when the value is strictly below the threshold.
    Below,
    /// 1 when the value is strictly above the threshold.
    Above,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Binarized {
    /// Entries of missing cells are 0.
    pub matrix: BinaryMatrix,
    pub thresholds: Vec<f64>,
    /// Rows holding at least one missing value; callers normally drop them.
    pub rows_with_missing: Vec<usize>,
}

impl Binarized {
    /// The matrix without the flagged rows.
    pub fn complete_rows(&self) -> Result<BinaryMatrix> {
        let keep: Vec<usize> = (0..self.matrix.n_rows())
            .filter(|i| self.rows_with_missing.binary_search(i).is_err())
            .collect();
        if keep.is_empty() {
            return Err(Error::invalid("every row has a missing value"));
        }
        self.matrix.select_rows(&keep)
    }
}

/// `pct`-th percentile of sorted values, interpolating linearly between
/// order statistics at position `(n - 1) · pct / 100`.
pub fn percentile(sorted: &[f64], pct: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * pct / 100.0;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Thresholds every column at its own `pct`-th percentile.
pub fn percentile_binarize(
    values: &[Vec<Option<f64>>],
    pct: f64,
    direction: Direction,
) -> Result<Binarized> {
    if !(pct > 0.0 && pct < 100.0) {
        return Err(Error::invalid(format!(
            "percentile must be in (0, 100), got {pct}"
        )));
    }
    let d = values.first().map_or(0, Vec::len);
    if values.is_empty() || d == 0 {
        return Err(Error::invalid("empty input"));
    }
    if values.iter().any(|r| r.len() != d) {
        return Err(Error::invalid("rows have different lengths"));
    }
    let mut thresholds = Vec::with_capacity(d);
    for j in 0..d {
        let mut col: Vec<f64> = values.iter().filter_map(|r| r[j]).collect();
        if col.len() < 2 {
            return Err(Error::invalid(format!(
                "column {j} has fewer than 2 non-missing values"
            )));
        }
        col.sort_by(f64::total_cmp);
        thresholds.push(percentile(&col, pct));
    }
    let mut out = Vec::with_capacity(values.len() * d);
    let mut rows_with_missing = Vec::new();
    for (i, row) in values.iter().enumerate() {
        if row.iter().any(Option::is_none) {
            rows_with_missing.push(i);
        }
        for (cell, &t) in row.iter().zip(&thresholds) {
            let hit = match (cell, direction) {
                (Some(v), Direction::Below) => *v < t,
                (Some(v), Direction::Above) => *v > t,
                (None, _) => false,
            };
            out.push(u8::from(hit));
        }
    }
    Ok(Binarized {
        matrix: BinaryMatrix::from_vec(values.len(), d, out)?,
        thresholds,
        rows_with_missing,
    })
}
