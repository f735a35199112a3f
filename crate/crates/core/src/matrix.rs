use crate::error::{Error, Result};

/// Dense row-major N×D matrix of binary observations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<u8>,
}

impl BinaryMatrix {
    /// Builds a matrix from row-major values, rejecting anything that is not 0 or 1.
    pub fn from_vec(n_rows: usize, n_cols: usize, values: Vec<u8>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::invalid(format!(
                "matrix must be at least 1x1, got {n_rows}x{n_cols}"
            )));
        }
        if values.len() != n_rows * n_cols {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: n_rows * n_cols,
            });
        }
        if let Some(pos) = values.iter().position(|&v| v > 1) {
            return Err(Error::format(
                format!("row {}, column {}", pos / n_cols, pos % n_cols),
                format!("value {} is not binary", values[pos]),
            ));
        }
        Ok(Self {
            n_rows,
            n_cols,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n_cols) {
            return Err(Error::format(
                format!("row {i}"),
                format!("expected {n_cols} columns, found {}", r.len()),
            ));
        }
        Self::from_vec(rows.len(), n_cols, rows.concat())
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Result<Self> {
        Self::from_vec(n_rows, n_cols, vec![0; n_rows * n_cols])
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.values[row * self.n_cols + col]
    }

    /// Sets one entry; `value` is reduced to its lowest bit.
    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.values[row * self.n_cols + col] = value & 1;
    }

    #[inline]
    pub fn flip(&mut self, row: usize, col: usize) {
        self.values[row * self.n_cols + col] ^= 1;
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[u8] {
        &self.values[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.values.chunks_exact(self.n_cols)
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.values
    }

    /// Number of ones in each column.
    pub fn column_sums(&self) -> Vec<usize> {
        let mut sums = vec![0usize; self.n_cols];
        for row in self.rows() {
            for (s, &v) in sums.iter_mut().zip(row) {
                *s += v as usize;
            }
        }
        sums
    }

    pub fn column_means(&self) -> Vec<f64> {
        let n = self.n_rows as f64;
        self.column_sums()
            .into_iter()
            .map(|s| s as f64 / n)
            .collect()
    }

    pub fn count_ones(&self) -> usize {
        self.values.iter().map(|&v| v as usize).sum()
    }

    /// A new matrix whose rows are taken from `order`, in that order.
    pub fn select_rows(&self, order: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(order.len() * self.n_cols);
        for &i in order {
            if i >= self.n_rows {
                return Err(Error::invalid(format!(
                    "row index {i} out of range for {} rows",
                    self.n_rows
                )));
            }
            values.extend_from_slice(self.row(i));
        }
        Self::from_vec(order.len(), self.n_cols, values)
    }
}
