use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::BinaryMatrix;
use crate::state::compact_labels;

/// Co-occurrence counts between predicted (rows) and true (columns) clusters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<usize>>,
    pub row_totals: Vec<usize>,
    pub col_totals: Vec<usize>,
}

impl ContingencyTable {
    pub fn total(&self) -> usize {
        self.row_totals.iter().sum()
    }
}

/// `counts[p][t] = |{i : pred_i = p, truth_i = t}|` after compacting both labellings.
pub fn contingency(pred: &[usize], truth: &[usize]) -> Result<ContingencyTable> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    let pred = compact_labels(pred);
    let truth = compact_labels(truth);
    let kp = pred.iter().max().map_or(0, |m| m + 1);
    let kt = truth.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![vec![0usize; kt]; kp];
    for (&p, &t) in pred.iter().zip(&truth) {
        counts[p][t] += 1;
    }
    let row_totals = counts.iter().map(|r| r.iter().sum()).collect();
    let col_totals = (0..kt).map(|t| counts.iter().map(|r| r[t]).sum()).collect();
    Ok(ContingencyTable {
        counts,
        row_totals,
        col_totals,
    })
}

/// Percentage of objects whose predicted cluster is paired with their true
/// cluster under the one-to-one pairing that maximizes the number of such
/// objects. Surplus clusters on either side stay unpaired.
pub fn matched_accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = contingency(pred, truth)?;
    let n = table.total();
    if n == 0 {
        return Err(Error::invalid("cannot score empty labellings"));
    }
    let matched = max_weight_matching(&table.counts);
    Ok(100.0 * matched as f64 / n as f64)
}

/// Maximum total weight of a one-to-one pairing of rows and columns of a
/// non-negative weight matrix (Hungarian algorithm on the padded square).
pub fn max_weight_matching(weights: &[Vec<usize>]) -> usize {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    let n = rows.max(cols);
    if n == 0 {
        return 0;
    }
    let w = |i: usize, j: usize| -> i64 {
        if i < rows && j < cols {
            weights[i][j] as i64
        } else {
            0
        }
    };
    // Minimize cost = -weight; 1-based potentials as in the classic O(n^3) form.
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut owner = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = -w(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n)
        .filter(|&j| owner[j] != 0)
        .map(|j| w(owner[j] - 1, j - 1) as usize)
        .sum()
}

/// Row `k` holds the fraction of cluster `k`'s members that have each feature.
pub fn cluster_feature_frequencies(
    assignments: &[usize],
    data: &BinaryMatrix,
) -> Result<Vec<Vec<f64>>> {
    if assignments.len() != data.n_rows() {
        return Err(Error::LengthMismatch {
            left: assignments.len(),
            right: data.n_rows(),
        });
    }
    let labels = compact_labels(assignments);
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    let mut counts = vec![vec![0usize; data.n_cols()]; k];
    for (row, &c) in data.rows().zip(&labels) {
        sizes[c] += 1;
        for (acc, &x) in counts[c].iter_mut().zip(row) {
            *acc += x as usize;
        }
    }
    Ok(counts
        .into_iter()
        .zip(sizes)
        .map(|(row, size)| row.into_iter().map(|c| c as f64 / size as f64).collect())
        .collect())
}
