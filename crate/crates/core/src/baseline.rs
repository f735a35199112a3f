//! k-means on binary rows, with the gap statistic choosing the number of
//! clusters. This is the comparison method, not the main clustering model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::BinaryMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    /// k×D cluster means, each entry in `[0, 1]`.
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squared distances of the returned solution.
    pub inertia: f64,
    /// Objective after every centroid update of the winning restart.
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansOptions {
    pub n_restarts: usize,
    pub max_iters: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            n_restarts: 5,
            max_iters: 100,
        }
    }
}

/// Column indices of the ones in every row; distances to a centroid only need these.
struct SparseRows {
    ones: Vec<Vec<u32>>,
    n_cols: usize,
}

impl SparseRows {
    fn new(data: &BinaryMatrix) -> Self {
        let ones = data
            .rows()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &v)| v == 1)
                    .map(|(j, _)| j as u32)
                    .collect()
            })
            .collect();
        Self {
            ones,
            n_cols: data.n_cols(),
        }
    }

    fn len(&self) -> usize {
        self.ones.len()
    }

    /// `||x - c||² = Σ_j c_j² + Σ_{j: x_j = 1} (1 - 2 c_j)`
    #[inline]
    fn sq_dist(&self, i: usize, centroid: &[f64], centroid_sq: f64) -> f64 {
        let mut d = centroid_sq;
        for &j in &self.ones[i] {
            d += 1.0 - 2.0 * centroid[j as usize];
        }
        d.max(0.0)
    }

    fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut row = vec![0.0; self.n_cols];
        for &j in &self.ones[i] {
            row[j as usize] = 1.0;
        }
        row
    }
}

fn sq_norm(c: &[f64]) -> f64 {
    c.iter().map(|v| v * v).sum()
}

/// Lloyd's algorithm with k-means++ seeding, best of `n_restarts` by inertia.
pub fn kmeans_binary<R: Rng + ?Sized>(
    data: &BinaryMatrix,
    k: usize,
    options: &KMeansOptions,
    rng: &mut R,
) -> Result<KMeansResult> {
    if k == 0 || k > data.n_rows() {
        return Err(Error::invalid(format!(
            "k must be in 1..={}, got {k}",
            data.n_rows()
        )));
    }
    if options.n_restarts == 0 || options.max_iters == 0 {
        return Err(Error::invalid("restarts and iterations must be positive"));
    }
    let rows = SparseRows::new(data);
    Ok(kmeans_sparse(&rows, k, options, rng))
}

fn kmeans_sparse<R: Rng + ?Sized>(
    rows: &SparseRows,
    k: usize,
    options: &KMeansOptions,
    rng: &mut R,
) -> KMeansResult {
    let mut best: Option<KMeansResult> = None;
    for _ in 0..options.n_restarts {
        let candidate = lloyd(rows, k, options.max_iters, rng);
        if best.as_ref().is_none_or(|b| candidate.inertia < b.inertia) {
            best = Some(candidate);
        }
    }
    best.expect("at least one restart")
}

fn seed_plus_plus<R: Rng + ?Sized>(rows: &SparseRows, k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut centroids = vec![rows.dense_row(rng.gen_range(0..n))];
    let mut nearest: Vec<f64> = {
        let c = &centroids[0];
        let sq = sq_norm(c);
        (0..n).map(|i| rows.sq_dist(i, c, sq)).collect()
    };
    while centroids.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if u < d {
                    chosen = i;
                    break;
                }
                u -= d;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        let c = rows.dense_row(pick);
        let sq = sq_norm(&c);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(rows.sq_dist(i, &c, sq));
        }
        centroids.push(c);
    }
    centroids
}

fn assign(
    rows: &SparseRows,
    centroids: &[Vec<f64>],
    labels: &mut [usize],
    dists: &mut [f64],
) -> bool {
    let norms: Vec<f64> = centroids.iter().map(|c| sq_norm(c)).collect();
    let mut changed = false;
    for i in 0..rows.len() {
        let (mut best_k, mut best_d) = (0, f64::INFINITY);
        for (c, (centroid, &sq)) in centroids.iter().zip(&norms).enumerate() {
            let d = rows.sq_dist(i, centroid, sq);
            if d < best_d {
                best_d = d;
                best_k = c;
            }
        }
        if labels[i] != best_k {
            labels[i] = best_k;
            changed = true;
        }
        dists[i] = best_d;
    }
    changed
}

fn lloyd<R: Rng + ?Sized>(
    rows: &SparseRows,
    k: usize,
    max_iters: usize,
    rng: &mut R,
) -> KMeansResult {
    let n = rows.len();
    let d = rows.n_cols;
    let mut centroids = seed_plus_plus(rows, k, rng);
    let mut labels = vec![usize::MAX; n];
    let mut dists = vec![0.0; n];
    let mut trace = Vec::new();
    for _ in 0..max_iters {
        let changed = assign(rows, &centroids, &mut labels, &mut dists);
        if !changed && !trace.is_empty() {
            break;
        }
        // centroid update
        let mut sums = vec![vec![0.0; d]; k];
        let mut sizes = vec![0usize; k];
        for (i, &l) in labels.iter().enumerate() {
            sizes[l] += 1;
            for &j in &rows.ones[i] {
                sums[l][j as usize] += 1.0;
            }
        }
        for (c, (sum, &size)) in sums.iter_mut().zip(&sizes).enumerate() {
            if size > 0 {
                for v in sum.iter_mut() {
                    *v /= size as f64;
                }
                centroids[c] = std::mem::take(sum);
            }
        }
        let objective = inertia(rows, &centroids, &labels);
        trace.push(objective);
        // empty clusters move onto the worst-served point
        for c in 0..k {
            if sizes[c] == 0 {
                let norms: Vec<f64> = centroids.iter().map(|c| sq_norm(c)).collect();
                let far = (0..n)
                    .map(|i| (i, rows.sq_dist(i, &centroids[labels[i]], norms[labels[i]])))
                    .fold(
                        (0, f64::NEG_INFINITY),
                        |acc, x| if x.1 > acc.1 { x } else { acc },
                    )
                    .0;
                centroids[c] = rows.dense_row(far);
            }
        }
    }
    // Final labels/inertia must describe the returned centroids.
    assign(rows, &centroids, &mut labels, &mut dists);
    let inertia = inertia(rows, &centroids, &labels);
    KMeansResult {
        labels,
        centroids,
        inertia,
        objective_trace: trace,
    }
}

fn inertia(rows: &SparseRows, centroids: &[Vec<f64>], labels: &[usize]) -> f64 {
    let norms: Vec<f64> = centroids.iter().map(|c| sq_norm(c)).collect();
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| rows.sq_dist(i, &centroids[l], norms[l]))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapOptions {
    pub k_max: usize,
    pub n_refs: usize,
    pub kmeans: KMeansOptions,
}

impl Default for GapOptions {
    fn default() -> Self {
        Self {
            k_max: 15,
            n_refs: 10,
            kmeans: KMeansOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapResult {
    pub chosen_k: usize,
    /// `Gap(k)` for `k = 1..=K_max`; `+∞` where the data fit perfectly.
    pub gap_curve: Vec<f64>,
    pub sk_curve: Vec<f64>,
    /// `log W_k` of the data; `-∞` where `W_k = 0`.
    pub dispersion_curve: Vec<f64>,
    /// Mean `log W_k` over the reference sets.
    pub reference_curve: Vec<f64>,
    /// k-means labels of the data at `chosen_k`.
    pub labels: Vec<usize>,
}

impl GapResult {
    pub fn k_max(&self) -> usize {
        self.gap_curve.len()
    }
}

// Reference sets that collapse to identical rows would give log 0.
const MIN_REFERENCE_DISPERSION: f64 = 1e-12;

/// Gap statistic with column-wise Bernoulli reference data.
///
/// `Gap(k) = mean_b log W_k(ref_b) - log W_k(data)` and
/// `s_k = sd_b(log W_k(ref_b)) · sqrt(1 + 1/B)`; the chosen k is the smallest
/// with `Gap(k) ≥ Gap(k+1) - s_{k+1}`. Values of k where the data are
/// clustered with zero dispersion take no part in that rule; if the rule
/// picks nothing, the smallest such k is returned, else `K_max`.
///
/// `K_max` is capped at the number of rows.
pub fn gap_statistic<R: Rng + ?Sized>(
    data: &BinaryMatrix,
    options: &GapOptions,
    rng: &mut R,
) -> Result<GapResult> {
    if options.k_max == 0 || options.n_refs == 0 {
        return Err(Error::invalid("k_max and n_refs must be at least 1"));
    }
    if options.kmeans.n_restarts == 0 || options.kmeans.max_iters == 0 {
        return Err(Error::invalid("restarts and iterations must be positive"));
    }
    let k_max = options.k_max.min(data.n_rows());
    let means = data.column_means();

    let mut datasets = vec![SparseRows::new(data)];
    for _ in 0..options.n_refs {
        let mut values = Vec::with_capacity(data.n_rows() * data.n_cols());
        for _ in 0..data.n_rows() {
            values.extend(means.iter().map(|&p| u8::from(rng.gen::<f64>() < p)));
        }
        let reference = BinaryMatrix::from_vec(data.n_rows(), data.n_cols(), values)?;
        datasets.push(SparseRows::new(&reference));
    }

    // Seeds are drawn up front so the result does not depend on execution order.
    let jobs: Vec<(usize, usize, u64)> = (0..datasets.len())
        .flat_map(|b| (1..=k_max).map(move |k| (b, k)))
        .map(|(b, k)| (b, k, rng.gen()))
        .collect();
    let run_job = |&(b, k, seed): &(usize, usize, u64)| {
        let mut job_rng = ChaCha8Rng::seed_from_u64(seed);
        kmeans_sparse(&datasets[b], k, &options.kmeans, &mut job_rng)
    };
    #[cfg(feature = "parallel")]
    let results: Vec<KMeansResult> = {
        use rayon::prelude::*;
        jobs.par_iter().map(run_job).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<KMeansResult> = jobs.iter().map(run_job).collect();

    let at = |b: usize, k: usize| &results[b * k_max + (k - 1)];
    let b_count = options.n_refs as f64;
    let mut gap_curve = Vec::with_capacity(k_max);
    let mut sk_curve = Vec::with_capacity(k_max);
    let mut dispersion_curve = Vec::with_capacity(k_max);
    let mut reference_curve = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let w = at(0, k).inertia;
        let log_w = if w > 0.0 { w.ln() } else { f64::NEG_INFINITY };
        let ref_logs: Vec<f64> = (1..=options.n_refs)
            .map(|b| at(b, k).inertia.max(MIN_REFERENCE_DISPERSION).ln())
            .collect();
        let mean = ref_logs.iter().sum::<f64>() / b_count;
        let var = ref_logs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / b_count;
        dispersion_curve.push(log_w);
        reference_curve.push(mean);
        gap_curve.push(mean - log_w);
        sk_curve.push(var.sqrt() * (1.0 + 1.0 / b_count).sqrt());
    }

    let perfect = |k: usize| dispersion_curve[k - 1] == f64::NEG_INFINITY;
    let chosen_k = (1..k_max)
        .find(|&k| !perfect(k) && !perfect(k + 1) && gap_curve[k - 1] >= gap_curve[k] - sk_curve[k])
        .or_else(|| (1..=k_max).find(|&k| perfect(k)))
        .unwrap_or(k_max);

    Ok(GapResult {
        chosen_k,
        labels: at(0, chosen_k).labels.clone(),
        gap_curve,
        sk_curve,
        dispersion_curve,
        reference_curve,
    })
}
