//! Synthetic binary benchmarks with planted clusters.
//!
//! Rows are split into `k_true` random groups; each group switches on its own
//! randomly chosen block of "signal" columns; finally an exact number of
//! cells, drawn without replacement, is flipped as noise.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::BinaryMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_objects: usize,
    pub n_features: usize,
    /// Percent of features set to 1 in every member of a cluster.
    pub info_pct: f64,
    /// Percent of all cells flipped after the signal is planted.
    pub noise_pct: f64,
    pub k_true: usize,
}

impl SyntheticSpec {
    pub fn new(n_objects: usize, n_features: usize, info_pct: f64, noise_pct: f64) -> Self {
        Self {
            n_objects,
            n_features,
            info_pct,
            noise_pct,
            k_true: 5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_objects == 0 || self.n_features == 0 {
            return Err(Error::invalid("matrix dimensions must be positive"));
        }
        if !(0.0..=100.0).contains(&self.info_pct) || !(0.0..=100.0).contains(&self.noise_pct) {
            return Err(Error::invalid(format!(
                "percentages must lie in [0, 100], got info={} noise={}",
                self.info_pct, self.noise_pct
            )));
        }
        if self.k_true == 0 || self.k_true > self.n_objects {
            return Err(Error::invalid(format!(
                "true cluster count must be in 1..={}, got {}",
                self.n_objects, self.k_true
            )));
        }
        Ok(())
    }

    /// `⌈Sd·D/100⌉`
    pub fn signal_columns(&self) -> usize {
        // Round off float noise before the ceiling so 10% of 500 is 50, not 51.
        let raw = self.info_pct * self.n_features as f64 / 100.0;
        ((raw * 1e9).round() / 1e9).ceil() as usize
    }

    /// `⌊Sn·N·D/100⌋`
    pub fn noise_cells(&self) -> usize {
        let raw = self.noise_pct * (self.n_objects * self.n_features) as f64 / 100.0;
        ((raw * 1e9).round() / 1e9).floor() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub data: BinaryMatrix,
    pub labels: Vec<usize>,
    /// The planted matrix before noise.
    pub clean: BinaryMatrix,
}

pub fn generate<R: Rng + ?Sized>(spec: &SyntheticSpec, rng: &mut R) -> Result<SyntheticData> {
    spec.validate()?;
    let (n, d, k) = (spec.n_objects, spec.n_features, spec.k_true);

    let labels = loop {
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let mut used = vec![false; k];
        for &l in &labels {
            used[l] = true;
        }
        if used.iter().all(|&u| u) {
            break labels;
        }
    };

    let mut clean = BinaryMatrix::zeros(n, d)?;
    let m = spec.signal_columns().min(d);
    for cluster in 0..k {
        let columns = index::sample(rng, d, m);
        for (i, _) in labels.iter().enumerate().filter(|(_, &l)| l == cluster) {
            for j in columns.iter() {
                clean.set(i, j, 1);
            }
        }
    }

    let mut data = clean.clone();
    for cell in index::sample(rng, n * d, spec.noise_cells().min(n * d)).iter() {
        data.flip(cell / d, cell % d);
    }
    Ok(SyntheticData {
        data,
        labels,
        clean,
    })
}
