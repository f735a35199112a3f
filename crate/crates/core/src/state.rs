use crate::error::{Error, Result};
use crate::matrix::BinaryMatrix;
use crate::model::Placement;

/// Cluster labels together with their sufficient statistics.
///
/// Clusters are always non-empty and labelled `0..K`. An object may be
/// temporarily unassigned (during a Gibbs update), in which case its row
/// contributes to no count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterState {
    labels: Vec<Option<usize>>,
    sizes: Vec<usize>,
    /// K×D row-major presence counts `N_jk`.
    counts: Vec<u32>,
    n_features: usize,
}

impl ClusterState {
    /// Builds the state for a full labelling. Labels need not be compact; they
    /// are renumbered in increasing order of their value.
    pub fn from_labels(data: &BinaryMatrix, labels: &[usize]) -> Result<Self> {
        if labels.len() != data.n_rows() {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: data.n_rows(),
            });
        }
        let compact = compact_labels(labels);
        let k = compact.iter().max().map_or(0, |m| m + 1);
        let d = data.n_cols();
        let mut state = Self {
            labels: vec![None; labels.len()],
            sizes: vec![0; k],
            counts: vec![0; k * d],
            n_features: d,
        };
        for (i, &c) in compact.iter().enumerate() {
            state.add(i, c, data);
        }
        Ok(state)
    }

    pub fn n_objects(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_clusters(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Cluster of `object`, or `None` while it is removed or out of range.
    pub fn label(&self, object: usize) -> Option<usize> {
        self.labels.get(object).copied().flatten()
    }

    /// Presence counts of cluster `k`, one per feature.
    pub fn feature_counts(&self, k: usize) -> &[u32] {
        &self.counts[k * self.n_features..(k + 1) * self.n_features]
    }

    /// The full labelling, or `None` while some object is unassigned.
    pub fn assignments(&self) -> Option<Vec<usize>> {
        self.labels.iter().copied().collect()
    }

    /// Takes object `i` out of its cluster and returns the label it had.
    /// A cluster left empty is deleted and higher labels shift down by one.
    pub fn remove_object(&mut self, i: usize, data: &BinaryMatrix) -> Result<usize> {
        let k = self
            .labels
            .get(i)
            .copied()
            .ok_or_else(|| Error::invalid(format!("object {i} out of range")))?
            .ok_or_else(|| Error::invalid(format!("object {i} is not assigned")))?;
        self.check_data(data)?;
        self.labels[i] = None;
        self.sizes[k] -= 1;
        let row = data.row(i);
        let d = self.n_features;
        for (c, &x) in self.counts[k * d..(k + 1) * d].iter_mut().zip(row) {
            *c -= x as u32;
        }
        if self.sizes[k] == 0 {
            self.sizes.remove(k);
            self.counts.drain(k * d..(k + 1) * d);
            for l in self.labels.iter_mut().flatten() {
                if *l > k {
                    *l -= 1;
                }
            }
        }
        Ok(k)
    }

    /// Places unassigned object `i` and returns its new label. `New` opens
    /// cluster `K`.
    pub fn insert_object(
        &mut self,
        i: usize,
        placement: Placement,
        data: &BinaryMatrix,
    ) -> Result<usize> {
        match self.labels.get(i) {
            None => return Err(Error::invalid(format!("object {i} out of range"))),
            Some(Some(_)) => return Err(Error::invalid(format!("object {i} is already assigned"))),
            Some(None) => {}
        }
        self.check_data(data)?;
        let k = match placement {
            Placement::Existing(k) if k < self.n_clusters() => k,
            Placement::Existing(k) => {
                return Err(Error::invalid(format!(
                    "cluster {k} out of range for {} clusters",
                    self.n_clusters()
                )))
            }
            Placement::New => {
                self.sizes.push(0);
                self.counts.resize(self.counts.len() + self.n_features, 0);
                self.n_clusters() - 1
            }
        };
        self.add(i, k, data);
        Ok(k)
    }

    /// True when sizes and counts equal a from-scratch recount over the
    /// current labels, and no cluster is empty.
    pub fn is_consistent(&self, data: &BinaryMatrix) -> bool {
        if data.n_rows() != self.n_objects() || data.n_cols() != self.n_features {
            return false;
        }
        let d = self.n_features;
        let mut sizes = vec![0usize; self.n_clusters()];
        let mut counts = vec![0u32; self.counts.len()];
        for (i, l) in self.labels.iter().enumerate() {
            if let Some(k) = *l {
                if k >= sizes.len() {
                    return false;
                }
                sizes[k] += 1;
                for (c, &x) in counts[k * d..(k + 1) * d].iter_mut().zip(data.row(i)) {
                    *c += x as u32;
                }
            }
        }
        sizes.iter().all(|&s| s > 0) && sizes == self.sizes && counts == self.counts
    }

    fn add(&mut self, i: usize, k: usize, data: &BinaryMatrix) {
        let d = self.n_features;
        self.labels[i] = Some(k);
        self.sizes[k] += 1;
        for (c, &x) in self.counts[k * d..(k + 1) * d].iter_mut().zip(data.row(i)) {
            *c += x as u32;
        }
    }

    fn check_data(&self, data: &BinaryMatrix) -> Result<()> {
        if data.n_rows() != self.n_objects() || data.n_cols() != self.n_features {
            return Err(Error::invalid(format!(
                "data is {}x{} but state covers {}x{}",
                data.n_rows(),
                data.n_cols(),
                self.n_objects(),
                self.n_features
            )));
        }
        Ok(())
    }
}

/// Renumbers labels to `0..K` preserving the order of their values.
pub fn compact_labels(labels: &[usize]) -> Vec<usize> {
    let mut distinct: Vec<usize> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    labels
        .iter()
        .map(|l| distinct.binary_search(l).expect("label present"))
        .collect()
}
