//! Gibbs sampling over cluster labels with a simulated-annealing schedule.
//!
//! Each sweep visits objects in index order, removes the object from its
//! cluster, draws a new placement from the tempered conditional and puts it
//! back. The temperature is multiplied by `lambda` after every `block` sweeps,
//! so the chain settles on a single high-scoring partition instead of
//! wandering across relabelled copies of the posterior.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::BinaryMatrix;
use crate::model::{
    joint_log_score, normalize_log_weights, tempered_log_weights, Hyperparams, Placement,
};
use crate::state::ClusterState;

pub const DEFAULT_K_INIT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealingSchedule {
    pub t_init: f64,
    pub lambda: f64,
    /// Sweeps between two cooling steps.
    pub block: usize,
    pub n_sweeps: usize,
}

impl Default for AnnealingSchedule {
    fn default() -> Self {
        Self {
            t_init: 1.0,
            lambda: 0.9,
            block: 20,
            n_sweeps: 200,
        }
    }
}

impl AnnealingSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_init > 0.0 && self.t_init.is_finite()) {
            return Err(Error::invalid(format!(
                "initial temperature must be positive, got {}",
                self.t_init
            )));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::invalid(format!(
                "cooling factor must lie in (0, 1), got {}",
                self.lambda
            )));
        }
        if self.block == 0 || self.n_sweeps == 0 {
            return Err(Error::invalid(
                "block size and sweep count must be positive",
            ));
        }
        Ok(())
    }

    /// Temperature in force once sweep `sweep` (0-based) has finished,
    /// i.e. `t_init · λ^⌊(sweep + 1) / block⌋`.
    pub fn temperature_after(&self, sweep: usize) -> f64 {
        let blocks = (sweep + 1) / self.block;
        self.t_init * self.lambda.powi(blocks as i32)
    }
}

/// Settings a run was produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub alpha: f64,
    pub k_init: usize,
    pub schedule: AnnealingSchedule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub assignments: Vec<usize>,
    pub n_clusters: usize,
    /// Joint log score after each sweep.
    pub score_trace: Vec<f64>,
    pub k_trace: Vec<usize>,
    pub temp_trace: Vec<f64>,
    pub seed: u64,
    pub config: RunConfig,
}

/// Uniformly random labels in `0..k_init`; labels that drew no object are
/// compacted away.
pub fn init_state<R: Rng + ?Sized>(
    data: &BinaryMatrix,
    k_init: usize,
    rng: &mut R,
) -> Result<ClusterState> {
    if k_init == 0 || k_init > data.n_rows() {
        return Err(Error::invalid(format!(
            "initial cluster count must be in 1..={}, got {k_init}",
            data.n_rows()
        )));
    }
    let labels: Vec<usize> = (0..data.n_rows())
        .map(|_| rng.gen_range(0..k_init))
        .collect();
    ClusterState::from_labels(data, &labels)
}

/// Draws an index from a normalized probability vector.
///
/// Falls back to the last option with positive mass when rounding leaves the
/// uniform draw past the cumulative total.
pub fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// One pass over all objects in index order at temperature `temperature`.
pub fn gibbs_sweep<R: Rng + ?Sized>(
    state: &mut ClusterState,
    data: &BinaryMatrix,
    hyper: &Hyperparams,
    temperature: f64,
    rng: &mut R,
) -> Result<()> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::invalid(format!(
            "temperature must be positive and finite, got {temperature}"
        )));
    }
    if hyper.n_features() != data.n_cols() {
        return Err(Error::LengthMismatch {
            left: hyper.n_features(),
            right: data.n_cols(),
        });
    }
    let mut weights = Vec::with_capacity(state.n_clusters() + 1);
    for i in 0..data.n_rows() {
        state.remove_object(i, data)?;
        tempered_log_weights(data.row(i), state, hyper, temperature, &mut weights);
        normalize_log_weights(&mut weights);
        let pick = sample_categorical(&weights, rng);
        let placement = if pick == state.n_clusters() {
            Placement::New
        } else {
            Placement::Existing(pick)
        };
        state.insert_object(i, placement, data)?;
    }
    Ok(())
}

/// Per-sweep traces collected by [`anneal`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Traces {
    pub score: Vec<f64>,
    pub k: Vec<usize>,
    pub temperature: Vec<f64>,
}

/// Runs the full schedule from an existing state.
pub fn anneal<R: Rng + ?Sized>(
    state: &mut ClusterState,
    data: &BinaryMatrix,
    hyper: &Hyperparams,
    schedule: &AnnealingSchedule,
    rng: &mut R,
) -> Result<Traces> {
    schedule.validate()?;
    let mut traces = Traces {
        score: Vec::with_capacity(schedule.n_sweeps),
        k: Vec::with_capacity(schedule.n_sweeps),
        temperature: Vec::with_capacity(schedule.n_sweeps),
    };
    let mut temperature = schedule.t_init;
    for n in 1..=schedule.n_sweeps {
        gibbs_sweep(state, data, hyper, temperature, rng)?;
        if n % schedule.block == 0 {
            temperature *= schedule.lambda;
        }
        traces.score.push(joint_log_score(state, hyper));
        traces.k.push(state.n_clusters());
        traces.temperature.push(temperature);
    }
    Ok(traces)
}

/// Random initialization followed by the annealing schedule, driven by a
/// ChaCha8 generator seeded with `seed`.
///
/// `k_init` is capped at the number of objects.
pub fn run(
    data: &BinaryMatrix,
    hyper: &Hyperparams,
    schedule: &AnnealingSchedule,
    k_init: usize,
    seed: u64,
) -> Result<RunReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k_init = k_init.min(data.n_rows());
    schedule.validate()?;
    let mut state = init_state(data, k_init, &mut rng)?;
    let traces = anneal(&mut state, data, hyper, schedule, &mut rng)?;
    Ok(RunReport {
        assignments: state
            .assignments()
            .expect("all objects assigned after a sweep"),
        n_clusters: state.n_clusters(),
        score_trace: traces.score,
        k_trace: traces.k,
        temp_trace: traces.temperature,
        seed,
        config: RunConfig {
            alpha: hyper.alpha(),
            k_init,
            schedule: *schedule,
        },
    })
}
