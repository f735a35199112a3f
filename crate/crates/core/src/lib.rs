//! Clustering of high-dimensional binary data with a Dirichlet-process
//! mixture of Beta-Bernoulli components.
//!
//! The Bernoulli parameters and mixture weights are integrated out, leaving
//! only cluster labels, which a Gibbs sampler with a simulated-annealing
//! schedule drives toward a single high-posterior partition. The number of
//! clusters is not fixed in advance.
//!
//! ```
//! use binclust::{datagen, default_hyperparams, eval, sampler, AnnealingSchedule};
//! use rand::SeedableRng;
//!
//! let spec = datagen::SyntheticSpec::new(60, 80, 20.0, 5.0);
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
//! let synth = datagen::generate(&spec, &mut rng).unwrap();
//! let hyper = default_hyperparams(&synth.data, 1.0).unwrap();
//! let schedule = AnnealingSchedule { n_sweeps: 40, ..Default::default() };
//! let report = sampler::run(&synth.data, &hyper, &schedule, 10, 7).unwrap();
//! let acc = eval::matched_accuracy(&report.assignments, &synth.labels).unwrap();
//! assert!(acc > 90.0);
//! ```

pub mod baseline;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod io;
pub mod matrix;
pub mod model;
pub mod preprocess;
pub mod sampler;
pub mod state;

pub use error::{Error, Result};
pub use matrix::BinaryMatrix;
pub use model::{
    assignment_distribution, beta_posterior, crp_log_prior, default_hyperparams, joint_log_score,
    log_predictive, resolve_hyperparams, BetaPosterior, Component, Hyperparams, Placement,
    PriorPolicy,
};
pub use sampler::{AnnealingSchedule, RunReport};
pub use state::ClusterState;
