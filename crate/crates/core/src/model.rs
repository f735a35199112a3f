//! Collapsed Beta-Bernoulli / Chinese-restaurant-process model.
//!
//! The Bernoulli parameters of every (feature, cluster) pair and the mixture
//! weights are integrated out, so everything here is a function of the
//! cluster sizes `N_k` and per-feature presence counts `N_jk` only.
//!
//! Beta-function ratios use the identity `B(a + 1, b) / B(a, b) = a / (a + b)`
//! instead of log-gamma, which is exact and O(1) per feature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::BinaryMatrix;
use crate::state::ClusterState;

/// Per-feature Beta prior shapes shared by every cluster, plus the DP
/// concentration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    a: Vec<f64>,
    b: Vec<f64>,
    alpha: f64,
}

impl Hyperparams {
    pub fn new(a: Vec<f64>, b: Vec<f64>, alpha: f64) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        if a.is_empty() {
            return Err(Error::invalid("hyperparameters need at least one feature"));
        }
        if let Some(j) = a
            .iter()
            .zip(&b)
            .position(|(&x, &y)| !(x > 0.0 && x.is_finite() && y > 0.0 && y.is_finite()))
        {
            return Err(Error::invalid(format!(
                "Beta shapes for feature {j} must be positive and finite (a={}, b={})",
                a[j], b[j]
            )));
        }
        check_alpha(alpha)?;
        Ok(Self { a, b, alpha })
    }

    /// The same `(a, b)` for every one of `n_features` features.
    pub fn constant(n_features: usize, a: f64, b: f64, alpha: f64) -> Result<Self> {
        Self::new(vec![a; n_features], vec![b; n_features], alpha)
    }

    pub fn n_features(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "concentration must be positive and finite, got {alpha}"
        )))
    }
}

/// Empirical prior: `a_j = 1` and `b_j = N / max(1, Σ_i X_ij)` clamped to `[1, N]`,
/// so sparse features get a prior mean close to their observed sparsity.
pub fn default_hyperparams(data: &BinaryMatrix, alpha: f64) -> Result<Hyperparams> {
    let n = data.n_rows() as f64;
    let b = data
        .column_sums()
        .into_iter()
        .map(|s| (n / s.max(1) as f64).clamp(1.0, n))
        .collect();
    Hyperparams::new(vec![1.0; data.n_cols()], b, alpha)
}

/// How one Beta shape vector is derived from the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorPolicy {
    Constant(f64),
    /// `N / max(1, Σ_i X_ij)` clamped to `[1, N]`; only defined for `b`.
    Empirical,
}

/// Resolves `a` and `b` policies against `data`.
pub fn resolve_hyperparams(
    data: &BinaryMatrix,
    a: PriorPolicy,
    b: PriorPolicy,
    alpha: f64,
) -> Result<Hyperparams> {
    let d = data.n_cols();
    let a = match a {
        PriorPolicy::Constant(v) => vec![v; d],
        PriorPolicy::Empirical => {
            return Err(Error::invalid("the empirical rule applies to b only"))
        }
    };
    let b = match b {
        PriorPolicy::Constant(v) => vec![v; d],
        PriorPolicy::Empirical => default_hyperparams(data, alpha)?.b,
    };
    Hyperparams::new(a, b, alpha)
}

/// Posterior shapes of one feature's presence probability within one cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaPosterior {
    pub a_post: f64,
    pub b_post: f64,
}

impl BetaPosterior {
    pub fn mean(&self) -> f64 {
        self.a_post / (self.a_post + self.b_post)
    }
}

/// Conjugate update `(a_j + N_jk, b_j + N_k - N_jk)`.
pub fn beta_posterior(
    feature: usize,
    size: usize,
    ones: usize,
    hyper: &Hyperparams,
) -> Result<BetaPosterior> {
    if feature >= hyper.n_features() {
        return Err(Error::invalid(format!(
            "feature {feature} out of range for {} features",
            hyper.n_features()
        )));
    }
    if ones > size {
        return Err(Error::invalid(format!(
            "feature count {ones} exceeds cluster size {size}"
        )));
    }
    Ok(BetaPosterior {
        a_post: hyper.a[feature] + ones as f64,
        b_post: hyper.b[feature] + (size - ones) as f64,
    })
}

/// Sufficient statistics of the cluster an object is scored against.
#[derive(Debug, Clone, Copy)]
pub enum Component<'a> {
    /// An occupied cluster with `size` members and per-feature presence counts `ones`.
    Existing { size: usize, ones: &'a [u32] },
    /// A cluster with no members yet.
    New,
}

/// Where an object may be placed: one of the occupied clusters, or a fresh one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Placement {
    Existing(usize),
    New,
}

/// Log posterior-predictive probability of the binary row `x` under a cluster,
/// `Σ_j log B(a_j + N_jk + x_j, b_j + N_k - N_jk + 1 - x_j) / B(a_j + N_jk, b_j + N_k - N_jk)`.
pub fn log_predictive(x: &[u8], component: Component<'_>, hyper: &Hyperparams) -> Result<f64> {
    if x.len() != hyper.n_features() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: hyper.n_features(),
        });
    }
    if let Component::Existing { size, ones } = component {
        if ones.len() != x.len() {
            return Err(Error::LengthMismatch {
                left: ones.len(),
                right: x.len(),
            });
        }
        if let Some(j) = ones.iter().position(|&c| c as usize > size) {
            return Err(Error::invalid(format!(
                "precondition violated: feature {j} count {} exceeds cluster size {size}",
                ones[j]
            )));
        }
    }
    Ok(log_predictive_unchecked(x, component, hyper))
}

#[inline]
pub(crate) fn log_predictive_unchecked(
    x: &[u8],
    component: Component<'_>,
    hyper: &Hyperparams,
) -> f64 {
    match component {
        Component::New => x
            .iter()
            .zip(hyper.a.iter().zip(&hyper.b))
            .map(|(&xj, (&a, &b))| {
                let num = if xj == 1 { a } else { b };
                (num / (a + b)).ln()
            })
            .sum(),
        Component::Existing { size, ones } => {
            let n = size as f64;
            x.iter()
                .zip(ones)
                .zip(hyper.a.iter().zip(&hyper.b))
                .map(|((&xj, &c), (&a, &b))| {
                    let c = c as f64;
                    let num = if xj == 1 { a + c } else { b + n - c };
                    (num / (a + b + n)).ln()
                })
                .sum()
        }
    }
}

/// Chinese-restaurant-process conditional: `log(N_-i,k / (N - 1 + α))` for an
/// occupied cluster, `log(α / (N - 1 + α))` for a new one.
///
/// `sizes` are the leave-one-out cluster sizes and must sum to `n_total - 1`.
pub fn crp_log_prior(
    placement: Placement,
    sizes: &[usize],
    n_total: usize,
    alpha: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    if n_total == 0 || sizes.iter().sum::<usize>() != n_total - 1 {
        return Err(Error::invalid(format!(
            "leave-one-out sizes must sum to {} (N - 1)",
            n_total.saturating_sub(1)
        )));
    }
    let denom = (n_total - 1) as f64 + alpha;
    match placement {
        Placement::New => Ok((alpha / denom).ln()),
        Placement::Existing(k) => match sizes.get(k) {
            Some(&s) if s > 0 => Ok((s as f64 / denom).ln()),
            Some(_) => Err(Error::invalid(format!(
                "cluster {k} is empty and cannot be offered as an existing option"
            ))),
            None => Err(Error::invalid(format!(
                "cluster {k} out of range for {} clusters",
                sizes.len()
            ))),
        },
    }
}

/// Tempered allocation probabilities for object `object`, which must already be
/// removed from `state`.
///
/// Entry `k < K` is proportional to `N_-i,k · exp(L_k / T)` and the final entry
/// to `α · exp(L_new / T)`, with `L` the log predictive. At `T = 1` this is the
/// exact collapsed Gibbs conditional; as `T → 0` it concentrates on the
/// highest-likelihood option.
pub fn assignment_distribution(
    object: usize,
    state: &ClusterState,
    data: &BinaryMatrix,
    hyper: &Hyperparams,
    temperature: f64,
) -> Result<Vec<f64>> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::invalid(format!(
            "temperature must be positive and finite, got {temperature}"
        )));
    }
    if object >= data.n_rows() || object >= state.n_objects() {
        return Err(Error::invalid(format!("object {object} out of range")));
    }
    if state.label(object).is_some() {
        return Err(Error::invalid(format!(
            "object {object} must be removed from its cluster first"
        )));
    }
    if data.n_cols() != hyper.n_features() || data.n_cols() != state.n_features() {
        return Err(Error::LengthMismatch {
            left: data.n_cols(),
            right: hyper.n_features(),
        });
    }
    let mut weights = Vec::with_capacity(state.n_clusters() + 1);
    tempered_log_weights(data.row(object), state, hyper, temperature, &mut weights);
    normalize_log_weights(&mut weights);
    Ok(weights)
}

/// Fills `out` with unnormalized log weights `log N_k + L_k / T` (and the NEW
/// option last).
pub(crate) fn tempered_log_weights(
    x: &[u8],
    state: &ClusterState,
    hyper: &Hyperparams,
    temperature: f64,
    out: &mut Vec<f64>,
) {
    out.clear();
    let inv_t = temperature.recip();
    for k in 0..state.n_clusters() {
        let size = state.sizes()[k];
        let ll = log_predictive_unchecked(
            x,
            Component::Existing {
                size,
                ones: state.feature_counts(k),
            },
            hyper,
        );
        out.push((size as f64).ln() + ll * inv_t);
    }
    let ll_new = log_predictive_unchecked(x, Component::New, hyper);
    out.push(hyper.alpha.ln() + ll_new * inv_t);
}

/// In-place max-shifted softmax.
pub(crate) fn normalize_log_weights(w: &mut [f64]) {
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in w.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in w.iter_mut() {
        *v /= total;
    }
}

/// `log B(a + ones, b + zeros) - log B(a, b)`, accumulated as a product of
/// sequential predictive ratios (exact for integer counts).
fn log_beta_ratio(a: f64, b: f64, ones: usize, zeros: usize) -> f64 {
    let up: f64 = (0..ones).map(|t| (a + t as f64).ln()).sum();
    let down: f64 = (0..zeros).map(|t| (b + t as f64).ln()).sum();
    let norm: f64 = (0..ones + zeros).map(|t| (a + b + t as f64).ln()).sum();
    up + down - norm
}

/// Log of the unnormalized posterior of the whole partition:
/// the exchangeable CRP prior `α^K ∏_k (N_k - 1)! / ∏_{n<N} (n + α)` times the
/// collapsed likelihood `∏_k ∏_j B(a_j + N_jk, b_j + N_k - N_jk) / B(a_j, b_j)`.
///
/// Objects that are currently unassigned are left out.
pub fn joint_log_score(state: &ClusterState, hyper: &Hyperparams) -> f64 {
    let alpha = hyper.alpha;
    let n: usize = state.sizes().iter().sum();
    let k = state.n_clusters();
    let mut score = k as f64 * alpha.ln();
    score -= (0..n).map(|t| (t as f64 + alpha).ln()).sum::<f64>();
    let mut terms: Vec<f64> = state
        .sizes()
        .iter()
        .enumerate()
        .map(|(c, &size)| {
            let prior: f64 = (1..size).map(|t| (t as f64).ln()).sum();
            let lik: f64 = state
                .feature_counts(c)
                .iter()
                .enumerate()
                .map(|(j, &ones)| {
                    let ones = ones as usize;
                    log_beta_ratio(hyper.a[j], hyper.b[j], ones, size - ones)
                })
                .sum();
            prior + lik
        })
        .collect();
    // Sorted accumulation makes the result exactly independent of label order.
    terms.sort_by(f64::total_cmp);
    score + terms.iter().sum::<f64>()
}
