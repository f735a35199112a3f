//! Browser demo: generate a synthetic matrix, cluster it with the annealed
//! sampler, and inspect how tempering reshapes one object's allocation.
//!
//! All logic lives in [`Demo`], which is plain Rust and tested natively. The
//! `Session` type is a thin JS-facing wrapper that returns JSON strings.

use binclust::datagen::{generate, SyntheticData, SyntheticSpec};
use binclust::eval::matched_accuracy;
use binclust::{
    assignment_distribution, default_hyperparams, sampler, AnnealingSchedule, ClusterState,
    Hyperparams,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct DatasetView {
    pub n: usize,
    pub d: usize,
    /// Row-major cells.
    pub cells: Vec<u8>,
    pub labels: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct ClusterView {
    pub n_clusters: usize,
    pub assignments: Vec<usize>,
    /// Row indices grouped by final cluster.
    pub order: Vec<usize>,
    pub score_trace: Vec<f64>,
    pub k_trace: Vec<usize>,
    pub temp_trace: Vec<f64>,
    pub accuracy: f64,
}

#[derive(Debug, Serialize)]
pub struct TemperedView {
    pub object: usize,
    /// Final cluster of the object, before it was taken out.
    pub current: usize,
    /// Cluster sizes with the object removed; the last option is a new cluster.
    pub sizes: Vec<usize>,
    pub temperatures: Vec<f64>,
    /// One probability vector per temperature, K entries then the new cluster.
    pub probabilities: Vec<Vec<f64>>,
}

#[derive(Default)]
pub struct Demo {
    synth: Option<SyntheticData>,
    fitted: Option<(Vec<usize>, Hyperparams)>,
}

impl Demo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn generate(
        &mut self,
        n: usize,
        d: usize,
        sd: f64,
        sn: f64,
        seed: u64,
    ) -> binclust::Result<DatasetView> {
        let synth = generate(
            &SyntheticSpec::new(n, d, sd, sn),
            &mut ChaCha8Rng::seed_from_u64(seed),
        )?;
        let view = DatasetView {
            n,
            d,
            cells: synth.data.as_slice().to_vec(),
            labels: synth.labels.clone(),
        };
        self.synth = Some(synth);
        self.fitted = None;
        Ok(view)
    }

    fn synth(&self) -> binclust::Result<&SyntheticData> {
        self.synth
            .as_ref()
            .ok_or_else(|| binclust::Error::InvalidArgument("generate a dataset first".into()))
    }

    pub fn cluster(
        &mut self,
        alpha: f64,
        schedule: AnnealingSchedule,
        seed: u64,
    ) -> binclust::Result<ClusterView> {
        let synth = self.synth()?;
        let hyper = default_hyperparams(&synth.data, alpha)?;
        let run = sampler::run(
            &synth.data,
            &hyper,
            &schedule,
            sampler::DEFAULT_K_INIT,
            seed,
        )?;
        let accuracy = matched_accuracy(&run.assignments, &synth.labels)?;
        let mut order: Vec<usize> = (0..run.assignments.len()).collect();
        order.sort_by_key(|&i| (run.assignments[i], synth.labels[i]));
        let view = ClusterView {
            n_clusters: run.n_clusters,
            assignments: run.assignments.clone(),
            order,
            score_trace: run.score_trace,
            k_trace: run.k_trace,
            temp_trace: run.temp_trace,
            accuracy,
        };
        self.fitted = Some((run.assignments, hyper));
        Ok(view)
    }

    /// Allocation probabilities of `object` against the fitted partition of
    /// everyone else, at each temperature.
    pub fn tempered(&self, object: usize, temperatures: &[f64]) -> binclust::Result<TemperedView> {
        let synth = self.synth()?;
        let (labels, hyper) = self
            .fitted
            .as_ref()
            .ok_or_else(|| binclust::Error::InvalidArgument("cluster the dataset first".into()))?;
        let mut state = ClusterState::from_labels(&synth.data, labels)?;
        let current = state
            .label(object)
            .ok_or_else(|| binclust::Error::InvalidArgument("object out of range".into()))?;
        state.remove_object(object, &synth.data)?;
        let probabilities = temperatures
            .iter()
            .map(|&t| assignment_distribution(object, &state, &synth.data, hyper, t))
            .collect::<binclust::Result<Vec<_>>>()?;
        Ok(TemperedView {
            object,
            current,
            sizes: state.sizes().to_vec(),
            temperatures: temperatures.to_vec(),
            probabilities,
        })
    }
}

fn to_js<T: Serialize>(value: binclust::Result<T>) -> Result<String, JsError> {
    let value = value.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub struct Session(Demo);

#[wasm_bindgen]
impl Session {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Session {
        Session(Demo::new())
    }

    // Seeds are u32 on this side so JS can pass plain numbers rather than BigInt.
    pub fn generate(
        &mut self,
        n: usize,
        d: usize,
        sd: f64,
        sn: f64,
        seed: u32,
    ) -> Result<String, JsError> {
        to_js(self.0.generate(n, d, sd, sn, seed.into()))
    }

    pub fn cluster(
        &mut self,
        alpha: f64,
        t_init: f64,
        lambda: f64,
        block: usize,
        sweeps: usize,
        seed: u32,
    ) -> Result<String, JsError> {
        let schedule = AnnealingSchedule {
            t_init,
            lambda,
            block,
            n_sweeps: sweeps,
        };
        to_js(
            schedule
                .validate()
                .and_then(|_| self.0.cluster(alpha, schedule, seed.into())),
        )
    }

    pub fn tempered(&self, object: usize, temperatures: Vec<f64>) -> Result<String, JsError> {
        to_js(self.0.tempered(object, &temperatures))
    }
}

impl Default for Session {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generate_then_cluster() {
        let mut demo = Demo::new();
        let data = demo.generate(60, 80, 20.0, 5.0, 1).unwrap();
        assert_eq!(data.cells.len(), 60 * 80);
        let view = demo.cluster(1.0, AnnealingSchedule::default(), 2).unwrap();
        assert!(view.accuracy > 90.0);
        assert_eq!(view.temp_trace.len(), 200);
        let mut order = view.order.clone();
        order.sort_unstable();
        assert_eq!(order, (0..60).collect::<Vec<_>>());
        // grouped rows: labels along the order never return to an earlier cluster
        let seq: Vec<usize> = view.order.iter().map(|&i| view.assignments[i]).collect();
        assert!(seq.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn tempered_sharpens_as_temperature_drops() {
        let mut demo = Demo::new();
        demo.generate(40, 60, 20.0, 10.0, 3).unwrap();
        demo.cluster(1.0, AnnealingSchedule::default(), 0).unwrap();
        let view = demo.tempered(5, &[4.0, 1.0, 0.1]).unwrap();
        assert_eq!(view.probabilities.len(), 3);
        for p in &view.probabilities {
            assert_eq!(p.len(), view.sizes.len() + 1);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let peak = |p: &Vec<f64>| p.iter().cloned().fold(0.0, f64::max);
        assert!(peak(&view.probabilities[2]) >= peak(&view.probabilities[0]));
    }

    #[test]
    fn operations_require_prior_steps() {
        let mut demo = Demo::new();
        assert!(demo.cluster(1.0, AnnealingSchedule::default(), 0).is_err());
        demo.generate(20, 20, 20.0, 5.0, 0).unwrap();
        assert!(demo.tempered(0, &[1.0]).is_err());
        demo.cluster(1.0, AnnealingSchedule::default(), 0).unwrap();
        assert!(demo.tempered(20, &[1.0]).is_err());
        assert!(demo.tempered(0, &[0.0]).is_err());
    }

    #[test]
    fn json_shape() {
        let mut demo = Demo::new();
        demo.generate(10, 10, 20.0, 5.0, 0).unwrap();
        let view = demo
            .cluster(
                1.0,
                AnnealingSchedule {
                    n_sweeps: 5,
                    ..Default::default()
                },
                0,
            )
            .unwrap();
        let json = serde_json::to_value(&view).unwrap();
        for key in [
            "n_clusters",
            "assignments",
            "order",
            "score_trace",
            "k_trace",
            "temp_trace",
            "accuracy",
        ] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }
}
