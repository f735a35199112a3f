//! Runs the annealed sampler and the gap-statistic baseline on a grid of
//! synthetic configurations and prints matched accuracies averaged over seeds.
//!
//! cargo run --release -p binclust --example benchmark -- [seeds] [--no-baseline]

use std::time::Instant;

use binclust::baseline::{gap_statistic, GapOptions};
use binclust::datagen::{generate, SyntheticSpec};
use binclust::eval::matched_accuracy;
use binclust::{default_hyperparams, sampler, AnnealingSchedule};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CONFIGS: [(&str, usize, usize, f64, f64); 10] = [
    ("Dataset1", 200, 500, 10.0, 20.0),
    ("Dataset2", 100, 500, 5.0, 20.0),
    ("Dataset3", 1000, 100, 10.0, 10.0),
    ("Dataset4", 100, 1000, 20.0, 30.0),
    ("Dataset5", 200, 200, 20.0, 20.0),
    ("Dataset6", 200, 200, 5.0, 10.0),
    ("Dataset7", 200, 200, 10.0, 10.0),
    ("Dataset8", 200, 500, 20.0, 20.0),
    ("Dataset9", 200, 500, 2.0, 5.0),
    ("Dataset10", 500, 500, 20.0, 50.0),
];

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seeds: u64 = args.iter().find_map(|a| a.parse().ok()).unwrap_or(3);
    let baseline = !args.iter().any(|a| a == "--no-baseline");
    let schedule = AnnealingSchedule::default();
    println!(
        "{:<10} {:>9} {:>6} {:>9} {:>7}",
        "dataset", "sampler", "K", "gap+km", "secs"
    );
    for (name, n, d, sd, sn) in CONFIGS {
        let spec = SyntheticSpec::new(n, d, sd, sn);
        let (mut acc, mut k, mut gap_acc, mut secs) = (0.0, 0.0, 0.0, 0.0);
        for seed in 0..seeds {
            let synth = generate(&spec, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let hyper = default_hyperparams(&synth.data, 1.0).unwrap();
            let start = Instant::now();
            let report = sampler::run(&synth.data, &hyper, &schedule, 10, seed).unwrap();
            secs += start.elapsed().as_secs_f64();
            acc += matched_accuracy(&report.assignments, &synth.labels).unwrap();
            k += report.n_clusters as f64;
            if baseline {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let gap = gap_statistic(&synth.data, &GapOptions::default(), &mut rng).unwrap();
                gap_acc += matched_accuracy(&gap.labels, &synth.labels).unwrap();
            }
        }
        let s = seeds as f64;
        println!(
            "{:<10} {:>9.1} {:>6.1} {:>9.1} {:>7.2}",
            name,
            acc / s,
            k / s,
            gap_acc / s,
            secs / s
        );
    }
}
