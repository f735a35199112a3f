//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use statrs::function::gamma::ln_gamma;

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Predictive ratio for one feature through raw Beta functions.
pub fn ln_beta_predictive(a: f64, b: f64, size: usize, ones: usize, x: u8) -> f64 {
    let (n, c, x) = (size as f64, ones as f64, x as f64);
    ln_beta(a + c + x, b + n - c + 1.0 - x) - ln_beta(a + c, b + n - c)
}

/// `∫ p^x (1-p)^(1-x) Beta(p; a', b') dp` by composite Simpson after the
/// substitution `p = sin²θ`, which removes endpoint singularities for shapes ≥ 1/2.
pub fn quadrature_predictive(a_post: f64, b_post: f64, x: u8) -> f64 {
    let (ea, eb) = (a_post + x as f64, b_post + 1.0 - x as f64);
    let f = |t: f64| 2.0 * t.sin().powf(2.0 * ea - 1.0) * t.cos().powf(2.0 * eb - 1.0);
    let intervals = 20_000;
    let h = std::f64::consts::FRAC_PI_2 / intervals as f64;
    let mut sum = f(0.0) + f(std::f64::consts::FRAC_PI_2);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(i as f64 * h);
    }
    sum * h / 3.0 / ln_beta(a_post, b_post).exp()
}

/// Every set partition of `n` items as a restricted growth string.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let upper = prefix.iter().max().map_or(0, |&m| m + 1);
        for l in 0..=upper {
            prefix.push(l);
            go(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), n, &mut out);
    out
}

/// Relabels in order of first appearance so equal partitions compare equal.
pub fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// Best one-to-one pairing of predicted and true clusters, by enumeration.
pub fn brute_force_matching(counts: &[Vec<usize>]) -> usize {
    fn go(w: &[Vec<usize>], row: usize, used: &mut [bool]) -> usize {
        if row == w.len() {
            return 0;
        }
        let mut best = go(w, row + 1, used);
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                best = best.max(w[row][j] + go(w, row + 1, used));
                used[j] = false;
            }
        }
        best
    }
    let cols = counts.first().map_or(0, Vec::len);
    go(counts, 0, &mut vec![false; cols])
}

pub fn brute_force_accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let kp = pred.iter().max().unwrap() + 1;
    let kt = truth.iter().max().unwrap() + 1;
    let mut counts = vec![vec![0usize; kt]; kp];
    for (&p, &t) in pred.iter().zip(truth) {
        counts[p][t] += 1;
    }
    100.0 * brute_force_matching(&counts) as f64 / pred.len() as f64
}

/// Exchangeable CRP prior and Beta-Bernoulli marginal likelihood of a
/// labelling, with shared shapes `a`, `b` on every feature.
pub fn partition_log_terms(
    rows: &[Vec<u8>],
    labels: &[usize],
    a: f64,
    b: f64,
    alpha: f64,
) -> (f64, f64) {
    let n_clusters = labels.iter().max().map_or(0, |m| m + 1);
    let d = rows[0].len();
    let mut prior = -(0..rows.len())
        .map(|i| ln_gamma(alpha + i as f64 + 1.0) - ln_gamma(alpha + i as f64))
        .sum::<f64>();
    let mut lik = 0.0;
    for k in 0..n_clusters {
        let members: Vec<&Vec<u8>> = rows
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == k)
            .map(|(r, _)| r)
            .collect();
        if members.is_empty() {
            continue;
        }
        prior += alpha.ln() + ln_gamma(members.len() as f64);
        for j in 0..d {
            let ones = members.iter().filter(|r| r[j] == 1).count() as f64;
            let zeros = members.len() as f64 - ones;
            lik += ln_beta(a + ones, b + zeros) - ln_beta(a, b);
        }
    }
    (prior, lik)
}

/// Mass of each partition of `rows` under prior(z) * lik(z)^(1/temperature).
pub fn tempered_partition_masses(
    rows: &[Vec<u8>],
    a: f64,
    b: f64,
    alpha: f64,
    temperature: f64,
) -> Vec<(Vec<usize>, f64)> {
    let logs: Vec<(Vec<usize>, f64)> = set_partitions(rows.len())
        .into_iter()
        .map(|p| {
            let (prior, lik) = partition_log_terms(rows, &p, a, b, alpha);
            (p, prior + lik / temperature)
        })
        .collect();
    let top = logs.iter().map(|l| l.1).fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = logs.iter().map(|l| (l.1 - top).exp()).sum();
    logs.into_iter()
        .map(|(p, l)| (p, (l - top).exp() / z))
        .collect()
}
