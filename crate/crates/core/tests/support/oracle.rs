//! Brute-force reference implementations.

use overlook_core::logistic::{sigmoid, RidgeObjective};
use overlook_core::rng::SplitMix64;

use super::normal;

pub fn brute_force_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        for (j, &lj) in labels.iter().enumerate() {
            if li && !lj {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

/// Random scored instance of size 2..=30 with both classes and, when
/// `ties`, scores drawn from a handful of levels.
pub fn scored_instance(rng: &mut SplitMix64, ties: bool) -> (Vec<f64>, Vec<bool>) {
    let n = 2 + (rng.next_uniform() * 29.0) as usize;
    let mut labels: Vec<bool> = (0..n).map(|_| rng.next_uniform() < 0.4).collect();
    labels[0] = true;
    labels[1] = false;
    let scores =
        (0..n).map(|_| if ties { (rng.next_uniform() * 4.0).floor() / 4.0 } else { rng.next_uniform() }).collect();
    (scores, labels)
}

pub fn oracle_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Best subset by enumerating all `2^d - 1` non-empty subsets.
pub fn exhaustive_cfs(rows: &[Vec<f64>], labels: &[bool]) -> (Vec<usize>, f64) {
    let d = rows[0].len();
    let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<_>>();
    let y: Vec<f64> = labels.iter().map(|&l| f64::from(u8::from(l))).collect();
    let rcf: Vec<f64> = (0..d).map(|j| oracle_pearson(&col(j), &y).abs()).collect();
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    for mask in 1u32..(1 << d) {
        let s: Vec<usize> = (0..d).filter(|j| mask & (1 << j) != 0).collect();
        let k = s.len() as f64;
        let mean_cf = s.iter().map(|&j| rcf[j]).sum::<f64>() / k;
        let mut ff = 0.0;
        let mut pairs = 0.0;
        for a in 0..s.len() {
            for b in a + 1..s.len() {
                ff += oracle_pearson(&col(s[a]), &col(s[b])).abs();
                pairs += 1.0;
            }
        }
        let mean_ff = if pairs > 0.0 { ff / pairs } else { 0.0 };
        let merit = k * mean_cf / (k + k * (k - 1.0) * mean_ff).sqrt();
        if merit > best.1 + 1e-12 {
            best = (s, merit);
        }
    }
    best
}

pub fn cfs_instance(rng: &mut SplitMix64) -> (Vec<Vec<f64>>, Vec<bool>) {
    let d = 2 + (rng.next_uniform() * 7.0) as usize;
    let n = 20 + (rng.next_uniform() * 40.0) as usize;
    let weights: Vec<f64> = (0..d).map(|_| normal(rng)).collect();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let shared = normal(rng);
        let r: Vec<f64> = (0..d).map(|j| normal(rng) + if j % 2 == 0 { 0.7 * shared } else { 0.0 }).collect();
        let eta: f64 = r.iter().zip(&weights).map(|(a, b)| a * b).sum();
        labels.push(rng.next_uniform() < sigmoid(eta));
        rows.push(r);
    }
    labels[0] = true;
    labels[1] = false;
    (rows, labels)
}

/// Largest relative error, over `instances` random problems (n <= 50,
/// d <= 5), between the analytic gradient and central differences with
/// step 1e-5.
pub fn worst_gradient_error(seed: u64, instances: usize) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let n = 5 + (rng.next_uniform() * 46.0) as usize;
        let d = 1 + (rng.next_uniform() * 5.0) as usize;
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| normal(&mut rng)).collect()).collect();
        let labels: Vec<bool> = (0..n).map(|_| rng.next_uniform() < 0.5).collect();
        let lambda = 10f64.powf(-4.0 + 3.0 * rng.next_uniform());
        let beta: Vec<f64> = (0..=d).map(|_| normal(&mut rng)).collect();
        let obj = RidgeObjective::new(&rows, &labels, lambda);
        let g = obj.gradient(&beta);
        let numeric: Vec<f64> = (0..=d)
            .map(|k| {
                let mut up = beta.clone();
                let mut down = beta.clone();
                up[k] += h;
                down[k] -= h;
                (obj.value(&up) - obj.value(&down)) / (2.0 * h)
            })
            .collect();
        let diff = g.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale = numeric.iter().map(|b| b * b).sum::<f64>().sqrt().max(1e-12);
        worst = worst.max(diff / scale);
    }
    worst
}
