//! Synthetic datasets shaped like PROMISE ck-metrics releases.
//!
//! Twenty positive, skewed metrics driven by a latent size factor and a
//! latent coupling factor; the defect probability is logistic in both.
#![allow(dead_code)]

pub mod oracle;

use overlook_core::dataset::{MetricSchema, ModuleRecord, ProjectDataset};
use overlook_core::logistic::sigmoid;
use overlook_core::rng::SplitMix64;

pub fn normal(rng: &mut SplitMix64) -> f64 {
    let u1 = rng.next_uniform().max(1e-300);
    let u2 = rng.next_uniform();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn synthetic_release(name: &str, version: &str, n: usize, intercept: f64, seed: u64) -> ProjectDataset {
    let mut rng = SplitMix64::new(seed);
    let records = (0..n)
        .map(|i| {
            let size = normal(&mut rng);
            let coupling = 0.5 * size + 0.8 * normal(&mut rng);
            let features = (0..20)
                .map(|j| {
                    let load = [1.0, 0.6, 0.3, 0.0][j % 4];
                    let latent = if j % 5 == 3 { coupling } else { size };
                    ((load * latent + (1.0 - 0.5 * load) * normal(&mut rng)) * 0.8).exp() * (j + 1) as f64
                })
                .collect();
            let p = sigmoid(intercept + 1.1 * size + 0.6 * coupling);
            let bugs = if rng.next_uniform() < p { 1 + (rng.next_uniform() * 3.0) as u32 } else { 0 };
            ModuleRecord::new(format!("{name}.C{i}"), features, bugs)
        })
        .collect();
    ProjectDataset::new(name, version, MetricSchema::promise_ck(), records).unwrap()
}

/// Learning and test releases sized like ant 1.6 / 1.7.
pub fn ant_like() -> (ProjectDataset, ProjectDataset) {
    (synthetic_release("antlike", "1.6", 351, -1.4, 1), synthetic_release("antlike", "1.7", 745, -1.6, 2))
}

/// Small releases for fast property tests.
pub fn small_pair(seed: u64, n_prior: usize, n_test: usize) -> (ProjectDataset, ProjectDataset) {
    (
        synthetic_release("small", "1", n_prior, -1.0, seed),
        synthetic_release("small", "2", n_test, -1.0, seed.wrapping_add(1)),
    )
}
