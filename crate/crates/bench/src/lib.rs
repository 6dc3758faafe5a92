//! Seeded fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use varmine::{Dataset, VariableColumn, VariableKind};

pub fn normal_sample(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// `p` normal columns over `n` alternating labels; the first column is shifted.
pub fn panel(seed: u64, n: usize, p: usize) -> Dataset {
    let labels: Vec<bool> = (0..n).map(|i| i % 2 == 1).collect();
    let vars = (0..p)
        .map(|j| {
            let mut v = normal_sample(seed.wrapping_add(j as u64), n);
            if j == 0 {
                v.iter_mut().zip(&labels).filter(|(_, &y)| y).for_each(|(x, _)| *x += 1.0);
            }
            VariableColumn::complete(v, VariableKind::Continuous)
        })
        .collect();
    let names = (0..p).map(|j| format!("x{j}")).collect();
    Dataset::new(names, vars, labels, "1").expect("columns match labels")
}
