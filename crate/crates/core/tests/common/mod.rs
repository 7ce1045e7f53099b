#![allow(dead_code)]

pub mod oracles;

use kernelcat::finite::{Dist, FiniteSpace, Kernel};
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Random space with 1..=max_atoms atoms.
pub fn random_space(rng: &mut ChaCha8Rng, name: &str, max_atoms: usize) -> FiniteSpace {
    let n = rng.gen_range(1..=max_atoms);
    FiniteSpace::new_plain(name, (0..n).map(|i| format!("{name}{i}"))).unwrap()
}

/// Random exact distribution: D balls dropped into the atoms, weights k/D.
/// Atoms may end up with zero mass.
pub fn random_dist(rng: &mut ChaCha8Rng, space: &FiniteSpace) -> Dist {
    let denom = rng.gen_range(1..=12i64);
    let mut counts = vec![0i64; space.len()];
    for _ in 0..denom {
        counts[rng.gen_range(0..space.len())] += 1;
    }
    let weights = counts.iter().map(|&c| rational(c, denom)).collect();
    Dist::new(space.clone(), weights).unwrap()
}

/// Random kernel with independently random rows.
pub fn random_kernel(rng: &mut ChaCha8Rng, domain: &FiniteSpace, codomain: &FiniteSpace) -> Kernel {
    let rows = (0..domain.len())
        .map(|_| random_dist(rng, codomain))
        .collect();
    Kernel::new(domain.clone(), codomain.clone(), rows).unwrap()
}

/// Assert that every row of a kernel sums to exactly one.
pub fn assert_row_stochastic(kernel: &Kernel) {
    use num_traits::One;
    for row in kernel.rows() {
        let total: BigRational = row.weights().iter().cloned().sum();
        assert!(total.is_one(), "row sums to {total}, not 1");
    }
}

/// Random 1-D inputs with a minimum pairwise separation. Noise-free
/// squared-exponential Grams on nearly coincident points are singular by
/// construction, so data generators keep the points apart.
pub fn separated_points(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64, min_sep: f64) -> Vec<Vec<f64>> {
    let mut points: Vec<f64> = Vec::with_capacity(n);
    while points.len() < n {
        let candidate = rng.gen_range(lo..hi);
        if points.iter().all(|p| (p - candidate).abs() >= min_sep) {
            points.push(candidate);
        }
    }
    points.into_iter().map(|p| vec![p]).collect()
}
