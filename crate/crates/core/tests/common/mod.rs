#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relu_peak::linprog::{LinearProgram, Sense};
use relu_peak::mipsolver::MixedIntegerProgram;
use relu_peak::network::{xavier_init, Layer};
use relu_peak::ReluNetwork;

/// The shared test population: ten `[2,6,1]` and ten `[2,4,4,1]` nets.
pub fn oracle_nets() -> Vec<(String, ReluNetwork)> {
    let mut nets = Vec::new();
    for widths in [vec![2, 6, 1], vec![2, 4, 4, 1]] {
        for seed in 1..=10 {
            nets.push((format!("{widths:?}/seed{seed}"), xavier_init(&widths, seed).unwrap()));
        }
    }
    nets
}

pub fn staircase() -> ReluNetwork {
    ReluNetwork::new(vec![Layer { weights: vec![vec![1.0], vec![1.0]], b: vec![0.0, -0.5] }], vec![1.0, 1.0]).unwrap()
}

/// A random bounded MIP that is feasible by construction: every row is
/// satisfied by a hidden reference point with integral binaries.
pub fn random_mip(seed: u64, max_binaries: usize) -> MixedIntegerProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_bin = rng.random_range(1..=max_binaries);
    let n_cont = rng.random_range(1..=4);
    let n = n_bin + n_cont;
    let mut lp = LinearProgram::new(n);
    let mut reference = vec![0.0; n];
    for j in 0..n {
        if j < n_bin {
            lp.set_bounds(j, 0.0, 1.0);
            reference[j] = rng.random_range(0..=1) as f64;
        } else {
            lp.set_bounds(j, -5.0, 5.0);
            reference[j] = rng.random_range(-5.0..=5.0);
        }
    }
    lp.objective = (0..n).map(|_| rng.random_range(-3.0..=3.0)).collect();
    let m = rng.random_range(1..=n + 2);
    for _ in 0..m {
        let row: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..=2.0)).collect();
        let act: f64 = row.iter().zip(&reference).map(|(a, x)| a * x).sum();
        let slack = rng.random_range(0.0..=1.5);
        lp.add_row(row, Sense::Le, act + slack);
    }
    MixedIntegerProgram::new(lp, (0..n_bin).collect()).unwrap()
}

/// Exact feasibility check of an LP point with plain arithmetic.
pub fn lp_violation(lp: &LinearProgram, x: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (j, v) in x.iter().enumerate() {
        worst = worst.max(lp.lower[j] - v).max(v - lp.upper[j]);
    }
    for row in &lp.rows {
        let act: f64 = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
        let viol = match row.sense {
            Sense::Le => act - row.rhs,
            Sense::Ge => row.rhs - act,
            Sense::Eq => (act - row.rhs).abs(),
        };
        worst = worst.max(viol);
    }
    worst
}
