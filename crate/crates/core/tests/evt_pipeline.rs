mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

use relu_peak::evt::{beta_fit_gamma, collect_max_samples, default_k, moment_estimator, MaxSampleSet};
use relu_peak::network::xavier_init;
use relu_peak::samplers::ReluProblem;
use relu_peak::Polytope;

fn beta_sample(a: f64, b: f64, n: usize, seed: u64) -> MaxSampleSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Beta::new(a, b).unwrap();
    MaxSampleSet::new((0..n).map(|_| dist.sample(&mut rng)).collect()).unwrap()
}

#[test]
fn beta_fit_recovers_alpha() {
    let est = beta_fit_gamma(&beta_sample(3.0, 2.0, 100_000, 8)).unwrap();
    assert!((est.gamma + 1.0 / 3.0).abs() < 0.1, "gamma {}", est.gamma);
    assert!(est.diagnostic < 0.02);
}

#[test]
fn estimators_agree_on_symmetric_beta() {
    // With alpha = beta both tails share the index -1/alpha.
    let s = beta_sample(2.0, 2.0, 100_000, 4);
    let m = moment_estimator(&s, default_k(s.len())).unwrap();
    let b = beta_fit_gamma(&s).unwrap();
    assert!((m.gamma - b.gamma).abs() <= 0.2, "moment {} vs beta {}", m.gamma, b.gamma);
}

#[test]
fn region_optima_examples() {
    let p = Polytope::unit_box(1).unwrap();
    let relu = relu_peak::ReluNetwork::new(
        vec![relu_peak::network::Layer { weights: vec![vec![1.0]], b: vec![0.0] }],
        vec![1.0],
    )
    .unwrap();
    let s = collect_max_samples(&relu, &p, 100, 1).unwrap();
    assert_eq!(s.len(), 100);
    assert!(s.values().iter().all(|&v| v == 1.0));
    assert!(moment_estimator(&s, 10).is_err());
}

#[test]
fn region_optima_never_exceed_the_oracle() {
    for (_, net) in common::oracle_nets().into_iter().take(6) {
        let p = Polytope::unit_box(net.input_dim()).unwrap();
        let best = ReluProblem::new(&net, &p).unwrap().brute_force(true).unwrap().objective;
        let s = collect_max_samples(&net, &p, 500, 3).unwrap();
        assert!(s.values().iter().all(|&v| v <= best + 1e-9));
        assert_eq!(s, collect_max_samples(&net, &p, 500, 3).unwrap());
        assert_eq!(s.provenance().unwrap().n, 500);
    }
}

#[test]
fn deeper_net_has_many_distinct_optima() {
    let net = xavier_init(&[3, 10, 10, 1], 5).unwrap();
    let s = collect_max_samples(&net, &Polytope::unit_box(3).unwrap(), 2000, 1).unwrap();
    let mut v = s.values().to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    assert!(v.len() > 10);
}
