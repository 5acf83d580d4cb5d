use rand::seq::SliceRandom;

use dopkit::ensembles::{batch, one_point_frequencies, rng_for, sample_ordered, Configuration};
use dopkit::kernels::{cd_kernel, correlation, expected_count, KernelMatrix};
use dopkit::nodes::NodeSet;
use dopkit::orthopoly::build_basis;
use dopkit::weights::{log_weight, WeightSpec};

const SAMPLES: usize = 20_000;
const SIGMAS: f64 = 4.0;

fn kernel() -> KernelMatrix {
    let lw = log_weight(&WeightSpec::Hahn { alpha: 2.0, beta: 3.0 }, &NodeSet::unit(30)).unwrap();
    cd_kernel(&build_basis(&lw, 29, 128).unwrap(), 12).unwrap()
}

fn assert_marginals(k: &KernelMatrix, samples: &[Configuration]) {
    let f = one_point_frequencies(samples, k.n());
    for (i, fi) in f.iter().enumerate() {
        let p = k.diag(i);
        let se = (p * (1.0 - p) / samples.len() as f64).sqrt().max(1e-4);
        assert!((fi - p).abs() < SIGMAS * se, "node {i}: {fi} vs {p}");
    }
}

#[test]
fn one_point_frequencies_match_the_diagonal() {
    let k = kernel();
    let samples = batch(&k, SAMPLES, 7).unwrap();
    assert!(samples.iter().all(|s| s.len() == 12));
    assert_marginals(&k, &samples);
}

#[test]
fn law_does_not_depend_on_the_visiting_order() {
    let k = kernel();
    let mut order: Vec<usize> = (0..k.n()).collect();
    order.shuffle(&mut rng_for(1, u64::MAX));
    let reversed: Vec<usize> = (0..k.n()).rev().collect();
    for (tag, ord) in [(11, order), (12, reversed)] {
        let samples: Vec<Configuration> = (0..SAMPLES)
            .map(|i| sample_ordered(&k, &ord, &mut rng_for(tag, i as u64)).unwrap())
            .collect();
        assert_marginals(&k, &samples);
    }
}

#[test]
fn counts_in_a_block_match_the_kernel() {
    let k = kernel();
    let block: Vec<usize> = (0..10).collect();
    let samples = batch(&k, SAMPLES, 5).unwrap();
    let counts: Vec<f64> = samples.iter().map(|s| s.count_in(&block) as f64).collect();
    let m = SAMPLES as f64;

    let mean = counts.iter().sum::<f64>() / m;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let expected = expected_count(&k, &block);
    assert!((mean - expected).abs() < SIGMAS * (var / m).sqrt(), "{mean} vs {expected}");

    // ordered pairs of distinct particles in the block
    let pairs: Vec<f64> = counts.iter().map(|c| c * (c - 1.0)).collect();
    let pm = pairs.iter().sum::<f64>() / m;
    let pv = pairs.iter().map(|p| (p - pm).powi(2)).sum::<f64>() / (m - 1.0);
    let mut r2 = 0.0;
    for &x in &block {
        for &y in &block {
            if x != y {
                r2 += correlation(&k, &[x, y]);
            }
        }
    }
    assert!((pm - r2).abs() < SIGMAS * (pv / m).sqrt(), "{pm} vs {r2}");
}
