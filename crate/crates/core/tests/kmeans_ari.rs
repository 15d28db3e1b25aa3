mod common;

use common::pair_count_ari;
use icvi_artmap::bench::{generate, GaussianSpec};
use icvi_artmap::kmeans::best_of;
use icvi_artmap::metrics::ari;
use icvi_artmap::prepare;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn ari_matches_pair_counting(a in prop::collection::vec(0usize..5, 2..40), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b: Vec<usize> = a.iter().map(|_| rng.random_range(0..4)).collect();
        let fast = ari(&a, &b).unwrap();
        prop_assert!((fast - pair_count_ari(&a, &b)).abs() < 1e-12);
        prop_assert!((fast - ari(&b, &a).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn textbook_example() {
    let v = ari(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap();
    assert!((v - pair_count_ari(&[0, 0, 1, 1], &[0, 1, 0, 1])).abs() < 1e-15);
    assert!((v + 0.5).abs() < 1e-15);
}

#[test]
fn random_labelings_average_near_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mean: f64 = (0..100)
        .map(|_| {
            let a: Vec<usize> = (0..200).map(|_| rng.random_range(0..5)).collect();
            let b: Vec<usize> = (0..200).map(|_| rng.random_range(0..5)).collect();
            ari(&a, &b).unwrap()
        })
        .sum::<f64>()
        / 100.0;
    assert!(mean.abs() < 0.05, "{mean}");
}

#[test]
fn kmeans_recovers_separated_blobs() {
    for (k, d) in [(3, 2), (5, 10)] {
        let (ds, truth) = generate(&GaussianSpec::new(k, d, 50 * k, 6.0, 2)).unwrap();
        let r = best_of(&prepare(&ds).x_b, k, 10, 0).unwrap();
        assert_eq!(ari(&r.labels, truth.as_slice()).unwrap(), 1.0);
    }
}
