//! Invariants of the δ and S1 estimators on synthetic models.

mod common;

use lh2_core::ugsa::{sensitivity, GsaOptions};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn opts(seed: u64) -> GsaOptions {
    GsaOptions {
        resamples: 20,
        seed,
        ..GsaOptions::default()
    }
}

/// `n` iid uniform rows in [0,1]^d and a mildly nonlinear response.
fn model(n: usize, d: usize, seed: u64, weights: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect();
    let y = x
        .iter()
        .map(|r| r.iter().zip(weights).map(|(v, w)| w * v).sum::<f64>() + 0.3 * (3.0 * r[0]).sin() * r[d - 1])
        .collect();
    (x, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn indices_stay_in_range(
        seed in any::<u64>(),
        n in 300usize..600,
        w in prop::collection::vec(-3.0f64..3.0, 3),
    ) {
        let (x, y) = model(n, 3, seed, &w);
        let s = sensitivity(&x, &y, &opts(seed)).unwrap();
        for d in &s.delta {
            prop_assert!((0.0..=1.0).contains(&d.value), "{d:?}");
            prop_assert!(d.ci_low <= d.ci_high);
        }
        for s1 in &s.s1 {
            prop_assert!((-0.05..=1.05).contains(&s1.value), "{s1:?}");
        }
    }

    #[test]
    fn row_order_does_not_matter(seed in any::<u64>(), shuffle_seed in any::<u64>()) {
        let (x, y) = model(400, 3, seed, &[1.0, 0.5, 0.0]);
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle_seed));
        let xs: Vec<Vec<f64>> = idx.iter().map(|&i| x[i].clone()).collect();
        let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
        let a = sensitivity(&x, &y, &opts(7)).unwrap();
        let b = sensitivity(&xs, &ys, &opts(7)).unwrap();
        for (p, q) in a.delta.iter().zip(&b.delta).chain(a.s1.iter().zip(&b.s1)) {
            prop_assert!((p.value - q.value).abs() <= 1e-12);
            prop_assert!((p.ci_low - q.ci_low).abs() <= 1e-12);
            prop_assert!((p.ci_high - q.ci_high).abs() <= 1e-12);
        }
    }

    #[test]
    fn delta_ignores_affine_rescaling(
        seed in any::<u64>(),
        scale in prop_oneof![-50.0f64..-0.02, 0.02f64..50.0],
        shift in -1e3f64..1e3,
    ) {
        let (x, y) = model(400, 3, seed, &[1.0, 0.5, 0.1]);
        let z: Vec<f64> = y.iter().map(|v| scale * v + shift).collect();
        let a = sensitivity(&x, &y, &opts(3)).unwrap();
        let b = sensitivity(&x, &z, &opts(3)).unwrap();
        for (p, q) in a.delta.iter().zip(&b.delta) {
            prop_assert!((p.value - q.value).abs() < p.half_width(), "{p:?} vs {q:?}");
        }
    }
}

#[test]
fn fixed_seed_is_bit_identical() {
    let (x, y) = model(500, 4, 11, &[1.0, -2.0, 0.5, 0.0]);
    let a = sensitivity(&x, &y, &opts(5)).unwrap();
    assert_eq!(a, sensitivity(&x, &y, &opts(5)).unwrap());
    // the seed only drives the bootstrap
    let b = sensitivity(&x, &y, &opts(6)).unwrap();
    assert_eq!(a.delta[0].value, b.delta[0].value);
    assert_ne!(a.delta[0].ci_low, b.delta[0].ci_low);
}

#[test]
fn additive_model_is_ranked_by_weight() {
    let (x, y) = model(2000, 4, 3, &[3.0, 1.5, 0.5, 0.0]);
    let s = sensitivity(&x, &y, &opts(1)).unwrap();
    let d: Vec<f64> = s.delta.iter().map(|e| e.value).collect();
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
    let s1: Vec<f64> = s.s1.iter().map(|e| e.value).collect();
    assert!(s1[0] > s1[1] && s1[1] > s1[2], "{s1:?}");
}

#[test]
fn output_equal_to_one_input_is_dominant() {
    let (x, _) = model(2000, 3, 9, &[0.0, 0.0, 0.0]);
    for i in 0..3 {
        let y: Vec<f64> = x.iter().map(|r| r[i]).collect();
        let s = sensitivity(&x, &y, &opts(2)).unwrap();
        assert!(s.delta[i].value >= 0.8, "input {i}: {:?}", s.delta[i]);
        for j in (0..3).filter(|&j| j != i) {
            assert!(s.delta[j].value < 0.1, "input {j}: {:?}", s.delta[j]);
        }
    }
}

#[test]
fn ishigami_first_order_indices_at_moderate_n() {
    // smaller sibling of the acceptance check, with a looser band
    let (x, y) = common::ishigami_sample(2048, 42);
    let s = sensitivity(&x, &y, &opts(42)).unwrap();
    for (e, want) in s.s1.iter().zip(common::ishigami_s1()) {
        assert!((e.value - want).abs() < 0.06, "{e:?} vs {want}");
    }
}
