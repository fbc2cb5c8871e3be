//! Shared oracles for the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

pub const ISHIGAMI_A: f64 = 7.0;
pub const ISHIGAMI_B: f64 = 0.1;

pub fn ishigami(x: &[f64]) -> f64 {
    x[0].sin() + ISHIGAMI_A * x[1].sin().powi(2) + ISHIGAMI_B * x[2].powi(4) * x[0].sin()
}

/// First-order indices from the closed-form variance decomposition:
/// V₁ = ½(1 + bπ⁴/5)², V₂ = a²/8, V₃ = 0,
/// V = a²/8 + bπ⁴/5 + b²π⁸/18 + ½.
pub fn ishigami_s1() -> [f64; 3] {
    let (a, b) = (ISHIGAMI_A, ISHIGAMI_B);
    let pi4 = PI.powi(4);
    let v1 = 0.5 * (1.0 + b * pi4 / 5.0).powi(2);
    let v2 = a * a / 8.0;
    let v = a * a / 8.0 + b * pi4 / 5.0 + b * b * PI.powi(8) / 18.0 + 0.5;
    [v1 / v, v2 / v, 0.0]
}

/// CDF of a·sin²X, X ~ U(−π, π).
fn cdf_sin2(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= ISHIGAMI_A {
        1.0
    } else {
        2.0 / PI * (u / ISHIGAMI_A).sqrt().asin()
    }
}

/// CDF of sin X, X ~ U(−π, π).
fn cdf_sin(s: f64) -> f64 {
    if s <= -1.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        0.5 + s.asin() / PI
    }
}

/// δ for input `i` of the Ishigami function by quadrature of its
/// definition, ½·E_{Xᵢ}∫|f_Y − f_{Y|Xᵢ}| dy.
///
/// With Y = sin X₁·(1 + bX₃⁴) + a·sin²X₂, each conditional CDF is a 1-D
/// expectation of the closed-form CDFs above, evaluated by the midpoint
/// rule with `quad` nodes. Densities are taken as exact bin masses on bins
/// of `bin_width`, for `k_i` midpoint values of Xᵢ; f_Y is their average.
pub fn ishigami_delta_quadrature(i: usize, k_i: usize, quad: usize, bin_width: f64) -> f64 {
    ishigami_delta_classes(i, k_i, 1, quad, bin_width)
}

/// As [`ishigami_delta_quadrature`], with conditionals pooled over
/// `k_i / per_class` consecutive equal-probability classes of Xᵢ.
pub fn ishigami_delta_classes(i: usize, k_i: usize, per_class: usize, quad: usize, bin_width: f64) -> f64 {
    let (lo, hi) = (-11.0, 18.5);
    let bins = ((hi - lo) / bin_width).ceil() as usize;
    let edges: Vec<f64> = (0..=bins).map(|k| lo + k as f64 * bin_width).collect();
    let mid = |k: usize, n: usize, a: f64, b: f64| a + (k as f64 + 0.5) * (b - a) / n as f64;
    // |X₃| ~ U(0, π) carries the full law of X₃⁴
    let v: Vec<f64> = (0..quad).map(|k| 1.0 + ISHIGAMI_B * mid(k, quad, 0.0, PI).powi(4)).collect();
    let s: Vec<f64> = (0..quad).map(|k| mid(k, quad, -PI, PI).sin()).collect();
    let cdf = |xi: f64, y: f64| -> f64 {
        let total: f64 = match i {
            0 => v.iter().map(|&vk| cdf_sin2(y - xi.sin() * vk)).sum(),
            1 => {
                let c = ISHIGAMI_A * xi.sin().powi(2);
                v.iter().map(|&vk| cdf_sin((y - c) / vk)).sum()
            }
            _ => {
                let v0 = 1.0 + ISHIGAMI_B * xi.powi(4);
                s.iter().map(|&sk| cdf_sin2(y - v0 * sk)).sum()
            }
        };
        total / quad as f64
    };
    let cond: Vec<Vec<f64>> = (0..k_i)
        .map(|c| {
            let xi = mid(c, k_i, -PI, PI);
            let f: Vec<f64> = edges.iter().map(|&e| cdf(xi, e)).collect();
            f.windows(2).map(|w| w[1] - w[0]).collect()
        })
        .collect();
    let cond: Vec<Vec<f64>> = cond
        .chunks(per_class)
        .map(|group| {
            (0..bins)
                .map(|b| group.iter().map(|m| m[b]).sum::<f64>() / group.len() as f64)
                .collect()
        })
        .collect();
    let k_i = cond.len();
    let mut avg = vec![0.0; bins];
    for m in &cond {
        for (a, b) in avg.iter_mut().zip(m) {
            *a += b / k_i as f64;
        }
    }
    let sum: f64 = cond
        .iter()
        .map(|m| avg.iter().zip(m).map(|(a, b)| (a - b).abs()).sum::<f64>())
        .sum();
    0.5 * sum / k_i as f64
}

/// `n` Latin-hypercube rows on [−π, π]³ and the Ishigami outputs.
pub fn ishigami_sample(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    use lh2_core::config::ParameterRange;
    use lh2_core::ugsa::{lhs_sample, ParameterSpace};
    let space = ParameterSpace::new(
        (0..3)
            .map(|k| ParameterRange {
                name: format!("x{}", k + 1),
                low: -PI,
                high: PI,
            })
            .collect(),
    )
    .unwrap();
    let s = lhs_sample(&space, n, seed).unwrap();
    let y = s.rows.iter().map(|r| ishigami(r)).collect();
    (s.rows, y)
}
