//! Given-data moment-independent (δ) and first-order variance (S1) indices.
//!
//! Each input is cut into equal-frequency classes. δᵢ is half the
//! class-weighted L1 distance between the output density and the
//! class-conditional densities; S1ᵢ is the between-class variance of the
//! class means over the output variance. Densities are Gaussian KDEs with
//! Scott bandwidths, linearly binned onto a shared grid and convolved with
//! a sampled kernel.
//!
//! Rows are put in a canonical order first and classes are fixed from the
//! full sample, so results do not depend on the order rows are given in.
//! Bootstrap resamples reuse the classes and enter as row multiplicities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::UgsaError;

/// Smallest sample the estimators accept.
pub const MIN_SAMPLES: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GsaOptions {
    pub resamples: usize,
    pub seed: u64,
    /// Two-sided confidence level of the bootstrap interval.
    pub confidence: f64,
    pub grid_points: usize,
    pub max_classes: usize,
    pub min_class_size: usize,
}

impl Default for GsaOptions {
    fn default() -> Self {
        Self {
            resamples: 100,
            seed: 0,
            confidence: 0.95,
            grid_points: 512,
            max_classes: 48,
            min_class_size: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl IndexEstimate {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sensitivity {
    /// One per input column.
    pub delta: Vec<IndexEstimate>,
    pub s1: Vec<IndexEstimate>,
    /// Classes per input.
    pub classes: usize,
    /// The output had zero variance; every index is reported as 0.
    pub degenerate: bool,
}

/// Equal-frequency class count for `n` samples: the Plischke heuristic
/// `⌈n^(2/(7 + tanh((1500 − n)/500)))⌉`, capped at `max_classes` and at
/// `n / min_class_size`.
pub fn class_count(n: usize, opts: &GsaOptions) -> usize {
    let nf = n as f64;
    let m = nf.powf(2.0 / (7.0 + ((1500.0 - nf) / 500.0).tanh())).ceil() as usize;
    m.min(opts.max_classes).min(n / opts.min_class_size.max(1)).max(1)
}

/// δ indices with bootstrap intervals.
pub fn delta_indices(x: &[Vec<f64>], y: &[f64], opts: &GsaOptions) -> Result<Vec<IndexEstimate>, UgsaError> {
    Ok(sensitivity(x, y, opts)?.delta)
}

/// First-order indices with bootstrap intervals.
pub fn s1_indices(x: &[Vec<f64>], y: &[f64], opts: &GsaOptions) -> Result<Vec<IndexEstimate>, UgsaError> {
    Ok(sensitivity(x, y, opts)?.s1)
}

/// δ and S1 for every column of the row-major sample `x` against `y`.
pub fn sensitivity(x: &[Vec<f64>], y: &[f64], opts: &GsaOptions) -> Result<Sensitivity, UgsaError> {
    let n = x.len();
    if n != y.len() {
        return Err(UgsaError::LengthMismatch { x: n, y: y.len() });
    }
    if n < MIN_SAMPLES {
        return Err(UgsaError::TooFewSamples { n, min: MIN_SAMPLES });
    }
    let d = x[0].len();
    for (r, row) in x.iter().enumerate() {
        if row.len() != d {
            return Err(UgsaError::RowWidth {
                row: r,
                got: row.len(),
                expected: d,
            });
        }
        if !(y[r].is_finite() && row.iter().all(|v| v.is_finite())) {
            return Err(UgsaError::NonFinite(r));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        y[a].total_cmp(&y[b])
            .then_with(|| x[a].iter().zip(&x[b]).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal))
    });
    let ys: Vec<f64> = order.iter().map(|&r| y[r]).collect();
    let m = class_count(n, opts);
    let classes: Vec<Vec<Vec<usize>>> = (0..d)
        .map(|j| {
            let mut by_x: Vec<usize> = (0..n).collect();
            by_x.sort_by(|&a, &b| x[order[a]][j].total_cmp(&x[order[b]][j]).then(a.cmp(&b)));
            let mut cls = vec![Vec::new(); m];
            for (rank, &row) in by_x.iter().enumerate() {
                cls[rank * m / n].push(row);
            }
            cls
        })
        .collect();

    let zero = IndexEstimate {
        value: 0.0,
        ci_low: 0.0,
        ci_high: 0.0,
    };
    if ys[0] == ys[n - 1] {
        return Ok(Sensitivity {
            delta: vec![zero; d],
            s1: vec![zero; d],
            classes: m,
            degenerate: true,
        });
    }

    let est = Estimator {
        y: &ys,
        classes: &classes,
        grid_points: opts.grid_points,
    };
    let (delta, s1) = est.eval(&vec![1.0; n]);
    for &v in &delta {
        if !(-1e-12..=1.0 + 1e-9).contains(&v) {
            return Err(UgsaError::IndexOutOfRange { name: "delta", value: v });
        }
    }
    for &v in &s1 {
        if !(-0.05..=1.05).contains(&v) {
            return Err(UgsaError::IndexOutOfRange { name: "S1", value: v });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut boot_delta = vec![Vec::with_capacity(opts.resamples); d];
    let mut boot_s1 = vec![Vec::with_capacity(opts.resamples); d];
    let mut w = vec![0.0; n];
    for _ in 0..opts.resamples {
        w.fill(0.0);
        for _ in 0..n {
            w[rng.gen_range(0..n)] += 1.0;
        }
        let (bd, bs) = est.eval(&w);
        for j in 0..d {
            boot_delta[j].push(bd[j]);
            boot_s1[j].push(bs[j]);
        }
    }
    let alpha = 1.0 - opts.confidence;
    let pack = |point: &[f64], boot: &mut [Vec<f64>]| -> Vec<IndexEstimate> {
        point
            .iter()
            .zip(boot.iter_mut())
            .map(|(&value, b)| {
                if b.is_empty() {
                    return IndexEstimate {
                        value,
                        ci_low: value,
                        ci_high: value,
                    };
                }
                b.sort_by(f64::total_cmp);
                IndexEstimate {
                    value,
                    ci_low: quantile(b, 0.5 * alpha),
                    ci_high: quantile(b, 1.0 - 0.5 * alpha),
                }
            })
            .collect()
    };
    Ok(Sensitivity {
        delta: pack(&delta, &mut boot_delta),
        s1: pack(&s1, &mut boot_s1),
        classes: m,
        degenerate: false,
    })
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + f * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

struct Estimator<'a> {
    /// Outputs in canonical order.
    y: &'a [f64],
    /// `classes[j][m]` lists rows of class `m` for input `j`.
    classes: &'a [Vec<Vec<usize>>],
    grid_points: usize,
}

/// Weighted moments over the rows `idx` (all rows when `None`).
struct Moments {
    weight: f64,
    mean: f64,
    /// Population variance.
    var: f64,
    /// Scott bandwidth, `σ·n^(−1/5)` with the sample standard deviation.
    bandwidth: f64,
    min: f64,
    max: f64,
}

impl Estimator<'_> {
    fn moments(&self, w: &[f64], idx: Option<&[usize]>) -> Moments {
        let mut sw = 0.0;
        let mut sum = 0.0;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut visit = |r: usize| {
            let wr = w[r];
            if wr > 0.0 {
                sw += wr;
                sum += wr * self.y[r];
                min = min.min(self.y[r]);
                max = max.max(self.y[r]);
            }
        };
        match idx {
            Some(idx) => idx.iter().for_each(|&r| visit(r)),
            None => (0..self.y.len()).for_each(&mut visit),
        }
        if sw == 0.0 {
            return Moments {
                weight: 0.0,
                mean: 0.0,
                var: 0.0,
                bandwidth: 0.0,
                min: 0.0,
                max: 0.0,
            };
        }
        let mean = sum / sw;
        let mut ss = 0.0;
        let mut acc = |r: usize| {
            if w[r] > 0.0 {
                let e = self.y[r] - mean;
                ss += w[r] * e * e;
            }
        };
        match idx {
            Some(idx) => idx.iter().for_each(|&r| acc(r)),
            None => (0..self.y.len()).for_each(&mut acc),
        }
        let var = ss / sw;
        // weights are bootstrap multiplicities: duplicated rows count as
        // separate observations in the variance and in Scott's rule
        let bandwidth = if sw > 1.0 {
            (ss / (sw - 1.0)).sqrt() * sw.powf(-0.2)
        } else {
            0.0
        };
        Moments {
            weight: sw,
            mean,
            var,
            bandwidth,
            min,
            max,
        }
    }

    /// `(δ, S1)` per input for row weights `w`.
    fn eval(&self, w: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let all = self.moments(w, None);
        let d = self.classes.len();
        if !(all.var > 0.0 && all.bandwidth > 0.0) {
            return (vec![0.0; d], vec![0.0; d]);
        }
        let g = self.grid_points;
        let lo = all.min - 3.0 * all.bandwidth;
        let hi = all.max + 3.0 * all.bandwidth;
        let dy = (hi - lo) / (g - 1) as f64;
        let grid = Grid { lo, dy, points: g };
        let f_all = grid.kde(self.y, w, None, all.weight, all.bandwidth);
        let mut delta = vec![0.0; d];
        let mut s1 = vec![0.0; d];
        let mut bins = vec![0.0; g];
        let mut dens = vec![0.0; g];
        for j in 0..d {
            let mut dj = 0.0;
            let mut between = 0.0;
            for cls in &self.classes[j] {
                let mo = self.moments(w, Some(cls));
                if mo.weight == 0.0 {
                    continue;
                }
                let frac = mo.weight / all.weight;
                between += frac * (mo.mean - all.mean).powi(2);
                // single-valued class: fall back to the pooled bandwidth
                let h = if mo.bandwidth > 0.0 { mo.bandwidth } else { all.bandwidth };
                grid.bin(self.y, w, Some(cls), mo.weight, &mut bins);
                grid.convolve(&bins, h, &mut dens);
                let l1: f64 = f_all.iter().zip(&dens).map(|(a, b)| (a - b).abs()).sum::<f64>() * dy;
                dj += frac * 0.5 * l1;
            }
            delta[j] = dj.min(1.0);
            s1[j] = between / all.var;
        }
        (delta, s1)
    }
}

struct Grid {
    lo: f64,
    dy: f64,
    points: usize,
}

impl Grid {
    fn kde(&self, y: &[f64], w: &[f64], idx: Option<&[usize]>, weight: f64, h: f64) -> Vec<f64> {
        let mut bins = vec![0.0; self.points];
        let mut out = vec![0.0; self.points];
        self.bin(y, w, idx, weight, &mut bins);
        self.convolve(&bins, h, &mut out);
        out
    }

    /// Linear binning of the weighted rows; `bins` sums to 1.
    fn bin(&self, y: &[f64], w: &[f64], idx: Option<&[usize]>, weight: f64, bins: &mut [f64]) {
        bins.fill(0.0);
        let last = self.points - 1;
        let mut put = |r: usize| {
            if w[r] == 0.0 {
                return;
            }
            let pos = ((y[r] - self.lo) / self.dy).clamp(0.0, last as f64);
            let i = (pos.floor() as usize).min(last - 1);
            let f = pos - i as f64;
            let m = w[r] / weight;
            bins[i] += (1.0 - f) * m;
            bins[i + 1] += f * m;
        };
        match idx {
            Some(idx) => idx.iter().for_each(|&r| put(r)),
            None => (0..y.len()).for_each(&mut put),
        }
    }

    /// Density from binned mass and a Gaussian kernel of width `h`, the
    /// sampled kernel normalized to unit mass on the grid spacing.
    fn convolve(&self, bins: &[f64], h: f64, out: &mut [f64]) {
        let g = self.points;
        let reach = ((5.0 * h / self.dy).ceil() as usize).clamp(1, g - 1);
        let kernel: Vec<f64> = (0..=reach)
            .map(|k| (-0.5 * (k as f64 * self.dy / h).powi(2)).exp())
            .collect();
        let norm = (kernel[0] + 2.0 * kernel[1..].iter().sum::<f64>()) * self.dy;
        out.fill(0.0);
        for (i, &b) in bins.iter().enumerate() {
            if b == 0.0 {
                continue;
            }
            let a = b / norm;
            let from = i.saturating_sub(reach);
            let to = (i + reach).min(g - 1);
            for (k, o) in out[from..=to].iter_mut().enumerate() {
                *o += a * kernel[(from + k).abs_diff(i)];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect()
    }

    #[test]
    fn class_count_follows_heuristic() {
        let o = GsaOptions::default();
        assert_eq!(class_count(1000, &o), 6);
        assert_eq!(class_count(8192, &o), 21);
        assert_eq!(class_count(1_000_000, &o), 48);
        assert_eq!(class_count(300, &o), 5);
        assert_eq!(class_count(300, &GsaOptions { min_class_size: 100, ..o }), 3);
    }

    #[test]
    fn additive_model_splits_variance_evenly() {
        let x = design(4000, 3, 1);
        let y: Vec<f64> = x.iter().map(|r| r.iter().sum()).collect();
        let s = sensitivity(&x, &y, &GsaOptions { resamples: 0, ..Default::default() }).unwrap();
        let total: f64 = s.s1.iter().map(|e| e.value).sum();
        for e in &s.s1 {
            assert!((e.value - 1.0 / 3.0).abs() < 0.03, "{s:?}");
        }
        assert!((total - 1.0).abs() < 0.05);
    }

    #[test]
    fn identity_output_dominates() {
        let x = design(2000, 2, 2);
        let y: Vec<f64> = x.iter().map(|r| r[0]).collect();
        let s = sensitivity(&x, &y, &GsaOptions { resamples: 0, ..Default::default() }).unwrap();
        assert!(s.s1[0].value > 0.95 && s.s1[1].value.abs() < 0.02, "{s:?}");
        assert!(s.delta[0].value > 0.7 && s.delta[1].value < 0.1, "{s:?}");
    }

    #[test]
    fn constant_output_is_flagged() {
        let x = design(400, 2, 3);
        let s = sensitivity(&x, &vec![2.0; 400], &GsaOptions::default()).unwrap();
        assert!(s.degenerate);
        assert!(s.delta.iter().chain(&s.s1).all(|e| e.value == 0.0));
    }

    #[test]
    fn rejects_small_or_ragged_input() {
        let x = design(100, 2, 4);
        assert!(sensitivity(&x, &vec![0.0; 100], &GsaOptions::default()).is_err());
        let x = design(400, 2, 4);
        assert!(sensitivity(&x, &vec![0.0; 399], &GsaOptions::default()).is_err());
    }

    #[test]
    fn intervals_are_ordered() {
        let x = design(600, 2, 5);
        let y: Vec<f64> = x.iter().map(|r| r[0] + 0.3 * r[1] * r[1]).collect();
        let s = sensitivity(&x, &y, &GsaOptions { resamples: 40, ..Default::default() }).unwrap();
        for e in s.delta.iter().chain(&s.s1) {
            assert!(e.ci_low <= e.ci_high);
        }
    }

    #[test]
    fn kernel_has_unit_mass() {
        let grid = Grid { lo: 0.0, dy: 0.01, points: 512 };
        let mut bins = vec![0.0; 512];
        bins[256] = 1.0;
        let mut out = vec![0.0; 512];
        for h in [0.001, 0.02, 0.3] {
            grid.convolve(&bins, h, &mut out);
            let mass = out.iter().sum::<f64>() * grid.dy;
            assert!((mass - 1.0).abs() < 1e-12 || h > 0.2, "h={h}: {mass}");
        }
    }
}
