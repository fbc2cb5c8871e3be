//! Monotone piecewise-cubic Hermite interpolation (Fritsch–Carlson slopes,
//! same end conditions as SciPy's `PchipInterpolator`).
//!
//! Slopes depend only on neighbouring nodes, so a value can be evaluated from
//! a local window of at most four nodes. The 2-D tables rely on this to
//! interpolate across rows without precomputing slopes for every query.

/// Index `i` of the interval `[x[i], x[i+1]]` holding `v` (clamped to the ends).
pub(crate) fn locate(x: &[f64], v: f64) -> usize {
    let n = x.len();
    debug_assert!(n >= 2);
    if v <= x[0] {
        return 0;
    }
    if v >= x[n - 1] {
        return n - 2;
    }
    // first index with x[idx] > v, minus one
    x.partition_point(|&xi| xi <= v) - 1
}

/// Slope at node `k` of the data `(x, y)`.
#[inline]
pub(crate) fn slope_at(x: &[f64], y: &[f64], k: usize) -> f64 {
    let n = x.len();
    if n == 2 {
        return (y[1] - y[0]) / (x[1] - x[0]);
    }
    let secant = |i: usize| (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    if k == 0 {
        return edge_slope(x[1] - x[0], x[2] - x[1], secant(0), secant(1));
    }
    if k == n - 1 {
        return edge_slope(
            x[n - 1] - x[n - 2],
            x[n - 2] - x[n - 3],
            secant(n - 2),
            secant(n - 3),
        );
    }
    let (h0, h1) = (x[k] - x[k - 1], x[k + 1] - x[k]);
    let (m0, m1) = (secant(k - 1), secant(k));
    if m0 == 0.0 || m1 == 0.0 || m0.signum() != m1.signum() {
        return 0.0;
    }
    let w0 = 2.0 * h1 + h0;
    let w1 = h1 + 2.0 * h0;
    (w0 + w1) / (w0 / m0 + w1 / m1)
}

fn edge_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

/// Hermite basis weights for values and derivatives on one interval.
#[derive(Clone, Copy)]
pub(crate) struct Basis {
    pub w: [f64; 4],
    pub dw: [f64; 4],
}

impl Basis {
    #[inline]
    pub fn new(x0: f64, x1: f64, v: f64) -> Self {
        let h = x1 - x0;
        let t = (v - x0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        Self {
            w: [2.0 * t3 - 3.0 * t2 + 1.0, (t3 - 2.0 * t2 + t) * h, -2.0 * t3 + 3.0 * t2, (t3 - t2) * h],
            dw: [
                (6.0 * t2 - 6.0 * t) / h,
                3.0 * t2 - 4.0 * t + 1.0,
                (-6.0 * t2 + 6.0 * t) / h,
                3.0 * t2 - 2.0 * t,
            ],
        }
    }

    /// Weights for values only; `dw` is left zero.
    #[inline]
    pub fn value_only(x0: f64, x1: f64, v: f64) -> Self {
        let h = x1 - x0;
        let t = (v - x0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        Self {
            w: [2.0 * t3 - 3.0 * t2 + 1.0, (t3 - 2.0 * t2 + t) * h, -2.0 * t3 + 3.0 * t2, (t3 - t2) * h],
            dw: [0.0; 4],
        }
    }

    #[inline]
    pub fn value(&self, y0: f64, d0: f64, y1: f64, d1: f64) -> f64 {
        self.w[0] * y0 + self.w[1] * d0 + self.w[2] * y1 + self.w[3] * d1
    }

    #[inline]
    pub fn slope(&self, y0: f64, d0: f64, y1: f64, d1: f64) -> f64 {
        self.dw[0] * y0 + self.dw[1] * d0 + self.dw[2] * y1 + self.dw[3] * d1
    }
}

/// Cubic Hermite value on one interval.
#[inline]
pub(crate) fn hermite_value(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, v: f64) -> f64 {
    let h = x1 - x0;
    let t = (v - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

/// A 1-D monotone cubic interpolant with precomputed slopes.
#[derive(Debug, Clone)]
pub(crate) struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len());
        assert!(x.len() >= 2);
        let d = (0..x.len()).map(|k| slope_at(&x, &y, k)).collect();
        Self { x, y, d }
    }

    #[inline]
    pub fn value_in(&self, i: usize, v: f64) -> f64 {
        hermite_value(self.x[i], self.x[i + 1], self.y[i], self.y[i + 1], self.d[i], self.d[i + 1], v)
    }

    pub fn eval(&self, v: f64) -> f64 {
        self.value_in(locate(&self.x, v), v)
    }
}

/// Interpolate across a local window of rows.
///
/// `xs`/`ys` hold the rows `lo..=hi` of a larger grid, `i` is the interval
/// index inside the window. Produces the same value as a global PCHIP over
/// the full grid as long as the window contains the neighbours of `i` and
/// `i + 1` (or the three edge nodes at the boundaries).
#[inline]
pub(crate) fn window_value(xs: &[f64], ys: &[f64], i: usize, v: f64) -> f64 {
    let d0 = slope_at(xs, ys, i);
    let d1 = slope_at(xs, ys, i + 1);
    hermite_value(xs[i], xs[i + 1], ys[i], ys[i + 1], d0, d1, v)
}

/// Row window `[lo, hi]` around interval `i` of an `n`-node grid.
#[inline]
pub(crate) fn window(i: usize, n: usize) -> (usize, usize) {
    let lo = i.saturating_sub(1);
    let hi = (i + 2).min(n - 1);
    // keep three nodes at the edges for the one-sided end slopes
    let lo = if hi == n - 1 { lo.min(n.saturating_sub(3)) } else { lo };
    let hi = if lo == 0 { hi.max(2.min(n - 1)) } else { hi };
    (lo, hi)
}
