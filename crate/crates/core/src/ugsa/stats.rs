//! Histograms and summary statistics of KPI samples.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` bin edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Equal-width histogram over `[min, max]`; the last bin is closed. A
/// sample with no spread gives one bin holding every value.
pub fn histogram(values: &[f64], bins: usize) -> Histogram {
    let (min, max) = min_max(values);
    if values.is_empty() || min == max || bins <= 1 {
        return Histogram {
            edges: vec![min, max],
            counts: vec![values.len()],
        };
    }
    let width = (max - min) / bins as f64;
    let mut counts = vec![0; bins];
    for &v in values {
        let k = (((v - min) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let edges = (0..=bins)
        .map(|k| if k == bins { max } else { min + k as f64 * width })
        .collect();
    Histogram { edges, counts }
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiStatistics {
    pub name: String,
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub histogram: Histogram,
    /// `(threshold, samples strictly above it)`
    pub exceedances: Vec<(f64, usize)>,
}

/// Summary of one KPI over the successful samples.
pub fn kpi_statistics(name: &str, values: &[f64], bins: usize, thresholds: &[f64]) -> KpiStatistics {
    let (min, max) = min_max(values);
    let mean = if values.is_empty() {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    };
    KpiStatistics {
        name: name.to_string(),
        count: values.len(),
        mean,
        min,
        max,
        histogram: histogram(values, bins),
        exceedances: thresholds
            .iter()
            .map(|&t| (t, values.iter().filter(|&&v| v > t).count()))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_values_give_one_bin() {
        let h = histogram(&[0.3; 7], 50);
        assert_eq!(h.counts, vec![7]);
        assert_eq!(h.edges, vec![0.3, 0.3]);
    }

    #[test]
    fn counts_cover_every_value() {
        let v: Vec<f64> = (0..101).map(|k| k as f64 / 100.0).collect();
        let h = histogram(&v, 10);
        assert_eq!(h.counts.iter().sum::<usize>(), 101);
        assert_eq!(h.counts.len(), 10);
        assert_eq!(*h.edges.last().unwrap(), 1.0);
        assert_eq!(h.counts[9], 11);
    }

    #[test]
    fn summary_and_thresholds() {
        let v = [0.1, 0.2, 0.6, 0.7];
        let s = kpi_statistics("bog", &v, 5, &[0.0, 0.5, 1.0]);
        assert_eq!(s.mean, (0.1 + 0.2 + 0.6 + 0.7) / 4.0);
        assert_eq!((s.min, s.max), (0.1, 0.7));
        assert_eq!(s.exceedances, vec![(0.0, 4), (0.5, 2), (1.0, 0)]);
    }
}
