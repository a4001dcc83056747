//! Small statistical helpers shared by the diagnostic suites: least-squares
//! slopes, interpolated quantiles, and a seeded bootstrap for median
//! confidence intervals.
//!
//! Everything here is deterministic given its inputs (the bootstrap takes an
//! explicit seed), which keeps the verdict-producing diagnostics reproducible
//! end to end.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Ordinary least-squares fit `y ~ slope * x + intercept`.
///
/// Panics if fewer than two points are supplied or all `x` coincide.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len(), "linear_fit: mismatched input lengths");
    assert!(xs.len() >= 2, "linear_fit: need at least two points");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    assert!(sxx > 0.0, "linear_fit: degenerate x values");
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Quantile with linear interpolation between order statistics
/// (the common `h = (n-1) q` convention).
///
/// `q` must lie in `[0, 1]`; the input need not be sorted.
pub fn quantile(data: &[f64], q: f64) -> f64 {
    assert!(!data.is_empty(), "quantile of empty data");
    assert!((0.0..=1.0).contains(&q), "quantile level out of range: {q}");
    let mut v = data.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("quantile: NaN in data"));
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn median(data: &[f64]) -> f64 {
    quantile(data, 0.5)
}

/// Percentile-bootstrap confidence interval for the median.
///
/// Resamples `data` with replacement `resamples` times using a ChaCha8 stream
/// seeded from `seed`, and returns the `[(1-level)/2, (1+level)/2]` quantiles
/// of the resampled medians. Identical inputs give identical intervals.
pub fn bootstrap_median_ci(data: &[f64], level: f64, resamples: usize, seed: u64) -> (f64, f64) {
    assert!(!data.is_empty(), "bootstrap of empty data");
    assert!((0.0..1.0).contains(&(1.0 - level)), "confidence level out of range: {level}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut medians = Vec::with_capacity(resamples);
    let mut draw = vec![0.0; data.len()];
    for _ in 0..resamples {
        for slot in draw.iter_mut() {
            *slot = data[rng.random_range(0..data.len())];
        }
        medians.push(median(&draw));
    }
    let alpha = (1.0 - level) / 2.0;
    (quantile(&medians, alpha), quantile(&medians, 1.0 - alpha))
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_exact_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| -1.25 * x + 3.0).collect();
        let (slope, intercept) = linear_fit(&xs, &ys);
        assert!((slope + 1.25).abs() < 1e-12);
        assert!((intercept - 3.0).abs() < 1e-12);
    }

    #[test]
    fn fit_averages_symmetric_noise() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [0.1, 0.9, 2.1, 2.9];
        let (slope, _) = linear_fit(&xs, &ys);
        assert!((slope - 0.96).abs() < 1e-12);
    }

    #[test]
    fn quantile_interpolates() {
        let data = [4.0, 1.0, 3.0, 2.0, 5.0];
        assert_eq!(quantile(&data, 0.0), 1.0);
        assert_eq!(quantile(&data, 1.0), 5.0);
        assert_eq!(quantile(&data, 0.5), 3.0);
        assert_eq!(quantile(&data, 0.25), 2.0);
        assert_eq!(quantile(&data, 0.1), 1.4);
        assert_eq!(median(&[1.0, 2.0]), 1.5);
    }

    #[test]
    fn bootstrap_is_deterministic_and_brackets_median() {
        let data: Vec<f64> = (0..50).map(|i| (i as f64).sin() * 10.0).collect();
        let m = median(&data);
        let (lo, hi) = bootstrap_median_ci(&data, 0.95, 500, 42);
        let (lo2, hi2) = bootstrap_median_ci(&data, 0.95, 500, 42);
        assert_eq!((lo, hi), (lo2, hi2));
        assert!(lo <= m && m <= hi, "CI [{lo}, {hi}] misses median {m}");
        assert!(hi > lo, "noisy data should give a CI of positive width");
    }

    #[test]
    fn bootstrap_collapses_on_constant_data() {
        let data = [7.0; 20];
        let (lo, hi) = bootstrap_median_ci(&data, 0.95, 200, 1);
        assert_eq!((lo, hi), (7.0, 7.0));
    }
}
