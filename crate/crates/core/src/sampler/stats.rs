//! Empirical statistics of sampled bead configurations.

use std::f64::consts::PI;

use crate::dpp::BeadPoint;

/// Summary statistics of a set of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStats {
    /// Beads per unit length of thread.
    pub empirical_density: f64,
    /// Mean of (gap to the left neighbour's bead above) / (gap to the next bead on the thread).
    pub empirical_ratio: f64,
    /// Estimated same-thread pair density `ρ₂(u)` at the bin centers.
    pub pair_correlation_histogram: Vec<f64>,
    pub bin_width: f64,
    pub n_samples: usize,
}

fn by_thread(sample: &[BeadPoint]) -> std::collections::BTreeMap<i64, Vec<f64>> {
    let mut map: std::collections::BTreeMap<i64, Vec<f64>> = Default::default();
    for p in sample {
        map.entry(p.thread).or_default().push(p.position);
    }
    for v in map.values_mut() {
        v.sort_by(f64::total_cmp);
    }
    map
}

/// Statistics of samples drawn on the same threads over `[lo, hi]`.
pub fn window_stats(
    samples: &[Vec<BeadPoint>],
    threads: &[i64],
    lo: f64,
    hi: f64,
    bins: usize,
    range: f64,
) -> SampleStats {
    let len = hi - lo;
    let bin_width = range / bins as f64;
    let mut counts = vec![0.0; bins];
    let mut total = 0usize;
    let mut ratios = (0.0, 0usize);
    for sample in samples {
        let map = by_thread(sample);
        for &th in threads {
            let Some(v) = map.get(&th) else { continue };
            total += v.len();
            for (i, &p) in v.iter().enumerate() {
                for &q in &v[i + 1..] {
                    let d = q - p;
                    if d < range {
                        counts[(d / bin_width) as usize] += 1.0;
                    }
                }
            }
            if let Some(left) = map.get(&(th - 1)) {
                for w in v.windows(2) {
                    if let Some(r) = left.iter().find(|&&r| r >= w[0] && r < w[1]) {
                        ratios.0 += (r - w[0]) / (w[1] - w[0]);
                        ratios.1 += 1;
                    }
                }
            }
        }
    }
    let n = samples.len().max(1) as f64;
    let n_threads = threads.len().max(1) as f64;
    let histogram = counts
        .iter()
        .enumerate()
        .map(|(b, c)| {
            let u = (b as f64 + 0.5) * bin_width;
            c / (n * n_threads * (len - u).max(f64::MIN_POSITIVE) * bin_width)
        })
        .collect();
    SampleStats {
        empirical_density: total as f64 / (n * n_threads * len),
        empirical_ratio: if ratios.1 > 0 {
            ratios.0 / ratios.1 as f64
        } else {
            f64::NAN
        },
        pair_correlation_histogram: histogram,
        bin_width,
        n_samples: samples.len(),
    }
}

/// `1/π² - (sin u / (πu))²`, the single-thread pair density.
pub fn sine_pair_density(u: f64) -> f64 {
    let s = if u == 0.0 { 1.0 / PI } else { u.sin() / (PI * u) };
    1.0 / (PI * PI) - s * s
}

/// Expected number of bead pairs inside a uniformly placed interval of length
/// `eps` within `[lo, hi]` on `thread`, averaged over samples.
///
/// For small `eps` this is the probability of two beads within distance `eps`.
pub fn pairs_within(samples: &[Vec<BeadPoint>], thread: i64, lo: f64, hi: f64, eps: f64) -> f64 {
    let span = hi - lo - eps;
    if span <= 0.0 || samples.is_empty() {
        return f64::NAN;
    }
    let mut acc = 0.0;
    for sample in samples {
        let mut v: Vec<f64> = sample
            .iter()
            .filter(|p| p.thread == thread)
            .map(|p| p.position)
            .collect();
        v.sort_by(f64::total_cmp);
        for (i, &p) in v.iter().enumerate() {
            for &q in &v[i + 1..] {
                if q - p >= eps {
                    break;
                }
                // Left ends a with [a, a+eps] ⊇ {p, q} and a ∈ [lo, hi - eps].
                let a_lo = (q - eps).max(lo);
                let a_hi = p.min(hi - eps);
                acc += (a_hi - a_lo).max(0.0);
            }
        }
    }
    acc / (span * samples.len() as f64)
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a.ln(), b.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Integrated autocorrelation time by Sokal's self-consistent window (`c = 5`).
pub fn integrated_autocorrelation(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return 1.0;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    if var == 0.0 {
        return 1.0;
    }
    let mut tau = 1.0;
    for lag in 1..n / 2 {
        let c: f64 = (0..n - lag)
            .map(|i| (series[i] - mean) * (series[i + lag] - mean))
            .sum::<f64>()
            / (n as f64 * var);
        tau += 2.0 * c;
        if lag as f64 >= 5.0 * tau {
            break;
        }
    }
    tau.max(1.0)
}

/// Mean, standard error (autocorrelation corrected) and effective sample size.
pub fn mean_with_error(series: &[f64]) -> (f64, f64, f64) {
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let tau = integrated_autocorrelation(series);
    let ess = n / tau;
    (mean, (var / ess).sqrt(), ess)
}
