//! Determinantal-process computations for the continuous bead model.
//!
//! Correlation functions are determinants of `J_γ`; factorial moments are
//! their integrals over a window; counting distributions and gap
//! probabilities come from the Fredholm determinant, discretized with
//! Gauss–Legendre nodes (Nyström).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{BeadKernel, KernelParams};
use crate::quad::gauss_legendre_on;

/// A point of `ℤ × ℝ`: thread index and rescaled position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeadPoint {
    pub thread: i64,
    pub position: f64,
}

/// A segment `[lo, hi]` of one thread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub thread: i64,
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, p: BeadPoint) -> bool {
        p.thread == self.thread && p.position >= self.lo && p.position <= self.hi
    }
}

/// A finite union of disjoint segments.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSpec {
    intervals: Vec<Interval>,
}

impl WindowSpec {
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        for (i, a) in intervals.iter().enumerate() {
            if !(a.lo.is_finite() && a.hi.is_finite()) {
                return Err(Error::domain(format!("interval {i} has a non-finite endpoint")));
            }
            if a.lo > a.hi {
                return Err(Error::domain(format!("interval {i}: lo = {} > hi = {}", a.lo, a.hi)));
            }
            for b in &intervals[..i] {
                if a.thread == b.thread && a.lo < b.hi && b.lo < a.hi {
                    return Err(Error::invalid(format!(
                        "intervals [{}, {}] and [{}, {}] overlap on thread {}",
                        b.lo, b.hi, a.lo, a.hi, a.thread
                    )));
                }
            }
        }
        Ok(Self { intervals })
    }

    /// `[lo, hi]` on a single thread.
    pub fn single(thread: i64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![Interval { thread, lo, hi }])
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(Interval::len).sum()
    }

    fn single_thread(&self) -> bool {
        self.intervals.windows(2).all(|w| w[0].thread == w[1].thread)
    }
}

/// `det[J_γ(x_i - x_j, ξ_i - ξ_j)]`, the k-point correlation density.
pub fn correlation(params: KernelParams, points: &[BeadPoint]) -> Result<f64> {
    if points.is_empty() {
        return Ok(1.0);
    }
    Ok(BeadKernel::new(params).matrix(points)?.determinant())
}

/// Largest total order accepted by [`factorial_moment`].
pub const MAX_MOMENT_ORDER: usize = 6;
const MAX_TENSOR_POINTS: usize = 4_000_000;

fn moment_nodes(len: f64) -> usize {
    (4.0 + 3.0 * len).ceil().max(6.0) as usize
}

/// `∫ det[J_γ] dξ` over `I_1^{n_1} × … × I_k^{n_k}` by tensor-product Gauss–Legendre.
pub fn factorial_moment(params: KernelParams, window: &WindowSpec, orders: &[usize]) -> Result<f64> {
    let intervals = window.intervals();
    if orders.len() != intervals.len() {
        return Err(Error::invalid(format!(
            "{} orders given for {} intervals",
            orders.len(),
            intervals.len()
        )));
    }
    let total: usize = orders.iter().sum();
    if total > MAX_MOMENT_ORDER {
        return Err(Error::TooLarge {
            requested: total,
            max: MAX_MOMENT_ORDER,
        });
    }
    if total == 0 {
        return Ok(1.0);
    }

    let mut counts: Vec<usize> = intervals.iter().map(|i| moment_nodes(i.len())).collect();
    let points = |c: &[usize]| -> f64 { c.iter().zip(orders).map(|(&q, &n)| (q as f64).powi(n as i32)).product() };
    while points(&counts) > MAX_TENSOR_POINTS as f64 {
        let widest = (0..counts.len())
            .filter(|&i| orders[i] > 0)
            .max_by_key(|&i| counts[i])
            .unwrap();
        if counts[widest] <= 4 {
            break;
        }
        counts[widest] -= 1;
    }

    // Global node list; variable v ranges over the nodes of interval owner[v].
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut offsets = Vec::new();
    for (iv, &q) in intervals.iter().zip(&counts) {
        offsets.push(nodes.len());
        let (x, w) = gauss_legendre_on(q, iv.lo, iv.hi);
        nodes.extend(x.iter().map(|&position| BeadPoint {
            thread: iv.thread,
            position,
        }));
        weights.extend(w);
    }
    let kmat = BeadKernel::new(params).matrix(&nodes)?;
    let owner: Vec<usize> = orders
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| std::iter::repeat_n(i, n))
        .collect();
    let radix: Vec<usize> = owner.iter().map(|&i| counts[i]).collect();
    let n_points: usize = radix.iter().product();

    let sum: f64 = (0..n_points)
        .into_par_iter()
        .map_init(
            || (vec![0usize; total], vec![0.0; total * total]),
            |(idx, buf), mut code| {
                let mut weight = 1.0;
                for v in 0..total {
                    let local = code % radix[v];
                    code /= radix[v];
                    idx[v] = offsets[owner[v]] + local;
                    weight *= weights[idx[v]];
                }
                for r in 0..total {
                    for c in 0..total {
                        buf[r * total + c] = kmat[(idx[r], idx[c])];
                    }
                }
                weight * det_in_place(buf, total)
            },
        )
        .sum();
    Ok(sum)
}

/// Determinant by Gaussian elimination with partial pivoting; destroys `a`.
fn det_in_place(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for k in 0..n {
        let mut piv = k;
        for i in k + 1..n {
            if a[i * n + k].abs() > a[piv * n + k].abs() {
                piv = i;
            }
        }
        let p = a[piv * n + k];
        if p == 0.0 {
            return 0.0;
        }
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            det = -det;
        }
        det *= p;
        for i in k + 1..n {
            let f = a[i * n + k] / p;
            if f != 0.0 {
                for c in k + 1..n {
                    a[i * n + c] -= f * a[k * n + c];
                }
            }
        }
    }
    det
}

/// Nyström discretization `W^{1/2} K W^{1/2}` of `J_γ` restricted to a window.
#[derive(Debug, Clone)]
pub struct Nystrom {
    /// Interval index of each node.
    pub owner: Vec<usize>,
    pub matrix: DMatrix<f64>,
    /// `max |J|` over node pairs.
    pub entry_bound: f64,
}

impl Nystrom {
    pub fn new(params: KernelParams, window: &WindowSpec, nodes_per_interval: &[usize]) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut sqrt_w = Vec::new();
        let mut owner = Vec::new();
        for (i, (iv, &q)) in window.intervals().iter().zip(nodes_per_interval).enumerate() {
            if iv.is_empty() {
                continue;
            }
            let (x, w) = gauss_legendre_on(q, iv.lo, iv.hi);
            nodes.extend(x.iter().map(|&position| BeadPoint {
                thread: iv.thread,
                position,
            }));
            sqrt_w.extend(w.iter().map(|w| w.sqrt()));
            owner.extend(std::iter::repeat_n(i, q));
        }
        let k = BeadKernel::new(params).matrix(&nodes)?;
        let entry_bound = k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let n = nodes.len();
        let matrix = DMatrix::from_fn(n, n, |i, j| sqrt_w[i] * k[(i, j)] * sqrt_w[j]);
        Ok(Self {
            owner,
            matrix,
            entry_bound,
        })
    }

    pub fn with_default_nodes(params: KernelParams, window: &WindowSpec) -> Result<Self> {
        let counts: Vec<usize> = window.intervals().iter().map(|i| default_nodes(i.len())).collect();
        Self::new(params, window, &counts)
    }

    /// `det(I - Σ_i (1 - z_i) χ_i K)`.
    pub fn generating_function(&self, z: &[Complex64]) -> Complex64 {
        let n = self.matrix.nrows();
        let m = DMatrix::from_fn(n, n, |i, j| {
            let d = if i == j { 1.0 } else { 0.0 };
            Complex64::new(d, 0.0) - (1.0 - z[self.owner[i]]) * self.matrix[(i, j)]
        });
        m.determinant()
    }

    /// `det(I - K)` on the window.
    pub fn gap(&self) -> f64 {
        let n = self.matrix.nrows();
        (DMatrix::identity(n, n) - &self.matrix).determinant()
    }
}

fn default_nodes(len: f64) -> usize {
    (4.0 * len + 16.0).ceil().max(20.0) as usize
}

/// Generating function `E[∏ z_i^{X_{I_i}}]` at real arguments.
pub fn generating_function(params: KernelParams, window: &WindowSpec, z: &[f64]) -> Result<f64> {
    if z.len() != window.intervals().len() {
        return Err(Error::invalid("one generating variable per interval is required"));
    }
    let ny = Nystrom::with_default_nodes(params, window)?;
    let zc: Vec<Complex64> = z.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Ok(ny.generating_function(&zc).re)
}

/// Tolerance for the Nyström self-convergence check in [`gap_probability`].
pub const GAP_TOL: f64 = 1e-10;

/// `det(I - χ_{[0,s]} J χ_{[0,s]})` on one thread with `n` Gauss–Legendre nodes.
pub fn gap_probability_nodes(params: KernelParams, s: f64, n: usize) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::domain(format!("gap length s = {s} must be nonnegative")));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    let w = WindowSpec::single(0, 0.0, s)?;
    Ok(Nystrom::new(params, &w, &[n])?.gap().clamp(0.0, 1.0))
}

/// Probability of no bead in `[0, s]` on one thread.
///
/// Starts at 40 nodes and doubles until two successive values agree to [`GAP_TOL`].
pub fn gap_probability(params: KernelParams, s: f64) -> Result<f64> {
    let mut n = 40;
    let mut prev = gap_probability_nodes(params, s, n)?;
    while n <= 1280 {
        n *= 2;
        let next = gap_probability_nodes(params, s, n)?;
        if (next - prev).abs() <= GAP_TOL {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Accuracy {
        context: format!("Nyström gap probability at s = {s}"),
        estimate: f64::NAN,
        tolerance: GAP_TOL,
    })
}

/// Largest per-interval count accepted by [`counting_distribution`].
pub const MAX_COUNT: usize = 6;
const MAX_GRID: usize = 200_000;

/// Joint law of `(X_{I_1}, …, X_{I_k})` restricted to counts `≤ max_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution {
    pub support: Vec<Vec<usize>>,
    pub probabilities: Vec<f64>,
    /// Bound on the series terms beyond the highest order represented.
    pub truncation_bound: f64,
    /// Entries that came out negative, with their raw values, before clamping to 0.
    pub clamped: Vec<(usize, f64)>,
    /// Change of the window's gap probability when the node count is doubled.
    ///
    /// Single-thread kernels are analytic and this is at roundoff level. Across
    /// neighbouring threads `J_γ(-1, ·)` jumps at the origin and the Nyström
    /// rule converges only algebraically.
    pub discretization_error: f64,
}

impl CountDistribution {
    pub fn probability(&self, counts: &[usize]) -> Option<f64> {
        self.support
            .iter()
            .position(|s| s == counts)
            .map(|i| self.probabilities[i])
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Mean of the count in interval `i`, from the tabulated support.
    pub fn mean(&self, i: usize) -> f64 {
        self.support
            .iter()
            .zip(&self.probabilities)
            .map(|(s, p)| s[i] as f64 * p)
            .sum()
    }

    pub fn variance(&self, i: usize) -> f64 {
        let m = self.mean(i);
        self.support
            .iter()
            .zip(&self.probabilities)
            .map(|(s, p)| (s[i] as f64 - m).powi(2) * p)
            .sum()
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `Σ_{j>m} c^j j^{pj} / j!`, summed in logs until the terms are decreasing and negligible.
fn hadamard_tail(c: f64, power: f64, m: usize) -> f64 {
    let log_term = |j: usize| {
        let jf = j as f64;
        jf * c.ln() + power * jf * jf.ln() - ln_factorial(j)
    };
    let mut total = 0.0;
    let mut prev = f64::INFINITY;
    for j in m + 1..100_000 {
        let lt = log_term(j);
        let term = lt.exp();
        total += term;
        if lt < prev && (term <= 1e-20 * total || term < 1e-300) {
            return total;
        }
        prev = lt;
    }
    f64::INFINITY
}

/// Joint counting distribution of the window by the alternating series
/// `P(n) = Σ_{m≥n} (-1)^{|m-n|} ∏ C(m_i, n_i) A(m) / m!`.
///
/// The factorial moments `A(m)/m!` are the Taylor coefficients of the
/// Nyström-discretized Fredholm determinant `det(I + Σ w_i χ_i K)` in
/// `w = z - 1`, extracted exactly (the discretized determinant is a polynomial)
/// by a multivariate DFT on the polycircle `|w_i| = 4`.
pub fn counting_distribution(params: KernelParams, window: &WindowSpec, max_n: usize) -> Result<CountDistribution> {
    if max_n > MAX_COUNT {
        return Err(Error::TooLarge {
            requested: max_n,
            max: MAX_COUNT,
        });
    }
    let intervals = window.intervals();
    let k = intervals.len();
    if k == 0 {
        return Ok(CountDistribution {
            support: vec![vec![]],
            probabilities: vec![1.0],
            truncation_bound: 0.0,
            clamped: vec![],
            discretization_error: 0.0,
        });
    }
    let counts: Vec<usize> = intervals
        .iter()
        .map(|i| if i.is_empty() { 0 } else { default_nodes(i.len()) })
        .collect();
    // Polynomial degree in w_i is the node count of interval i.
    let sizes: Vec<usize> = counts.iter().map(|&q| q + 1).collect();
    let grid: usize = sizes.iter().product();
    if grid > MAX_GRID {
        return Err(Error::TooLarge {
            requested: grid,
            max: MAX_GRID,
        });
    }
    let ny = Nystrom::new(params, window, &counts)?;

    const RADIUS: f64 = 4.0;
    let values: Vec<Complex64> = (0..grid)
        .into_par_iter()
        .map(|mut code| {
            let z: Vec<Complex64> = sizes
                .iter()
                .map(|&p| {
                    let j = code % p;
                    code /= p;
                    1.0 + Complex64::from_polar(RADIUS, 2.0 * PI * j as f64 / p as f64)
                })
                .collect();
            ny.generating_function(&z)
        })
        .collect();
    let coeffs = multi_dft(&values, &sizes);

    // Coefficient of ∏ w_i^{m_i}, unscaled.
    let coef = |m: &[usize]| -> f64 {
        let mut code = 0;
        let mut stride = 1;
        let mut scale = 1.0;
        for (i, &mi) in m.iter().enumerate() {
            code += mi * stride;
            stride *= sizes[i];
            scale *= RADIUS.powi(mi as i32);
        }
        coeffs[code].re / scale
    };

    let n_support = (max_n + 1).pow(k as u32);
    let mut support = Vec::with_capacity(n_support);
    let mut probabilities = Vec::with_capacity(n_support);
    let mut clamped = Vec::new();
    for code in 0..n_support {
        let mut c = code;
        let n: Vec<usize> = (0..k)
            .map(|_| {
                let v = c % (max_n + 1);
                c /= max_n + 1;
                v
            })
            .collect();
        // Sum over m ≥ n inside the coefficient box.
        let mut p = 0.0;
        let ranges: Vec<usize> = (0..k).map(|i| sizes[i].saturating_sub(n[i])).collect();
        let inner: usize = ranges.iter().product();
        for mcode in 0..inner {
            let mut c = mcode;
            let mut m = vec![0; k];
            let mut weight = 1.0;
            for i in 0..k {
                let d = c % ranges[i];
                c /= ranges[i];
                m[i] = n[i] + d;
                weight *= binomial(m[i], n[i]);
                if d % 2 == 1 {
                    weight = -weight;
                }
            }
            p += weight * coef(&m);
        }
        let idx = support.len();
        if p < 0.0 {
            clamped.push((idx, p));
            p = 0.0;
        }
        support.push(n);
        probabilities.push(p);
    }

    // Orders not represented: any m outside the box has |m| > min_i q_i.
    let min_order = counts.iter().copied().min().unwrap_or(0);
    let len = window.total_length();
    let truncation_bound = if window.single_thread() {
        // Positive semidefinite kernel: det ≤ ∏ diagonal = π^{-m}.
        hadamard_tail(2.0 * len / PI, 0.0, min_order)
    } else {
        hadamard_tail(2.0 * len * ny.entry_bound, 0.5, min_order)
    };

    let doubled: Vec<usize> = counts.iter().map(|q| 2 * q).collect();
    let discretization_error = (Nystrom::new(params, window, &doubled)?.gap() - ny.gap()).abs();

    Ok(CountDistribution {
        support,
        probabilities,
        truncation_bound,
        clamped,
        discretization_error,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Normalized inverse DFT along each axis of a row-major (first axis fastest) grid.
fn multi_dft(values: &[Complex64], sizes: &[usize]) -> Vec<Complex64> {
    let mut data = values.to_vec();
    let mut stride = 1;
    for &p in sizes {
        let block = stride * p;
        let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
        let roots: Vec<Complex64> = (0..p)
            .map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / p as f64))
            .collect();
        for base in (0..data.len()).step_by(block) {
            for off in 0..stride {
                for m in 0..p {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..p {
                        acc += data[base + off + j * stride] * roots[(j * m) % p];
                    }
                    out[base + off + m * stride] = acc / p as f64;
                }
            }
        }
        data = out;
        stride = block;
    }
    data
}

/// Mean ratio of the gap to the upper-left neighbour over the gap on a thread: `arccos(γ)/π`.
pub fn average_ratio(gamma: f64) -> Result<f64> {
    KernelParams::new(gamma)?;
    Ok(gamma.acos() / PI)
}

/// Particle density of the associated exclusion process: `1 - arccos(γ)/π`.
pub fn particle_density(gamma: f64) -> Result<f64> {
    Ok(1.0 - average_ratio(gamma)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_determinants() {
        let mut a = [2.0, 1.0, 1.0, 3.0];
        assert!((det_in_place(&mut a, 2) - 5.0).abs() < 1e-15);
        let mut b = [0.0, 1.0, 1.0, 0.0];
        assert!((det_in_place(&mut b, 2) + 1.0).abs() < 1e-15);
        let mut c = [1.0, 2.0, 2.0, 4.0];
        assert_eq!(det_in_place(&mut c, 2), 0.0);
    }

    #[test]
    fn dft_recovers_polynomial_coefficients() {
        // (1 + 2w)(3 - w) = 3 + 5w - 2w²
        let p = 4;
        let vals: Vec<Complex64> = (0..p)
            .map(|j| {
                let w = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / p as f64);
                (1.0 + 2.0 * w) * (3.0 - w)
            })
            .collect();
        let c = multi_dft(&vals, &[p]);
        for (got, want) in c.iter().zip([3.0, 5.0, -2.0, 0.0]) {
            assert!((got - want).norm() < 1e-14);
        }
    }

    #[test]
    fn window_validation() {
        let bad = WindowSpec::new(vec![
            Interval {
                thread: 0,
                lo: 0.0,
                hi: 2.0,
            },
            Interval {
                thread: 0,
                lo: 1.0,
                hi: 3.0,
            },
        ]);
        assert!(matches!(bad, Err(Error::Invalid(_))));
        assert!(WindowSpec::single(0, 1.0, 0.0).is_err());
        assert!(WindowSpec::new(vec![
            Interval {
                thread: 0,
                lo: 0.0,
                hi: 2.0
            },
            Interval {
                thread: 1,
                lo: 1.0,
                hi: 3.0
            },
        ])
        .is_ok());
    }

    #[test]
    fn hadamard_tail_matches_direct_sum() {
        let direct: f64 = (4..60).map(|j| 0.5f64.powi(j as i32) / ln_factorial(j).exp()).sum();
        assert!((hadamard_tail(0.5, 0.0, 3) - direct).abs() < 1e-15);
    }
}
