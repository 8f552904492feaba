//! The continuous bead-model kernel `J_γ(x, ξ)` on `ℤ × ℝ`.
//!
//! For `x ≥ 0` the kernel is a finite combination of the trigonometric moments
//! `∫₀¹ φᵏ cos(ξφ) dφ` and `∫₀¹ φᵏ sin(ξφ) dφ`, obtained by expanding
//! `(γ + iφs)ˣ` binomially. The moments are generated by forward recursion for
//! `k ≤ |ξ|` and by backward (Miller) recursion above, which keeps both
//! directions stable.
//!
//! For `x < 0` the integral over `|φ| > 1` is folded onto `φ > 1` and the
//! contour is rotated into the half-plane where `e^{-iξφ}` decays, turning the
//! slowly decaying oscillatory tail into an exponentially damped one. At
//! `ξ = 0` the map `φ = 1/u` gives a smooth integral on `[0, 1]`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dpp::BeadPoint;
use crate::error::{Error, Result};
use crate::quad::Adaptive;

/// Bead-model parameter `γ ∈ (-1, 1)` with cached `s = √(1-γ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    gamma: f64,
    s: f64,
}

impl KernelParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > -1.0 && gamma < 1.0) {
            return Err(Error::domain(format!("gamma = {gamma} must lie in (-1, 1)")));
        }
        Ok(Self {
            gamma,
            s: (1.0 - gamma * gamma).sqrt(),
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn s(&self) -> f64 {
        self.s
    }
}

/// A kernel value together with a bound on its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    pub abs_error_bound: f64,
}

/// Evaluator for `J_γ` at a fixed absolute tolerance.
#[derive(Debug, Clone, Copy)]
pub struct BeadKernel {
    params: KernelParams,
    tol: f64,
    max_panels: usize,
}

impl BeadKernel {
    pub const DEFAULT_TOL: f64 = 1e-10;

    pub fn new(params: KernelParams) -> Self {
        Self {
            params,
            tol: Self::DEFAULT_TOL,
            max_panels: 20_000,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }

    pub fn params(&self) -> KernelParams {
        self.params
    }

    pub fn eval(&self, x: i64, xi: f64) -> Result<KernelValue> {
        if !xi.is_finite() {
            return Err(Error::domain(format!("position difference {xi} is not finite")));
        }
        if x >= 0 {
            Ok(self.eval_nonnegative(x as usize, xi))
        } else {
            self.eval_negative((-x) as u32, xi)
        }
    }

    /// Kernel value, discarding the error bound.
    pub fn value(&self, x: i64, xi: f64) -> Result<f64> {
        self.eval(x, xi).map(|v| v.value)
    }

    fn eval_nonnegative(&self, x: usize, xi: f64) -> KernelValue {
        if x == 0 && xi == 0.0 {
            return KernelValue {
                value: 1.0 / PI,
                abs_error_bound: f64::EPSILON,
            };
        }
        let (gamma, s) = (self.params.gamma, self.params.s);
        let (cos_m, sin_m) = trig_moments(xi, x);
        // J = (1/π) Σ_k C(x,k) γ^{x-k} s^k Re[i^k m_k], with m_k = C_k (k even), -i S_k (k odd).
        let mut binom = 1.0;
        let mut sum = 0.0;
        let mut magnitude = 0.0;
        for k in 0..=x {
            if k > 0 {
                binom *= (x - k + 1) as f64 / k as f64;
            }
            let coeff = binom * gamma.powi((x - k) as i32) * s.powi(k as i32);
            let term = match k % 4 {
                0 => cos_m[k],
                1 => sin_m[k],
                2 => -cos_m[k],
                _ => -sin_m[k],
            } * coeff;
            sum += term;
            magnitude += term.abs();
        }
        KernelValue {
            value: sum / PI,
            abs_error_bound: 8.0 * f64::EPSILON * (x as f64 + 2.0) * magnitude.max(1.0) / PI,
        }
    }

    fn eval_negative(&self, n: u32, xi: f64) -> Result<KernelValue> {
        let (gamma, s) = (self.params.gamma, self.params.s);
        let power = |base: Complex64| base.powi(-(n as i32));
        if xi == 0.0 {
            // φ = 1/u: ∫₁^∞ Re g(φ) dφ = ∫₀¹ u^{n-2} Re[(γu + is)^{-n}] du.
            let quad = Adaptive {
                abs_tol: 0.5 * PI * self.tol,
                rel_tol: 1e-14,
                max_panels: self.max_panels,
                max_width: None,
            };
            let est = quad.integrate(
                |u: f64| u.powi(n as i32 - 2) * power(Complex64::new(gamma * u, s)).re,
                0.0,
                1.0,
            )?;
            return Ok(KernelValue {
                value: -est.value / PI,
                abs_error_bound: est.error / PI,
            });
        }
        // Rotate φ = 1 ∓ iu so that e^{-iξφ} = e^{-iξ} e^{-|ξ|u}.
        let a = xi.abs();
        let dir = if xi > 0.0 { -1.0 } else { 1.0 };
        let prefactor = Complex64::new(0.0, dir) * Complex64::new(0.0, -xi).exp();
        let integrand = |u: f64| {
            let phi = Complex64::new(1.0, dir * u);
            power(Complex64::new(gamma, 0.0) + Complex64::new(0.0, s) * phi) * (-a * u).exp()
        };
        // Envelope beyond U (with sU ≥ 2|γ|): |g| ≤ (sU/2)^{-n}, so the tail is below
        // (sU/2)^{-n} e^{-aU} / a.
        let tail = |u: f64| (0.5 * s * u).powi(-(n as i32)) * (-a * u).exp() / a;
        let mut upper = (2.0 * gamma.abs() / s).max(1.0);
        while tail(upper) > 0.25 * PI * self.tol {
            upper *= 2.0;
            if upper > 1e300 {
                return Err(Error::Accuracy {
                    context: format!("kernel tail at x=-{n}, xi={xi}"),
                    estimate: tail(upper),
                    tolerance: self.tol,
                });
            }
        }
        let mut edges = vec![0.0, 1.0f64.min(upper)];
        while *edges.last().unwrap() < upper {
            let next = (edges.last().unwrap() * 2.0).min(upper);
            edges.push(next);
        }
        let panels = edges.len() - 1;
        let quad = Adaptive {
            abs_tol: 0.5 * PI * self.tol / panels as f64,
            rel_tol: 1e-15,
            max_panels: self.max_panels,
            max_width: None,
        };
        let mut total = Complex64::new(0.0, 0.0);
        let mut err = tail(upper);
        for w in edges.windows(2) {
            let est = quad.integrate(integrand, w[0], w[1])?;
            total += est.value;
            err += est.error;
        }
        let value = (prefactor * total).re;
        Ok(KernelValue {
            value: -value / PI,
            abs_error_bound: err / PI,
        })
    }
}

/// Evaluate `J_γ(x, ξ)` at the default tolerance.
pub fn eval_kernel(params: KernelParams, x: i64, xi: f64) -> Result<KernelValue> {
    BeadKernel::new(params).eval(x, xi)
}

/// Matrix `[J_γ(x_i - x_j, ξ_i - ξ_j)]` for a list of points.
pub fn kernel_matrix(params: KernelParams, points: &[BeadPoint]) -> Result<DMatrix<f64>> {
    BeadKernel::new(params).matrix(points)
}

impl BeadKernel {
    /// Matrix `[J_γ(x_i - x_j, ξ_i - ξ_j)]`, rows evaluated in parallel.
    pub fn matrix(&self, points: &[BeadPoint]) -> Result<DMatrix<f64>> {
        let n = points.len();
        let rows: Vec<Vec<f64>> = points
            .par_iter()
            .map(|p| {
                points
                    .iter()
                    .map(|q| self.value(p.thread - q.thread, p.position - q.position))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }
}

/// Moments `C_k = ∫₀¹ φᵏ cos(ξφ) dφ` and `S_k = ∫₀¹ φᵏ sin(ξφ) dφ` for `k = 0..=kmax`.
pub fn trig_moments(xi: f64, kmax: usize) -> (Vec<f64>, Vec<f64>) {
    let a = xi.abs();
    let mut c = vec![0.0; kmax + 1];
    let mut s = vec![0.0; kmax + 1];
    if a == 0.0 {
        for (k, ck) in c.iter_mut().enumerate() {
            *ck = 1.0 / (k as f64 + 1.0);
        }
        return (c, s);
    }
    let (sin_a, cos_a) = a.sin_cos();
    // Forward recursion is stable while k ≤ a.
    let forward_top = if a < 1.0 {
        None
    } else {
        Some((a.floor() as usize).min(kmax))
    };
    if let Some(top) = forward_top {
        c[0] = sin_a / a;
        s[0] = (1.0 - cos_a) / a;
        for k in 1..=top {
            c[k] = sin_a / a - (k as f64 / a) * s[k - 1];
            s[k] = -cos_a / a + (k as f64 / a) * c[k - 1];
        }
    }
    let backward_bottom = forward_top.map_or(0, |t| t + 1);
    if backward_bottom <= kmax {
        // Start far enough above that the zero seed is damped below 1e-18.
        let damping = |top: usize| (kmax + 1..=top).fold(1.0, |d, j| d * a / j as f64);
        let mut start = kmax + 10;
        while damping(start) > 1e-18 {
            start += 10;
        }
        let mut ck = 0.0;
        let mut sk = 0.0;
        for k in (backward_bottom + 1..=start).rev() {
            let c_prev = (a * sk + cos_a) / k as f64;
            let s_prev = (sin_a - a * ck) / k as f64;
            ck = c_prev;
            sk = s_prev;
            let idx = k - 1;
            if idx <= kmax {
                c[idx] = ck;
                s[idx] = sk;
            }
        }
    }
    if xi < 0.0 {
        for v in s.iter_mut() {
            *v = -*v;
        }
    }
    (c, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_moments(xi: f64, k: usize) -> (f64, f64) {
        let q = Adaptive::with_tol(1e-14);
        let c = q
            .integrate(|p: f64| p.powi(k as i32) * (xi * p).cos(), 0.0, 1.0)
            .unwrap();
        let s = q
            .integrate(|p: f64| p.powi(k as i32) * (xi * p).sin(), 0.0, 1.0)
            .unwrap();
        (c.value, s.value)
    }

    #[test]
    fn moments_match_quadrature_across_regimes() {
        for &xi in &[-7.3, -0.4, 0.0, 1e-9, 0.3, 1.0, 2.5, 11.0, 60.0] {
            let (c, s) = trig_moments(xi, 25);
            for k in [0usize, 1, 2, 5, 12, 25] {
                let (bc, bs) = brute_moments(xi, k);
                assert!((c[k] - bc).abs() < 1e-13, "C xi={xi} k={k}: {} vs {bc}", c[k]);
                assert!((s[k] - bs).abs() < 1e-13, "S xi={xi} k={k}: {} vs {bs}", s[k]);
            }
        }
    }

    #[test]
    fn gamma_outside_open_interval_is_rejected() {
        assert!(KernelParams::new(1.0).is_err());
        assert!(KernelParams::new(-1.2).is_err());
        assert!(KernelParams::new(f64::NAN).is_err());
    }

    #[test]
    fn s_is_cached_consistently() {
        let p = KernelParams::new(0.37).unwrap();
        assert!((p.s() * p.s() + p.gamma() * p.gamma() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn origin_is_one_over_pi() {
        let p = KernelParams::new(0.3).unwrap();
        assert_eq!(eval_kernel(p, 0, 0.0).unwrap().value, 1.0 / PI);
        let near = eval_kernel(p, 0, 1e-9).unwrap().value;
        assert!((near - 1.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn x_one_at_gamma_zero_vanishes_at_origin() {
        let p = KernelParams::new(0.0).unwrap();
        assert!(eval_kernel(p, 1, 0.0).unwrap().value.abs() < 1e-15);
    }
}
