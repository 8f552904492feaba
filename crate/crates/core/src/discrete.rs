//! The discrete bead model: inverse Kasteleyn coefficients of the honeycomb
//! dimer model with weights `a = t`, `b = 1`, `c = e^{γt}`.
//!
//! After integrating out `w` by residues, `K⁻¹(b_{x,y}, w_{0,0})` is a single
//! integral over an arc of the unit circle:
//!
//! ```text
//! x ≥ 0:  (-1)^y / (2πt) ∫_{-θ₀}^{θ₀} e^{-iyθ} ((e^{γt} e^{iθ} - 1) / t)^x dθ
//! x < 0:  (-1)^{y+1} / (2πt) ∫_{θ₀ ≤ |θ| ≤ π} (same integrand) dθ
//! ```
//!
//! with `θ₀ = arccos((1 + e^{2γt} - t²) / (2e^{γt}))`. The arcs are folded onto
//! `θ ≥ 0`, where the integrand pairs with its conjugate.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{BeadKernel, KernelParams};
use crate::quad::Adaptive;

/// Weights `(t, 1, e^{γt})` of the discrete model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteParams {
    gamma: f64,
    t: f64,
}

impl DiscreteParams {
    pub fn new(gamma: f64, t: f64) -> Result<Self> {
        KernelParams::new(gamma)?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::domain(format!("mesh t = {t} must be positive")));
        }
        let c = (gamma * t).exp();
        if !(t + 1.0 > c && t + c > 1.0 && 1.0 + c > t) {
            return Err(Error::domain(format!(
                "weights (a, b, c) = ({t}, 1, {c}) violate the triangle inequalities"
            )));
        }
        Ok(Self { gamma, t })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Edge weights `(a, b, c)`.
    pub fn weights(&self) -> (f64, f64, f64) {
        (self.t, 1.0, (self.gamma * self.t).exp())
    }

    /// Vertical rescaling factor: `ξ = t·y·√(1-γ²)`.
    pub fn vertical_scale(&self) -> f64 {
        self.t * (1.0 - self.gamma * self.gamma).sqrt()
    }
}

/// Half-width of the arc on which the `w`-pole lies inside the unit disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theta0(pub f64);

pub fn theta0(params: DiscreteParams) -> Result<Theta0> {
    let (t, _, c) = params.weights();
    let arg = (1.0 + c * c - t * t) / (2.0 * c);
    if !(-1.0..=1.0).contains(&arg) {
        return Err(Error::domain(format!("arccos argument {arg} outside [-1, 1]")));
    }
    // 1 - cos θ₀ = (t - d)(t + d) / (2c) with d = c - 1, evaluated without cancellation.
    let d = (params.gamma * t).exp_m1();
    let half_sin = ((t - d) * (t + d) / (4.0 * c)).sqrt();
    Ok(Theta0(2.0 * half_sin.min(1.0).asin()))
}

/// Evaluator for the discrete kernel at a fixed tolerance.
#[derive(Debug, Clone, Copy)]
pub struct DiscreteKernel {
    params: DiscreteParams,
    theta0: f64,
    rel_tol: f64,
}

impl DiscreteKernel {
    pub fn new(params: DiscreteParams) -> Result<Self> {
        Ok(Self {
            params,
            theta0: theta0(params)?.0,
            rel_tol: 1e-11,
        })
    }

    pub fn params(&self) -> DiscreteParams {
        self.params
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    /// `K⁻¹_{γ,t}(b_{x,y}, w_{0,0})`.
    pub fn eval(&self, x: i64, y: i64) -> Result<f64> {
        let t = self.params.t;
        let c = (self.params.gamma * t).exp();
        let yf = y as f64;
        let integrand = |theta: f64| {
            let base = (Complex64::from_polar(c, theta) - 1.0) / t;
            let phase = Complex64::from_polar(1.0, -yf * theta);
            (phase * base.powi(x as i32)).re
        };
        let (lo, hi) = if x >= 0 { (0.0, self.theta0) } else { (self.theta0, PI) };
        let mut quad = Adaptive {
            // The integral is O(t) in magnitude; the absolute floor is scaled accordingly.
            abs_tol: 1e-11 * t * PI,
            rel_tol: self.rel_tol,
            max_panels: 2_000_000,
            max_width: None,
        };
        if y != 0 {
            quad.max_width = Some(PI / (4.0 * yf.abs()));
        }
        let est = quad.integrate(integrand, lo, hi)?;
        let sign = if y.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let sign = if x >= 0 { sign } else { -sign };
        Ok(sign * est.value / (PI * t))
    }
}

pub fn eval_discrete_kernel(params: DiscreteParams, x: i64, y: i64) -> Result<f64> {
    DiscreteKernel::new(params)?.eval(x, y)
}

/// Probability of a bead at a given site: `t·K⁻¹(b_{0,0}, w_{0,0}) = θ₀/π`.
pub fn bead_probability(params: DiscreteParams) -> Result<f64> {
    Ok(params.t * eval_discrete_kernel(params, 0, 0)?)
}

/// Probabilities of the `a`, `b` and `c` edges at a white vertex.
///
/// With white `w_{x,y}` adjacent to `b_{x,y}` (a), `b_{x-1,y}` (b) and
/// `b_{x-1,y-1}` (c), each is `K_e · K⁻¹(b_e, w)`.
pub fn edge_probabilities(params: DiscreteParams) -> Result<[f64; 3]> {
    let k = DiscreteKernel::new(params)?;
    let (a, b, c) = params.weights();
    Ok([a * k.eval(0, 0)?, b * k.eval(-1, 0)?, c * k.eval(-1, -1)?])
}

/// One row of a discrete-to-continuous convergence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub t: f64,
    pub y: i64,
    /// `t·y·√(1-γ²)` after rounding `y` to an integer.
    pub realized_xi: f64,
    /// `(-1)^y K⁻¹ / √(1-γ²)`.
    pub discrete: f64,
    /// `J_γ(x, realized_xi)`.
    pub continuous: f64,
    pub error: f64,
}

/// Compare the rescaled discrete kernel with `J_γ` along a list of meshes.
///
/// The continuous kernel is evaluated at the realized position so that the
/// rounding of `y` does not enter the error.
pub fn verify_convergence(gamma: f64, x: i64, xi: f64, t_list: &[f64]) -> Result<Vec<ConvergenceRow>> {
    let kernel = BeadKernel::new(KernelParams::new(gamma)?).with_tolerance(1e-12);
    let s = (1.0 - gamma * gamma).sqrt();
    t_list
        .iter()
        .map(|&t| {
            let params = DiscreteParams::new(gamma, t)?;
            let scale = params.vertical_scale();
            let y = (xi / scale).round() as i64;
            let realized_xi = y as f64 * scale;
            let sign = if y.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let discrete = sign * eval_discrete_kernel(params, x, y)? / s;
            let continuous = kernel.value(x, realized_xi)?;
            Ok(ConvergenceRow {
                t,
                y,
                realized_xi,
                discrete,
                continuous,
                error: (discrete - continuous).abs(),
            })
        })
        .collect()
}

/// Least-squares slope of `log(error)` against `log(t)`.
pub fn convergence_order(rows: &[ConvergenceRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.error > 0.0)
        .map(|r| (r.t.ln(), r.error.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_liquid_weights() {
        assert!(DiscreteParams::new(0.5, 3.0).is_err());
        assert!(DiscreteParams::new(0.0, 0.0).is_err());
        assert!(DiscreteParams::new(1.0, 0.1).is_err());
    }

    #[test]
    fn theta0_at_gamma_zero() {
        let p = DiscreteParams::new(0.0, 0.1).unwrap();
        let th = theta0(p).unwrap().0;
        // arccos(0.995) to 20 digits.
        assert!((th - 0.100_041_713_611_540_03).abs() < 1e-15);
    }

    #[test]
    fn origin_value_is_theta0_over_pi_t() {
        let p = DiscreteParams::new(0.0, 0.1).unwrap();
        let th = theta0(p).unwrap().0;
        let k = eval_discrete_kernel(p, 0, 0).unwrap();
        assert!((k - th / (PI * 0.1)).abs() < 1e-12);
        assert!((bead_probability(p).unwrap() - th / PI).abs() < 1e-13);
    }

    #[test]
    fn edge_probabilities_sum_to_one() {
        for (g, t) in [(0.0, 0.3), (0.5, 0.05), (-0.7, 0.2)] {
            let p = DiscreteParams::new(g, t).unwrap();
            let e = edge_probabilities(p).unwrap();
            assert!((e.iter().sum::<f64>() - 1.0).abs() < 1e-9, "{e:?}");
        }
    }
}
