//! Bivariate Laurent polynomials, Newton polygons and univariate roots.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients below this fraction of the largest are dropped.
pub const PRUNE_REL: f64 = 1e-12;

/// Finite map `(i, j) ↦ c` standing for `Σ c z^i w^j`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LaurentPoly2 {
    coeffs: BTreeMap<(i64, i64), Complex64>,
}

impl LaurentPoly2 {
    pub fn from_terms<I: IntoIterator<Item = ((i64, i64), Complex64)>>(terms: I) -> Self {
        let mut coeffs: BTreeMap<(i64, i64), Complex64> = BTreeMap::new();
        for (k, c) in terms {
            *coeffs.entry(k).or_default() += c;
        }
        let top = coeffs.values().map(|c| c.norm()).fold(0.0, f64::max);
        coeffs.retain(|_, c| c.norm() > PRUNE_REL * top && c.norm() > 0.0);
        Self { coeffs }
    }

    pub fn monomial(c: f64, i: i64, j: i64) -> Self {
        Self::from_terms([((i, j), Complex64::new(c, 0.0))])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = ((i64, i64), Complex64)> + '_ {
        self.coeffs.iter().map(|(k, c)| (*k, *c))
    }

    pub fn coeff(&self, i: i64, j: i64) -> Complex64 {
        self.coeffs.get(&(i, j)).copied().unwrap_or_default()
    }

    pub fn support(&self) -> Vec<(i64, i64)> {
        self.coeffs.keys().copied().collect()
    }

    /// Largest coefficient modulus.
    pub fn scale(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `(min, max)` exponent of `z`; `None` for the zero polynomial.
    pub fn z_range(&self) -> Option<(i64, i64)> {
        let lo = self.coeffs.keys().map(|k| k.0).min()?;
        let hi = self.coeffs.keys().map(|k| k.0).max()?;
        Some((lo, hi))
    }

    pub fn w_range(&self) -> Option<(i64, i64)> {
        let lo = self.coeffs.keys().map(|k| k.1).min()?;
        let hi = self.coeffs.keys().map(|k| k.1).max()?;
        Some((lo, hi))
    }

    pub fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(&(i, j), c)| c * z.powi(i as i32) * w.powi(j as i32))
            .sum()
    }

    /// `∂/∂z`, exact on coefficients.
    pub fn d1(&self) -> Self {
        Self::from_terms(self.terms().map(|((i, j), c)| ((i - 1, j), c * i as f64)))
    }

    /// `∂/∂w`, exact on coefficients.
    pub fn d2(&self) -> Self {
        Self::from_terms(self.terms().map(|((i, j), c)| ((i, j - 1), c * j as f64)))
    }

    /// Multiplication by `z^di w^dj`.
    pub fn shift(&self, di: i64, dj: i64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(&(i, j), c)| ((i + di, j + dj), *c)).collect(),
        }
    }

    pub fn mul_scalar(&self, s: Complex64) -> Self {
        Self::from_terms(self.terms().map(|(k, c)| (k, c * s)))
    }

    /// `p(αz, βw)`.
    pub fn rescale(&self, alpha: Complex64, beta: Complex64) -> Self {
        Self::from_terms(
            self.terms()
                .map(|((i, j), c)| ((i, j), c * alpha.powi(i as i32) * beta.powi(j as i32))),
        )
    }

    /// Exponents mapped by an integer matrix, `(i, j) ↦ M·(i, j)`.
    pub fn transform(&self, m: [[i64; 2]; 2]) -> Self {
        Self::from_terms(
            self.terms()
                .map(|((i, j), c)| ((m[0][0] * i + m[0][1] * j, m[1][0] * i + m[1][1] * j), c)),
        )
    }

    /// Coefficient of `w^j` as a Laurent polynomial in `z` alone (exponent pairs `(i, 0)`).
    pub fn w_row(&self, j: i64) -> Self {
        Self::from_terms(self.terms().filter(|k| k.0 .1 == j).map(|((i, _), c)| ((i, 0), c)))
    }

    /// `p(z, w)` at fixed `z` as `w^lo · Σ_k c_k w^k`.
    pub fn in_w(&self, z: Complex64) -> (i64, Vec<Complex64>) {
        let Some((lo, hi)) = self.w_range() else {
            return (0, Vec::new());
        };
        let mut out = vec![Complex64::default(); (hi - lo + 1) as usize];
        for (&(i, j), c) in &self.coeffs {
            out[(j - lo) as usize] += c * z.powi(i as i32);
        }
        (lo, out)
    }

    /// `p(z, w)` at fixed `w` as `z^lo · Σ_k c_k z^k`.
    pub fn in_z(&self, w: Complex64) -> (i64, Vec<Complex64>) {
        let swapped = Self {
            coeffs: self.coeffs.iter().map(|(&(i, j), c)| ((j, i), *c)).collect(),
        };
        swapped.in_w(w)
    }

    /// Representative under `p ↦ ±u·z^a w^b` (`|u| = 1`): exponents shifted to
    /// touch both axes from the nonnegative quadrant, then normalized so the
    /// coefficient at the lexicographically least Newton vertex is positive real.
    pub fn canonical(&self) -> Self {
        let (Some((zl, _)), Some((wl, _))) = (self.z_range(), self.w_range()) else {
            return self.clone();
        };
        let shifted = self.shift(-zl, -wl);
        let first = newton_polygon(&shifted).expect("nonzero polynomial")[0];
        let c = shifted.coeff(first.0, first.1);
        shifted.mul_scalar(c.conj() / c.norm())
    }

    /// Largest coefficient difference relative to the larger scale.
    pub fn distance(&self, other: &Self) -> f64 {
        let keys: std::collections::BTreeSet<_> = self.coeffs.keys().chain(other.coeffs.keys()).collect();
        let d = keys
            .into_iter()
            .map(|&(i, j)| (self.coeff(i, j) - other.coeff(i, j)).norm())
            .fold(0.0, f64::max);
        d / self.scale().max(other.scale()).max(f64::MIN_POSITIVE)
    }
}

/// Vertices of the convex hull of the support, counterclockwise from the
/// lexicographically least one; collinear boundary points are not vertices.
pub fn newton_polygon(p: &LaurentPoly2) -> Result<Vec<(i64, i64)>> {
    let pts = p.support();
    if pts.is_empty() {
        return Err(Error::invalid("Newton polygon of the zero polynomial"));
    }
    if pts.len() == 1 {
        return Ok(pts);
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    // Andrew's monotone chain; `pts` is already sorted lexicographically.
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    Ok(lower)
}

/// Whether the lattice point lies on the boundary of the convex polygon.
pub fn on_polygon_boundary(poly: &[(i64, i64)], p: (i64, i64)) -> bool {
    let n = poly.len();
    if n == 1 {
        return poly[0] == p;
    }
    (0..n).any(|k| {
        let (a, b) = (poly[k], poly[(k + 1) % n]);
        let cr = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
        cr == 0 && (p.0 - a.0) * (p.0 - b.0) <= 0 && (p.1 - a.1) * (p.1 - b.1) <= 0
    })
}

/// Signed distance from a real point to the polygon: negative inside.
pub fn polygon_excess(poly: &[(i64, i64)], p: (f64, f64)) -> f64 {
    let n = poly.len();
    if n < 3 {
        let a = (poly[0].0 as f64, poly[0].1 as f64);
        let b = (poly[n - 1].0 as f64, poly[n - 1].1 as f64);
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len2 = dx * dx + dy * dy;
        let s = if len2 > 0.0 {
            (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        return ((p.0 - a.0 - s * dx).powi(2) + (p.1 - a.1 - s * dy).powi(2)).sqrt();
    }
    (0..n)
        .map(|k| {
            let (a, b) = (poly[k], poly[(k + 1) % n]);
            let (ex, ey) = ((b.0 - a.0) as f64, (b.1 - a.1) as f64);
            // Outward normal of a counterclockwise edge is (ey, -ex).
            ((p.0 - a.0 as f64) * ey - (p.1 - a.1 as f64) * ex) / (ex * ex + ey * ey).sqrt()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Roots of `Σ_k c_k x^k`. Vanishing top coefficients (relative to the
/// largest) are dropped; vanishing low coefficients give exact zero roots.
pub fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let top = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if top == 0.0 {
        return Vec::new();
    }
    let mut hi = coeffs.len() - 1;
    while coeffs[hi].norm() <= 1e-14 * top {
        hi -= 1;
    }
    let mut lo = 0;
    let mut roots = Vec::with_capacity(hi);
    while coeffs[lo].norm() == 0.0 {
        roots.push(Complex64::default());
        lo += 1;
    }
    let c = &coeffs[lo..=hi];
    let d = c.len() - 1;
    match d {
        0 => {}
        1 => roots.push(-c[0] / c[1]),
        2 => {
            let disc = (c[1] * c[1] - c[0] * c[2] * 4.0).sqrt();
            // Pick the sign that avoids cancellation.
            let q = if (c[1].conj() * disc).re >= 0.0 {
                -(c[1] + disc) * 0.5
            } else {
                -(c[1] - disc) * 0.5
            };
            if q.norm() == 0.0 {
                roots.extend([Complex64::default(); 2]);
            } else {
                roots.push(q / c[2]);
                roots.push(c[0] / q);
            }
        }
        _ => {
            let mut m = DMatrix::<Complex64>::zeros(d, d);
            for k in 0..d {
                m[(0, k)] = -c[d - 1 - k] / c[d];
            }
            for k in 1..d {
                m[(k, k - 1)] = Complex64::new(1.0, 0.0);
            }
            let eig = m
                .schur()
                .eigenvalues()
                .expect("complex Schur form always has eigenvalues");
            for mut r in eig.iter().copied() {
                for _ in 0..2 {
                    let (mut p, mut dp) = (Complex64::default(), Complex64::default());
                    for &ck in c.iter().rev() {
                        dp = dp * r + p;
                        p = p * r + ck;
                    }
                    if dp.norm() == 0.0 {
                        break;
                    }
                    let step = p / dp;
                    if !step.is_finite() || step.norm() > 1e-3 * (1.0 + r.norm()) {
                        break;
                    }
                    r -= step;
                }
                roots.push(r);
            }
        }
    }
    roots
}

/// `p(x)` and `p'(x)` by Horner's rule.
pub fn horner(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let (mut p, mut dp) = (Complex64::default(), Complex64::default());
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn honeycomb_polygon_is_a_triangle() {
        let p = LaurentPoly2::from_terms([((0, 0), c(1.0)), ((0, -1), c(1.0)), ((1, -1), c(1.0))]);
        assert_eq!(newton_polygon(&p).unwrap(), vec![(0, -1), (1, -1), (0, 0)]);
        let q = LaurentPoly2::monomial(2.0, 3, -4);
        assert_eq!(newton_polygon(&q).unwrap(), vec![(3, -4)]);
        assert!(newton_polygon(&LaurentPoly2::default()).is_err());
    }

    #[test]
    fn collinear_points_are_not_vertices() {
        let p = LaurentPoly2::from_terms((0..4).map(|i| ((i, 0), c(1.0))).chain([((0, 2), c(1.0))]));
        assert_eq!(newton_polygon(&p).unwrap(), vec![(0, 0), (3, 0), (0, 2)]);
        let tri = [(0, 0), (3, 0), (0, 2)];
        assert!(on_polygon_boundary(&tri, (1, 0)));
        assert!(!on_polygon_boundary(&tri, (1, 1)));
        assert!(polygon_excess(&tri, (1.0, 0.5)) < 0.0);
        assert!(polygon_excess(&tri, (3.0, 2.0)) > 0.0);
    }

    #[test]
    fn derivatives_and_pruning() {
        let p = LaurentPoly2::from_terms([((2, 1), c(3.0)), ((0, -1), c(1.0)), ((1, 1), c(1e-15))]);
        assert_eq!(p.support().len(), 2);
        assert_eq!(p.d1().coeff(1, 1), c(6.0));
        assert_eq!(p.d2().coeff(0, -2), c(-1.0));
        let (z, w) = (Complex64::new(0.3, 0.4), Complex64::new(-1.1, 0.2));
        let h = 1e-6;
        let fd = (p.eval(z, w + h) - p.eval(z, w - h)) / (2.0 * h);
        assert!((fd - p.d2().eval(z, w)).norm() < 1e-6);
    }

    #[test]
    fn roots_of_cubic_and_zero_roots() {
        // (x - 1)(x + 2)(x - 0.5i) x
        let r = [c(1.0), c(-2.0), Complex64::new(0.0, 0.5), c(0.0)];
        let mut coeffs = vec![c(1.0)];
        for &root in &r {
            let mut next = vec![Complex64::default(); coeffs.len() + 1];
            for (k, &a) in coeffs.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * root;
            }
            coeffs = next;
        }
        let found = poly_roots(&coeffs);
        assert_eq!(found.len(), 4);
        for root in r {
            assert!(found.iter().any(|f| (f - root).norm() < 1e-12), "{root}");
        }
    }

    #[test]
    fn canonical_gauge_removes_monomial_and_sign() {
        let p = LaurentPoly2::from_terms([((0, 0), c(2.0)), ((0, -1), c(1.0)), ((1, -1), c(1.5))]);
        let q = p.shift(3, -2).mul_scalar(c(-1.0));
        assert!(p.canonical().distance(&q.canonical()) < 1e-15);
        let can = p.canonical();
        assert_eq!(can.z_range().unwrap().0, 0);
        assert_eq!(can.w_range().unwrap().0, 0);
        assert!(can.coeff(0, 0).re > 0.0);
    }
}
