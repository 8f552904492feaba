//! Kasteleyn matrix, characteristic polynomial, inverse Kasteleyn
//! coefficients and the phase diagram in the magnetic field.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::graph::{validate_graph, PeriodicBipartiteGraph};
use super::poly::{horner, newton_polygon, on_polygon_boundary, poly_roots, LaurentPoly2};
use crate::error::{Error, Result};
use crate::quad::Adaptive;

/// Roots this close to the unit circle make the phase undecidable.
pub const PHASE_TOL: f64 = 1e-7;
/// Roots this close to the unit circle at `z = ±1` flag an inverse Kasteleyn value.
pub const NEAR_BOUNDARY_TOL: f64 = 1e-6;
/// Largest exponent span per variable accepted by the interpolation.
pub const MAX_SPAN: i64 = 256;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagneticField {
    pub bx: f64,
    pub by: f64,
}

impl MagneticField {
    pub fn new(bx: f64, by: f64) -> Result<Self> {
        if !(bx.is_finite() && by.is_finite()) {
            return Err(Error::domain(format!("field ({bx}, {by}) must be finite")));
        }
        Ok(Self { bx, by })
    }

    pub const ZERO: Self = Self { bx: 0.0, by: 0.0 };

    fn scale(&self) -> (Complex64, Complex64) {
        (Complex64::new(self.bx.exp(), 0.0), Complex64::new(self.by.exp(), 0.0))
    }
}

/// `K(z, w)`, rows indexed by white vertices and columns by black vertices.
pub fn kasteleyn_matrix(g: &PeriodicBipartiteGraph, z: Complex64, w: Complex64) -> DMatrix<Complex64> {
    let mut k = DMatrix::zeros(g.white_count(), g.black_count());
    for e in g.edges() {
        let m = z.powi(e.offset.0 as i32) * w.powi(e.offset.1 as i32);
        k[(e.white, e.black)] += m * (e.sign as f64 * e.weight);
    }
    k
}

/// Per-white `(z_min, z_max, w_min, w_max)` over incident edges.
fn row_bounds(g: &PeriodicBipartiteGraph) -> Result<Vec<[i64; 4]>> {
    let mut b = vec![[i64::MAX, i64::MIN, i64::MAX, i64::MIN]; g.white_count()];
    for e in g.edges() {
        let r = &mut b[e.white];
        r[0] = r[0].min(e.offset.0);
        r[1] = r[1].max(e.offset.0);
        r[2] = r[2].min(e.offset.1);
        r[3] = r[3].max(e.offset.1);
    }
    if let Some(w) = b.iter().position(|r| r[0] > r[1]) {
        return Err(Error::invalid(format!("white vertex {w} has no edges")));
    }
    Ok(b)
}

fn sum_bounds(rows: &[[i64; 4]], skip: Option<usize>) -> [i64; 4] {
    let mut s = [0; 4];
    for (k, r) in rows.iter().enumerate() {
        if Some(k) != skip {
            for i in 0..4 {
                s[i] += r[i];
            }
        }
    }
    s
}

fn check_span(s: [i64; 4]) -> Result<()> {
    let span = (s[1] - s[0]).max(s[3] - s[2]);
    if span > MAX_SPAN {
        return Err(Error::TooLarge {
            requested: span as usize,
            max: MAX_SPAN as usize,
        });
    }
    Ok(())
}

/// Interpolation grid on the torus; the phases are offset so that grid
/// points avoid the real axes, where spectral curves tend to pass.
struct Grid {
    nz: usize,
    nw: usize,
    phase: (f64, f64),
}

impl Grid {
    fn new(nz: usize, nw: usize) -> Self {
        Self {
            nz,
            nw,
            phase: (std::f64::consts::FRAC_1_PI, std::f64::consts::E / 10.0),
        }
    }

    fn point(&self, a: usize, b: usize) -> (Complex64, Complex64) {
        let z = Complex64::from_polar(1.0, 2.0 * PI * a as f64 / self.nz as f64 + self.phase.0);
        let w = Complex64::from_polar(1.0, 2.0 * PI * b as f64 / self.nw as f64 + self.phase.1);
        (z, w)
    }

    /// Laurent coefficients `lo..lo + n` in each variable from samples `f[a][b]`.
    fn interpolate(&self, f: &[Vec<Complex64>], zlo: i64, wlo: i64) -> LaurentPoly2 {
        let mut terms = Vec::with_capacity(self.nz * self.nw);
        for i in 0..self.nz {
            for j in 0..self.nw {
                let (ei, ej) = (zlo + i as i64, wlo + j as i64);
                let mut acc = Complex64::default();
                for (a, row) in f.iter().enumerate() {
                    for (b, v) in row.iter().enumerate() {
                        let (z, w) = self.point(a, b);
                        acc += v * z.powi(-ei as i32) * w.powi(-ej as i32);
                    }
                }
                terms.push(((ei, ej), acc / (self.nz * self.nw) as f64));
            }
        }
        LaurentPoly2::from_terms(terms)
    }
}

fn check_points(seed: u64, count: usize) -> Vec<(Complex64, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (
                Complex64::from_polar(1.0, rng.gen::<f64>() * 2.0 * PI),
                Complex64::from_polar(1.0, rng.gen::<f64>() * 2.0 * PI),
            )
        })
        .collect()
}

/// Upper bound of `|K_{wb}|` on the torus, used to scale exactness checks.
fn entry_scale(g: &PeriodicBipartiteGraph) -> f64 {
    let mut s = vec![0.0; g.white_count()];
    for e in g.edges() {
        s[e.white] += e.weight;
    }
    s.into_iter().fold(1.0, |acc, v: f64| acc * v.max(f64::MIN_POSITIVE))
}

/// `P(z, w) = det K(z, w)` by evaluation on roots of unity and inverse DFT.
pub fn char_poly(g: &PeriodicBipartiteGraph) -> Result<LaurentPoly2> {
    if g.white_count() != g.black_count() {
        return Err(Error::invalid(
            "characteristic polynomial needs a square Kasteleyn matrix",
        ));
    }
    let rows = row_bounds(g)?;
    let s = sum_bounds(&rows, None);
    check_span(s)?;
    let grid = Grid::new((s[1] - s[0] + 1) as usize, (s[3] - s[2] + 1) as usize);
    let f: Vec<Vec<Complex64>> = (0..grid.nz)
        .map(|a| {
            (0..grid.nw)
                .map(|b| {
                    let (z, w) = grid.point(a, b);
                    kasteleyn_matrix(g, z, w).determinant()
                })
                .collect()
        })
        .collect();
    let p = grid.interpolate(&f, s[0], s[2]);
    let scale = entry_scale(g);
    for (z, w) in check_points(0x5eed, 10) {
        let d = (kasteleyn_matrix(g, z, w).determinant() - p.eval(z, w)).norm();
        if d > 1e-9 * scale {
            return Err(Error::Accuracy {
                context: "characteristic polynomial interpolation".into(),
                estimate: d / scale,
                tolerance: 1e-9,
            });
        }
    }
    Ok(p)
}

fn minor_det(k: &DMatrix<Complex64>, row: usize, col: usize) -> Complex64 {
    let n = k.nrows();
    if n == 1 {
        return ONE;
    }
    let m = k.clone().remove_row(row).remove_column(col);
    let sign = if (row + col).is_multiple_of(2) { 1.0 } else { -1.0 };
    m.determinant() * sign
}

/// All cofactors `Q_{b,w}` with `Q·K = P·Id`, stored at `b·n + w`.
pub fn cofactor_matrix(g: &PeriodicBipartiteGraph) -> Result<Vec<LaurentPoly2>> {
    let n = g.white_count();
    if n != g.black_count() {
        return Err(Error::invalid("cofactors need a square Kasteleyn matrix"));
    }
    let rows = row_bounds(g)?;
    let bounds: Vec<[i64; 4]> = (0..n).map(|w| sum_bounds(&rows, Some(w))).collect();
    for &s in &bounds {
        check_span(s)?;
    }
    let nz = bounds.iter().map(|s| s[1] - s[0] + 1).max().unwrap_or(1) as usize;
    let nw = bounds.iter().map(|s| s[3] - s[2] + 1).max().unwrap_or(1) as usize;
    let grid = Grid::new(nz, nw);
    // samples[a][b] holds the whole cofactor matrix at one grid point.
    let samples: Vec<Vec<DMatrix<Complex64>>> = (0..nz)
        .map(|a| {
            (0..nw)
                .map(|b| {
                    let (z, w) = grid.point(a, b);
                    let k = kasteleyn_matrix(g, z, w);
                    DMatrix::from_fn(n, n, |bi, wi| minor_det(&k, wi, bi))
                })
                .collect()
        })
        .collect();
    let mut q = Vec::with_capacity(n * n);
    for b in 0..n {
        for w in 0..n {
            let f: Vec<Vec<Complex64>> = samples.iter().map(|r| r.iter().map(|m| m[(b, w)]).collect()).collect();
            q.push(grid.interpolate(&f, bounds[w][0], bounds[w][2]));
        }
    }
    let p = char_poly(g)?;
    let scale = entry_scale(g) * n as f64;
    for (z, w) in check_points(0xc0fa, 5) {
        let k = kasteleyn_matrix(g, z, w);
        let qm = DMatrix::from_fn(n, n, |b, wi| q[b * n + wi].eval(z, w));
        let d = (qm * k - DMatrix::identity(n, n) * p.eval(z, w))
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        if d > 1e-9 * scale {
            return Err(Error::Accuracy {
                context: "cofactor interpolation".into(),
                estimate: d / scale,
                tolerance: 1e-9,
            });
        }
    }
    Ok(q)
}

pub fn cofactor_poly(g: &PeriodicBipartiteGraph, black: usize, white: usize) -> Result<LaurentPoly2> {
    let n = g.white_count();
    if black >= n || white >= n {
        return Err(Error::domain(format!("vertex pair ({black}, {white}) out of range")));
    }
    Ok(cofactor_matrix(g)?.swap_remove(black * n + white))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Solid,
    Liquid,
    Gas,
    Indeterminate,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Solid => "solid",
            Phase::Liquid => "liquid",
            Phase::Gas => "gas",
            Phase::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSample {
    pub field: MagneticField,
    pub phase: Phase,
    pub slope: (f64, f64),
    pub ronkin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinvValue {
    pub value: f64,
    pub error: f64,
    /// A `w`-root at `z = ±1` lies within [`NEAR_BOUNDARY_TOL`] of the unit circle.
    pub near_boundary: bool,
}

/// Roots in `w` of `P_B(e^{iθ}, w) = w^lo · D(w)`.
#[derive(Debug, Clone)]
struct Slice {
    lo: i64,
    coeffs: Vec<Complex64>,
    roots: Vec<Complex64>,
}

impl Slice {
    fn new(p: &LaurentPoly2, z: Complex64) -> Self {
        let (lo, coeffs) = p.in_w(z);
        let roots = poly_roots(&coeffs);
        Self { lo, coeffs, roots }
    }

    fn inside(&self) -> usize {
        self.roots.iter().filter(|r| r.norm() < 1.0).count()
    }

    fn gap(&self) -> f64 {
        self.roots
            .iter()
            .map(|r| (r.norm() - 1.0).abs())
            .fold(f64::INFINITY, f64::min)
    }

    fn leading(&self) -> Complex64 {
        let top = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        *self
            .coeffs
            .iter()
            .rev()
            .find(|c| c.norm() > 1e-14 * top)
            .unwrap_or(&Complex64::default())
    }
}

/// A periodic graph together with its spectral data.
#[derive(Debug, Clone)]
pub struct DimerModel {
    graph: PeriodicBipartiteGraph,
    p: LaurentPoly2,
    q: Vec<LaurentPoly2>,
    newton: Vec<(i64, i64)>,
}

impl DimerModel {
    pub fn new(graph: PeriodicBipartiteGraph) -> Result<Self> {
        validate_graph(&graph).map_err(|d| Error::invalid(d.to_string()))?;
        let p = char_poly(&graph)?;
        let q = cofactor_matrix(&graph)?;
        let newton = newton_polygon(&p)?;
        Ok(Self { graph, p, q, newton })
    }

    pub fn graph(&self) -> &PeriodicBipartiteGraph {
        &self.graph
    }

    pub fn char_poly(&self) -> &LaurentPoly2 {
        &self.p
    }

    pub fn cofactor(&self, black: usize, white: usize) -> &LaurentPoly2 {
        &self.q[black * self.graph.size() + white]
    }

    pub fn newton_polygon(&self) -> &[(i64, i64)] {
        &self.newton
    }

    /// `P(e^{Bx} z, e^{By} w)`.
    pub fn field_poly(&self, field: MagneticField) -> LaurentPoly2 {
        let (a, b) = field.scale();
        self.p.rescale(a, b)
    }

    /// Edge weight times sign with the field folded in.
    pub fn edge_weight(&self, field: MagneticField, edge: usize) -> f64 {
        let e = self.graph.edges()[edge];
        e.sign as f64 * e.weight * (field.bx * e.offset.0 as f64 + field.by * e.offset.1 as f64).exp()
    }

    /// Crossing angle in `(0, π)` of the torus zero, if the slice count changes.
    fn theta0(&self, pb: &LaurentPoly2) -> Option<f64> {
        crossing(|th| Slice::new(pb, Complex64::from_polar(1.0, th)).inside())
    }

    /// `K⁻¹_B(b at translation T, w at the origin)`.
    pub fn inverse_kasteleyn(
        &self,
        field: MagneticField,
        black: usize,
        t: (i64, i64),
        white: usize,
    ) -> Result<KinvValue> {
        let n = self.graph.size();
        if black >= n || white >= n {
            return Err(Error::domain(format!("vertex pair ({black}, {white}) out of range")));
        }
        let pb = self.field_poly(field);
        let (sa, sb) = field.scale();
        let qb = self.cofactor(black, white).rescale(sa, sb);
        let near = [ONE, -ONE]
            .iter()
            .any(|&z| Slice::new(&pb, z).gap() < NEAR_BOUNDARY_TOL);
        let inner = |theta: f64| -> Complex64 {
            let z = Complex64::from_polar(1.0, theta);
            let sl = Slice::new(&pb, z);
            let (klo, num) = qb.in_w(z);
            let s = t.1 - 1 + klo - sl.lo;
            let res = |r: Complex64| -> Complex64 {
                let (_, dd) = horner(&sl.coeffs, r);
                let (nv, _) = horner(&num, r);
                r.powi(s as i32) * nv / dd
            };
            let d = sl.coeffs.len() as i64 - 1;
            let val = if num.is_empty() {
                Complex64::default()
            } else if s >= 0 {
                sl.roots.iter().filter(|r| r.norm() < 1.0).map(|&r| res(r)).sum()
            } else if s + num.len() as i64 - 1 - d <= -2 {
                -sl.roots
                    .iter()
                    .filter(|r| r.norm() >= 1.0)
                    .map(|&r| res(r))
                    .sum::<Complex64>()
            } else {
                let inside: Complex64 = sl.roots.iter().filter(|r| r.norm() < 1.0).map(|&r| res(r)).sum();
                inside + series_coeff(&num, &sl.coeffs, (-s - 1) as usize)
            };
            z.powi(t.0 as i32) * val
        };
        let mut quad = Adaptive {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_panels: 200_000,
            max_width: None,
        };
        if t.0 != 0 {
            quad.max_width = Some(PI / (4.0 * t.0.unsigned_abs() as f64));
        }
        let f = |th: f64| inner(th).re;
        let mut value = 0.0;
        let mut error = 0.0;
        let split = self.theta0(&pb);
        let mut pieces = vec![0.0];
        pieces.extend(split);
        pieces.push(PI);
        for w in pieces.windows(2) {
            let est = quad.integrate(f, w[0], w[1])?;
            value += est.value;
            error += est.error;
        }
        Ok(KinvValue {
            value: value / PI,
            error: error / PI,
            near_boundary: near,
        })
    }

    /// Probability that `edge` is occupied under the measure at `field`.
    pub fn edge_probability(&self, field: MagneticField, edge: usize) -> Result<KinvValue> {
        let e = self.graph.edges()[edge];
        let k = self.inverse_kasteleyn(field, e.black, e.offset, e.white)?;
        let ke = self.edge_weight(field, edge);
        Ok(KinvValue {
            value: ke * k.value,
            error: ke.abs() * k.error,
            near_boundary: k.near_boundary,
        })
    }

    /// Numbers of `w`-roots inside the unit disc at `z = 1` and `z = -1`.
    pub fn root_counts(&self, field: MagneticField) -> (usize, usize) {
        let pb = self.field_poly(field);
        (Slice::new(&pb, ONE).inside(), Slice::new(&pb, -ONE).inside())
    }

    /// Liquid indicator from the root counts; `None` when a root at `z = ±1`
    /// is within [`PHASE_TOL`] of the unit circle.
    pub fn is_liquid(&self, field: MagneticField) -> Option<bool> {
        let pb = self.field_poly(field);
        let (a, b) = (Slice::new(&pb, ONE), Slice::new(&pb, -ONE));
        if a.gap().min(b.gap()) < PHASE_TOL {
            return None;
        }
        Some(a.inside() != b.inside())
    }

    /// Torus zero `(z₀, w₀)` of `P_B` with `Im z₀ > 0`, if the field is liquid.
    pub fn torus_zero(&self, field: MagneticField) -> Result<Option<(Complex64, Complex64)>> {
        let pb = self.field_poly(field);
        let Some(th) = self.theta0(&pb) else { return Ok(None) };
        let sl = Slice::new(&pb, Complex64::from_polar(1.0, th));
        let r = *sl
            .roots
            .iter()
            .min_by(|a, b| (a.norm() - 1.0).abs().total_cmp(&(b.norm() - 1.0).abs()))
            .ok_or_else(|| Error::invalid("no w-roots on the crossing slice"))?;
        let (d1, d2) = (pb.d1(), pb.d2());
        let (mut th, mut ph) = (th, r.arg());
        for _ in 0..30 {
            let (z, w) = (Complex64::from_polar(1.0, th), Complex64::from_polar(1.0, ph));
            let f = pb.eval(z, w);
            let a = Complex64::i() * z * d1.eval(z, w);
            let b = Complex64::i() * w * d2.eval(z, w);
            let det = a.re * b.im - a.im * b.re;
            if det == 0.0 {
                break;
            }
            let dth = -(f.re * b.im - f.im * b.re) / det;
            let dph = -(a.re * f.im - a.im * f.re) / det;
            th += dth;
            ph += dph;
            if dth.abs() + dph.abs() < 1e-15 {
                break;
            }
        }
        let (z, w) = (Complex64::from_polar(1.0, th), Complex64::from_polar(1.0, ph));
        let resid = pb.eval(z, w).norm();
        if resid > 1e-9 * pb.scale() {
            return Err(Error::Accuracy {
                context: "torus zero".into(),
                estimate: resid,
                tolerance: 1e-9,
            });
        }
        Ok(Some(if th.sin() >= 0.0 { (z, w) } else { (z.conj(), w.conj()) }))
    }

    /// `R(B) = ∬ log|P(e^{Bx} z, e^{By} w)|` over the unit torus.
    pub fn ronkin(&self, field: MagneticField) -> Result<f64> {
        let pb = self.field_poly(field);
        let f = |th: f64| {
            let sl = Slice::new(&pb, Complex64::from_polar(1.0, th));
            sl.leading().norm().ln() + sl.roots.iter().map(|r| r.norm().max(1.0).ln()).sum::<f64>()
        };
        let quad = Adaptive {
            abs_tol: 1e-13,
            rel_tol: 1e-13,
            max_panels: 100_000,
            max_width: None,
        };
        let mut pieces = vec![0.0];
        pieces.extend(self.theta0(&pb));
        pieces.push(PI);
        let mut total = 0.0;
        for w in pieces.windows(2) {
            total += quad.integrate(f, w[0], w[1])?.value;
        }
        Ok(total / PI)
    }

    /// Phase and slope at `field`. The slope is the gradient of the Ronkin
    /// function, obtained exactly from root counts on the two torus circles
    /// and the angles of the torus zero.
    pub fn classify_phase(&self, field: MagneticField) -> Result<PhaseSample> {
        let pb = self.field_poly(field);
        let (ilo, _) = pb
            .z_range()
            .ok_or_else(|| Error::invalid("zero characteristic polynomial"))?;
        let (jlo, _) = pb.w_range().expect("nonzero");
        let ends_w = [Slice::new(&pb, ONE), Slice::new(&pb, -ONE)];
        let zs = |w: Complex64| {
            let (lo, c) = pb.in_z(w);
            let roots = poly_roots(&c);
            (lo, roots)
        };
        let ends_z = [zs(ONE), zs(-ONE)];
        let gap_z = ends_z
            .iter()
            .flat_map(|(_, r)| r.iter().map(|r| (r.norm() - 1.0).abs()))
            .fold(f64::INFINITY, f64::min);
        let gap = ends_w.iter().map(Slice::gap).fold(gap_z, f64::min);
        if gap < PHASE_TOL {
            return Err(Error::Indeterminate(format!(
                "field ({}, {}) has a root within {gap:.1e} of the unit torus at a real point",
                field.bx, field.by
            )));
        }
        let nw = [ends_w[0].inside() as f64, ends_w[1].inside() as f64];
        let in_z = |r: &Vec<Complex64>| r.iter().filter(|r| r.norm() < 1.0).count() as f64;
        let nz = [in_z(&ends_z[0].1), in_z(&ends_z[1].1)];
        let ronkin = self.ronkin(field)?;
        if nw[0] != nw[1] {
            let (z0, w0) = self.torus_zero(field)?.expect("count change implies a torus zero");
            let (a, b) = (z0.arg().abs() / PI, w0.arg().abs() / PI);
            let sy = jlo as f64 + nw[0] * a + nw[1] * (1.0 - a);
            let sx = ilo as f64 + nz[0] * b + nz[1] * (1.0 - b);
            return Ok(PhaseSample {
                field,
                phase: Phase::Liquid,
                slope: (sx, sy),
                ronkin,
            });
        }
        let slope = (ilo + nz[0] as i64, jlo + nw[0] as i64);
        let phase = if on_polygon_boundary(&self.newton, slope) {
            Phase::Solid
        } else {
            Phase::Gas
        };
        Ok(PhaseSample {
            field,
            phase,
            slope: (slope.0 as f64, slope.1 as f64),
            ronkin,
        })
    }

    /// Phase samples on a grid, rows of constant `By` in increasing order.
    /// Cells that cannot be decided are marked [`Phase::Indeterminate`].
    pub fn amoeba_raster(&self, grid: &RasterGrid) -> Vec<PhaseSample> {
        let cells: Vec<MagneticField> = (0..grid.by.n)
            .flat_map(|j| {
                (0..grid.bx.n).map(move |i| MagneticField {
                    bx: grid.bx.at(i),
                    by: grid.by.at(j),
                })
            })
            .collect();
        cells
            .into_par_iter()
            .map(|field| {
                self.classify_phase(field).unwrap_or(PhaseSample {
                    field,
                    phase: Phase::Indeterminate,
                    slope: (f64::NAN, f64::NAN),
                    ronkin: f64::NAN,
                })
            })
            .collect()
    }
}

/// Coefficient of `w^k` in the power series of `num / den` at `w = 0`.
fn series_coeff(num: &[Complex64], den: &[Complex64], k: usize) -> Complex64 {
    let mut out = vec![Complex64::default(); k + 1];
    for i in 0..=k {
        let mut acc = num.get(i).copied().unwrap_or_default();
        for j in 1..=i.min(den.len() - 1) {
            acc -= den[j] * out[i - j];
        }
        out[i] = acc / den[0];
    }
    out[k]
}

/// Point in `(0, π)` where a piecewise constant count changes, by bisection.
fn crossing(count: impl Fn(f64) -> usize) -> Option<f64> {
    let (c0, c1) = (count(0.0), count(PI));
    if c0 == c1 {
        return None;
    }
    let (mut lo, mut hi) = (0.0, PI);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if count(mid) == c0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Uniform axis `lo..=hi` with `n` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn at(&self, i: usize) -> f64 {
        if self.n <= 1 {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterGrid {
    pub bx: Axis,
    pub by: Axis,
}

/// Largest raster accepted.
pub const MAX_RASTER_CELLS: usize = 1_000_000;

impl RasterGrid {
    pub fn new(bx: Axis, by: Axis) -> Result<Self> {
        let cells = bx.n.saturating_mul(by.n);
        if cells > MAX_RASTER_CELLS {
            return Err(Error::TooLarge {
                requested: cells,
                max: MAX_RASTER_CELLS,
            });
        }
        if !(bx.lo.is_finite() && bx.hi.is_finite() && by.lo.is_finite() && by.hi.is_finite()) {
            return Err(Error::domain("raster ranges must be finite"));
        }
        Ok(Self { bx, by })
    }
}

/// Number of liquid arcs met along the outer ring of a raster, i.e. the
/// number of tentacles leaving the window.
pub fn count_boundary_tentacles(grid: &RasterGrid, cells: &[PhaseSample]) -> usize {
    let (nx, ny) = (grid.bx.n, grid.by.n);
    if nx < 2 || ny < 2 || cells.len() != nx * ny {
        return 0;
    }
    let mut ring = Vec::new();
    ring.extend((0..nx).map(|i| (i, 0)));
    ring.extend((1..ny).map(|j| (nx - 1, j)));
    ring.extend((0..nx - 1).rev().map(|i| (i, ny - 1)));
    ring.extend((1..ny - 1).rev().map(|j| (0, j)));
    let liquid: Vec<bool> = ring
        .iter()
        .map(|&(i, j)| cells[j * nx + i].phase == Phase::Liquid)
        .collect();
    if liquid.iter().all(|&l| l) {
        return 0;
    }
    (0..liquid.len())
        .filter(|&k| liquid[k] && !liquid[(k + 1) % liquid.len()])
        .count()
}
