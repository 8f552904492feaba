//! Tentacles of the amoeba along a horizontal side of the Newton polygon,
//! and the bead statistics they carry.
//!
//! Everything is expressed through the bottom rows of the Laurent
//! polynomials: with `δ₀` the lowest `w`-exponent of `P`, the polynomial
//! `P₀(X)` is the `w^{δ₀}` row, and for a root `r = σe^c` of `P₀` the hatted
//! polynomial `P̂(z, w) = w^{-δ₀} P(σz, w)` has `∂₂P̂(e^c, 0)` equal to the
//! `w^{δ₀+1}` row evaluated at `r`.

use std::collections::{BTreeMap, VecDeque};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::graph::HoneycombWeights;
use super::poly::{poly_roots, LaurentPoly2};
use super::spectral::{DimerModel, MagneticField};
use crate::error::{Error, Result};
use crate::kernel::{BeadKernel, KernelParams};

/// Relative size below which a coefficient row counts as identically zero.
const ROW_ZERO_TOL: f64 = 1e-10;
/// Two roots of `P₀` closer than this (relative) are a multiple root.
const ROOT_CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TentacleParams {
    /// `log |r|` for the chosen root `r` of `P₀`.
    pub c: f64,
    /// `sign(r)`.
    pub sign_gauge: f64,
    pub beta: f64,
    /// Endpoints of the bottom side of the Newton polygon.
    pub side: ((i64, i64), (i64, i64)),
    /// Lowest `w`-exponent of `P`.
    pub delta0: i64,
}

impl TentacleParams {
    pub fn root(&self) -> f64 {
        self.sign_gauge * self.c.exp()
    }

    /// Field in the tentacle at height `By = log t`, shifted sideways by `βγt`.
    pub fn field(&self, gamma: f64, t: f64) -> MagneticField {
        MagneticField {
            bx: self.c + self.beta * gamma * t,
            by: t.ln(),
        }
    }
}

/// `Σ_i coeff(i, j) x^i`.
fn row_at(p: &LaurentPoly2, j: i64, x: f64) -> f64 {
    p.terms()
        .filter(|((_, jj), _)| *jj == j)
        .map(|((i, _), c)| c.re * x.powi(i as i32))
        .sum()
}

fn row_norm(p: &LaurentPoly2, j: i64) -> f64 {
    p.terms()
        .filter(|((_, jj), _)| *jj == j)
        .map(|(_, c)| c.norm())
        .fold(0.0, f64::max)
}

/// Bottom side of the Newton polygon, if it is horizontal.
fn bottom_side(newton: &[(i64, i64)]) -> Result<((i64, i64), (i64, i64))> {
    let lo = newton
        .iter()
        .map(|v| v.1)
        .min()
        .ok_or_else(|| Error::invalid("empty Newton polygon"))?;
    let on: Vec<_> = newton.iter().filter(|v| v.1 == lo).collect();
    if on.len() < 2 {
        return Err(Error::invalid(
            "Newton polygon has no horizontal bottom side; re-embed with an SL2(Z) basis change",
        ));
    }
    let a = **on.iter().min().expect("nonempty");
    let b = **on.iter().max().expect("nonempty");
    Ok((a, b))
}

/// Basis change sending side `k` of the polygon (from vertex `k` to `k+1`,
/// counterclockwise) to the bottom horizontal side.
pub fn propose_basis(newton: &[(i64, i64)], k: usize) -> Result<[[i64; 2]; 2]> {
    let n = newton.len();
    if n < 2 || k >= n {
        return Err(Error::domain(format!("side {k} of a polygon with {n} vertices")));
    }
    let (a, b) = (newton[k], newton[(k + 1) % n]);
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let (g, u, v) = ext_gcd(dx, dy);
    let (p, q) = (dx / g, dy / g);
    // u p + v q = 1, so the rows (u, v) and (-q, p) send (p, q) to (1, 0).
    Ok([[u, v], [-q, p]])
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.abs(), a.signum(), 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        // a = (a div b)·b + a mod b with floor division.
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Nonzero roots of `P₀`, sorted by modulus.
pub fn bottom_roots(model: &DimerModel) -> Result<Vec<Complex64>> {
    let p = model.char_poly();
    bottom_side(model.newton_polygon())?;
    let (jlo, _) = p.w_range().expect("nonzero");
    let (lo, coeffs) = p.w_row(jlo).in_z(Complex64::new(1.0, 0.0));
    let _ = lo;
    let mut roots: Vec<Complex64> = poly_roots(&coeffs).into_iter().filter(|r| r.norm() > 0.0).collect();
    roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    Ok(roots)
}

/// Tentacle parameters for the `root_index`-th root (by modulus) of `P₀`.
pub fn tentacle_params(model: &DimerModel, root_index: usize) -> Result<TentacleParams> {
    let p = model.char_poly();
    let side = bottom_side(model.newton_polygon())?;
    let roots = bottom_roots(model)?;
    let r = *roots.get(root_index).ok_or_else(|| {
        Error::domain(format!(
            "P0 has {} nonzero roots, index {root_index} requested",
            roots.len()
        ))
    })?;
    if roots
        .iter()
        .enumerate()
        .any(|(k, s)| k != root_index && (s - r).norm() <= ROOT_CLUSTER_TOL * r.norm())
    {
        return Err(Error::invalid(format!("root {r} of P0 is multiple")));
    }
    if r.im.abs() > ROOT_CLUSTER_TOL * r.norm() {
        return Err(Error::invalid(format!("root {r} of P0 is not real")));
    }
    let delta0 = side.0 .1;
    let x = r.re;
    let sigma = x.signum();
    let c = x.abs().ln();
    let d1 = row_at(&p.d1(), delta0, x);
    let d2 = row_at(p, delta0 + 1, x);
    let beta = -(-c).exp() * d2 / (sigma * d1);
    if !(beta.is_finite() && beta != 0.0) {
        return Err(Error::invalid(format!("degenerate tentacle: beta = {beta}")));
    }
    Ok(TentacleParams {
        c,
        sign_gauge: sigma,
        beta,
        side,
        delta0,
    })
}

/// Bisection on the liquid indicator from `inside` towards `outside`.
fn boundary_between(model: &DimerModel, by: f64, inside: f64, outside: f64) -> Result<f64> {
    let liquid = |bx: f64| model.is_liquid(MagneticField { bx, by });
    if liquid(inside) != Some(true) {
        return Err(Error::invalid(format!(
            "field ({inside}, {by}) is not liquid; boundary not bracketed"
        )));
    }
    let mut out = outside;
    let mut grow = 0;
    while liquid(out) != Some(false) {
        out = inside + 2.0 * (out - inside);
        grow += 1;
        if grow > 60 {
            return Err(Error::invalid(format!(
                "amoeba boundary not found near Bx = {inside} at By = {by}"
            )));
        }
    }
    let (mut a, mut b) = (inside, out);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        match liquid(m) {
            Some(true) => a = m,
            Some(false) => b = m,
            None => return Ok(m),
        }
    }
    Ok(0.5 * (a + b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoteRow {
    pub by: f64,
    /// Boundary abscissae of the tentacle at this height.
    pub left: f64,
    pub right: f64,
    /// `β e^{By}`.
    pub predicted_half_width: f64,
}

impl AsymptoteRow {
    /// Half the tentacle width divided by `e^{By}`.
    pub fn fitted_beta(&self) -> f64 {
        0.5 * (self.right - self.left) / self.by.exp()
    }
}

/// Locates the two amoeba boundary points near `c` at each height.
pub fn tentacle_asymptote_check(model: &DimerModel, tp: &TentacleParams, by_list: &[f64]) -> Result<Vec<AsymptoteRow>> {
    by_list
        .iter()
        .map(|&by| {
            let h = tp.beta.abs() * by.exp();
            let left = boundary_between(model, by, tp.c, tp.c - 2.0 * h)?;
            let right = boundary_between(model, by, tp.c, tp.c + 2.0 * h)?;
            Ok(AsymptoteRow {
                by,
                left,
                right,
                predicted_half_width: h,
            })
        })
        .collect()
}

/// Centers of the vertical tentacles crossing the line `By = by`, found by
/// scanning `Bx` over `[lo, hi]` for changes in the root counts at `z = ±1`.
pub fn vertical_tentacles(model: &DimerModel, by: f64, lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(hi > lo && step > 0.0) {
        return Err(Error::domain("scan range must be nonempty with positive step"));
    }
    let index = |bx: f64| model.root_counts(MagneticField { bx, by });
    // Position of a count change with the counts on either side.
    type Change = (f64, (usize, usize), (usize, usize));
    let mut changes = Vec::new();
    fn refine(
        index: &dyn Fn(f64) -> (usize, usize),
        a: f64,
        b: f64,
        ia: (usize, usize),
        ib: (usize, usize),
        out: &mut Vec<Change>,
    ) {
        if ia == ib {
            return;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b || b - a < 1e-15 * (1.0 + a.abs()) {
            out.push((m, ia, ib));
            return;
        }
        let im = index(m);
        refine(index, a, m, ia, im, out);
        refine(index, m, b, im, ib, out);
    }
    let n = ((hi - lo) / step).ceil() as usize;
    let mut prev = (lo, index(lo));
    for k in 1..=n {
        let x = (lo + step * k as f64).min(hi);
        let ix = index(x);
        refine(&index, prev.0, x, prev.1, ix, &mut changes);
        prev = (x, ix);
    }
    // Liquid exactly where the counts at z = 1 and z = -1 differ.
    let mut centers = Vec::new();
    let mut start = None;
    for (x, a, b) in changes {
        match (a.0 == a.1, b.0 == b.1) {
            (true, false) => start = Some(x),
            (false, true) => {
                if let Some(s) = start.take() {
                    centers.push(0.5 * (s + x));
                }
            }
            _ => {}
        }
    }
    Ok(centers)
}

/// `ρ_e` for a thread-crossing edge, with its thread label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeDensity {
    pub edge: usize,
    pub rho: f64,
    pub thread: usize,
    /// `K_e ρ_e`.
    pub weighted: f64,
}

/// `K_e m_e Q_{b_e w_e}` as a Laurent polynomial.
fn edge_poly(model: &DimerModel, edge: usize) -> LaurentPoly2 {
    let e = model.graph().edges()[edge];
    model
        .cofactor(e.black, e.white)
        .shift(e.offset.0, e.offset.1)
        .mul_scalar(Complex64::new(e.sign as f64 * e.weight, 0.0))
}

/// Whether the edge has no monomial on the bottom row, i.e. crosses the threads.
pub fn is_crossing_edge(model: &DimerModel, tp: &TentacleParams, edge: usize) -> bool {
    row_norm(&edge_poly(model, edge), tp.delta0) <= ROW_ZERO_TOL * model.char_poly().scale()
}

/// `ρ_e = ∂₂(m_e Q_e)^ / ∂₂P^` at `(e^c, 0)`.
pub fn rho_edge(model: &DimerModel, tp: &TentacleParams, edge: usize) -> Result<f64> {
    if edge >= model.graph().edges().len() {
        return Err(Error::domain(format!("edge {edge} out of range")));
    }
    if !is_crossing_edge(model, tp, edge) {
        return Err(Error::invalid(format!(
            "edge {edge}: K_e m_e Q_e has monomials of degree 0 in w after normalization"
        )));
    }
    let e = model.graph().edges()[edge];
    let q = model.cofactor(e.black, e.white).shift(e.offset.0, e.offset.1);
    let r = tp.root();
    Ok(row_at(&q, tp.delta0 + 1, r) / row_at(model.char_poly(), tp.delta0 + 1, r))
}

/// Densities of all crossing edges; threads are the classes of crossing
/// edges linked through shared faces.
pub fn rho_edges(model: &DimerModel, tp: &TentacleParams) -> Result<Vec<EdgeDensity>> {
    let g = model.graph();
    let crossing: Vec<usize> = (0..g.edges().len())
        .filter(|&e| is_crossing_edge(model, tp, e))
        .collect();
    if crossing.is_empty() {
        return Err(Error::invalid("no edge crosses the threads of this side"));
    }
    let mut parent: BTreeMap<usize, usize> = crossing.iter().map(|&e| (e, e)).collect();
    fn find(p: &mut BTreeMap<usize, usize>, mut x: usize) -> usize {
        while p[&x] != x {
            x = p[&x];
        }
        x
    }
    for face in g.faces() {
        let here: Vec<usize> = face.iter().copied().filter(|e| parent.contains_key(e)).collect();
        for w in here.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent.insert(a, b);
        }
    }
    let mut labels: BTreeMap<usize, usize> = BTreeMap::new();
    crossing
        .iter()
        .map(|&edge| {
            let root = find(&mut parent, edge);
            let next = labels.len();
            let thread = *labels.entry(root).or_insert(next);
            let rho = rho_edge(model, tp, edge)?;
            let e = g.edges()[edge];
            Ok(EdgeDensity {
                edge,
                rho,
                thread,
                weighted: e.sign as f64 * e.weight * rho,
            })
        })
        .collect()
}

/// `Σ K_e ρ_e` per thread label.
pub fn thread_sums(densities: &[EdgeDensity]) -> Vec<f64> {
    let n = densities.iter().map(|d| d.thread + 1).max().unwrap_or(0);
    let mut s = vec![0.0; n];
    for d in densities {
        s[d.thread] += d.weighted;
    }
    s
}

/// The thread whose crossing edges carry the beads of this tentacle.
pub fn active_thread(densities: &[EdgeDensity]) -> Option<usize> {
    thread_sums(densities)
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(k, _)| k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rank1 {
    pub blacks: Vec<usize>,
    pub whites: Vec<usize>,
    /// Translation of each bordering vertex in one lift of the thread.
    pub black_shift: Vec<(i64, i64)>,
    pub white_shift: Vec<(i64, i64)>,
    pub matrix: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    /// Factors with `V` equal to 1 at the first white vertex.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub reconstruction_error: f64,
}

impl Rank1 {
    pub fn ratio(&self) -> f64 {
        if self.singular_values.len() < 2 {
            0.0
        } else {
            self.singular_values[1] / self.singular_values[0]
        }
    }
}

/// Lift of a thread: translations of the endpoints of its crossing edges,
/// placed consistently through the faces they share.
fn lift_thread(model: &DimerModel, edges: &[usize]) -> Result<Vec<(usize, (i64, i64))>> {
    let g = model.graph();
    let walks = g.face_walks().map_err(|d| Error::invalid(d.to_string()))?;
    let mut placed: BTreeMap<usize, (i64, i64)> = BTreeMap::new();
    let mut queue = VecDeque::new();
    placed.insert(edges[0], (0, 0));
    queue.push_back(edges[0]);
    while let Some(e) = queue.pop_front() {
        let at = placed[&e];
        for walk in &walks {
            for s in walk.iter().filter(|s| s.edge == e) {
                let origin = (at.0 - s.white_at.0, at.1 - s.white_at.1);
                for t in walk.iter().filter(|t| edges.contains(&t.edge)) {
                    if let std::collections::btree_map::Entry::Vacant(v) = placed.entry(t.edge) {
                        v.insert((origin.0 + t.white_at.0, origin.1 + t.white_at.1));
                        queue.push_back(t.edge);
                    }
                }
            }
        }
    }
    if placed.len() != edges.len() {
        return Err(Error::invalid(
            "crossing edges of the thread are not linked through faces",
        ));
    }
    Ok(edges.iter().map(|e| (*e, placed[e])).collect())
}

/// Matrix of `ρ_{bw} = ∂₂[(z, w)^{h_b - h_w} Q_{bw}]^ / ∂₂P^` over the
/// vertices bordering a thread, and its rank-one factorization.
pub fn rank1_check(model: &DimerModel, tp: &TentacleParams, thread: usize) -> Result<Rank1> {
    let dens = rho_edges(model, tp)?;
    let edges: Vec<usize> = dens.iter().filter(|d| d.thread == thread).map(|d| d.edge).collect();
    if edges.is_empty() {
        return Err(Error::domain(format!("no thread {thread}")));
    }
    let lift = lift_thread(model, &edges)?;
    let g = model.graph();
    let mut whites: BTreeMap<usize, (i64, i64)> = BTreeMap::new();
    let mut blacks: BTreeMap<usize, (i64, i64)> = BTreeMap::new();
    for &(e, at) in &lift {
        let ed = g.edges()[e];
        whites.entry(ed.white).or_insert(at);
        blacks
            .entry(ed.black)
            .or_insert((at.0 + ed.offset.0, at.1 + ed.offset.1));
    }
    let r = tp.root();
    let denom = row_at(model.char_poly(), tp.delta0 + 1, r);
    let (bl, wl): (Vec<_>, Vec<_>) = (blacks.into_iter().collect(), whites.into_iter().collect());
    let matrix = DMatrix::from_fn(bl.len(), wl.len(), |i, j| {
        let ((b, hb), (w, hw)) = (bl[i], wl[j]);
        let q = model.cofactor(b, w).shift(hb.0 - hw.0, hb.1 - hw.1);
        row_at(&q, tp.delta0 + 1, r) / denom
    });
    let svd = matrix.clone().svd(true, true);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let (uu, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let k0 = order[0];
    let v0 = vt[(k0, 0)];
    let v: Vec<f64> = (0..wl.len()).map(|j| vt[(k0, j)] / v0).collect();
    let u: Vec<f64> = (0..bl.len()).map(|i| uu[(i, k0)] * sv[0] * v0).collect();
    let mut err: f64 = 0.0;
    for i in 0..bl.len() {
        for j in 0..wl.len() {
            err = err.max((u[i] * v[j] - matrix[(i, j)]).abs());
        }
    }
    Ok(Rank1 {
        blacks: bl.iter().map(|x| x.0).collect(),
        whites: wl.iter().map(|x| x.0).collect(),
        black_shift: bl.iter().map(|x| x.1).collect(),
        white_shift: wl.iter().map(|x| x.1).collect(),
        matrix,
        singular_values: sv,
        u,
        v,
        reconstruction_error: err,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsoradialMap {
    pub torus_zero: (Complex64, Complex64),
    /// `ω(e) = i K_e m_e Q_{b_e w_e}` at the torus zero.
    pub omega: Vec<Complex64>,
    /// Position of each face of the fundamental domain.
    pub faces: Vec<Complex64>,
    /// Displacement of the dual map under the translations `(1, 0)` and `(0, 1)`.
    pub periods: (Complex64, Complex64),
    /// `(i e^{Bx} z₀ ∂₁P, i e^{By} w₀ ∂₂P)` at the torus zero.
    pub period_formula: (Complex64, Complex64),
    pub max_divergence: f64,
    pub residual: f64,
}

impl IsoradialMap {
    pub fn length(&self, edge: usize) -> f64 {
        self.omega[edge].norm()
    }
}

/// Dual embedding built from the divergence-free flow at a torus zero.
pub fn isoradial_map(model: &DimerModel, field: MagneticField) -> Result<IsoradialMap> {
    let g = model.graph();
    let (z0, w0) = model
        .torus_zero(field)?
        .ok_or_else(|| Error::domain(format!("field ({}, {}) is not liquid", field.bx, field.by)))?;
    let (zz, ww) = (z0 * field.bx.exp(), w0 * field.by.exp());
    let i = Complex64::i();
    let omega: Vec<Complex64> = g
        .edges()
        .iter()
        .map(|e| {
            let m = zz.powi(e.offset.0 as i32) * ww.powi(e.offset.1 as i32);
            i * m * (e.sign as f64 * e.weight) * model.cofactor(e.black, e.white).eval(zz, ww)
        })
        .collect();
    let n = g.size();
    let mut div = vec![Complex64::default(); 2 * n];
    for (k, e) in g.edges().iter().enumerate() {
        div[e.white] += omega[k];
        div[n + e.black] += omega[k];
    }
    let scale = omega
        .iter()
        .map(|o| o.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let max_divergence = div.iter().map(|d| d.norm()).fold(0.0, f64::max) / scale;
    let sides = g.edge_sides().map_err(|d| Error::invalid(d.to_string()))?;
    // Unknowns: faces 1.., then the two periods. Face 0 sits at the origin.
    let nf = g.faces().len();
    let cols = nf - 1 + 2;
    let mut a = DMatrix::<Complex64>::zeros(g.edges().len(), cols);
    let mut rhs = nalgebra::DVector::<Complex64>::zeros(g.edges().len());
    let one = Complex64::new(1.0, 0.0);
    for (k, s) in sides.iter().enumerate() {
        // Crossing e from its right face to its left face adds ω(e).
        let (fl, tl) = s.left;
        let (fr, tr) = s.right;
        if fl > 0 {
            a[(k, fl - 1)] += one;
        }
        if fr > 0 {
            a[(k, fr - 1)] -= one;
        }
        a[(k, nf - 1)] += one * (tl.0 - tr.0) as f64;
        a[(k, nf)] += one * (tl.1 - tr.1) as f64;
        rhs[k] = omega[k];
    }
    let svd = a.clone().svd(true, true);
    let sol = svd.solve(&rhs, 1e-12).map_err(|e| Error::invalid(e.to_string()))?;
    let residual = (&a * &sol - &rhs).iter().map(|v| v.norm()).fold(0.0, f64::max) / scale;
    let mut faces = vec![Complex64::default()];
    faces.extend((0..nf - 1).map(|k| sol[k]));
    let p = model.char_poly();
    let formula = (i * zz * p.d1().eval(zz, ww), i * ww * p.d2().eval(zz, ww));
    Ok(IsoradialMap {
        torus_zero: (z0, w0),
        omega,
        faces,
        periods: (sol[nf - 1], sol[nf]),
        period_formula: formula,
        max_divergence,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnLabel {
    A,
    C,
    Critical,
}

impl ColumnLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ColumnLabel::A => "a",
            ColumnLabel::C => "c",
            ColumnLabel::Critical => "critical",
        }
    }
}

pub const FREEZE_TOL: f64 = 1e-9;

/// Column `j` is frozen to a-edges when `Bx < Σ_i log(a_ij / c_ij)`.
pub fn freeze_classify(weights: &HoneycombWeights, bx: f64, tol: f64) -> Vec<ColumnLabel> {
    (0..weights.n)
        .map(|j| {
            let th = weights.column_threshold(j);
            if bx < th - tol {
                ColumnLabel::A
            } else if bx > th + tol {
                ColumnLabel::C
            } else {
                ColumnLabel::Critical
            }
        })
        .collect()
}

/// Geometric law `P(L ≥ p) = q^p` of runs of c-edges in a frozen column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunLengthLaw {
    pub q: f64,
}

impl RunLengthLaw {
    pub fn tail(&self, p: u32) -> f64 {
        self.q.powi(p as i32)
    }

    pub fn mean(&self) -> f64 {
        self.q / (1.0 - self.q)
    }
}

/// `q = Π_i ℓ(c_ij) / ℓ(a_ij)` from the dual edge lengths at the tentacle
/// field of height `t_iso` (the lengths converge as `t_iso → 0`).
pub fn run_length_law(
    model: &DimerModel,
    weights: &HoneycombWeights,
    tp: &TentacleParams,
    column: usize,
    t_iso: f64,
) -> Result<RunLengthLaw> {
    if column >= weights.n {
        return Err(Error::domain(format!("column {column} out of range")));
    }
    let label = freeze_classify(weights, tp.c, FREEZE_TOL)[column];
    if label != ColumnLabel::A {
        return Err(Error::domain(format!(
            "column {column} is '{}' at the tentacle, not 'a'",
            label.as_str()
        )));
    }
    let map = isoradial_map(model, tp.field(0.0, t_iso))?;
    let q: f64 = (0..weights.m)
        .map(|i| {
            let k = weights.index(i, column);
            map.length(3 * k + 2) / map.length(3 * k)
        })
        .product();
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Accuracy {
            context: format!("run-length parameter of frozen column {column}"),
            estimate: q,
            tolerance: 1.0,
        });
    }
    Ok(RunLengthLaw { q })
}

/// Exact probability, at `field`, of `count` successive c-edges in column
/// `column` below the b-edge leaving white `(row, column)`, given that b-edge.
pub fn successive_c_probability(
    model: &DimerModel,
    weights: &HoneycombWeights,
    field: MagneticField,
    row: usize,
    column: usize,
    count: usize,
) -> Result<f64> {
    if row >= weights.m || column >= weights.n {
        return Err(Error::domain("vertex outside the fundamental domain"));
    }
    let g = model.graph();
    let edges = g.edges();
    let k0 = weights.index(row, column);
    let bead = 3 * k0 + 1;
    let mut whites = vec![(edges[bead].white, (0i64, 0i64))];
    let mut blacks = vec![(edges[bead].black, edges[bead].offset)];
    let mut chosen = vec![bead];
    for _ in 0..count {
        let (w, at) = *whites.last().expect("nonempty");
        let a = edges[3 * w];
        let b_at = (at.0 + a.offset.0, at.1 + a.offset.1);
        let c_edge = (0..edges.len())
            .find(|&e| e % 3 == 2 && edges[e].black == a.black)
            .ok_or_else(|| Error::invalid("no c-edge into the black vertex"))?;
        let ce = edges[c_edge];
        whites.push((ce.white, (b_at.0 - ce.offset.0, b_at.1 - ce.offset.1)));
        blacks.push((a.black, b_at));
        chosen.push(c_edge);
    }
    // Pair each edge's black (column) with each edge's white (row).
    let n = chosen.len();
    let pairs: Vec<_> = blacks.iter().copied().zip(whites.iter().copied()).collect();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let (b, bt) = pairs[j].0;
            let (w, wt) = pairs[i].1;
            a[(i, j)] = model.inverse_kasteleyn(field, b, (bt.0 - wt.0, bt.1 - wt.1), w)?.value;
        }
    }
    let weight: f64 = chosen[1..].iter().map(|&e| model.edge_weight(field, e)).product();
    Ok(weight * a.determinant() / a[(0, 0)])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelCheckRow {
    pub t: f64,
    pub x: i64,
    pub xi: f64,
    pub y: i64,
    pub xi_realized: f64,
    pub kinv: f64,
    pub predicted: f64,
    pub abs_error: f64,
}

/// Compares `σ^y ε^x e^{B·o_e} K⁻¹(b_e translated by (-y, x), w_e)` at the
/// tentacle field with `t |β| √(1-γ²) ρ_e J_{εγ}(x, ξ)`, `ξ = t|β|√(1-γ²)·y`,
/// where `ε = sgn β`. A tentacle with `β < 0` opens the other way, which
/// reverses the drift.
///
/// The factor `e^{B·o_e}` undoes the field gauge on the edge itself, so that
/// `K_e(B) K⁻¹` is the edge probability at `x = y = 0`.
pub fn tentacle_kernel_check(
    model: &DimerModel,
    tp: &TentacleParams,
    edge: usize,
    gamma: f64,
    t_list: &[f64],
    points: &[(i64, f64)],
) -> Result<Vec<KernelCheckRow>> {
    let kernel = BeadKernel::new(KernelParams::new(gamma * tp.beta.signum())?);
    let s = (1.0 - gamma * gamma).sqrt();
    let rho = rho_edge(model, tp, edge)?;
    let e = model.graph().edges()[edge];
    let mut rows = Vec::new();
    for &t in t_list {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::domain(format!("t = {t} must lie in (0, 1)")));
        }
        let field = tp.field(gamma, t);
        let scale = t * tp.beta.abs() * s;
        let gauge = (field.bx * e.offset.0 as f64 + field.by * e.offset.1 as f64).exp();
        for &(x, xi) in points {
            let y = (xi / scale).round() as i64;
            let xi_realized = y as f64 * scale;
            let k = model.inverse_kasteleyn(field, e.black, (e.offset.0 - y, e.offset.1 + x), e.white)?;
            let mut sign = 1.0;
            if y.rem_euclid(2) == 1 && tp.sign_gauge < 0.0 {
                sign = -sign;
            }
            if x.rem_euclid(2) == 1 && tp.beta < 0.0 {
                sign = -sign;
            }
            let kinv = sign * gauge * k.value;
            let predicted = scale * rho * kernel.value(x, xi_realized)?;
            rows.push(KernelCheckRow {
                t,
                x,
                xi,
                y,
                xi_realized,
                kinv,
                predicted,
                abs_error: (kinv - predicted).abs(),
            });
        }
    }
    Ok(rows)
}

/// Angular half-width of the torus zero at the tentacle field, divided by `t`.
pub fn zero_half_width_over_t(model: &DimerModel, tp: &TentacleParams, gamma: f64, t: f64) -> Result<f64> {
    let (z0, _) = model
        .torus_zero(tp.field(gamma, t))?
        .ok_or_else(|| Error::domain("tentacle field is not liquid"))?;
    Ok((z0 * tp.sign_gauge).arg().abs() / t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proposed_basis_is_unimodular_and_levels_the_side() {
        let poly = [(0, 0), (2, 1), (1, 3)];
        for k in 0..3 {
            let m = propose_basis(&poly, k).unwrap();
            assert_eq!(m[0][0] * m[1][1] - m[0][1] * m[1][0], 1);
            let (a, b) = (poly[k], poly[(k + 1) % 3]);
            let d = (b.0 - a.0, b.1 - a.1);
            let img = (m[0][0] * d.0 + m[0][1] * d.1, m[1][0] * d.0 + m[1][1] * d.1);
            assert!(img.1 == 0 && img.0 > 0, "{k}: {img:?}");
        }
    }

    #[test]
    fn freeze_thresholds() {
        let w = HoneycombWeights::uniform(2, 3, 2.0, 1.0, 1.0);
        assert!(freeze_classify(&w, 0.0, FREEZE_TOL)
            .iter()
            .all(|l| *l == ColumnLabel::A));
        let th = 3.0 * 2f64.ln();
        assert!(freeze_classify(&w, th, FREEZE_TOL)
            .iter()
            .all(|l| *l == ColumnLabel::Critical));
        let u = HoneycombWeights::uniform(2, 3, 1.0, 1.0, 1.0);
        assert!(freeze_classify(&u, 10.0, FREEZE_TOL)
            .iter()
            .all(|l| *l == ColumnLabel::C));
    }

    #[test]
    fn geometric_tail() {
        let law = RunLengthLaw { q: 0.25 };
        assert_eq!(law.tail(2), 0.0625);
    }
}
