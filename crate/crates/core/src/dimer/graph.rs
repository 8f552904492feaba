//! Periodic bipartite graphs given by a fundamental domain on the torus.
//!
//! An edge joins white `w` in the base domain to black `b` in the domain
//! translated by `offset = (dx, dy)`; it contributes `sign·weight·z^dx w^dy`
//! to the `(w, b)` entry of the Kasteleyn matrix. Faces are closed walks
//! listed counterclockwise (in the frame whose axes are the `z` and `w`
//! translations), starting with an edge traversed from its white end.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub white: usize,
    pub black: usize,
    pub weight: f64,
    pub sign: i8,
    pub offset: (i64, i64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicBipartiteGraph {
    white_count: usize,
    black_count: usize,
    edges: Vec<Edge>,
    faces: Vec<Vec<usize>>,
}

/// First structural problem found by [`validate_graph`].
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    UnequalCounts {
        white: usize,
        black: usize,
    },
    Disconnected,
    /// A face list is not a closed alternating walk.
    FaceWalk {
        face: usize,
        step: usize,
        reason: String,
    },
    /// An edge is not bordered once on each side by the face list.
    EdgeCoverage {
        edge: usize,
        forward: usize,
        backward: usize,
    },
    FaceSign {
        face: usize,
        product: i8,
        required: i8,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnequalCounts { white, black } => write!(f, "{white} white vs {black} black vertices"),
            Self::Disconnected => write!(f, "quotient graph is disconnected"),
            Self::FaceWalk { face, step, reason } => write!(f, "face {face}, step {step}: {reason}"),
            Self::EdgeCoverage { edge, forward, backward } => write!(
                f,
                "edge {edge} is traversed {forward} time(s) white-to-black and {backward} time(s) black-to-white by the faces"
            ),
            Self::FaceSign { face, product, required } => {
                write!(f, "face {face}: sign product {product}, Kasteleyn condition requires {required}")
            }
        }
    }
}

/// One step of a face walk. `white_at` is the translation of the edge's white
/// end in the face's own frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceStep {
    pub edge: usize,
    pub white_to_black: bool,
    pub white_at: (i64, i64),
}

/// The two faces along an edge and where they sit relative to the edge's white end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeSides {
    /// Face on the left of the edge directed white to black.
    pub left: (usize, (i64, i64)),
    pub right: (usize, (i64, i64)),
}

impl PeriodicBipartiteGraph {
    pub fn new(white_count: usize, black_count: usize, edges: Vec<Edge>, faces: Vec<Vec<usize>>) -> Result<Self> {
        for (k, e) in edges.iter().enumerate() {
            if e.white >= white_count || e.black >= black_count {
                return Err(Error::invalid(format!("edge {k} references a missing vertex")));
            }
            if !(e.weight.is_finite() && e.weight >= 0.0) {
                return Err(Error::invalid(format!("edge {k} has weight {}", e.weight)));
            }
            if e.sign != 1 && e.sign != -1 {
                return Err(Error::invalid(format!("edge {k} has sign {}", e.sign)));
            }
        }
        for (k, f) in faces.iter().enumerate() {
            if f.is_empty() || f.len() % 2 == 1 {
                return Err(Error::invalid(format!("face {k} has odd or zero length {}", f.len())));
            }
            if let Some(&e) = f.iter().find(|&&e| e >= edges.len()) {
                return Err(Error::invalid(format!("face {k} references missing edge {e}")));
            }
        }
        Ok(Self {
            white_count,
            black_count,
            edges,
            faces,
        })
    }

    pub fn white_count(&self) -> usize {
        self.white_count
    }

    pub fn black_count(&self) -> usize {
        self.black_count
    }

    /// Vertices of each color (equal for a valid graph).
    pub fn size(&self) -> usize {
        self.white_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    /// All weights multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let mut g = self.clone();
        g.edges.iter_mut().for_each(|e| e.weight *= lambda);
        g
    }

    /// Copy with one edge replaced.
    pub fn with_edge(&self, index: usize, edge: Edge) -> Self {
        let mut g = self.clone();
        g.edges[index] = edge;
        g
    }

    /// Copy with an extra edge (not part of any listed face).
    pub fn with_extra_edge(&self, edge: Edge) -> Self {
        let mut g = self.clone();
        g.edges.push(edge);
        g
    }

    /// Re-embedding by an `SL₂(ℤ)` change of translation basis: offsets map to `M·offset`.
    pub fn change_basis(&self, m: [[i64; 2]; 2]) -> Result<Self> {
        if m[0][0] * m[1][1] - m[0][1] * m[1][0] != 1 {
            return Err(Error::domain("basis change must have determinant 1"));
        }
        let mut g = self.clone();
        for e in &mut g.edges {
            let (x, y) = e.offset;
            e.offset = (m[0][0] * x + m[0][1] * y, m[1][0] * x + m[1][1] * y);
        }
        Ok(g)
    }

    /// Walk every face, checking that it alternates colors and closes up.
    pub fn face_walks(&self) -> std::result::Result<Vec<Vec<FaceStep>>, Diagnostic> {
        let mut walks = Vec::with_capacity(self.faces.len());
        for (fi, face) in self.faces.iter().enumerate() {
            let start = self.edges[face[0]].white;
            let mut at_white = start;
            let mut pos = (0i64, 0i64);
            let mut steps = Vec::with_capacity(face.len());
            for (k, &ei) in face.iter().enumerate() {
                let e = self.edges[ei];
                if k % 2 == 0 {
                    if e.white != at_white {
                        return Err(Diagnostic::FaceWalk {
                            face: fi,
                            step: k,
                            reason: format!("edge {ei} does not start at white {at_white}"),
                        });
                    }
                    steps.push(FaceStep {
                        edge: ei,
                        white_to_black: true,
                        white_at: pos,
                    });
                    pos = (pos.0 + e.offset.0, pos.1 + e.offset.1);
                } else {
                    let prev = self.edges[face[k - 1]];
                    if e.black != prev.black {
                        return Err(Diagnostic::FaceWalk {
                            face: fi,
                            step: k,
                            reason: format!("edge {ei} does not meet black {}", prev.black),
                        });
                    }
                    pos = (pos.0 - e.offset.0, pos.1 - e.offset.1);
                    steps.push(FaceStep {
                        edge: ei,
                        white_to_black: false,
                        white_at: pos,
                    });
                    at_white = e.white;
                }
            }
            if at_white != start || pos != (0, 0) {
                return Err(Diagnostic::FaceWalk {
                    face: fi,
                    step: face.len(),
                    reason: format!("walk ends at white {at_white} translated by {pos:?}"),
                });
            }
            walks.push(steps);
        }
        Ok(walks)
    }

    /// Faces on both sides of every edge. Requires a face list in which each
    /// edge is traversed exactly once in each direction.
    pub fn edge_sides(&self) -> std::result::Result<Vec<EdgeSides>, Diagnostic> {
        let walks = self.face_walks()?;
        let mut left = vec![Vec::new(); self.edges.len()];
        let mut right = vec![Vec::new(); self.edges.len()];
        for (fi, walk) in walks.iter().enumerate() {
            for s in walk {
                let frame = (-s.white_at.0, -s.white_at.1);
                if s.white_to_black {
                    left[s.edge].push((fi, frame));
                } else {
                    right[s.edge].push((fi, frame));
                }
            }
        }
        (0..self.edges.len())
            .map(|k| {
                if left[k].len() == 1 && right[k].len() == 1 {
                    Ok(EdgeSides {
                        left: left[k][0],
                        right: right[k][0],
                    })
                } else {
                    Err(Diagnostic::EdgeCoverage {
                        edge: k,
                        forward: left[k].len(),
                        backward: right[k].len(),
                    })
                }
            })
            .collect()
    }

    fn connected(&self) -> bool {
        let n = self.white_count + self.black_count;
        if n == 0 {
            return true;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &self.edges {
            let (a, b) = (
                find(&mut parent, e.white),
                find(&mut parent, self.white_count + e.black),
            );
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        (1..n).all(|v| find(&mut parent, v) == root)
    }

    fn face_product(&self, face: &[usize]) -> i8 {
        face.iter().map(|&e| self.edges[e].sign).product()
    }
}

fn required_sign(face_len: usize) -> i8 {
    // 2k edges need product (-1)^(k+1).
    if (face_len / 2) % 2 == 1 {
        1
    } else {
        -1
    }
}

/// Structural checks: equal color counts, connectivity, well-formed faces and
/// the Kasteleyn sign condition on every face. Returns the first violation.
pub fn validate_graph(g: &PeriodicBipartiteGraph) -> std::result::Result<(), Diagnostic> {
    if g.white_count != g.black_count {
        return Err(Diagnostic::UnequalCounts {
            white: g.white_count,
            black: g.black_count,
        });
    }
    if !g.connected() {
        return Err(Diagnostic::Disconnected);
    }
    if !g.faces.is_empty() {
        g.edge_sides()?;
    }
    for (fi, face) in g.faces.iter().enumerate() {
        let (product, required) = (g.face_product(face), required_sign(face.len()));
        if product != required {
            return Err(Diagnostic::FaceSign {
                face: fi,
                product,
                required,
            });
        }
    }
    Ok(())
}

/// Signs satisfying the face condition, obtained by flipping edges of a
/// spanning tree of the dual graph from the leaves inward. Weights are
/// unchanged; the second component lists the flipped edges.
pub fn kasteleyn_sign_fix(g: &PeriodicBipartiteGraph) -> Result<(PeriodicBipartiteGraph, Vec<usize>)> {
    if g.faces.is_empty() {
        return Ok((g.clone(), Vec::new()));
    }
    let sides = g
        .edge_sides()
        .map_err(|d| Error::invalid(format!("inconsistent face list: {d}")))?;
    let nf = g.faces.len();
    let mut adj = vec![Vec::new(); nf];
    for (k, s) in sides.iter().enumerate() {
        if s.left.0 != s.right.0 {
            adj[s.left.0].push((s.right.0, k));
            adj[s.right.0].push((s.left.0, k));
        }
    }
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; nf];
    let mut seen = vec![false; nf];
    let mut order = vec![0];
    seen[0] = true;
    let mut head = 0;
    while head < order.len() {
        let f = order[head];
        head += 1;
        for &(h, e) in &adj[f] {
            if !seen[h] {
                seen[h] = true;
                parent[h] = Some((f, e));
                order.push(h);
            }
        }
    }
    if order.len() != nf {
        return Err(Error::invalid("inconsistent face list: dual graph is disconnected"));
    }
    let mut out = g.clone();
    let mut flipped = Vec::new();
    for &f in order.iter().skip(1).rev() {
        if out.face_product(&out.faces[f]) != required_sign(out.faces[f].len()) {
            let (_, e) = parent[f].expect("non-root faces have parents");
            out.edges[e].sign = -out.edges[e].sign;
            flipped.push(e);
        }
    }
    if out.face_product(&out.faces[0]) != required_sign(out.faces[0].len()) {
        return Err(Error::invalid(
            "inconsistent face list: sign conditions have no solution",
        ));
    }
    flipped.sort_unstable();
    Ok((out, flipped))
}

/// Weights of the `n × m` honeycomb: `n` columns of `m` white vertices;
/// entry `(i, j)` is row `i`, column `j`, stored at `i + m·j`.
#[derive(Debug, Clone, PartialEq)]
pub struct HoneycombWeights {
    pub n: usize,
    pub m: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl HoneycombWeights {
    pub fn uniform(n: usize, m: usize, a: f64, b: f64, c: f64) -> Self {
        Self {
            n,
            m,
            a: vec![a; n * m],
            b: vec![b; n * m],
            c: vec![c; n * m],
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.m * j
    }

    pub fn validate(&self) -> Result<()> {
        let len = self.n * self.m;
        if self.n == 0 || self.m == 0 {
            return Err(Error::domain("honeycomb needs n, m ≥ 1"));
        }
        if self.a.len() != len || self.b.len() != len || self.c.len() != len {
            return Err(Error::invalid(format!("weight arrays must have n·m = {len} entries")));
        }
        if self
            .a
            .iter()
            .chain(&self.b)
            .chain(&self.c)
            .any(|w| !(w.is_finite() && *w > 0.0))
        {
            return Err(Error::domain("honeycomb weights must be positive"));
        }
        Ok(())
    }

    /// `Σ_i log(a_ij / c_ij)`, the field at which column `j` switches from a to c.
    pub fn column_threshold(&self, j: usize) -> f64 {
        (0..self.m)
            .map(|i| (self.a[self.index(i, j)] / self.c[self.index(i, j)]).ln())
            .sum()
    }
}

/// The honeycomb with a single white and black vertex: `P = a + (b + c z)/w`.
/// Bead (thread-crossing) edges are the a-edges.
pub fn honeycomb_1x1(a: f64, b: f64, c: f64) -> Result<PeriodicBipartiteGraph> {
    let e = |weight, offset| Edge {
        white: 0,
        black: 0,
        weight,
        sign: 1,
        offset,
    };
    PeriodicBipartiteGraph::new(
        1,
        1,
        vec![e(a, (0, 0)), e(b, (0, -1)), e(c, (1, -1))],
        vec![vec![0, 2, 1, 0, 2, 1]],
    )
}

/// The `n × m` honeycomb. White `(i, j)` joins black `(i, j)` by its a-edge,
/// black `(i, j+1)` by its b-edge and black `(i+1, j)` by its c-edge; c-edges
/// leaving the top row carry `z`, b-edges leaving the last column carry `w`.
/// Edge `3·(i + m·j) + {0, 1, 2}` is the {a, b, c}-edge of white `(i, j)`.
pub fn honeycomb_nm(weights: &HoneycombWeights) -> Result<PeriodicBipartiteGraph> {
    weights.validate()?;
    let (n, m) = (weights.n, weights.m);
    let id = |i: usize, j: usize| i % m + m * (j % n);
    let mut edges = Vec::with_capacity(3 * n * m);
    for j in 0..n {
        for i in 0..m {
            let k = id(i, j);
            let white = k;
            edges.push(Edge {
                white,
                black: k,
                weight: weights.a[k],
                sign: 1,
                offset: (0, 0),
            });
            let bw = if j + 1 == n { (0, 1) } else { (0, 0) };
            edges.push(Edge {
                white,
                black: id(i, j + 1),
                weight: weights.b[k],
                sign: 1,
                offset: bw,
            });
            let cz = if i + 1 == m { (1, 0) } else { (0, 0) };
            edges.push(Edge {
                white,
                black: id(i + 1, j),
                weight: weights.c[k],
                sign: 1,
                offset: cz,
            });
        }
    }
    let (a, b, c) = (|k: usize| 3 * k, |k: usize| 3 * k + 1, |k: usize| 3 * k + 2);
    let mut faces = Vec::with_capacity(n * m);
    for j in 0..n {
        for i in 0..m {
            let (here, up, right, diag) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            let _ = diag;
            faces.push(vec![c(here), a(up), b(up), c(right), a(right), b(here)]);
        }
    }
    PeriodicBipartiteGraph::new(n * m, n * m, edges, faces)
}

/// The square lattice with one vertex of each color (all signs +1, so the
/// Kasteleyn condition fails until signs are fixed).
pub fn square_1x1() -> Result<PeriodicBipartiteGraph> {
    let e = |offset| Edge {
        white: 0,
        black: 0,
        weight: 1.0,
        sign: 1,
        offset,
    };
    PeriodicBipartiteGraph::new(
        1,
        1,
        vec![e((0, 0)), e((-1, -1)), e((0, -1)), e((-1, 0))],
        vec![vec![0, 3, 1, 2], vec![3, 1, 2, 0]],
    )
}
