//! Exact finite-torus reference values for the honeycomb dimer model.
//!
//! The twisted Kasteleyn determinant `det K(Z, W)` on an `n × m` torus
//! factorizes over the roots `ζⁿ = Z`, `ηᵐ = W` as `∏ (a + b/ζ + c/(ζη))`.
//! Its monomial `Z^{-k} W^{-l}` collects the matchings with `k` non-a edges
//! on thread 0 and `l` c-edges on row 0, all with the same sign, so the
//! coefficient moduli are the sector partition functions.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Dense twisted Kasteleyn matrix; whites and blacks both indexed `x·m + y`.
pub fn twisted_matrix(n: usize, m: usize, w: (f64, f64, f64), z: Complex64, wt: Complex64) -> DMatrix<Complex64> {
    let idx = |x: usize, y: usize| x * m + y;
    let mut k = DMatrix::from_element(n * m, n * m, Complex64::new(0.0, 0.0));
    for x in 0..n {
        for y in 0..m {
            let r = idx(x, y);
            let zx = if x == 0 { z.inv() } else { Complex64::new(1.0, 0.0) };
            let wy = if y == 0 { wt.inv() } else { Complex64::new(1.0, 0.0) };
            k[(r, idx(x, y))] += w.0;
            k[(r, idx((x + n - 1) % n, y))] += zx * w.1;
            k[(r, idx((x + n - 1) % n, (y + m - 1) % m))] += zx * wy * w.2;
        }
    }
    k
}

/// `log det K(Z, W)` from the factorized form.
pub fn log_det_product(n: usize, m: usize, w: (f64, f64, f64), arg_z: f64, arg_w: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let zeta_inv = Complex64::from_polar(1.0, -(arg_z + 2.0 * PI * j as f64) / n as f64);
        for l in 0..m {
            let eta_inv = Complex64::from_polar(1.0, -(arg_w + 2.0 * PI * l as f64) / m as f64);
            acc += (w.0 + zeta_inv * (w.1 + w.2 * eta_inv)).ln();
        }
    }
    acc
}

/// Relative sector weights `[k][l]`, `k` = non-a edges on thread 0 (`0..=m`),
/// `l` = c-edges on row 0 (`0..=n`), normalized to sum 1.
pub fn sector_weights(n: usize, m: usize, w: (f64, f64, f64)) -> Vec<Vec<f64>> {
    let (jz, jw) = (m + 1, n + 1);
    let mut logs = Vec::with_capacity(jz * jw);
    for j in 0..jz {
        for l in 0..jw {
            let az = 2.0 * PI * j as f64 / jz as f64;
            let aw = 2.0 * PI * l as f64 / jw as f64;
            logs.push(log_det_product(n, m, w, az, aw));
        }
    }
    let top = logs.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
    let vals: Vec<Complex64> = logs.iter().map(|v| (v - top).exp()).collect();
    let mut out = vec![vec![0.0; jw]; jz];
    for (k, row) in out.iter_mut().enumerate() {
        for (l, slot) in row.iter_mut().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..jz {
                for q in 0..jw {
                    let ph = 2.0 * PI * ((j * k) as f64 / jz as f64 + (q * l) as f64 / jw as f64);
                    s += vals[j * jw + q] * Complex64::from_polar(1.0, ph);
                }
            }
            *slot = s.norm();
        }
    }
    let total: f64 = out.iter().flatten().sum();
    out.iter_mut().flatten().for_each(|v| *v /= total);
    out
}

/// Exact probabilities `[P(a), P(b), P(c)]` of the edge at a white vertex.
pub fn torus_edge_probabilities(n: usize, m: usize, w: (f64, f64, f64)) -> [f64; 3] {
    let sec = sector_weights(n, m, w);
    let (mut non_a, mut c) = (0.0, 0.0);
    for (k, row) in sec.iter().enumerate() {
        for (l, p) in row.iter().enumerate() {
            non_a += k as f64 * p;
            c += l as f64 * p;
        }
    }
    let pa = 1.0 - non_a / m as f64;
    let pc = c / n as f64;
    [pa, 1.0 - pa - pc, pc]
}

/// Sector weights by enumerating all `3^{nm}` edge choices.
pub fn brute_force_sectors(n: usize, m: usize, w: (f64, f64, f64)) -> Vec<Vec<f64>> {
    let cells = n * m;
    let mut out = vec![vec![0.0; n + 1]; m + 1];
    let mut choice = vec![0u8; cells];
    'outer: loop {
        let mut hit = vec![false; cells];
        let mut ok = true;
        let mut weight = 1.0;
        let (mut k, mut l) = (0, 0);
        for x in 0..n {
            for y in 0..m {
                let (bx, by, wv) = match choice[x * m + y] {
                    0 => (x, y, w.0),
                    1 => ((x + n - 1) % n, y, w.1),
                    _ => ((x + n - 1) % n, (y + m - 1) % m, w.2),
                };
                let b = bx * m + by;
                if hit[b] {
                    ok = false;
                }
                hit[b] = true;
                weight *= wv;
                if x == 0 && choice[x * m + y] != 0 {
                    k += 1;
                }
                if y == 0 && choice[x * m + y] == 2 {
                    l += 1;
                }
            }
        }
        if ok {
            out[k][l] += weight;
        }
        for d in choice.iter_mut() {
            if *d < 2 {
                *d += 1;
                continue 'outer;
            }
            *d = 0;
        }
        break;
    }
    let total: f64 = out.iter().flatten().sum();
    out.iter_mut().flatten().for_each(|v| *v /= total);
    out
}
