use beads_core::dimer::tentacle::*;
use beads_core::dimer::*;
use beads_core::discrete::verify_convergence;
use beads_core::kernel::{BeadKernel, KernelParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit() -> DimerModel {
    DimerModel::new(honeycomb_1x1(1.0, 1.0, 1.0).unwrap()).unwrap()
}

fn weights_1x2() -> HoneycombWeights {
    HoneycombWeights {
        n: 2,
        m: 1,
        a: vec![1.3, 0.7],
        b: vec![0.9, 1.4],
        c: vec![0.8, 1.1],
    }
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize, m: usize) -> HoneycombWeights {
    let mut draw = || (0..n * m).map(|_| rng.gen_range(0.5..2.0)).collect::<Vec<f64>>();
    HoneycombWeights {
        n,
        m,
        a: draw(),
        b: draw(),
        c: draw(),
    }
}

fn model_of(w: &HoneycombWeights) -> DimerModel {
    DimerModel::new(honeycomb_nm(w).unwrap()).unwrap()
}

#[test]
fn unit_honeycomb_tentacle_has_beta_one() {
    let tp = tentacle_params(&unit(), 0).unwrap();
    assert!(tp.c.abs() < 1e-12);
    assert!((tp.beta - 1.0).abs() < 1e-10, "{tp:?}");
    assert!(tp.root().abs() > 0.0);
}

#[test]
fn root_position_follows_weights() {
    let w = HoneycombWeights::uniform(1, 1, 0.7f64.exp(), 1.0, 1.0);
    let tp = tentacle_params(&model_of(&w), 0).unwrap();
    assert!((tp.c - 0.7).abs() < 1e-10, "{tp:?}");
    let p = model_of(&w);
    let p0 = p.char_poly().w_row(tp.delta0);
    let v = p0.eval(
        num_complex::Complex64::new(tp.root(), 0.0),
        num_complex::Complex64::new(1.0, 0.0),
    );
    assert!(v.norm() < 1e-10);
}

#[test]
fn asymptotes_of_the_unit_tentacle() {
    let m = unit();
    let tp = tentacle_params(&m, 0).unwrap();
    let rows = tentacle_asymptote_check(&m, &tp, &[-6.0, -8.0, -10.0]).unwrap();
    assert!((rows[0].fitted_beta() - 1.0).abs() < 0.1, "{:?}", rows[0]);
    assert!((rows[2].fitted_beta() - 1.0).abs() < 0.01, "{:?}", rows[2]);
    for r in &rows {
        // The branches are ln(1 ± e^{By}), symmetric about c up to e^{2By}.
        let asym = ((r.right - tp.c) - (tp.c - r.left)).abs();
        assert!(asym < 2.0 * (2.0 * r.by).exp(), "{asym}");
        if r.by <= -8.0 {
            assert!(asym < 1e-6);
        }
    }
    // Deviation from the asymptote shrinks like e^{2By}.
    let dev: Vec<f64> = rows
        .iter()
        .map(|r| (r.fitted_beta() - 1.0).abs() * r.by.exp())
        .collect();
    assert!(dev[2] < dev[0] * (-6.0f64).exp() * 10.0);
}

#[test]
fn generic_3x3_has_three_vertical_tentacles() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let w = random_weights(&mut rng, 3, 3);
    let m = model_of(&w);
    let mut cs: Vec<f64> = (0..3).map(|k| tentacle_params(&m, k).unwrap().c).collect();
    cs.sort_by(f64::total_cmp);
    assert!(cs.windows(2).all(|p| p[1] - p[0] > 1e-3), "{cs:?}");
    let mut th: Vec<f64> = (0..3).map(|j| w.column_threshold(j)).collect();
    th.sort_by(f64::total_cmp);
    for (c, t) in cs.iter().zip(&th) {
        assert!((c - t).abs() < 1e-9);
    }
    let lo = cs[0] - 1.0;
    let hi = cs[2] + 1.0;
    let centers = vertical_tentacles(&m, -12.0, lo, hi, 1e-4).unwrap();
    assert_eq!(centers.len(), 3, "{centers:?}");
    for (x, c) in centers.iter().zip(&cs) {
        assert!((x - c).abs() < 1e-6, "{x} vs {c}");
    }
}

#[test]
fn densities_on_a_two_column_domain() {
    let w = weights_1x2();
    let m = model_of(&w);
    for k in 0..2 {
        let tp = tentacle_params(&m, k).unwrap();
        let d = rho_edges(&m, &tp).unwrap();
        assert!(!d.is_empty());
        assert!(d.iter().all(|e| e.rho > 0.0));
        for s in thread_sums(&d) {
            assert!((s - 1.0).abs() < 1e-8, "{s}");
        }
    }
}

#[test]
fn single_crossing_edge_has_unit_weighted_density() {
    let m = unit();
    let tp = tentacle_params(&m, 0).unwrap();
    let d = rho_edges(&m, &tp).unwrap();
    assert_eq!(d.len(), 1);
    assert!((d[0].weighted - 1.0).abs() < 1e-12);
}

#[test]
fn density_proportions_survive_global_scaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w = random_weights(&mut rng, 2, 2);
    let m = model_of(&w);
    let s = DimerModel::new(honeycomb_nm(&w).unwrap().scaled(3.0)).unwrap();
    let tp = tentacle_params(&m, 0).unwrap();
    let ts = tentacle_params(&s, 0).unwrap();
    assert!((tp.c - ts.c).abs() < 1e-10);
    let a = rho_edges(&m, &tp).unwrap();
    let b = rho_edges(&s, &ts).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.edge, y.edge);
        assert!((x.weighted - y.weighted).abs() < 1e-10);
    }
}

#[test]
fn crossing_edge_premise_is_checked() {
    let m = unit();
    let tp = tentacle_params(&m, 0).unwrap();
    let crossing: Vec<usize> = (0..3).filter(|&e| is_crossing_edge(&m, &tp, e)).collect();
    assert_eq!(crossing.len(), 1);
    let other = (0..3).find(|e| !crossing.contains(e)).unwrap();
    let err = rho_edge(&m, &tp, other).unwrap_err().to_string();
    assert!(err.contains(&format!("edge {other}")), "{err}");
}

#[test]
fn thread_block_is_rank_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..10 {
        let w = random_weights(&mut rng, 2, 2);
        let m = model_of(&w);
        for k in 0..2 {
            let tp = tentacle_params(&m, k).unwrap();
            let d = rho_edges(&m, &tp).unwrap();
            let th = active_thread(&d).unwrap();
            let r = rank1_check(&m, &tp, th).unwrap();
            assert!(r.matrix.nrows() >= 2 && r.matrix.ncols() >= 2, "{:?}", r.matrix);
            assert!(r.ratio() <= 1e-8, "{}", r.ratio());
            assert!(r.reconstruction_error <= 1e-8);
            assert_eq!(r.v[0], 1.0);
        }
    }
}

#[test]
fn one_by_one_block_is_trivially_rank_one() {
    let m = unit();
    let tp = tentacle_params(&m, 0).unwrap();
    let r = rank1_check(&m, &tp, 0).unwrap();
    assert_eq!(r.matrix.shape(), (1, 1));
    assert_eq!(r.ratio(), 0.0);
}

#[test]
fn dual_edges_have_the_weights_as_lengths() {
    let (a, b, c) = (1.0, 1.2, 0.9);
    let m = DimerModel::new(honeycomb_1x1(a, b, c).unwrap()).unwrap();
    let map = isoradial_map(&m, MagneticField::ZERO).unwrap();
    let r: Vec<f64> = [a, b, c].iter().enumerate().map(|(e, w)| map.length(e) / w).collect();
    assert!(
        (r[0] - r[1]).abs() < 1e-9 * r[0] && (r[0] - r[2]).abs() < 1e-9 * r[0],
        "{r:?}"
    );
    assert!(map.max_divergence < 1e-9);
}

#[test]
fn flow_is_divergence_free_and_periods_match() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let w = random_weights(&mut rng, 3, 2);
    let m = model_of(&w);
    let tp = tentacle_params(&m, 1).unwrap();
    for field in [tp.field(0.0, 0.05), tp.field(0.3, 0.01)] {
        let map = isoradial_map(&m, field).unwrap();
        assert!(map.max_divergence < 1e-9, "{}", map.max_divergence);
        assert!(map.residual < 1e-9);
        // Translation (1, 0) of the dual map is -ŷ, translation (0, 1) is x̂.
        let (xh, yh) = map.period_formula;
        assert!((map.periods.0 + yh).norm() < 1e-8 * (1.0 + yh.norm()));
        assert!((map.periods.1 - xh).norm() < 1e-8 * (1.0 + xh.norm()));
    }
}

#[test]
fn solid_field_has_no_dual_map() {
    let m = unit();
    assert!(isoradial_map(&m, MagneticField { bx: -8.0, by: 9.0 }).is_err());
}

#[test]
fn freezing_of_generic_columns() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = random_weights(&mut rng, 3, 3);
    for j in 0..3 {
        let th = w.column_threshold(j);
        let at = freeze_classify(&w, th, FREEZE_TOL);
        assert_eq!(at[j], ColumnLabel::Critical);
        assert_eq!(freeze_classify(&w, th - 1e-6, FREEZE_TOL)[j], ColumnLabel::A);
        assert_eq!(freeze_classify(&w, th + 1e-6, FREEZE_TOL)[j], ColumnLabel::C);
    }
}

#[test]
fn run_lengths_match_exact_probabilities() {
    let w = weights_1x2();
    let m = model_of(&w);
    // The tentacle of the column with the smaller threshold: the other column is frozen to a.
    let (k, col) = (0..2)
        .find_map(|k| {
            let tp = tentacle_params(&m, k).unwrap();
            let labels = freeze_classify(&w, tp.c, FREEZE_TOL);
            labels.iter().position(|l| *l == ColumnLabel::A).map(|j| (k, j))
        })
        .unwrap();
    let tp = tentacle_params(&m, k).unwrap();
    let law = run_length_law(&m, &w, &tp, col, 1e-7).unwrap();
    assert!(law.q > 0.0 && law.q < 1.0);
    let mut prev = f64::INFINITY;
    for t in [1e-2, 1e-3] {
        let field = tp.field(0.0, t);
        let mut worst: f64 = 0.0;
        for p in 1..=3 {
            let exact = successive_c_probability(&m, &w, field, 0, col, p).unwrap();
            worst = worst.max((exact / law.tail(p as u32) - 1.0).abs());
        }
        assert!(worst < prev, "{worst} at t = {t}");
        prev = worst;
    }
    assert!(prev < 0.05, "{prev}");
}

#[test]
fn frozen_columns_share_q_under_symmetric_weights() {
    let w = HoneycombWeights {
        n: 3,
        m: 1,
        a: vec![2.0, 2.0, 1.5],
        b: vec![1.0, 1.0, 1.0],
        c: vec![1.0, 1.0, 1.0],
    };
    let m = model_of(&w);
    let tp = (0..3)
        .map(|k| tentacle_params(&m, k))
        .find(|tp| tp.as_ref().is_ok_and(|tp| (tp.c - 1.5f64.ln()).abs() < 1e-9));
    let tp = tp.unwrap().unwrap();
    let q0 = run_length_law(&m, &w, &tp, 0, 1e-7).unwrap().q;
    let q1 = run_length_law(&m, &w, &tp, 1, 1e-7).unwrap().q;
    assert!((q0 - q1).abs() < 1e-9, "{q0} {q1}");
}

#[test]
fn frozen_columns_have_q_below_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..5 {
        let w = random_weights(&mut rng, 3, 2);
        let m = model_of(&w);
        for k in 0..3 {
            let Ok(tp) = tentacle_params(&m, k) else { continue };
            for (j, l) in freeze_classify(&w, tp.c, FREEZE_TOL).iter().enumerate() {
                if *l == ColumnLabel::A {
                    let q = run_length_law(&m, &w, &tp, j, 1e-7).unwrap().q;
                    assert!(q < 1.0);
                }
            }
        }
    }
}

#[test]
fn long_runs_become_improbable() {
    let law = RunLengthLaw { q: 0.45 };
    let bound = |t: f64| law.q.powf(1.0 / t.sqrt());
    assert!(bound(5e-3) < bound(1e-2));
    assert!(bound(5e-3) < 1e-3);
}

#[test]
fn zero_width_scales_with_beta() {
    let w = weights_1x2();
    let m = model_of(&w);
    for k in 0..2 {
        let tp = tentacle_params(&m, k).unwrap();
        for gamma in [0.0, 0.5] {
            let a = zero_half_width_over_t(&m, &tp, gamma, 1e-2).unwrap();
            let b = zero_half_width_over_t(&m, &tp, gamma, 1e-3).unwrap();
            let extrapolated = (10.0 * b - a) / 9.0;
            let target = tp.beta.abs() * (1.0 - gamma * gamma).sqrt();
            assert!(
                (extrapolated - target).abs() < 1e-3 * target,
                "{extrapolated} vs {target}"
            );
        }
    }
}

#[test]
fn unit_tentacle_reproduces_the_discrete_kernel() {
    let m = unit();
    let tp = tentacle_params(&m, 0).unwrap();
    let edge = rho_edges(&m, &tp).unwrap()[0].edge;
    let points = [(0, 1.0), (1, 0.5), (-1, 1.0), (2, 2.0)];
    for gamma in [0.0, 0.5] {
        let t = 1e-2;
        let rows = tentacle_kernel_check(&m, &tp, edge, gamma, &[t], &points).unwrap();
        let s = (1.0 - gamma * gamma).sqrt();
        for (r, &(x, xi)) in rows.iter().zip(&points) {
            let d = &verify_convergence(gamma, x, xi, &[t]).unwrap()[0];
            assert_eq!(d.y, r.y);
            assert!((r.abs_error / (t * s) - d.error).abs() < 1e-6, "{r:?} {d:?}");
        }
    }
}

#[test]
fn kernel_error_decays_on_two_columns() {
    let m = model_of(&weights_1x2());
    for k in 0..2 {
        let tp = tentacle_params(&m, k).unwrap();
        let edge = rho_edges(&m, &tp).unwrap()[0].edge;
        let a = tentacle_kernel_check(&m, &tp, edge, 0.0, &[2e-3], &[(0, 1.0)]).unwrap()[0];
        let b = tentacle_kernel_check(&m, &tp, edge, 0.0, &[1e-3], &[(0, 1.0)]).unwrap()[0];
        let rel = |r: KernelCheckRow| r.abs_error / r.predicted.abs();
        // At γ = 0 the first order term cancels on x = 0, so the decay is faster than linear.
        assert!(rel(b) <= 0.5 * 1.3 * rel(a), "{} {}", rel(a), rel(b));
    }
}

#[test]
fn kernel_signs_follow_the_bead_kernel() {
    let m = model_of(&weights_1x2());
    let gamma = 0.5;
    for k in 0..2 {
        let tp = tentacle_params(&m, k).unwrap();
        let edge = rho_edges(&m, &tp).unwrap()[0].edge;
        let j = BeadKernel::new(KernelParams::new(gamma * tp.beta.signum()).unwrap());
        let pts: Vec<(i64, f64)> = (-2..=2).map(|x| (x, 1.0)).collect();
        let rows = tentacle_kernel_check(&m, &tp, edge, gamma, &[1e-3], &pts).unwrap();
        for r in rows {
            let v = j.value(r.x, r.xi_realized).unwrap();
            assert_eq!(r.kinv.signum(), v.signum(), "{r:?} {v}");
        }
    }
}

#[test]
fn slanted_sides_need_a_basis_change() {
    let g = honeycomb_1x1(1.0, 1.0, 1.0).unwrap();
    let skew = g.change_basis([[1, 0], [2, 1]]).unwrap();
    let m = DimerModel::new(skew).unwrap();
    let err = tentacle_params(&m, 0).unwrap_err().to_string();
    assert!(err.contains("horizontal"), "{err}");
    let poly = m.newton_polygon().to_vec();
    let fixed = (0..poly.len())
        .filter_map(|k| propose_basis(&poly, k).ok())
        .map(|b| DimerModel::new(m.graph().change_basis(b).unwrap()).unwrap())
        .find(|mm| tentacle_params(mm, 0).is_ok())
        .unwrap();
    assert!(tentacle_params(&fixed, 0).unwrap().beta.is_finite());
}
