use std::f64::consts::PI;

use beads_core::dpp::BeadPoint;
use beads_core::kernel::{eval_kernel, kernel_matrix, BeadKernel, KernelParams};
use proptest::prelude::*;

fn params(g: f64) -> KernelParams {
    KernelParams::new(g).unwrap()
}

fn j(g: f64, x: i64, xi: f64) -> f64 {
    eval_kernel(params(g), x, xi).unwrap().value
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Direct integration of the defining integral over [-1, 1] (x ≥ 0).
fn brute_nonnegative(g: f64, x: i32, xi: f64) -> f64 {
    let s = (1.0 - g * g).sqrt();
    let f = |phi: f64| {
        // Re[e^{-iξφ} (γ + iφs)^x]
        let (mut re, mut im) = (1.0f64, 0.0f64);
        for _ in 0..x {
            let (r, i) = (re * g - im * phi * s, re * phi * s + im * g);
            re = r;
            im = i;
        }
        let (c, sn) = ((xi * phi).cos(), (xi * phi).sin());
        re * c + im * sn
    };
    simpson(&f, -1.0, 1.0, 1e-12) / (2.0 * PI)
}

#[test]
fn sine_kernel_limit_and_quarter_period() {
    assert!((j(0.3, 0, 1e-12) - 1.0 / PI).abs() < 1e-12);
    assert!((j(0.3, 0, PI / 2.0) - 2.0 / (PI * PI)).abs() < 1e-12);
}

#[test]
fn odd_integrand_at_gamma_zero() {
    assert!(j(0.0, 1, 0.0).abs() < 1e-15);
}

#[test]
fn negative_thread_at_origin_matches_arctan_closed_form() {
    let s = 0.75f64.sqrt();
    let expected = -(PI / 2.0 - (s / 0.5).atan()) / (PI * s);
    assert!((expected + 0.192_450_089_729_875_25).abs() < 1e-15);
    assert!((j(0.5, -1, 0.0) - expected).abs() < 1e-11);
}

#[test]
fn nonnegative_threads_match_simpson_oracle() {
    let cases: [(f64, i32, f64); 5] = [
        (0.5, 2, 1.0),
        (0.3, 5, 3.7),
        (-0.7, 3, -2.2),
        (0.9, 1, 10.0),
        (0.0, 4, 0.0),
    ];
    for (g, x, xi) in cases {
        let oracle = brute_nonnegative(g, x, xi);
        let got = j(g, x as i64, xi);
        assert!((got - oracle).abs() < 1e-10, "J({g},{x},{xi}) = {got}, oracle {oracle}");
    }
}

#[test]
fn negative_threads_match_frozen_high_precision_values() {
    // Oscillatory-tail integrals evaluated at 25 digits with an independent
    // arbitrary-precision quadrature (integration between successive zeros).
    let frozen: [(f64, i64, f64, f64); 8] = [
        (0.5, -1, 0.0, -0.192_450_089_729_875_25),
        (0.5, -1, 1.0, 0.211_305_815_323_336_03),
        (0.5, -1, -1.0, -0.170_155_669_487_707_74),
        (0.5, -2, 0.7, 0.145_872_073_130_221_7),
        (-0.6, -3, 2.5, 0.114_241_753_326_303_3),
        (0.9, -1, 0.3, 0.309_790_904_637_810_6),
        (-0.9, -2, -4.0, -0.066_572_591_495_171_7),
        (0.0, -1, 1e-3, 0.499_681_690_131_500_1),
    ];
    for (g, x, xi, want) in frozen {
        let v = eval_kernel(params(g), x, xi).unwrap();
        assert!(
            (v.value - want).abs() < 1e-10,
            "J({g},{x},{xi}) = {} want {want}",
            v.value
        );
        assert!(v.abs_error_bound <= 1e-10);
    }
    // Frozen positive-thread value cross-checks the Simpson oracle path.
    assert!((j(0.5, 2, 1.0) - 0.092_894_682_720_321_19).abs() < 1e-12);
}

#[test]
fn sine_marginal_for_all_gammas() {
    for g in [-0.9, -0.5, 0.0, 0.5, 0.9] {
        for k in 1..=200 {
            let xi = -10.0 + 0.1 * k as f64;
            if xi.abs() < 1e-12 {
                continue;
            }
            let sinc = xi.sin() / (PI * xi);
            assert!((j(g, 0, xi) - sinc).abs() <= 1e-10);
        }
    }
}

#[test]
fn recurrence_in_thread_index() {
    let h = 1e-5;
    for g in [-0.5f64, 0.2, 0.8] {
        let s = (1.0 - g * g).sqrt();
        for x in [0i64, 1, 2, -2, -3, -4] {
            for xi in [0.4, 1.3, -2.1, 3.3] {
                let d = (j(g, x, xi + h) - j(g, x, xi - h)) / (2.0 * h);
                let lhs = j(g, x + 1, xi);
                let rhs = g * j(g, x, xi) - s * d;
                assert!(
                    (lhs - rhs).abs() <= 1e-4 * lhs.abs().max(1e-2),
                    "g={g} x={x} xi={xi}: {lhs} vs {rhs}"
                );
            }
        }
    }
}

#[test]
fn single_thread_projection_property() {
    // ∫_{-T}^{T} sinc(ξ-u) sinc(u-ζ) du → sinc(ξ-ζ)
    let t = 200.0;
    let k = |d: f64| if d == 0.0 { 1.0 / PI } else { d.sin() / (PI * d) };
    for (xi, zeta) in [(0.0, 0.0), (1.0, -2.0), (2.5, -2.5), (-3.0, 0.5)] {
        let quad = beads_core::quad::Adaptive::with_tol(1e-9).max_width(0.5);
        let val = quad.integrate(|u: f64| k(xi - u) * k(u - zeta), -t, t).unwrap().value;
        assert!((val - k(xi - zeta)).abs() <= 1e-2, "{xi},{zeta}: {val}");
    }
}

#[test]
fn kernel_matrix_examples() {
    let p = params(0.4);
    let one = kernel_matrix(
        p,
        &[BeadPoint {
            thread: 3,
            position: 1.5,
        }],
    )
    .unwrap();
    assert!((one[(0, 0)] - 1.0 / PI).abs() < 1e-12);

    let pt = BeadPoint {
        thread: 1,
        position: 0.25,
    };
    let twice = kernel_matrix(p, &[pt, pt]).unwrap();
    assert!(twice.determinant().abs() < 1e-10);

    let pts: Vec<_> = [0.0, 0.7, 2.0]
        .iter()
        .map(|&position| BeadPoint { thread: 0, position })
        .collect();
    let m = kernel_matrix(p, &pts).unwrap();
    for i in 0..3 {
        for k in 0..3 {
            let d = pts[i].position - pts[k].position;
            let want = if d == 0.0 { 1.0 / PI } else { d.sin() / (PI * d) };
            assert!((m[(i, k)] - want).abs() < 1e-12);
        }
    }
}

#[test]
fn error_bound_is_honest_for_tight_tolerance() {
    let k = BeadKernel::new(params(0.5)).with_tolerance(1e-13);
    let v = k.eval(-1, 1.0).unwrap();
    assert!((v.value - 0.211_305_815_323_336_03).abs() <= v.abs_error_bound.max(1e-13));
}

proptest! {
    #[test]
    fn decay_bound_on_single_thread(g in -0.95f64..0.95, xi in 1.0f64..80.0, sign in prop::bool::ANY) {
        let xi = if sign { xi } else { -xi };
        prop_assert!(j(g, 0, xi).abs() <= 1.0 / (PI * xi.abs()) + 1e-12);
    }

    #[test]
    fn value_is_finite_with_finite_bound(g in -0.95f64..0.95, x in -6i64..8, xi in -20.0f64..20.0) {
        let v = eval_kernel(params(g), x, xi).unwrap();
        prop_assert!(v.value.is_finite());
        prop_assert!(v.abs_error_bound.is_finite() && v.abs_error_bound >= 0.0);
    }
}
