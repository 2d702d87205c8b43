//! Homogenized-tensor and effective-conductance oracles: closed-form layered
//! media, identity, coercivity certificates and mesh-refinement behaviour.

use sighom_core::cell::build_cell_mesh;
use sighom_core::coeff::{InterfaceConductance, Matrix2, PeriodicCoefficient};
use sighom_core::homogenize::{
    certify_bounds, effective_conductance, homogenized_tensor, EffectiveConductance,
};
use sighom_core::profile::InterfaceProfile;
use sighom_core::rational::Rational;

/// Composite Simpson on [0,1], the test-side quadrature oracle.
fn simpson(f: &dyn Fn(f64) -> f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = 1.0 / n as f64;
    let mut acc = f(0.0) + f(1.0);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    acc * h / 3.0
}

#[test]
fn identity_tensor_is_exact() {
    let cell = build_cell_mesh(64).unwrap();
    let (a0, _, _) = homogenized_tensor(&PeriodicCoefficient::identity(), &cell).unwrap();
    let max_err = [
        (a0.a[0][0] - 1.0).abs(),
        a0.a[0][1].abs(),
        a0.a[1][0].abs(),
        (a0.a[1][1] - 1.0).abs(),
    ]
    .into_iter()
    .fold(0.0f64, f64::max);
    assert!(max_err <= 1e-8, "max entry error {max_err:e}");
}

#[test]
fn layered_tensor_matches_harmonic_and_arithmetic_means() {
    // independent 1-D oracle: harmonic mean of a(y) = 2 + sin(2 pi y) is
    // 1 / int(1/a) = sqrt(3); the arithmetic mean is 2
    let harmonic = 1.0 / simpson(&|y| 1.0 / (2.0 + (2.0 * std::f64::consts::PI * y).sin()), 4096);
    assert!(
        (harmonic - 3.0f64.sqrt()).abs() < 1e-10,
        "oracle quadrature {harmonic}"
    );
    let coeff = PeriodicCoefficient::layered(2.0, 1.0);
    let mut prev_err11 = f64::INFINITY;
    let mut prev_err22 = f64::INFINITY;
    for n in [16usize, 32, 64] {
        let cell = build_cell_mesh(n).unwrap();
        let (a0, _, _) = homogenized_tensor(&coeff, &cell).unwrap();
        let err11 = (a0.a[0][0] - harmonic).abs();
        let err22 = (a0.a[1][1] - 2.0).abs();
        // entrywise Cauchy decrease with a noise floor for exact entries
        assert!(
            err11 < prev_err11 || err11 < 1e-10,
            "n={n}: a11 error {err11:e} not below {prev_err11:e}"
        );
        assert!(
            err22 < prev_err22 || err22 < 1e-10,
            "n={n}: a22 error {err22:e} not below {prev_err22:e}"
        );
        prev_err11 = err11;
        prev_err22 = err22;
        assert!(a0.a[0][1].abs() <= 1e-8 && a0.a[1][0].abs() <= 1e-8);
        if n == 64 {
            assert!(err11 <= 2e-3, "a11 error {err11:e} at n=64");
            assert!(err22 <= 2e-3, "a22 error {err22:e} at n=64");
            // symmetric input gives a symmetric tensor
            assert!((a0.a[0][1] - a0.a[1][0]).abs() <= 1e-8);
        }
    }
}

#[test]
fn refinement_is_cauchy() {
    let coeff = PeriodicCoefficient::layered(2.0, 1.0);
    let tensors: Vec<Matrix2> = [16usize, 32, 64]
        .into_iter()
        .map(|n| {
            let cell = build_cell_mesh(n).unwrap();
            homogenized_tensor(&coeff, &cell).unwrap().0
        })
        .collect();
    for i in 0..2 {
        for j in 0..2 {
            let d1 = (tensors[0].a[i][j] - tensors[1].a[i][j]).abs();
            let d2 = (tensors[1].a[i][j] - tensors[2].a[i][j]).abs();
            assert!(
                d2 < d1 || d2 < 1e-10,
                "entry ({i},{j}): |A0(32)-A0(64)| = {d2:e} not below |A0(16)-A0(32)| = {d1:e}"
            );
        }
    }
}

#[test]
fn coercivity_certificates_for_both_presets() {
    let cell = build_cell_mesh(64).unwrap();
    for (coeff, alpha, beta) in [
        (PeriodicCoefficient::identity(), 1.0, 1.0),
        (PeriodicCoefficient::layered(2.0, 1.0), 1.0, 3.0),
    ] {
        let (a0, _, _) = homogenized_tensor(&coeff, &cell).unwrap();
        let (quad_min, norm_max) = certify_bounds(&a0);
        assert!(
            quad_min >= alpha - 1e-10,
            "quad form min {quad_min} below alpha {alpha}"
        );
        assert!(
            norm_max <= beta * beta / alpha + 1e-10,
            "operator norm {norm_max} above beta^2/alpha {}",
            beta * beta / alpha
        );
    }
}

#[test]
fn rotated_anisotropic_tensor_is_coercive_and_symmetric() {
    let coeff =
        PeriodicCoefficient::rotated_anisotropic(std::f64::consts::PI / 6.0, 2.0, 1.0, 1.0);
    let cell = build_cell_mesh(32).unwrap();
    let (a0, _, _) = homogenized_tensor(&coeff, &cell).unwrap();
    assert!((a0.a[0][1] - a0.a[1][0]).abs() <= 1e-8);
    let (quad_min, norm_max) = certify_bounds(&a0);
    assert!(quad_min >= coeff.alpha - 1e-10);
    assert!(norm_max <= coeff.beta * coeff.beta / coeff.alpha + 1e-10);
}

#[test]
fn conductance_oracle_triplet() {
    let h = InterfaceConductance::constant(1.0);
    let sine = InterfaceProfile::sine();
    // third branch: mean of h, exactly 1
    match effective_conductance(&h, &sine, Rational::new(2, 1), Rational::ZERO).unwrap() {
        EffectiveConductance::Value(v) => assert!((v - 1.0).abs() <= 1e-12, "{v}"),
        other => panic!("{other:?}"),
    }
    // second branch at (1/2, 1/2): mean of |g'|; oracle: pi int |cos| = 2
    let oracle2 = simpson(
        &|y| {
            let s = std::f64::consts::PI * (2.0 * std::f64::consts::PI * y).cos();
            s.abs()
        },
        8192,
    );
    assert!((oracle2 - 2.0).abs() < 1e-6, "quadrature oracle {oracle2}");
    match effective_conductance(&h, &sine, Rational::new(1, 2), Rational::new(1, 2)).unwrap() {
        EffectiveConductance::Value(v) => assert!((v - oracle2).abs() <= 1e-6, "{v}"),
        other => panic!("{other:?}"),
    }
    // first branch at (1, 0): mean of sqrt(1 + |g'|^2), recomputed by
    // doubling trapezoid sums until they settle
    let jac = |y: f64| {
        let s = std::f64::consts::PI * (2.0 * std::f64::consts::PI * y).cos();
        (1.0 + s * s).sqrt()
    };
    let mut n = 128;
    let mut prev = simpson(&jac, n);
    let oracle1 = loop {
        n *= 2;
        let next = simpson(&jac, n);
        if (next - prev).abs() < 1e-13 || n > 1 << 20 {
            break next;
        }
        prev = next;
    };
    assert!((oracle1 - 2.304_892_661_353_691).abs() < 1e-9, "{oracle1}");
    match effective_conductance(&h, &sine, Rational::ONE, Rational::ZERO).unwrap() {
        EffectiveConductance::Value(v) => {
            assert!((v - oracle1).abs() <= 1e-3, "{v} vs oracle {oracle1}")
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn corrector_fields_have_unit_cell_mean_gradient() {
    // M_Y(grad omega_lambda) = lambda for any coefficient: the fluctuation
    // is periodic, so its cell-average gradient vanishes
    let coeff = PeriodicCoefficient::layered(2.0, 1.0);
    let cell = build_cell_mesh(16).unwrap();
    let (_, omega1, omega2) = homogenized_tensor(&coeff, &cell).unwrap();
    for (omega, lambda) in [(&omega1, [1.0, 0.0]), (&omega2, [0.0, 1.0])] {
        let mut avg = [0.0f64; 2];
        for t in &cell.triangles {
            let (p, q, r) = (cell.nodes[t[0]], cell.nodes[t[1]], cell.nodes[t[2]]);
            let det = (q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]);
            let area = 0.5 * det;
            let (ua, ub, uc) = (omega[t[0]], omega[t[1]], omega[t[2]]);
            // the fluctuation is periodic but omega itself jumps across the
            // cell boundary; reconstruct the gradient from phi + lambda.y
            let phi = |v: usize, u: f64| {
                u - lambda[0] * cell.nodes[v][0] - lambda[1] * cell.nodes[v][1]
            };
            let (fa, fb, fc) = (phi(t[0], ua), phi(t[1], ub), phi(t[2], uc));
            let gx = ((q[1] - r[1]) * fa + (r[1] - p[1]) * fb + (p[1] - q[1]) * fc) / det;
            let gy = ((r[0] - q[0]) * fa + (p[0] - r[0]) * fb + (q[0] - p[0]) * fc) / det;
            avg[0] += area * (gx + lambda[0]);
            avg[1] += area * (gy + lambda[1]);
        }
        assert!((avg[0] - lambda[0]).abs() < 1e-10, "{avg:?} vs {lambda:?}");
        assert!((avg[1] - lambda[1]).abs() < 1e-10);
    }
}
