use std::convert::Infallible;
use std::f64::consts::PI;

use loopwcs::cycles::{cycle_integrand, CycleOptions};
use loopwcs::geometry::{Axis, ChartPoint, CoordBox, MetricField};
use loopwcs::quadrature::{gauss_nodes, integrate_box, QuadratureSpec};
use loopwcs::selftest::{quadrature_exactness_error, y73, y73_alpha_rotation};
use proptest::prelude::*;

fn ok(v: f64) -> Result<f64, Infallible> {
    Ok(v)
}

#[test]
fn monomials_up_to_degree_2n_minus_1_are_exact() {
    assert!(quadrature_exactness_error() <= 1e-13);
}

#[test]
fn weights_sum_to_length_and_nodes_are_interior() {
    for n in 1..=80 {
        let (x, w) = gauss_nodes(n, -0.3, 2.2);
        assert!((w.iter().sum::<f64>() - 2.5).abs() <= 1e-14 * 2.5 * (n as f64).sqrt().max(1.0), "n = {n}");
        assert!(x.iter().all(|&t| t > -0.3 && t < 2.2));
        assert!(w.iter().all(|&v| v > 0.0));
    }
}

#[test]
fn worker_count_does_not_change_a_single_bit() {
    let bx = CoordBox::new(vec![
        Axis::open("a", 0.0, 1.0),
        Axis::open("b", -1.0, 2.0),
        Axis::periodic("c", 0.0, 2.0 * PI),
    ]);
    let f = |x: &[f64]| ok((x[0] * x[1]).exp() * x[2].sin().powi(2) + x[1].cos());
    let spec = QuadratureSpec::uniform(3, 9);
    let reference = integrate_box(f, &bx, &spec.clone().with_workers(1)).unwrap();
    for workers in [2, 3, 8] {
        let r = integrate_box(f, &bx, &spec.clone().with_workers(workers)).unwrap();
        assert_eq!(r.value.to_bits(), reference.value.to_bits(), "{workers} workers");
        assert_eq!(r.levels, reference.levels);
    }
    let again = integrate_box(f, &bx, &spec.with_workers(1)).unwrap();
    assert_eq!(again, reference);
}

#[test]
fn y73_density_converges_geometrically() {
    let m = y73();
    let act = y73_alpha_rotation(&m);
    let opts = CycleOptions::default();
    let density = |x: &[f64]| cycle_integrand(&m, &act, 3, &ChartPoint::new(x.to_vec()), &opts);
    let mut quad = QuadratureSpec::uniform(5, 8).with_mask(&[0, 2, 4]);
    quad.rel_tol = 1e-300;
    quad.abs_tol = 0.0;
    quad.max_refinements = 2;
    let r = integrate_box(density, m.domain(), &quad).unwrap();
    // levels at 8, 16, 32, 64 nodes on (theta, y)
    let l = &r.levels;
    assert!(l.len() >= 3, "{l:?}");
    let e: Vec<f64> = l.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    // a difference already at the rounding floor (~1e-12 relative here) counts as converged
    for w in e.windows(2) {
        assert!(w[1] / w[0] < 0.5 || w[1] <= 1e-12 * l[l.len() - 1].abs(), "errors {e:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polynomial_exactness(n in 2usize..20, coeffs in proptest::collection::vec(-1.0f64..1.0, 1..40), lo in -2.0f64..0.0, len in 0.1f64..3.0) {
        let deg = (2 * n - 1).min(coeffs.len() - 1);
        let c = &coeffs[..=deg];
        let hi = lo + len;
        let bx = CoordBox::new(vec![Axis::open("x", lo, hi)]);
        let mut spec = QuadratureSpec::uniform(1, n);
        spec.max_refinements = 0;
        let r = integrate_box(|x: &[f64]| ok(c.iter().rev().fold(0.0, |acc, k| acc * x[0] + k)), &bx, &spec).unwrap();
        let anti = |x: f64| c.iter().enumerate().map(|(i, k)| k * x.powi(i as i32 + 1) / (i + 1) as f64).sum::<f64>();
        let exact = anti(hi) - anti(lo);
        let scale = c.iter().enumerate().map(|(i, k)| k.abs() * lo.abs().max(hi.abs()).powi(i as i32)).sum::<f64>() * len;
        prop_assert!((r.levels[0] - exact).abs() <= 1e-13 * scale.max(1e-300));
    }
}
