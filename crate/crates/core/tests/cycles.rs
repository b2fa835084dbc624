use std::f64::consts::PI;

use loopwcs::cycles::{
    a_sweep, integrate_cycle, pullback_density, CircleAction, CycleError, CycleOptions,
};
use loopwcs::geometry::ChartPoint;
use loopwcs::metrics::{perturbed_torus, round_sphere, MetricError, YpqParams};
use loopwcs::quadrature::QuadratureSpec;
use loopwcs::selftest::{y73, y73_alpha_rotation};

fn opts() -> CycleOptions {
    CycleOptions::default()
}

#[test]
fn trivial_action_integrates_to_exact_zero() {
    let m = y73();
    let r = integrate_cycle(&m, &CircleAction::Trivial, 3, &QuadratureSpec::uniform(5, 8), &opts()).unwrap();
    assert_eq!(r.value, 0.0);
    assert_eq!(r.error_estimate, 0.0);
    assert!(r.converged);
}

#[test]
fn density_depends_only_on_theta_and_y() {
    let m = y73();
    let act = y73_alpha_rotation(&m);
    let base = pullback_density(&m, &act, 3, &ChartPoint::new(vec![1.0, 1.2, 2.0, 0.1, 0.5]), &opts()).unwrap();
    for (phi, psi, alpha) in [(0.2, 5.0, 0.1), (4.0, 0.3, 0.9), (6.0, 3.3, 0.33)] {
        let f = pullback_density(&m, &act, 3, &ChartPoint::new(vec![phi, 1.2, psi, 0.1, alpha]), &opts()).unwrap();
        assert!((f - base).abs() <= 1e-12 * base.abs(), "{f} vs {base}");
    }
}

#[test]
fn iterated_density_scales() {
    let m = y73();
    let act = y73_alpha_rotation(&m);
    let x = ChartPoint::new(vec![1.0, 1.2, 2.0, 0.1, 0.5]);
    let one = pullback_density(&m, &act, 3, &x, &opts()).unwrap();
    let two = pullback_density(&m, &act.clone().iterate(2), 3, &x, &opts()).unwrap();
    assert!((two - 2.0 * one).abs() <= 1e-12 * one.abs());
    let zero = pullback_density(&m, &act.iterate(0), 3, &x, &opts()).unwrap();
    assert_eq!(zero, 0.0);
}

#[test]
fn cycle_integral_is_linear_in_speed() {
    let m = y73();
    let quad = QuadratureSpec::uniform(5, 12);
    let ell = m.params().ell;
    let one = integrate_cycle(&m, &CircleAction::Rotation { axis: 4, speed: ell }, 3, &quad, &opts()).unwrap();
    let two = integrate_cycle(&m, &CircleAction::Rotation { axis: 4, speed: 2.0 * ell }, 3, &quad, &opts()).unwrap();
    assert!((two.value - 2.0 * one.value).abs() <= 1e-9 * one.value.abs());
}

#[test]
fn iterates_scale_the_cycle_integral() {
    let m = y73();
    let quad = QuadratureSpec::uniform(5, 16);
    let act = y73_alpha_rotation(&m);
    let one = integrate_cycle(&m, &act, 3, &quad, &opts()).unwrap().value;
    for n in [0u32, 2, 3] {
        let v = integrate_cycle(&m, &act.clone().iterate(n), 3, &quad, &opts()).unwrap().value;
        let expect = n as f64 * one;
        assert!((v - expect).abs() <= 1e-9 * one.abs(), "n = {n}: {v} vs {expect}");
    }
}

#[test]
fn refinement_stays_within_error_estimate() {
    let m = y73();
    let act = y73_alpha_rotation(&m);
    let mut quad = QuadratureSpec::uniform(5, 32);
    quad.max_refinements = 0;
    let coarse = integrate_cycle(&m, &act, 3, &quad, &opts()).unwrap();
    let mut fine = quad.clone();
    fine.nodes = vec![64; 5];
    let refined = integrate_cycle(&m, &act, 3, &fine, &opts()).unwrap();
    assert!(
        (refined.value - coarse.value).abs() <= coarse.error_estimate,
        "{} vs {} (estimate {:e})",
        refined.value,
        coarse.value,
        coarse.error_estimate
    );
}

#[test]
fn symmetry_shortcut_matches_brute_force() {
    let m = y73();
    let act = y73_alpha_rotation(&m);
    // the integrand is constant along phi, psi, alpha: two nodes integrate it exactly
    let mut brute_quad = QuadratureSpec::uniform(5, 2);
    brute_quad.nodes = vec![2, 4, 2, 4, 2];
    brute_quad.max_refinements = 0;
    let brute_opts = CycleOptions { symmetry: false, loop_nodes: 4, ..opts() };
    let brute = integrate_cycle(&m, &act, 3, &brute_quad, &brute_opts).unwrap();
    let mut quad = QuadratureSpec::uniform(5, 4);
    quad.max_refinements = 0;
    let fast = integrate_cycle(&m, &act, 3, &quad, &opts()).unwrap();
    assert_eq!(brute.final_node_counts, vec![4, 8, 4, 8, 4]);
    assert_eq!(fast.final_node_counts, vec![1, 8, 1, 8, 1]);
    assert!((brute.value - fast.value).abs() <= 1e-9 * fast.value.abs(), "{} vs {}", brute.value, fast.value);
}

#[test]
fn trapezoid_loop_agrees_with_killing_shortcut() {
    let m = y73();
    let act = y73_alpha_rotation(&m);
    let x = ChartPoint::new(vec![1.0, 1.2, 2.0, 0.1, 0.5]);
    let fast = pullback_density(&m, &act, 3, &x, &opts()).unwrap();
    let slow = pullback_density(&m, &act, 3, &x, &CycleOptions { symmetry: false, ..opts() }).unwrap();
    assert!((fast - slow).abs() <= 1e-12 * fast.abs(), "{fast} vs {slow}");
    // on a metric without symmetry axes only the trapezoid path exists
    let t = perturbed_torus(0.3, 7);
    let f = pullback_density(&t, &CircleAction::Rotation { axis: 0, speed: 1.0 }, 2, &ChartPoint::new(vec![1.0, 2.0, 3.0]), &opts()).unwrap();
    assert!(f.abs() < 1e-10);
}

#[test]
fn round_three_sphere_cycle_vanishes() {
    let m = round_sphere(3, 1.0).unwrap();
    let act = CircleAction::unit_rotation(&m, 2).unwrap();
    let r = integrate_cycle(&m, &act, 2, &QuadratureSpec::uniform(3, 16), &opts()).unwrap();
    assert!(r.value.abs() <= 1e-10, "{}", r.value);
    assert!(r.converged);
}

#[test]
fn open_orbits_and_bad_axes_are_rejected() {
    let m = y73();
    let bad = CircleAction::Rotation { axis: 4, speed: 0.1 };
    let x = ChartPoint::new(vec![1.0, 1.2, 2.0, 0.1, 0.5]);
    assert!(matches!(pullback_density(&m, &bad, 3, &x, &opts()), Err(CycleError::InvalidAction(_))));
    let theta = CircleAction::Rotation { axis: 1, speed: 1.0 };
    assert!(matches!(pullback_density(&m, &theta, 3, &x, &opts()), Err(CycleError::InvalidAction(_))));
}

#[test]
fn masking_a_non_symmetry_axis_is_refused() {
    let m = y73();
    let quad = QuadratureSpec::uniform(5, 4).with_mask(&[1]);
    let r = integrate_cycle(&m, &y73_alpha_rotation(&m), 3, &quad, &opts());
    assert!(matches!(r, Err(CycleError::NotKilling { axis: 1, .. })));
}

#[test]
fn a_equal_one_is_rejected_in_sweeps() {
    let mut quad = QuadratureSpec::uniform(5, 8);
    quad.max_refinements = 0;
    let sweep = a_sweep(&[0.9, 1.0], 3, &quad, &opts());
    assert!(sweep.rows[0].result.is_ok());
    assert!(matches!(
        sweep.rows[1].result,
        Err(CycleError::Metric(MetricError::InvalidA(a))) if a == 1.0
    ));
    assert!(YpqParams::from_a(1.0, 1.0).is_err());
}

#[test]
fn provenance_records_conventions() {
    let m = y73();
    let mut quad = QuadratureSpec::uniform(5, 8);
    quad.max_refinements = 0;
    let r = integrate_cycle(&m, &y73_alpha_rotation(&m), 3, &quad, &opts()).unwrap();
    let p = &r.provenance;
    assert_eq!(p.orientation, ["phi", "theta", "y", "psi", "alpha"]);
    assert!(p.speed_convention.contains("speed = 0.15"));
    assert!(p.normalization.contains("plain matrix products"));
    let reference = p.reference.as_ref().unwrap();
    assert_eq!((reference.expected_pi4_multiple.numerator, reference.expected_pi4_multiple.denominator), (-1849, 22050));
    assert!((reference.expected_value + 1849.0 / 22050.0 * PI.powi(4)).abs() < 1e-12);
}
