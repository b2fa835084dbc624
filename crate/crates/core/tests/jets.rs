use loopwcs::jets::{jet_arith, Jet2, JetError, JetOp};
use loopwcs::selftest::{corpus_arity, corpus_eval, jet_fd_errors, jet_hessians_symmetric, CORPUS_SIZE};
use proptest::prelude::*;

fn bit_symmetric(j: &Jet2) -> bool {
    let n = j.dim();
    (0..n).all(|a| (0..n).all(|b| j.hess(a, b).to_bits() == j.hess(b, a).to_bits()))
}

#[test]
fn corpus_matches_central_differences() {
    let (g, h) = jet_fd_errors(10, 2024);
    assert!(g <= 1e-6, "gradient error {g}");
    assert!(h <= 1e-4, "hessian error {h}");
}

#[test]
fn corpus_hessians_are_bit_symmetric() {
    for seed in 0..5 {
        assert!(jet_hessians_symmetric(seed));
    }
}

#[test]
fn corpus_values_agree_with_plain_floats() {
    for i in 0..CORPUS_SIZE {
        let x: Vec<f64> = (0..corpus_arity(i)).map(|k| 0.3 - 0.17 * k as f64).collect();
        let plain = corpus_eval(i, &x);
        let jet = corpus_eval(i, &Jet2::seed(&x));
        assert_eq!(plain.to_bits(), jet.value().to_bits(), "expression {i}");
    }
}

#[test]
fn coordinate_jets() {
    let x = Jet2::variable(1, -0.5, 3).unwrap();
    assert_eq!(x.value(), -0.5);
    assert_eq!(x.grad(), &[0.0, 1.0, 0.0]);
    assert!(x.hessian_matrix().iter().flatten().all(|&h| h == 0.0));
    assert!(matches!(Jet2::variable(5, 0.0, 3), Err(JetError::IndexOutOfRange { .. })));
}

#[test]
fn division_by_zero_is_reported() {
    let x = Jet2::variable(0, 0.0, 1).unwrap();
    let one = Jet2::constant(1.0, 1);
    assert!(jet_arith(&one, &x, JetOp::Div).is_err());
    assert!(x.recip().is_err());
    assert!(x.sqrt().is_err());
}

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-2.0f64..2.0, n)
}

proptest! {
    #[test]
    fn every_operation_keeps_hessians_bit_symmetric(x in point(3), k in -3i32..5) {
        let v = Jet2::seed(&x);
        let a = &(&v[0] * &v[1]) + &v[2].sin();
        let b = &(&v[1].cos() * &v[2]) - &v[0].powi(2);
        let outs = [
            &a + &b,
            &a - &b,
            &a * &b,
            (&a * &a + 1.0).recip().unwrap(),
            (&b * &b + 0.5).sqrt().unwrap(),
            a.powi(k),
            b.sin(),
            a.cos(),
            jet_arith(&a, &(&b * &b + 1.0), JetOp::Div).unwrap(),
        ];
        for o in &outs {
            prop_assert!(bit_symmetric(o));
        }
    }

    #[test]
    fn add_then_subtract_is_identity(x in point(4)) {
        let v = Jet2::seed(&x);
        let a = &(&v[0] * &v[1]).sin() + &v[2];
        let b = &v[3].cos() * &v[0];
        let back = &(&a + &b) - &b;
        prop_assert!((back.value() - a.value()).abs() <= 1e-12);
        for i in 0..4 {
            prop_assert!((back.grad()[i] - a.grad()[i]).abs() <= 1e-12);
            for j in 0..4 {
                prop_assert!((back.hess(i, j) - a.hess(i, j)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn pythagorean_identity(x in point(3)) {
        let v = Jet2::seed(&x);
        let u = &(&v[0] * &v[1]) + &v[2].powi(3);
        let one = &u.sin().powi(2) + &u.cos().powi(2);
        prop_assert!((one.value() - 1.0).abs() <= 1e-12);
        for i in 0..3 {
            prop_assert!(one.grad()[i].abs() <= 1e-12);
            for j in 0..3 {
                prop_assert!(one.hess(i, j).abs() <= 1e-12 * (1.0 + u.hess(i, j).abs() + u.grad()[i].abs() * u.grad()[j].abs()));
            }
        }
    }
}
