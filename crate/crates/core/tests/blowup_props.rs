mod common;

use fsl_core::blowup::{blow_up, closed_form_r, divisor_report, saddle_data, BlowupChart, ChartKind};
use fsl_core::normalform::NormalFormField;
use fsl_core::polyfield::Scalar;

#[test]
fn generic_r_functions_equal_closed_forms() {
    let mut rng = common::rng(21);
    for _ in 0..200 {
        let nf = common::random_hyperbolic_nf(&mut rng);
        let inv = nf.invariants();
        let sd = saddle_data(&nf).unwrap();
        let (r12p, r21m) = closed_form_r(&inv.a, &inv.b, &inv.c);
        assert!(sd.generic.r12_plus.same_function(&r12p, 0.0), "R12+ for {inv:?}");
        assert!(sd.generic.r21_minus.same_function(&r21m, 0.0), "R21- for {inv:?}");
        assert!(sd.closed_form.r12_plus.same_function(&r12p, 0.0));
    }
}

#[test]
fn discriminant_is_minus_d() {
    let mut rng = common::rng(22);
    for _ in 0..300 {
        let (a, b, c) = common::random_abc(&mut rng);
        let nf = common::random_nf_with(&mut rng, a, b, c);
        assert_eq!(divisor_report(&nf).discriminant, -nf.invariants().d);
    }
}

#[test]
fn corner_eigenvalue_ratios_are_reciprocal() {
    let mut rng = common::rng(23);
    for _ in 0..200 {
        let nf = common::random_hyperbolic_nf(&mut rng);
        let sd = saddle_data(&nf).unwrap();
        assert_eq!(&sd.lambda_plus * &sd.lambda_minus, Scalar::one());
        let float_nf = NormalFormField::validate_and_build(&nf.to_field().to_float()).unwrap();
        let fl = saddle_data(&float_nf).unwrap();
        assert!((fl.lambda_plus.to_f64() * fl.lambda_minus.to_f64() - 1.0).abs() < 1e-14);
    }
}

#[test]
fn directional_chart_origin_has_p_equal_one() {
    let mut rng = common::rng(24);
    let chart = BlowupChart::new(ChartKind::XDirectional, 1);
    for _ in 0..200 {
        let (a, b, c) = common::random_abc(&mut rng);
        let nf = common::random_nf_with(&mut rng, a, b, c);
        let fac = blow_up(&nf.to_field(), &chart).unwrap().factorization.expect("u·P ∂u + v·Q ∂v");
        assert_eq!(fac.p.coeff(0, 0), Scalar::one());
        assert_eq!(divisor_report(&nf).origin_data.0, Scalar::one());
    }
}
