mod common;

use std::f64::consts::PI;

use fsl_core::asymptotics::{
    beta_closed, default_eps_sequence, delta00_via_l, gamma_pm, l_integrals, pv_integral, pv_integral_eps_oracle,
    F_arctan, SectionPair, Sections,
};
use fsl_core::normalform::NormalFormField;
use rand::Rng;

#[test]
fn f_arctan_is_minus_pi() {
    let mut rng = common::rng(31);
    let mut n = 0;
    while n < 1000 {
        let (a, b, c) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..0.99));
        if 4.0 * (1.0 - c) - (a - b) * (a - b) <= 1e-6 {
            continue;
        }
        let f = F_arctan(a, b, c).unwrap();
        assert!((f + PI).abs() < 1e-10, "F({a}, {b}, {c}) = {f}");
        n += 1;
    }
}

#[test]
fn pv_matches_epsilon_oracle() {
    let mut rng = common::rng(32);
    let eps = default_eps_sequence();
    for _ in 0..100 {
        let nf = common::random_hyperbolic_nf(&mut rng);
        let s = SectionPair::new(-rng.gen_range(0.2..1.0), rng.gen_range(0.2..1.0));
        let pv = pv_integral(&nf, &s).unwrap();
        let oracle = pv_integral_eps_oracle(&nf, &s, &eps).unwrap();
        assert!((pv - oracle).abs() < 1e-8, "pv {pv} oracle {oracle}");
    }
}

#[test]
fn delta00_paths_agree() {
    let mut rng = common::rng(33);
    let s = SectionPair::new(-1.0, 1.0);
    for _ in 0..100 {
        let nf = common::random_hyperbolic_nf(&mut rng);
        let (gp, _) = gamma_pm(&nf, &Sections::Finite(s)).unwrap();
        let via_l = delta00_via_l(&nf, &s).unwrap();
        assert!((via_l / gp.exp() - 1.0).abs() < 1e-7, "{:?}: {via_l} vs {}", nf.invariants(), gp.exp());
    }
}

#[test]
fn mirror_swaps_gamma_components() {
    let mut rng = common::rng(34);
    let s = Sections::Finite(SectionPair::new(-0.8, 0.9));
    for _ in 0..50 {
        let nf = common::random_hyperbolic_nf(&mut rng);
        let (gp, gm) = gamma_pm(&nf, &s).unwrap();
        let (mp, mm) = gamma_pm(&nf.mirror(), &s).unwrap();
        assert!((gp - mm).abs() < 1e-10 && (gm - mp).abs() < 1e-10);
    }
}

#[test]
fn log_part_of_l1_plus_at_one() {
    let mut rng = common::rng(35);
    for _ in 0..100 {
        let (a, b, c) = common::random_hyperbolic_abc(&mut rng);
        let nf = NormalFormField::quadratic(a, b, c);
        let (a, b, c, _) = nf.invariants().as_f64();
        let l = l_integrals(&nf, &SectionPair::new(-1.0, 1.0)).unwrap();
        let alpha_by_quadrature = l.log_l1_plus - beta_closed(1.0, a, b, c);
        let expected = -c / (2.0 * (1.0 - c)) * (1.0 - c).ln();
        assert!((alpha_by_quadrature - expected).abs() < 1e-9, "({a}, {b}, {c})");
    }
}
