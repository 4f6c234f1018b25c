use fsl_core::asymptotics::{gamma_pm, SectionPair, Sections};
use fsl_core::blowup::{blow_up, BlowupChart, ChartKind};
use fsl_core::casebook::{build_example6, build_z, printed_y1, rescaled_x_mu, z_return_closed};
use fsl_core::flow::{return_slope, transition_slope, transition_slope_field, ReturnSection, Side, SlopeConfig};
use fsl_core::normalform::NormalFormField;

fn x_mu(alpha: f64, beta: f64) -> NormalFormField {
    let y_mu = blow_up(&build_z(alpha, beta), &BlowupChart::new(ChartKind::XDirectionalSwapped, 2)).unwrap().field;
    rescaled_x_mu(&y_mu, beta).unwrap()
}

#[test]
fn example6_slopes_match_gamma_on_both_sides() {
    let nf = build_example6(1.0, -1.0, -1.0);
    let s = SectionPair::new(-1.0, 1.0);
    let (gp, gm) = gamma_pm(&nf, &Sections::Finite(s)).unwrap();
    for (side, g) in [(Side::Plus, gp), (Side::Minus, gm)] {
        let est = transition_slope(&nf, -1.0, 1.0, side, &SlopeConfig::transit()).unwrap();
        assert!((est.value / g.exp() - 1.0).abs() < 0.01, "{side:?}: {} vs {}", est.value, g.exp());
    }
}

#[test]
fn y1_slope_is_four_on_both_sides() {
    // the next divisor singularity sits at u = 1
    for side in [Side::Plus, Side::Minus] {
        let est = transition_slope_field(&printed_y1(), -1.0, 0.5, side, &SlopeConfig::transit()).unwrap();
        assert!((est.value / 4.0 - 1.0).abs() < 0.01, "{side:?}: {}", est.value);
    }
}

#[test]
fn half_turns_compose_to_the_return_map() {
    let (alpha, beta) = (1.0, 1.0);
    let nf = x_mu(alpha, beta);
    // far sections need smaller offsets to keep the orbits near the fiber
    let cfg = SlopeConfig {
        offsets: [-4.0, -4.5, -5.0, -5.5, -6.0].iter().map(|k| 10f64.powf(*k)).collect(),
        ..SlopeConfig::transit()
    };
    let plus = transition_slope(&nf, -1000.0, 1000.0, Side::Plus, &cfg).unwrap().value;
    let minus = transition_slope(&nf, -1000.0, 1000.0, Side::Minus, &cfg).unwrap().value;
    let ret = return_slope(&build_z(alpha, beta), ReturnSection::PositiveY, &SlopeConfig::return_map()).unwrap().value;
    assert!((plus * minus / ret - 1.0).abs() < 0.03, "{plus} * {minus} vs {ret}");
    assert!((ret / z_return_closed(alpha, beta) - 1.0).abs() < 0.02);
}

#[test]
fn reversible_center_has_unit_return() {
    for beta in [0.5, 1.0, 2.0] {
        let z = build_z(0.0, beta).compile();
        for (x, y) in [(0.3, 0.2), (-0.7, 0.1), (0.05, -0.4)] {
            let [p, q] = z.eval(x, y);
            let [pm, qm] = z.eval(-x, y);
            assert!((p - pm).abs() < 1e-14 && (q + qm).abs() < 1e-14);
        }
        let est = return_slope(&build_z(0.0, beta), ReturnSection::PositiveY, &SlopeConfig::return_map()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-3, "beta {beta}: {}", est.value);
    }
}

#[test]
fn halving_offsets_moves_estimate_within_residual() {
    let nf = build_example6(1.0, -1.0, -1.0);
    let cfg = SlopeConfig::transit();
    let full = transition_slope(&nf, -1.0, 1.0, Side::Plus, &cfg).unwrap();
    let halved = SlopeConfig { offsets: cfg.offsets.iter().map(|o| 0.5 * o).collect(), ..cfg };
    let half = transition_slope(&nf, -1.0, 1.0, Side::Plus, &halved).unwrap();
    let bound = full.residual.max(half.residual).max(1e-9 * full.value.abs());
    assert!((full.value - half.value).abs() <= 2.0 * bound, "{} vs {} (residual {bound})", full.value, half.value);
}
