use fsl_core::asymptotics::{gamma_pm, Sections};
use fsl_core::blowup::{blow_up, BlowupChart, ChartKind};
use fsl_core::casebook::{build_z, rescaled_x_mu, run_all, z_gamma_closed, CASE_IDS};

#[test]
fn every_case_passes() {
    let results = run_all();
    assert!(results.len() >= CASE_IDS.len());
    for r in &results {
        for c in &r.checks {
            assert!(c.passed, "{} / {}: computed {:?}, expected {:?}", r.id, c.name, c.computed, c.expected);
        }
    }
}

#[test]
fn z_gammas_match_closed_form_on_grid() {
    for alpha in [-1.5, 0.0, 2.0] {
        for beta in [0.3, 0.75, 1.5, 4.0] {
            let y_mu = blow_up(&build_z(alpha, beta), &BlowupChart::new(ChartKind::XDirectionalSwapped, 2)).unwrap().field;
            let nf = rescaled_x_mu(&y_mu, beta).unwrap();
            let (gp, gm) = gamma_pm(&nf, &Sections::Infinite).unwrap();
            let (cp, cm) = z_gamma_closed(alpha, beta);
            assert!((gp - cp).abs() < 1e-8 && (gm - cm).abs() < 1e-8, "({alpha}, {beta}): ({gp}, {gm}) vs ({cp}, {cm})");
        }
    }
}
