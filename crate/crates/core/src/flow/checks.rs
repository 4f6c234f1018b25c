use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{integrate_compiled, FlowError, IntegratorConfig, Parametrization, Result, StopCondition, Trajectory};
use crate::polyfield::{CompiledField, PlanarField, Scalar};

/// A first integral `H(x, y)`, possibly defined only up to multiples of
/// `branch_period` (e.g. through an arctangent).
#[derive(Clone)]
pub struct FirstIntegral {
    pub name: String,
    pub value: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub branch_period: Option<f64>,
}

impl std::fmt::Debug for FirstIntegral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FirstIntegral").field("name", &self.name).field("branch_period", &self.branch_period).finish()
    }
}

/// `ln(y²(2x² + 2xy + y²)) − 2 arctan((x + y)/x)` for
/// `(x² + xy + y²)∂x − (x + y)y∂y`.
pub fn figure3_first_integral() -> FirstIntegral {
    FirstIntegral {
        name: "ln(y^2(2x^2+2xy+y^2)) - 2 atan((x+y)/x)".into(),
        value: Arc::new(|x, y| (y * y * (2.0 * x * x + 2.0 * x * y + y * y)).ln() - 2.0 * ((x + y) / x).atan()),
        branch_period: Some(2.0 * PI),
    }
}

/// Largest deviation of `H` from its starting value along the samples, with
/// branch jumps unwound continuously.
pub fn conservation_check(h: &FirstIntegral, traj: &Trajectory) -> Result<f64> {
    let mut prev_raw: Option<f64> = None;
    let mut offset = 0.0;
    let mut h0 = None;
    let mut drift: f64 = 0.0;
    for (i, s) in traj.samples.iter().enumerate() {
        let raw = (h.value)(s.x, s.y);
        if !raw.is_finite() {
            // the branch cut itself; the next sample resolves the jump
            continue;
        }
        if let (Some(p), Some(period)) = (prev_raw, h.branch_period) {
            let jump = raw + offset - p;
            let k = (jump / period).round();
            if (jump - k * period).abs() > 0.25 * period {
                return Err(FlowError::BranchTrackingFailed(i));
            }
            offset -= k * period;
        }
        let v = raw + offset;
        let start = *h0.get_or_insert(v);
        drift = drift.max((v - start).abs());
        prev_raw = Some(v);
    }
    Ok(drift)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MonodromyVerdict {
    Monodromic,
    Transit,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Start ring radius as a fraction of the box size.
    pub ring_fraction: f64,
    pub rays: usize,
    pub integrator: IntegratorConfig,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            ring_fraction: 1e-3,
            rays: 16,
            integrator: IntegratorConfig { rel_tol: 1e-9, abs_tol: 1e-14, ..IntegratorConfig::default() }
                .with_parametrization(Parametrization::Arclength),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub verdict: MonodromyVerdict,
    /// Per-ray outcome: `wound`, `wound-backward`, `left-box`, `entered-disk`,
    /// or `undecided`.
    pub outcomes: Vec<String>,
}

fn ray_outcome(field: &CompiledField, start: [f64; 2], stops: &[StopCondition], base: &IntegratorConfig) -> &'static str {
    let mut icfg = *base;
    // close passages by the origin can underflow at loose tolerances
    for _ in 0..3 {
        match integrate_compiled(field, start, stops, &icfg) {
            Ok(tr) => {
                return match tr.stop_event().map(|e| e.condition) {
                    Some(0) => "left-box",
                    Some(1) => "entered-disk",
                    Some(2) => "wound",
                    _ => "undecided",
                }
            }
            Err(FlowError::StepUnderflow(..)) => {
                icfg.rel_tol *= 0.1;
                icfg.abs_tol *= 0.01;
            }
            Err(_) => break,
        }
    }
    "undecided"
}

/// Launches orbits from a small ring around the origin, in both time
/// directions: monodromic when every one of them winds once inside the box
/// in either direction, transit when any leaves the box both ways without
/// winding (a hyperbolic sector).
pub fn monodromy_probe(field: &PlanarField, box_size: f64, cfg: &ProbeConfig) -> ProbeReport {
    let compiled = field.compile();
    let r0 = cfg.ring_fraction * box_size;
    let stops = [
        StopCondition::LeavesBox(box_size),
        StopCondition::EntersDisk(1e-30 * box_size),
        StopCondition::Winds(2.0 * PI),
        StopCondition::ArclengthReaches(50.0 * box_size),
    ];
    let backward = field.scale(&Scalar::int(-1)).compile();
    let outcomes: Vec<String> = (0..cfg.rays)
        .into_par_iter()
        .map(|k| {
            let th = 2.0 * PI * (k as f64 + 0.5) / cfg.rays as f64;
            let start = [r0 * th.cos(), r0 * th.sin()];
            let fwd = ray_outcome(&compiled, start, &stops, &cfg.integrator);
            if fwd == "wound" {
                return fwd.to_string();
            }
            // a strongly repelling focus leaves the box within one turn
            let bwd = ray_outcome(&backward, start, &stops, &cfg.integrator);
            if bwd == "wound" {
                "wound-backward"
            } else if fwd == "left-box" && bwd == "left-box" {
                "left-box"
            } else if fwd == "entered-disk" || bwd == "entered-disk" {
                "entered-disk"
            } else {
                "undecided"
            }
            .to_string()
        })
        .collect();
    let verdict = if outcomes.iter().all(|o| o.starts_with("wound")) {
        MonodromyVerdict::Monodromic
    } else if outcomes.iter().any(|o| o == "left-box") {
        MonodromyVerdict::Transit
    } else {
        MonodromyVerdict::Undecided
    };
    ProbeReport { verdict, outcomes }
}

#[cfg(test)]
mod tests {
    use super::super::integrate;
    use super::*;
    use crate::polyfield::Poly2;

    fn figure3() -> PlanarField {
        let (x, y) = (Poly2::x(), Poly2::y());
        PlanarField::new(&(&x.pow(2) + &(&x * &y)) + &y.pow(2), -(&(&x + &y) * &y))
    }

    #[test]
    fn figure3_integral_is_conserved() {
        let h = figure3_first_integral();
        let tr = integrate(&figure3(), [-1.0, 0.5], &[StopCondition::XReaches(1.0)], &IntegratorConfig::default()).unwrap();
        assert!(tr.end()[1] > 0.0);
        let drift = conservation_check(&h, &tr).unwrap();
        assert!(drift < 1e-6, "drift {drift}");
        let loose = IntegratorConfig { rel_tol: 1e-6, abs_tol: 1e-8, ..IntegratorConfig::default() };
        let tr_loose = integrate(&figure3(), [-1.0, 0.5], &[StopCondition::XReaches(1.0)], &loose).unwrap();
        assert!(conservation_check(&h, &tr_loose).unwrap() > drift);
    }

    #[test]
    fn constant_field_conserves_y() {
        let f = PlanarField::new(Poly2::one(), Poly2::zero());
        let tr = integrate(&f, [0.0, 0.3], &[StopCondition::XReaches(2.0)], &IntegratorConfig::default()).unwrap();
        let h = FirstIntegral { name: "y".into(), value: Arc::new(|_, y| y), branch_period: None };
        assert_eq!(conservation_check(&h, &tr).unwrap(), 0.0);
    }

    #[test]
    fn probe_rotation_and_saddle() {
        let rot = PlanarField::new(-Poly2::y(), Poly2::x());
        assert_eq!(monodromy_probe(&rot, 1.0, &ProbeConfig::default()).verdict, MonodromyVerdict::Monodromic);
        assert_eq!(monodromy_probe(&figure3(), 1.0, &ProbeConfig::default()).verdict, MonodromyVerdict::Transit);
    }

    #[test]
    fn strong_focus_winds_backward() {
        // radius grows by e^(6π) per turn, so forward orbits leave the box first
        let (x, y) = (Poly2::x(), Poly2::y());
        let focus = PlanarField::new(&x.scale(&Scalar::int(3)) - &y, &x + &y.scale(&Scalar::int(3)));
        let report = monodromy_probe(&focus, 1.0, &ProbeConfig::default());
        assert_eq!(report.verdict, MonodromyVerdict::Monodromic);
        assert!(report.outcomes.iter().all(|o| o == "wound-backward"));
    }
}
