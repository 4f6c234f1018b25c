use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{integrate_compiled, Axis, Crossing, FlowError, IntegratorConfig, Parametrization, Result, StopCondition};
use crate::normalform::{classify, NormalFormField};
use crate::polyfield::{CompiledField, PlanarField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// Half-axis used as Poincaré section.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReturnSection {
    /// `{y = 0, x > 0}`.
    PositiveX,
    /// `{x = 0, y > 0}`.
    PositiveY,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeConfig {
    /// Positive offsets, strictly decreasing.
    pub offsets: Vec<f64>,
    pub integrator: IntegratorConfig,
    /// `ExtrapolationUnstable` is raised when `residual / |value|` exceeds this.
    pub max_rel_residual: f64,
    /// Orbits leaving `max(|x|,|y|) ≤ guard_box` are abandoned.
    pub guard_box: Option<f64>,
}

impl SlopeConfig {
    pub fn transit() -> Self {
        SlopeConfig {
            offsets: [-2.0, -2.5, -3.0, -3.5, -4.0].iter().map(|k| 10f64.powf(*k)).collect(),
            integrator: IntegratorConfig::default(),
            max_rel_residual: 0.05,
            guard_box: None,
        }
    }

    pub fn return_map() -> Self {
        SlopeConfig {
            offsets: [-3.0, -3.5, -4.0, -4.5, -5.0].iter().map(|k| 10f64.powf(*k)).collect(),
            integrator: IntegratorConfig::default().with_parametrization(Parametrization::Arclength),
            max_rel_residual: 0.05,
            guard_box: Some(1.0),
        }
    }

    fn check_offsets(&self) -> Result<()> {
        if self.offsets.len() < 2 {
            return Err(FlowError::InvalidOffsets("need at least two offsets".into()));
        }
        if self.offsets.iter().any(|o| !o.is_finite() || *o <= 0.0) {
            return Err(FlowError::InvalidOffsets("offsets must be positive magnitudes".into()));
        }
        if self.offsets.windows(2).any(|w| w[1] >= w[0]) {
            return Err(FlowError::InvalidOffsets("offsets must be strictly decreasing".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeEstimate {
    pub value: f64,
    pub offsets_used: Vec<f64>,
    pub slopes: Vec<f64>,
    /// Offsets dropped because the integrator error exceeded 10% of the image
    /// or the step size underflowed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rejected_offsets: Vec<f64>,
    /// Fitted remainder exponent of the last triple, if the fit succeeded.
    pub exponent: Option<f64>,
    pub residual: f64,
    /// The smallest-offset slope was used instead of the fit.
    pub fallback: bool,
}

impl SlopeEstimate {
    pub fn relative_residual(&self) -> f64 {
        self.residual / self.value.abs()
    }
}

fn rho(e: f64, y: [f64; 3]) -> f64 {
    let p = y.map(|v| v.powf(e));
    (p[0] - p[1]) / (p[1] - p[2])
}

/// Fits `S = L + C·y^e` through three points; `None` when the differences
/// have inconsistent signs or no exponent in `(0, 4]` matches.
fn fit_triple(y: [f64; 3], s: [f64; 3]) -> Option<(f64, f64)> {
    let (d1, d2) = (s[0] - s[1], s[1] - s[2]);
    if d1 == 0.0 && d2 == 0.0 {
        return None;
    }
    if d1 * d2 <= 0.0 {
        return None;
    }
    let target = d1 / d2;
    let (mut lo, mut hi) = (1e-3, 4.0);
    let f = |e: f64| rho(e, y) - target;
    if f(lo) * f(hi) > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let e = 0.5 * (lo + hi);
    let limit = s[2] - d2 * y[2].powf(e) / (y[1].powf(e) - y[2].powf(e));
    Some((e, limit))
}

/// Extrapolates per-offset slopes to offset 0 with a free remainder exponent.
pub fn extrapolate(offsets: &[f64], slopes: &[f64]) -> SlopeEstimate {
    let n = slopes.len();
    let last = slopes[n - 1];
    let prev = slopes[n.saturating_sub(2)];
    let base = SlopeEstimate {
        value: last,
        offsets_used: offsets.to_vec(),
        slopes: slopes.to_vec(),
        rejected_offsets: vec![],
        exponent: None,
        residual: 2.0 * (last - prev).abs(),
        fallback: true,
    };
    if n < 3 {
        return base;
    }
    let fits: Vec<Option<(f64, f64)>> = (0..n - 2)
        .map(|k| fit_triple([offsets[k], offsets[k + 1], offsets[k + 2]], [slopes[k], slopes[k + 1], slopes[k + 2]]))
        .collect();
    match fits[n - 3] {
        Some((e, l)) if e > 0.0 && e <= 2.0 => {
            let residual = match fits.get(n.wrapping_sub(4)).copied().flatten() {
                Some((_, lp)) if n >= 4 => (l - lp).abs(),
                _ => (l - last).abs(),
            };
            SlopeEstimate { value: l, exponent: Some(e), residual, fallback: false, ..base }
        }
        Some((e, _)) => SlopeEstimate { exponent: Some(e), ..base },
        None => base,
    }
}

fn finish(cfg: &SlopeConfig, measured: Vec<(f64, Option<f64>)>) -> Result<SlopeEstimate> {
    let (used, rejected): (Vec<_>, Vec<_>) = measured.into_iter().partition(|m| m.1.is_some());
    if used.len() < 2 {
        return Err(FlowError::InvalidOffsets(format!(
            "only {} offsets passed the integrator error screen",
            used.len()
        )));
    }
    let offsets: Vec<f64> = used.iter().map(|m| m.0).collect();
    let slopes: Vec<f64> = used.iter().map(|m| m.1.unwrap()).collect();
    let mut est = extrapolate(&offsets, &slopes);
    est.rejected_offsets = rejected.iter().map(|m| m.0).collect();
    if est.relative_residual().is_nan() || est.relative_residual() > cfg.max_rel_residual {
        return Err(FlowError::ExtrapolationUnstable { value: est.value, residual: est.residual });
    }
    Ok(est)
}

/// Transition slope of a normal form between `{x = alpha}` and `{x = omega}`.
pub fn transition_slope(nf: &NormalFormField, alpha: f64, omega: f64, side: Side, cfg: &SlopeConfig) -> Result<SlopeEstimate> {
    let cls = classify(&nf.invariants());
    if !cls.verdict.is_fake_saddle() {
        return Err(FlowError::TransitDoesNotExist(format!("origin is {}", cls.verdict.name())));
    }
    transition_slope_field(&nf.to_field(), alpha, omega, side, cfg)
}

/// Transition slope `Π(y₀)/y₀` of an arbitrary field with invariant fiber
/// `y = 0`, measured from `(alpha, ±y₀)` to `{x = omega}`.
pub fn transition_slope_field(field: &PlanarField, alpha: f64, omega: f64, side: Side, cfg: &SlopeConfig) -> Result<SlopeEstimate> {
    cfg.check_offsets()?;
    if !(alpha < 0.0 && omega > 0.0) {
        return Err(FlowError::TransitDoesNotExist(format!("sections ({alpha}, {omega}) do not bracket the origin")));
    }
    let compiled = field.compile();
    let guard = cfg.guard_box.unwrap_or(10.0 * alpha.abs().max(omega).max(1.0));
    let measured: Vec<Result<(f64, Option<f64>)>> = cfg
        .offsets
        .par_iter()
        .map(|&y0| transit_once(&compiled, alpha, omega, side.sign() * y0, guard, &cfg.integrator).map(|r| (y0, r)))
        .collect();
    finish(cfg, measured.into_iter().collect::<Result<Vec<_>>>()?)
}

fn transit_once(field: &CompiledField, alpha: f64, omega: f64, y0: f64, guard: f64, base: &IntegratorConfig) -> Result<Option<f64>> {
    let cfg = IntegratorConfig { abs_tol: base.abs_tol * y0.abs(), ..*base };
    let stops = [
        StopCondition::XReaches(omega),
        StopCondition::LeavesBox(guard),
        StopCondition::EntersDisk(1e-12 * y0.abs()),
        StopCondition::ArclengthReaches(1e3 * guard),
    ];
    let tr = match integrate_compiled(field, [alpha, y0], &stops, &cfg) {
        Ok(tr) => tr,
        // the integrator cannot resolve this offset: screened out like a noisy one
        Err(FlowError::StepUnderflow(..)) => return Ok(None),
        Err(e) => return Err(FlowError::TransitDoesNotExist(format!("from ({alpha}, {y0:e}): {e}"))),
    };
    match tr.stop_event() {
        Some(ev) if ev.condition == 0 => {
            let image = ev.location[1];
            if image * y0 <= 0.0 {
                return Err(FlowError::TransitDoesNotExist(format!("orbit from ({alpha}, {y0:e}) crossed the fiber")));
            }
            Ok((tr.accumulated_error <= 0.1 * image.abs()).then_some(image / y0))
        }
        Some(ev) => Err(FlowError::TransitDoesNotExist(format!("orbit from ({alpha}, {y0:e}) {}", ev.kind))),
        None => Err(FlowError::TransitDoesNotExist("no stop event".into())),
    }
}

/// First-return slope on a half-axis section around a monodromic origin.
pub fn return_slope(field: &PlanarField, section: ReturnSection, cfg: &SlopeConfig) -> Result<SlopeEstimate> {
    cfg.check_offsets()?;
    let compiled = field.compile();
    let guard = cfg.guard_box.unwrap_or(1.0);
    let measured: Vec<Result<(f64, Option<f64>)>> = cfg
        .offsets
        .par_iter()
        .map(|&r0| return_once(&compiled, section, r0, guard, &cfg.integrator).map(|r| (r0, r)))
        .collect();
    finish(cfg, measured.into_iter().collect::<Result<Vec<_>>>()?)
}

fn return_once(field: &CompiledField, section: ReturnSection, r0: f64, guard: f64, base: &IntegratorConfig) -> Result<Option<f64>> {
    let cfg = IntegratorConfig { abs_tol: base.abs_tol * r0 * r0, ..*base };
    let (start, axis, speed) = match section {
        ReturnSection::PositiveX => ([r0, 0.0], Axis::Y, field.eval(r0, 0.0)[1]),
        ReturnSection::PositiveY => ([0.0, r0], Axis::X, field.eval(0.0, r0)[0]),
    };
    if speed == 0.0 {
        return Err(FlowError::NoReturn(format!("field tangent to the section at offset {r0:e}")));
    }
    let crossing = if speed > 0.0 { Crossing::Increasing } else { Crossing::Decreasing };
    let stops = [
        StopCondition::Section { axis, value: 0.0, crossing, other_sign: Some(1), min_winding: std::f64::consts::PI },
        StopCondition::LeavesBox(guard),
        StopCondition::EntersDisk(1e-9 * r0),
        StopCondition::ArclengthReaches(1e3 * guard),
    ];
    let tr = match integrate_compiled(field, start, &stops, &cfg) {
        Ok(tr) => tr,
        Err(FlowError::StepUnderflow(..)) => return Ok(None),
        Err(e) => return Err(FlowError::NoReturn(format!("offset {r0:e}: {e}"))),
    };
    match tr.stop_event() {
        Some(ev) if ev.condition == 0 => {
            let image = match section {
                ReturnSection::PositiveX => ev.location[0],
                ReturnSection::PositiveY => ev.location[1],
            };
            Ok((tr.accumulated_error <= 0.1 * image.abs()).then_some(image / r0))
        }
        Some(ev) => Err(FlowError::NoReturn(format!("orbit from offset {r0:e} {}", ev.kind))),
        None => Err(FlowError::NoReturn("no stop event".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfield::{Poly2, Scalar};

    #[test]
    fn extrapolation_recovers_limit() {
        let offs = [1e-2, 1e-2 / 2f64.sqrt(), 5e-3, 5e-3 / 2f64.sqrt()];
        let slopes: Vec<f64> = offs.iter().map(|y| 4.0 + 3.0 * y.powf(1.3)).collect();
        let e = extrapolate(&offs, &slopes);
        assert!(!e.fallback);
        assert!((e.value - 4.0).abs() < 1e-9);
        assert!((e.exponent.unwrap() - 1.3).abs() < 1e-6);
    }

    #[test]
    fn extrapolation_falls_back_on_noise() {
        let offs = [1e-2, 1e-3, 1e-4];
        let e = extrapolate(&offs, &[2.0, 2.0 + 1e-9, 2.0 - 1e-9]);
        assert!(e.fallback);
        assert_eq!(e.value, 2.0 - 1e-9);
        assert!(e.residual > 0.0);
    }

    #[test]
    fn symmetric_quadratic_slope_is_one() {
        // x² + y² in ẋ, ẏ = 0: straight orbits.
        let nf = NormalFormField::quadratic(Scalar::int(0), Scalar::int(0), Scalar::int(0));
        for side in [Side::Plus, Side::Minus] {
            let s = transition_slope(&nf, -1.0, 1.0, side, &SlopeConfig::transit()).unwrap();
            assert!((s.value - 1.0).abs() < 1e-8, "{s:?}");
        }
    }

    #[test]
    fn offsets_validated() {
        let nf = NormalFormField::quadratic(Scalar::int(0), Scalar::int(0), Scalar::int(0));
        let cfg = SlopeConfig { offsets: vec![1e-3, 1e-2], ..SlopeConfig::transit() };
        assert!(matches!(transition_slope(&nf, -1.0, 1.0, Side::Plus, &cfg), Err(FlowError::InvalidOffsets(_))));
        let nf = NormalFormField::quadratic(Scalar::int(0), Scalar::int(0), Scalar::int(2));
        assert!(matches!(
            transition_slope(&nf, -1.0, 1.0, Side::Plus, &SlopeConfig::transit()),
            Err(FlowError::TransitDoesNotExist(_))
        ));
    }

    #[test]
    fn linear_focus_return_slope() {
        // ẋ = εx − y, ẏ = x + εy: return factor e^{2πε}.
        let eps = 0.05;
        let f = PlanarField::new(
            &Poly2::x().scale(&Scalar::float(eps)) - &Poly2::y(),
            &Poly2::x() + &Poly2::y().scale(&Scalar::float(eps)),
        );
        for sec in [ReturnSection::PositiveX, ReturnSection::PositiveY] {
            let s = return_slope(&f, sec, &SlopeConfig::return_map()).unwrap();
            assert!((s.value - (2.0 * std::f64::consts::PI * eps).exp()).abs() < 1e-7, "{s:?}");
        }
    }
}
