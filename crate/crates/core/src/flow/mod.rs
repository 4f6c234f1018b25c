//! Numerical integration of planar polynomial fields with event location,
//! and the empirical transition and return slopes built on it.

mod checks;
mod dopri;
mod slopes;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::polyfield::{CompiledField, PlanarField};
use dopri::{step, Vector};

pub use checks::{conservation_check, figure3_first_integral, monodromy_probe, FirstIntegral, MonodromyVerdict, ProbeConfig};
pub use slopes::{
    extrapolate, return_slope, transition_slope, transition_slope_field, ReturnSection, Side, SlopeConfig, SlopeEstimate,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlowError {
    #[error("step size underflow near ({0:e}, {1:e})")]
    StepUnderflow(f64, f64),
    #[error("maximum number of steps ({0}) exceeded")]
    MaxStepsExceeded(usize),
    #[error("no transit: {0}")]
    TransitDoesNotExist(String),
    #[error("no return to the section: {0}")]
    NoReturn(String),
    #[error("extrapolation unstable: value {value}, residual {residual}")]
    ExtrapolationUnstable { value: f64, residual: f64 },
    #[error("first integral branch tracking failed at sample {0}")]
    BranchTrackingFailed(usize),
    #[error("invalid offsets: {0}")]
    InvalidOffsets(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, FlowError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parametrization {
    Time,
    GraphOverX,
    Arclength,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Graph parametrization is used only while `|P| / |(P, Q)|` exceeds this.
    pub min_denominator: f64,
    pub parametrization: Parametrization,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 2_000_000,
            min_denominator: 1e-2,
            parametrization: Parametrization::GraphOverX,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(FlowError::InvalidConfig("tolerances must be positive".into()));
        }
        if !(self.min_denominator > 0.0 && self.min_denominator < 0.5) {
            return Err(FlowError::InvalidConfig("min_denominator must lie in (0, 0.5)".into()));
        }
        Ok(())
    }

    pub fn with_parametrization(mut self, p: Parametrization) -> Self {
        self.parametrization = p;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Crossing {
    Increasing,
    Decreasing,
    Either,
}

/// Terminal events; integration stops at the first one that fires.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum StopCondition {
    XReaches(f64),
    YReaches(f64),
    TimeReaches(f64),
    /// Crossing of `{axis = value}` in the given direction, restricted to the
    /// half-line where the other coordinate has sign `other_sign` (if set),
    /// counted only once the winding angle exceeds `min_winding` in modulus.
    Section { axis: Axis, value: f64, crossing: Crossing, other_sign: Option<i8>, min_winding: f64 },
    /// `max(|x|, |y|)` reaches the given size.
    LeavesBox(f64),
    /// `|(x, y)|` drops to the given radius.
    EntersDisk(f64),
    /// The continuous polar angle has changed by the given amount.
    Winds(f64),
    /// Independent progress limit, in arclength.
    ArclengthReaches(f64),
}

// State layout: x, y, winding angle, arclength, time.
const X: usize = 0;
const Y: usize = 1;
const TH: usize = 2;
const ARC: usize = 3;
const T: usize = 4;
type State = Vector<5>;

impl StopCondition {
    fn value(&self, s: &State) -> f64 {
        match *self {
            StopCondition::XReaches(v) => s[X] - v,
            StopCondition::YReaches(v) => s[Y] - v,
            StopCondition::TimeReaches(v) => s[T] - v,
            StopCondition::Section { axis: Axis::X, value, .. } => s[X] - value,
            StopCondition::Section { axis: Axis::Y, value, .. } => s[Y] - value,
            StopCondition::LeavesBox(b) => s[X].abs().max(s[Y].abs()) - b,
            StopCondition::EntersDisk(r) => r - s[X].hypot(s[Y]),
            StopCondition::Winds(w) => s[TH].abs() - w,
            StopCondition::ArclengthReaches(l) => s[ARC] - l,
        }
    }

    fn fires(&self, g0: f64, g1: f64) -> bool {
        let up = g0 < 0.0 && g1 >= 0.0;
        let down = g0 > 0.0 && g1 <= 0.0;
        match self {
            StopCondition::Section { crossing: Crossing::Increasing, .. } => up,
            StopCondition::Section { crossing: Crossing::Decreasing, .. } => down,
            StopCondition::XReaches(_) | StopCondition::YReaches(_) | StopCondition::Section { .. } => up || down,
            _ => up,
        }
    }

    fn accepts(&self, s: &State) -> bool {
        match *self {
            StopCondition::Section { axis, other_sign, min_winding, .. } => {
                let other = if axis == Axis::X { s[Y] } else { s[X] };
                let sign_ok = match other_sign {
                    Some(sg) => other * f64::from(sg) > 0.0,
                    None => true,
                };
                sign_ok && s[TH].abs() >= min_winding
            }
            _ => true,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            StopCondition::XReaches(_) => "x-reached",
            StopCondition::YReaches(_) => "y-reached",
            StopCondition::TimeReaches(_) => "time-reached",
            StopCondition::Section { .. } => "section",
            StopCondition::LeavesBox(_) => "left-box",
            StopCondition::EntersDisk(_) => "entered-disk",
            StopCondition::Winds(_) => "wound",
            StopCondition::ArclengthReaches(_) => "arclength-limit",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub arclength: f64,
    pub x: f64,
    pub y: f64,
    pub winding: f64,
    /// Local error estimate of the step that produced this sample.
    pub step_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: String,
    /// Index into the stop list passed to [`integrate`].
    pub condition: usize,
    pub location: [f64; 2],
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub parametrization: Parametrization,
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
    /// Number of steps taken with the arclength fallback.
    pub fallback_steps: usize,
    /// Sum of local error estimates.
    pub accumulated_error: f64,
}

impl Trajectory {
    pub fn end(&self) -> [f64; 2] {
        let s = self.samples.last().expect("trajectories hold at least the start point");
        [s.x, s.y]
    }

    pub fn stop_event(&self) -> Option<&Event> {
        self.events.last()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("trajectories serialize")
    }

    /// CSV with columns `t_or_x, x, y, step_error`: the independent variable
    /// is time, `x`, or arclength according to the parametrization.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_or_x,x,y,step_error\n");
        for s in &self.samples {
            let iv = match self.parametrization {
                Parametrization::Time => s.t,
                Parametrization::GraphOverX => s.x,
                Parametrization::Arclength => s.arclength,
            };
            let _ = writeln!(out, "{iv:.17e},{:.17e},{:.17e},{:.3e}", s.x, s.y, s.step_error);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Mode {
    Time,
    Graph,
    Arc,
}

fn derivative(field: &CompiledField, s: &State, mode: Mode) -> Option<State> {
    let [p, q] = field.eval(s[X], s[Y]);
    let speed = p.hypot(q);
    let r2 = s[X] * s[X] + s[Y] * s[Y];
    let omega = if r2 > 0.0 { (s[X] * q - s[Y] * p) / r2 } else { 0.0 };
    let norm = match mode {
        Mode::Time => 1.0,
        Mode::Graph => p.abs(),
        Mode::Arc => speed,
    };
    if !norm.is_finite() || norm <= 0.0 {
        return None;
    }
    let out = [p / norm, q / norm, omega / norm, speed / norm, 1.0 / norm];
    out.iter().all(|v| v.is_finite()).then_some(out)
}

fn sample(s: &State, err: f64) -> Sample {
    Sample { t: s[T], arclength: s[ARC], x: s[X], y: s[Y], winding: s[TH], step_error: err }
}

/// Integrates `field` forward from `start` until one of `stops` fires.
pub fn integrate(field: &PlanarField, start: [f64; 2], stops: &[StopCondition], cfg: &IntegratorConfig) -> Result<Trajectory> {
    integrate_compiled(&field.compile(), start, stops, cfg)
}

pub(crate) fn integrate_compiled(
    field: &CompiledField,
    start: [f64; 2],
    stops: &[StopCondition],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let mut s: State = [start[0], start[1], 0.0, 0.0, 0.0];
    let mut traj = Trajectory {
        parametrization: cfg.parametrization,
        samples: vec![sample(&s, 0.0)],
        events: Vec::new(),
        fallback_steps: 0,
        accumulated_error: 0.0,
    };
    let ratio = |s: &State| {
        let [p, q] = field.eval(s[X], s[Y]);
        p.abs() / p.hypot(q)
    };
    let choose = |s: &State, current: Option<Mode>| -> Mode {
        match cfg.parametrization {
            Parametrization::Time => Mode::Time,
            Parametrization::Arclength => Mode::Arc,
            Parametrization::GraphOverX => {
                let r = ratio(s);
                match current {
                    Some(Mode::Graph) if r < cfg.min_denominator => Mode::Arc,
                    Some(Mode::Arc) if r > 2.0 * cfg.min_denominator => Mode::Graph,
                    Some(m) => m,
                    None if r >= cfg.min_denominator => Mode::Graph,
                    None => Mode::Arc,
                }
            }
        }
    };
    let mut mode = choose(&s, None);
    let Some(mut k1) = derivative(field, &s, mode) else {
        return Err(FlowError::StepUnderflow(start[0], start[1]));
    };
    let scale0 = start[0].abs().max(start[1].abs()).max(1e-300);
    let mut h = 1e-3 * scale0 / k1[X].hypot(k1[Y]).max(1e-300);
    let mut g_prev: Vec<f64> = stops.iter().map(|c| c.value(&s)).collect();
    // Time blows up near singular points outside the time parametrization,
    // so it is only error-controlled when something depends on it.
    let wants_time = cfg.parametrization == Parametrization::Time
        || stops.iter().any(|c| matches!(c, StopCondition::TimeReaches(_)));
    let controlled: &[usize] = if wants_time { &[X, Y, TH, ARC, T] } else { &[X, Y, TH, ARC] };
    for _ in 0..cfg.max_steps {
        let next_mode = choose(&s, Some(mode));
        if next_mode != mode {
            let old = k1;
            match derivative(field, &s, next_mode) {
                Some(k) => {
                    // keep the same physical step across the change of variable
                    h *= k[X].hypot(k[Y]).max(1e-300).recip() * old[X].hypot(old[Y]);
                    k1 = k;
                    mode = next_mode;
                }
                None => return Err(FlowError::StepUnderflow(s[X], s[Y])),
            }
        }
        let f = |st: &State| derivative(field, st, mode);
        let attempt = step(&f, &s, &k1, h);
        let Some(st) = attempt else {
            h *= 0.25;
            if h.abs() < 1e-300 {
                return Err(FlowError::StepUnderflow(s[X], s[Y]));
            }
            continue;
        };
        let mut ratio_err: f64 = 0.0;
        for &i in controlled {
            let tol = cfg.abs_tol + cfg.rel_tol * s[i].abs().max(st.y1[i].abs());
            ratio_err = ratio_err.max(st.err[i].abs() / tol);
        }
        if !ratio_err.is_finite() || ratio_err > 1.0 {
            let fac = if ratio_err.is_finite() { (0.9 * ratio_err.powf(-0.2)).max(0.1) } else { 0.1 };
            h *= fac;
            if h.abs() <= 1e-15 * s[ARC].abs().max(s[X].abs()).max(1e-290) {
                return Err(FlowError::StepUnderflow(s[X], s[Y]));
            }
            continue;
        }
        let step_err = st.err[X].abs().max(st.err[Y].abs());
        traj.accumulated_error += step_err;
        if mode == Mode::Arc && cfg.parametrization == Parametrization::GraphOverX {
            traj.fallback_steps += 1;
        }
        // event detection on the accepted step
        let g_new: Vec<f64> = stops.iter().map(|c| c.value(&st.y1)).collect();
        let mut first: Option<(f64, usize)> = None;
        for (i, cond) in stops.iter().enumerate() {
            if !cond.fires(g_prev[i], g_new[i]) {
                continue;
            }
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..200 {
                if (hi - lo) * h.abs() < 1e-13 {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if cond.fires(g_prev[i], cond.value(&st.dense.eval(mid))) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            if cond.accepts(&st.dense.eval(hi)) && first.is_none_or(|(th, _)| hi < th) {
                first = Some((hi, i));
            }
        }
        if let Some((th, i)) = first {
            let mut end = st.dense.eval(th);
            match stops[i] {
                StopCondition::XReaches(v) => end[X] = v,
                StopCondition::YReaches(v) => end[Y] = v,
                StopCondition::Section { axis: Axis::X, value, .. } => end[X] = value,
                StopCondition::Section { axis: Axis::Y, value, .. } => end[Y] = value,
                _ => {}
            }
            traj.samples.push(sample(&end, step_err));
            traj.events.push(Event {
                kind: stops[i].name().to_string(),
                condition: i,
                location: [end[X], end[Y]],
                t: end[T],
            });
            return Ok(traj);
        }
        s = st.y1;
        k1 = st.k7;
        g_prev = g_new;
        traj.samples.push(sample(&s, step_err));
        let fac = if ratio_err > 0.0 { (0.9 * ratio_err.powf(-0.2)).clamp(0.2, 5.0) } else { 5.0 };
        h *= fac;
    }
    Err(FlowError::MaxStepsExceeded(cfg.max_steps))
}
