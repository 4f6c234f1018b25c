//! Leading coefficient of the transition map across the singular fiber:
//! principal values, `γ₀`, `γ±`, the L-integrals and `Δ₀₀`.

pub mod quadrature;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::blowup::{saddle_data, BlowupError};
use crate::normalform::{classify, Invariants, NormalFormField, Verdict};
use crate::polyfield::{Poly1, RationalFn1, Scalar};
use quadrature::{integrate, QuadResult, DEFAULT_ABS_TOL, MAX_EVALS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AsymptoticsError {
    #[error("origin is not a hyperbolic fake saddle ({0})")]
    NotHyperbolicFakeSaddle(String),
    #[error("invalid sections: {0}")]
    SectionInvalid(String),
    #[error("quadrature did not converge on {what}: estimate {value} ± {error} after {evals} evaluations")]
    QuadratureNonConvergent { what: String, value: f64, error: f64, evals: usize },
    #[error("tail of the principal value at infinity is not integrable: {0}")]
    TailNotIntegrable(String),
    #[error("L-integrand denominator vanishes on the path: {0}")]
    IntegrandSingularOnPath(String),
}

impl From<BlowupError> for AsymptoticsError {
    fn from(e: BlowupError) -> Self {
        AsymptoticsError::NotHyperbolicFakeSaddle(e.to_string())
    }
}

type Result<T> = std::result::Result<T, AsymptoticsError>;

/// Transverse sections `{x = alpha}` and `{x = omega}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionPair {
    pub alpha: f64,
    pub omega: f64,
}

impl SectionPair {
    pub fn new(alpha: f64, omega: f64) -> Self {
        SectionPair { alpha, omega }
    }

    /// Checks `alpha < 0 < omega` and `f1(x,0) > 0` on `[alpha, omega]`.
    pub fn validate(&self, nf: &NormalFormField) -> Result<()> {
        if !(self.alpha < 0.0 && self.omega > 0.0) || !self.alpha.is_finite() || !self.omega.is_finite() {
            return Err(AsymptoticsError::SectionInvalid(format!(
                "need alpha < 0 < omega, got ({}, {})",
                self.alpha, self.omega
            )));
        }
        if !nf.f1.restrict_y0().nonvanishing_on(self.alpha, self.omega) {
            return Err(AsymptoticsError::SectionInvalid(format!(
                "f1(x,0) vanishes on [{}, {}]",
                self.alpha, self.omega
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Sections {
    Finite(SectionPair),
    /// The symmetric limit `alpha = −R`, `omega = R`, `R → ∞`.
    Infinite,
}

fn quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, what: &str) -> Result<QuadResult> {
    integrate(f, a, b, DEFAULT_ABS_TOL, MAX_EVALS).map_err(|e| AsymptoticsError::QuadratureNonConvergent {
        what: what.to_string(),
        value: e.best.value,
        error: e.best.error,
        evals: e.best.evals,
    })
}

fn hyperbolic(inv: &Invariants) -> Result<()> {
    match classify(inv).verdict {
        Verdict::HyperbolicFakeSaddle { .. } => Ok(()),
        v => Err(AsymptoticsError::NotHyperbolicFakeSaddle(v.name().to_string())),
    }
}

/// `(g1(x,0) − c·f1(x,0))/x` and `f1(x,0)`: the regular part of the
/// principal-value integrand is their quotient, continuous at 0.
fn regular_part(nf: &NormalFormField) -> (Poly1, Poly1) {
    let f = nf.f1.restrict_y0();
    let g = nf.g1.restrict_y0();
    let c = nf.g1.coeff(0, 0);
    ((&g - &f.scale(&c)).shift_down(), f)
}

/// Principal value of `∫ g1(x,0)/(x f1(x,0)) dx` over the sections, via
/// `c·log|ω/α| + ∫ (g1/f1 − c)/x dx`.
pub fn pv_integral(nf: &NormalFormField, sections: &SectionPair) -> Result<f64> {
    pv_integral_with_error(nf, sections).map(|r| r.0)
}

fn pv_integral_with_error(nf: &NormalFormField, s: &SectionPair) -> Result<(f64, f64)> {
    s.validate(nf)?;
    let (num, den) = regular_part(nf);
    let c = nf.g1.coeff(0, 0).to_f64();
    let r = quad(|x| num.eval_f64(x) / den.eval_f64(x), s.alpha, s.omega, "principal value")?;
    Ok((c * (s.omega / s.alpha).abs().ln() + r.value, r.error))
}

/// Default `ε` sequence of the principal-value oracle.
pub fn default_eps_sequence() -> Vec<f64> {
    (2..=6).map(|k| 10f64.powi(-k)).collect()
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 60)
}

/// Neville evaluation at 0 of the interpolant through `(xs[k], ys[k])`.
pub fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i]);
        }
    }
    p[0]
}

/// The principal value straight from its definition: the raw integrand
/// `g1/(x f1)` integrated on `[α, −ε] ∪ [ε, ω]`, extrapolated to `ε = 0`.
/// Each half is integrated in the variable `t = log|x|`.
pub fn pv_integral_eps_oracle(nf: &NormalFormField, sections: &SectionPair, eps_sequence: &[f64]) -> Result<f64> {
    sections.validate(nf)?;
    let (g, f) = (nf.g1.restrict_y0(), nf.f1.restrict_y0());
    let raw = |x: f64| g.eval_f64(x) / (x * f.eval_f64(x));
    let ys: Vec<f64> = eps_sequence
        .iter()
        .map(|&e| {
            let right = adaptive_simpson(&|t: f64| raw(t.exp()) * t.exp(), e.ln(), sections.omega.ln(), 1e-13);
            let left = adaptive_simpson(&|t: f64| raw(-t.exp()) * t.exp(), e.ln(), (-sections.alpha).ln(), 1e-13);
            left + right
        })
        .collect();
    Ok(neville_at_zero(eps_sequence, &ys))
}

/// Coefficients `h_1..h_5` of `h(x) = Σ h_k x^{−k}` at infinity for the
/// regular part.
fn laurent_at_infinity(num: &Poly1, den: &Poly1) -> [f64; 6] {
    let mut out = [0.0; 6];
    let (Some(n), m) = (den.degree(), num.degree()) else { return out };
    let Some(m) = m else { return out };
    let ar: Vec<f64> = (0..=m).map(|i| num.coeff(m - i).to_f64()).collect();
    let br: Vec<f64> = (0..=n).map(|i| den.coeff(n - i).to_f64()).collect();
    let shift = n - m;
    let mut s = [0.0; 6];
    for k in 0..6 {
        let mut acc = ar.get(k).copied().unwrap_or(0.0);
        for j in 1..=k.min(n) {
            acc -= br[j] * s[k - j];
        }
        s[k] = acc / br[0];
    }
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        if k >= shift {
            *slot = s[k - shift];
        }
    }
    out
}

/// Symmetric principal value over the whole line, `lim_{R→∞} PV∫_{−R}^{R}`.
pub fn pv_integral_sym_infinite(nf: &NormalFormField) -> Result<f64> {
    let (num, den) = regular_part(nf);
    let (dg, df) = (nf.g1.restrict_y0().degree().unwrap_or(0), den.degree().unwrap_or(0));
    if dg > df {
        return Err(AsymptoticsError::TailNotIntegrable(format!(
            "deg g1(x,0) = {dg} exceeds deg f1(x,0) = {df}"
        )));
    }
    if df % 2 == 1 || den.coeff(df).to_f64() <= 0.0 {
        return Err(AsymptoticsError::SectionInvalid("f1(x,0) changes sign on the real line".into()));
    }
    let h = laurent_at_infinity(&num, &den);
    let even = |x: f64| 0.5 * (num.eval_f64(x) / den.eval_f64(x) + num.eval_f64(-x) / den.eval_f64(-x));
    let tail = |r: f64| 2.0 * (h[2] / r + h[4] / (3.0 * r.powi(3)));
    let mut r = 8.0;
    if !den.nonvanishing_on(-r, r) {
        return Err(AsymptoticsError::SectionInvalid(format!("f1(x,0) vanishes on [{}, {r}]", -r)));
    }
    let mut core = 2.0 * quad(even, 0.0, r, "principal value at infinity")?.value;
    let mut estimate = core + tail(r);
    for _ in 0..40 {
        let r2 = 2.0 * r;
        if !den.nonvanishing_on(r, r2) || !den.nonvanishing_on(-r2, -r) {
            return Err(AsymptoticsError::SectionInvalid(format!("f1(x,0) vanishes beyond |x| = {r}")));
        }
        core += 2.0 * quad(even, r, r2, "principal value at infinity")?.value;
        let next = core + tail(r2);
        let moved = (next - estimate).abs();
        estimate = next;
        r = r2;
        if moved < 1e-8 {
            return Ok(estimate);
        }
    }
    Err(AsymptoticsError::TailNotIntegrable(format!("estimate still moving at R = {r}")))
}

/// `π(2b − c(a+b))/√d`.
pub fn gamma0(inv: &Invariants) -> Result<f64> {
    hyperbolic(inv)?;
    let (a, b, c, d) = inv.as_f64();
    Ok(PI * (2.0 * b - c * (a + b)) / d.sqrt())
}

/// `(PV + γ₀, PV − γ₀)`.
pub fn gamma_pm(nf: &NormalFormField, sections: &Sections) -> Result<(f64, f64)> {
    let g0 = gamma0(&nf.invariants())?;
    let pv = match sections {
        Sections::Finite(s) => pv_integral(nf, s)?,
        Sections::Infinite => pv_integral_sym_infinite(nf)?,
    };
    Ok((pv + g0, pv - g0))
}

/// The four-arctangent expression, literally.
#[allow(non_snake_case)]
pub fn F_arctan(a: f64, b: f64, c: f64) -> Result<f64> {
    let inv = Invariants::from_f64(a, b, c);
    hyperbolic(&inv)?;
    let sd = inv.d.to_f64().sqrt();
    let e = b - a;
    Ok(((e - 2.0) / sd).atan() - ((e + 2.0 - 2.0 * c) / sd).atan() + ((-e - 2.0) / sd).atan()
        - ((-e + 2.0 - 2.0 * c) / sd).atan())
}

fn d_of(a: f64, b: f64, c: f64) -> f64 {
    4.0 * (1.0 - c) - (a - b) * (a - b)
}

/// Logarithmic part `α(u)` of `log L₁⁺(u)`.
pub fn alpha_closed(u: f64, a: f64, b: f64, c: f64) -> f64 {
    let q = 1.0 - c + (a - b + 2.0 * c - 2.0) * u + (-a + b - c + 2.0) * u * u;
    c / (2.0 * (1.0 - c)) * (q / (1.0 - c)).ln()
}

/// Arctangent part `β(u)` of `log L₁⁺(u)`.
pub fn beta_closed(u: f64, a: f64, b: f64, c: f64) -> f64 {
    let sd = d_of(a, b, c).sqrt();
    let k = -((a + b) * c - 2.0 * b) / ((1.0 - c) * sd);
    let base = 2.0 * (1.0 - c) + b - a;
    k * (((base + 2.0 * (a - b + c - 2.0) * u) / sd).atan() - (base / sd).atan())
}

/// Analytic `log L₁⁺(u)`; `log L₂⁻(u)` is the same with `(a, b) ↦ (−a, −b)`.
pub fn log_l1_plus_closed(u: f64, inv: &Invariants) -> f64 {
    let (a, b, c, _) = inv.as_f64();
    alpha_closed(u, a, b, c) + beta_closed(u, a, b, c)
}

/// `∫_0^u (R(y) + k) dy / y` with `R(0) = −k`.
fn log_l(r: &RationalFn1, k: &Scalar, u: f64, name: &str) -> Result<QuadResult> {
    let shifted = r.add_constant(k);
    let num = shifted.numerator.shift_down();
    let den = shifted.denominator;
    if u > 0.0 && !den.nonvanishing_on(0.0, u) {
        return Err(AsymptoticsError::IntegrandSingularOnPath(format!("{name} on [0, {u}]")));
    }
    quad(|y| num.eval_f64(y) / den.eval_f64(y), 0.0, u, name)
}

/// The four `log L` values entering `Δ₀₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LIntegrals {
    pub log_l1_minus: f64,
    pub log_l2_minus: f64,
    pub log_l1_plus: f64,
    pub log_l2_plus: f64,
    pub errors: Vec<f64>,
}

pub fn l_integrals(nf: &NormalFormField, sections: &SectionPair) -> Result<LIntegrals> {
    sections.validate(nf)?;
    let sd = saddle_data(nf)?;
    let (lp, lm) = (&sd.lambda_plus, &sd.lambda_minus);
    let g = &sd.generic;
    let l1m = log_l(&g.r12_minus, &lm.recip(), -sections.alpha, "log L1-")?;
    let l2m = log_l(&g.r21_minus, lm, 1.0, "log L2-")?;
    let l1p = log_l(&g.r12_plus, &lp.recip(), 1.0, "log L1+")?;
    let l2p = log_l(&g.r21_plus, lp, sections.omega, "log L2+")?;
    Ok(LIntegrals {
        log_l1_minus: l1m.value,
        log_l2_minus: l2m.value,
        log_l1_plus: l1p.value,
        log_l2_plus: l2p.value,
        errors: vec![l1m.error, l2m.error, l1p.error, l2p.error],
    })
}

/// `Δ₀₀ = (−α)^{λ−1} L₂⁺(ω) / (ω^{λ−1} L₁⁻(−α)) · (L₂⁻(1)/L₁⁺(1))^λ`.
pub fn delta00_via_l(nf: &NormalFormField, sections: &SectionPair) -> Result<f64> {
    let l = l_integrals(nf, sections)?;
    Ok(assemble_delta00(nf, sections, &l))
}

fn assemble_delta00(nf: &NormalFormField, s: &SectionPair, l: &LIntegrals) -> f64 {
    let lambda = 1.0 - nf.invariants().c.to_f64();
    let log = (lambda - 1.0) * (-s.alpha).ln() + l.log_l2_plus - (lambda - 1.0) * s.omega.ln() - l.log_l1_minus
        + lambda * (l.log_l2_minus - l.log_l1_plus);
    log.exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionReport {
    pub sections: SectionPair,
    pub pv: f64,
    pub gamma0: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub delta00_closed: f64,
    pub delta00_via_l: f64,
    pub quadrature_error_estimates: Vec<f64>,
}

/// Every quantity above for one normal form and pair of sections.
pub fn transition_report(nf: &NormalFormField, sections: &SectionPair) -> Result<TransitionReport> {
    let g0 = gamma0(&nf.invariants())?;
    let (pv, pv_err) = pv_integral_with_error(nf, sections)?;
    let l = l_integrals(nf, sections)?;
    let mut errs = vec![pv_err];
    errs.extend(&l.errors);
    Ok(TransitionReport {
        sections: *sections,
        pv,
        gamma0: g0,
        gamma_plus: pv + g0,
        gamma_minus: pv - g0,
        delta00_closed: (pv + g0).exp(),
        delta00_via_l: assemble_delta00(nf, sections, &l),
        quadrature_error_estimates: errs,
    })
}
