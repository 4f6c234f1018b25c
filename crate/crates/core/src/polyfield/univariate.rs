//! Univariate polynomials and rational functions: restrictions of fields to
//! axes and to the exceptional divisor.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::scalar::{CoeffMode, Rational, Scalar};
use num_traits::{Signed, Zero};

/// Dense univariate polynomial, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly1 {
    coeffs: Vec<Scalar>,
    mode: CoeffMode,
}

impl Poly1 {
    pub fn zero() -> Self {
        Poly1 { coeffs: Vec::new(), mode: CoeffMode::Exact }
    }

    pub fn from_coeffs(coeffs: Vec<Scalar>) -> Self {
        let mode = coeffs.iter().fold(CoeffMode::Exact, |m, c| m.join(c.mode()));
        let mut p = Poly1 { coeffs, mode };
        p.normalize();
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (u32, Scalar)>>(terms: I) -> Self {
        let mut coeffs: Vec<Scalar> = Vec::new();
        let mut mode = CoeffMode::Exact;
        for (k, c) in terms {
            let k = k as usize;
            if coeffs.len() <= k {
                coeffs.resize(k + 1, Scalar::zero());
            }
            mode = mode.join(c.mode());
            coeffs[k] = &coeffs[k] + &c;
        }
        let mut p = Poly1 { coeffs, mode };
        p.normalize();
        p
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Poly1::from_coeffs(c.iter().map(|&v| Scalar::int(v)).collect())
    }

    fn normalize(&mut self) {
        if self.mode == CoeffMode::Float {
            for c in &mut self.coeffs {
                *c = c.to_float();
            }
        }
        while self.coeffs.last().is_some_and(Scalar::is_zero) {
            self.coeffs.pop();
        }
    }

    pub(crate) fn with_mode_at_least(mut self, mode: CoeffMode) -> Self {
        self.mode = self.mode.join(mode);
        self.normalize();
        self
    }

    pub fn mode(&self) -> CoeffMode {
        self.mode
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> Scalar {
        self.coeffs.get(k).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &Scalar)> {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (k as u32, c))
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        let mut acc = Scalar::zero();
        for c in self.coeffs.iter().rev() {
            acc = &acc * x + c;
        }
        if self.mode == CoeffMode::Float {
            acc.to_float()
        } else {
            acc
        }
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64())
    }

    pub fn derivative(&self) -> Self {
        Poly1::from_coeffs(
            self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c * Scalar::int(k as i64)).collect(),
        )
        .with_mode_at_least(self.mode)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Poly1::from_coeffs(self.coeffs.iter().map(|v| v * c).collect()).with_mode_at_least(self.mode)
    }

    /// `p(-x)`.
    pub fn reflect(&self) -> Self {
        Poly1::from_coeffs(
            self.coeffs.iter().enumerate().map(|(k, c)| if k % 2 == 1 { -c } else { c.clone() }).collect(),
        )
        .with_mode_at_least(self.mode)
    }

    /// Drops the constant term and divides by `x`. Callers use this after
    /// checking (exactly, or to float tolerance) that the constant vanishes.
    pub fn shift_down(&self) -> Self {
        Poly1::from_coeffs(self.coeffs.iter().skip(1).cloned().collect()).with_mode_at_least(self.mode)
    }

    /// Euclidean division; exact mode only makes sense here.
    pub fn div_rem(&self, d: &Poly1) -> (Poly1, Poly1) {
        let dd = d.degree().expect("division by zero polynomial");
        let lead = d.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Scalar::zero(); rem.len().saturating_sub(dd).max(1)];
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1 - dd;
            let t = &rem[rem.len() - 1] / &lead;
            for (i, c) in d.coeffs.iter().enumerate() {
                rem[k + i] = &rem[k + i] - &(&t * c);
            }
            quot[k] = t;
            rem.pop();
            while rem.last().is_some_and(Scalar::is_zero) {
                rem.pop();
            }
        }
        let mode = self.mode.join(d.mode);
        (
            Poly1::from_coeffs(quot).with_mode_at_least(mode),
            Poly1::from_coeffs(rem).with_mode_at_least(mode),
        )
    }

    /// Number of distinct real roots in `(a, b]` via a Sturm sequence
    /// (exact coefficients only).
    pub fn sturm_count(&self, a: &Rational, b: &Rational) -> Option<usize> {
        if self.mode != CoeffMode::Exact || self.is_zero() {
            return None;
        }
        let mut seq = vec![self.clone()];
        let d = self.derivative();
        if !d.is_zero() {
            seq.push(d);
            loop {
                let n = seq.len();
                if seq[n - 1].degree() == Some(0) {
                    break;
                }
                let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
                if r.is_zero() {
                    break;
                }
                seq.push(-r);
            }
        }
        let variations = |x: &Rational| -> usize {
            let xs = Scalar::Exact(x.clone());
            let signs: Vec<bool> = seq
                .iter()
                .filter_map(|p| {
                    let v = p.eval(&xs);
                    let r = v.as_rational().cloned().unwrap_or_else(Rational::zero);
                    (!r.is_zero()).then(|| r.is_positive())
                })
                .collect();
            signs.windows(2).filter(|w| w[0] != w[1]).count()
        };
        Some(variations(a).saturating_sub(variations(b)))
    }

    /// True when the polynomial has no real zero in `[a, b]`. Exact mode uses
    /// root isolation; float mode checks signs on a fine grid.
    pub fn nonvanishing_on(&self, a: f64, b: f64) -> bool {
        if self.is_zero() {
            return false;
        }
        if let (CoeffMode::Exact, Some(Scalar::Exact(ra)), Some(Scalar::Exact(rb))) =
            (self.mode, Scalar::exact_from_f64(a), Scalar::exact_from_f64(b))
        {
            let (ea, eb) = (Scalar::Exact(ra.clone()), Scalar::Exact(rb.clone()));
            if self.eval(&ea).is_zero() || self.eval(&eb).is_zero() {
                return false;
            }
            return self.sturm_count(&ra, &rb) == Some(0);
        }
        let n = 4096;
        let first = self.eval_f64(a);
        if first == 0.0 {
            return false;
        }
        (0..=n).all(|k| {
            let x = a + (b - a) * k as f64 / n as f64;
            let v = self.eval_f64(x);
            v != 0.0 && v.signum() == first.signum()
        })
    }
}

impl Add<&Poly1> for &Poly1 {
    type Output = Poly1;
    fn add(self, rhs: &Poly1) -> Poly1 {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly1::from_coeffs((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
            .with_mode_at_least(self.mode.join(rhs.mode))
    }
}

impl Sub<&Poly1> for &Poly1 {
    type Output = Poly1;
    fn sub(self, rhs: &Poly1) -> Poly1 {
        self + &(-rhs)
    }
}

impl Mul<&Poly1> for &Poly1 {
    type Output = Poly1;
    fn mul(self, rhs: &Poly1) -> Poly1 {
        if self.is_zero() || rhs.is_zero() {
            return Poly1::zero().with_mode_at_least(self.mode.join(rhs.mode));
        }
        let mut out = vec![Scalar::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Poly1::from_coeffs(out).with_mode_at_least(self.mode.join(rhs.mode))
    }
}

impl Neg for &Poly1 {
    type Output = Poly1;
    fn neg(self) -> Poly1 {
        Poly1 { coeffs: self.coeffs.iter().map(|c| -c).collect(), mode: self.mode }
    }
}

impl Neg for Poly1 {
    type Output = Poly1;
    fn neg(self) -> Poly1 {
        -(&self)
    }
}

impl Serialize for Poly1 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        super::Poly2::from_poly1_x(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly1 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let p = super::Poly2::deserialize(d)?;
        if p.degree_in_y().unwrap_or(0) > 0 {
            return Err(serde::de::Error::custom("univariate polynomial has a second-variable term"));
        }
        Ok(p.restrict_y0())
    }
}

/// Ratio of univariate polynomials, kept unreduced.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RationalFn1 {
    pub numerator: Poly1,
    pub denominator: Poly1,
}

impl RationalFn1 {
    pub fn new(numerator: Poly1, denominator: Poly1) -> Self {
        RationalFn1 { numerator, denominator }
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.numerator.eval_f64(x) / self.denominator.eval_f64(x)
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        self.numerator.eval(x) / self.denominator.eval(x)
    }

    /// Equality as rational functions (cross multiplication). Exact when
    /// both sides are exact; otherwise coefficientwise within `tol`.
    pub fn same_function(&self, other: &RationalFn1, tol: f64) -> bool {
        let lhs = &self.numerator * &other.denominator;
        let rhs = &other.numerator * &self.denominator;
        let diff = &lhs - &rhs;
        if diff.mode() == CoeffMode::Exact {
            return diff.is_zero();
        }
        let scale = lhs.coeffs().iter().chain(rhs.coeffs()).map(|c| c.to_f64().abs()).fold(1.0, f64::max);
        diff.coeffs().iter().all(|c| c.to_f64().abs() <= tol * scale)
    }

    /// `self + k`.
    pub fn add_constant(&self, k: &Scalar) -> Self {
        RationalFn1::new(&self.numerator + &self.denominator.scale(k), self.denominator.clone())
    }

    pub fn mode(&self) -> CoeffMode {
        self.numerator.mode().join(self.denominator.mode())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn sturm_counts_distinct_roots() {
        // (x-1)(x+2)(x-3)
        let p = &(&Poly1::from_ints(&[-1, 1]) * &Poly1::from_ints(&[2, 1])) * &Poly1::from_ints(&[-3, 1]);
        assert_eq!(p.sturm_count(&r(-5), &r(5)), Some(3));
        assert_eq!(p.sturm_count(&r(0), &r(2)), Some(1));
        assert_eq!(p.sturm_count(&r(4), &r(10)), Some(0));
        // double root counted once
        let sq = &Poly1::from_ints(&[-1, 1]) * &Poly1::from_ints(&[-1, 1]);
        assert_eq!(sq.sturm_count(&r(0), &r(2)), Some(1));
    }

    #[test]
    fn nonvanishing_checks() {
        let f = Poly1::from_ints(&[1, -1]); // 1 - x
        assert!(f.nonvanishing_on(-1.0, 0.5));
        assert!(!f.nonvanishing_on(-1.0, 1.0));
        assert!(!f.nonvanishing_on(0.5, 2.0));
        let g = Poly1::from_coeffs(vec![Scalar::float(1.0), Scalar::float(0.0), Scalar::float(1.0 / 27.0)]);
        assert!(g.nonvanishing_on(-100.0, 100.0));
    }

    #[test]
    fn div_rem_reconstructs() {
        let a = Poly1::from_ints(&[3, 0, -2, 5]);
        let d = Poly1::from_ints(&[1, 1]);
        let (q, rm) = a.div_rem(&d);
        assert_eq!(&(&q * &d) + &rm, a);
        assert!(rm.degree().unwrap_or(0) < 1);
    }

    #[test]
    fn rational_function_equality() {
        let f = RationalFn1::new(Poly1::from_ints(&[1, 1]), Poly1::from_ints(&[2]));
        let g = RationalFn1::new(Poly1::from_ints(&[3, 3]), Poly1::from_ints(&[6]));
        assert!(f.same_function(&g, 0.0));
        let h = RationalFn1::new(Poly1::from_ints(&[1, 2]), Poly1::from_ints(&[2]));
        assert!(!f.same_function(&h, 0.0));
    }
}
