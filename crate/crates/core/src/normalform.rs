//! The fake-saddle normal form
//!
//! ```text
//! ẋ = x²·f1(x,y) + a·xy + y²·f2(x,y)
//! ẏ = (x·g1(x,y) + y·g2(y))·y
//! ```
//!
//! with `f1(0,0) = f2(0,0) = 1`, its invariants `(a, b, c, d)` and the
//! classification of the origin.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::polyfield::{CoeffMode, PlanarField, Poly2, Scalar};

/// Float-mode tolerance used for the `f(0,0) = 1` normalization check and for
/// the dead zone around `d = 0`.
pub const FLOAT_ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NormalFormError {
    #[error("field has a nonzero linear or constant term in ẋ ({0}); the origin is not of the form x²f1+axy+y²f2")]
    LowOrderTerm(String),
    #[error("ẏ is not divisible by y")]
    QNotDivisibleByY,
    #[error("f1(0,0) = {0}, expected 1")]
    F1NotNormalized(String),
    #[error("f2(0,0) = {0}, expected 1")]
    F2NotNormalized(String),
    #[error("g2 must depend on y only")]
    G2DependsOnX,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormField {
    pub f1: Poly2,
    pub f2: Poly2,
    pub g1: Poly2,
    /// Polynomial in the second variable only.
    pub g2: Poly2,
    pub a: Scalar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    pub a: Scalar,
    pub b: Scalar,
    pub c: Scalar,
    pub d: Scalar,
}

/// A singular point of the blown-up field on the exceptional divisor,
/// besides the origin of the directional chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisorPoint {
    /// Coordinate `v` on the divisor `u = 0` of the chart `(x,y) = (u, uv)`.
    pub v: f64,
    /// Exact location when it is rational.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_exact: Option<Scalar>,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    HyperbolicFakeSaddle { ratio: f64 },
    SemiHyperbolicFakeSaddle,
    NotFakeSaddle { extra_divisor_singularities: Vec<DivisorPoint> },
    BoundaryIndeterminate,
}

impl Verdict {
    pub fn is_fake_saddle(&self) -> bool {
        matches!(self, Verdict::HyperbolicFakeSaddle { .. } | Verdict::SemiHyperbolicFakeSaddle)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::HyperbolicFakeSaddle { .. } => "HyperbolicFakeSaddle",
            Verdict::SemiHyperbolicFakeSaddle => "SemiHyperbolicFakeSaddle",
            Verdict::NotFakeSaddle { .. } => "NotFakeSaddle",
            Verdict::BoundaryIndeterminate => "BoundaryIndeterminate",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    #[serde(flatten)]
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl NormalFormField {
    /// Decomposes a raw field. `a` is the `xy` coefficient of `p`, monomials
    /// `x^i y^j` with `i ≥ 2` go to `f1`, the remaining ones (all divisible by
    /// `y²`) to `f2`; in `q/y`, monomials with a factor `x` go to `g1` and the
    /// pure powers of `y` to `g2`.
    pub fn validate_and_build(raw: &PlanarField) -> Result<NormalFormField, NormalFormError> {
        let mut f1 = Vec::new();
        let mut f2 = Vec::new();
        let mut a = Scalar::zero();
        for (&(i, j), c) in raw.p.terms() {
            match (i, j) {
                (1, 1) => a = c.clone(),
                (i, j) if i >= 2 => f1.push(((i - 2, j), c.clone())),
                (i, j) if j >= 2 => f2.push(((i, j - 2), c.clone())),
                _ => return Err(NormalFormError::LowOrderTerm(format!("{c}·x^{i}y^{j}"))),
            }
        }
        let mode = raw.mode();
        let lift = |v: Vec<_>| {
            let p = Poly2::from_terms(v);
            if mode == CoeffMode::Float {
                p.to_float()
            } else {
                p
            }
        };
        let (f1, f2) = (lift(f1), lift(f2));
        let r = raw.q.div_exact(&Poly2::y()).map_err(|_| NormalFormError::QNotDivisibleByY)?;
        let mut g1 = Vec::new();
        let mut g2 = Vec::new();
        for (&(i, j), c) in r.terms() {
            if i >= 1 {
                g1.push(((i - 1, j), c.clone()));
            } else if j >= 1 {
                g2.push(((0, j - 1), c.clone()));
            } else {
                return Err(NormalFormError::LowOrderTerm(format!("{c}·y in ẏ")));
            }
        }
        let (g1, g2) = (lift(g1), lift(g2));
        let a = if mode == CoeffMode::Float { a.to_float() } else { a };
        let nf = NormalFormField { f1, f2, g1, g2, a };
        nf.check_normalization()?;
        Ok(nf)
    }

    fn check_normalization(&self) -> Result<(), NormalFormError> {
        let one = Scalar::one();
        let f10 = self.f1.coeff(0, 0);
        if !f10.approx_eq(&one, FLOAT_ZERO_TOL) {
            return Err(NormalFormError::F1NotNormalized(f10.to_string()));
        }
        let f20 = self.f2.coeff(0, 0);
        if !f20.approx_eq(&one, FLOAT_ZERO_TOL) {
            return Err(NormalFormError::F2NotNormalized(f20.to_string()));
        }
        if self.g2.degree_in_x().unwrap_or(0) > 0 {
            return Err(NormalFormError::G2DependsOnX);
        }
        Ok(())
    }

    /// Builds from parts, checking the normalization.
    pub fn new(f1: Poly2, f2: Poly2, g1: Poly2, g2: Poly2, a: Scalar) -> Result<Self, NormalFormError> {
        let nf = NormalFormField { f1, f2, g1, g2, a };
        nf.check_normalization()?;
        Ok(nf)
    }

    /// Homogeneous quadratic member: `f1 = f2 = 1`, `g1 = c`, `g2 = b`.
    pub fn quadratic(a: Scalar, b: Scalar, c: Scalar) -> Self {
        NormalFormField {
            f1: Poly2::one(),
            f2: Poly2::one(),
            g1: Poly2::constant(c),
            g2: Poly2::constant(b),
            a,
        }
    }

    pub fn mode(&self) -> CoeffMode {
        [&self.f1, &self.f2, &self.g1, &self.g2]
            .iter()
            .fold(self.a.mode(), |m, p| m.join(p.mode()))
    }

    /// The planar field this normal form describes.
    pub fn to_field(&self) -> PlanarField {
        let (x, y) = (Poly2::x(), Poly2::y());
        let p = &(&self.f1.shift(2, 0) + &Poly2::monomial(1, 1, self.a.clone())) + &self.f2.shift(0, 2);
        let q = &(&(&x * &self.g1) + &(&y * &self.g2)) * &y;
        PlanarField::new(p, q)
    }

    pub fn invariants(&self) -> Invariants {
        let b = self.g2.coeff(0, 0);
        let c = self.g1.coeff(0, 0);
        Invariants::new(self.a.clone(), b, c)
    }

    /// Image under `(x, y) ↦ (x, −y)`: invariants `(a, b, c) ↦ (−a, −b, c)`.
    pub fn mirror(&self) -> NormalFormField {
        let flip = |p: &Poly2| p.compose(&Poly2::x(), &-Poly2::y());
        NormalFormField {
            f1: flip(&self.f1),
            f2: flip(&self.f2),
            g1: flip(&self.g1),
            g2: -flip(&self.g2),
            a: -self.a.clone(),
        }
    }
}

impl Invariants {
    pub fn new(a: Scalar, b: Scalar, c: Scalar) -> Self {
        let e = &a - &b;
        let d = Scalar::int(4) * (Scalar::one() - &c) - &e * &e;
        Invariants { a, b, c, d }
    }

    pub fn from_f64(a: f64, b: f64, c: f64) -> Self {
        Invariants::new(Scalar::float(a), Scalar::float(b), Scalar::float(c))
    }

    pub fn mode(&self) -> CoeffMode {
        self.a.mode().join(self.b.mode()).join(self.c.mode())
    }

    /// `(−a, −b, c)`.
    pub fn mirrored(&self) -> Invariants {
        Invariants::new(-self.a.clone(), -self.b.clone(), self.c.clone())
    }

    pub fn as_f64(&self) -> (f64, f64, f64, f64) {
        (self.a.to_f64(), self.b.to_f64(), self.c.to_f64(), self.d.to_f64())
    }
}

/// Classification of the origin from the invariants alone.
pub fn classify(inv: &Invariants) -> Classification {
    let mut warnings = Vec::new();
    let (d_sign, d_near) = inv.d.sign(FLOAT_ZERO_TOL);
    if d_near {
        warnings.push(format!("BoundaryNearZero: |d| = {:e} treated as d = 0", inv.d.to_f64().abs()));
    }
    let e = &inv.b - &inv.a;
    let verdict = match d_sign {
        Ordering::Greater => {
            let ratio = (Scalar::one() - &inv.c).to_f64();
            Verdict::HyperbolicFakeSaddle { ratio }
        }
        Ordering::Less => {
            // Q(0,v) = -v² + (b-a)v + c-1 has two real roots (b-a ± √(-d))/2.
            let s = (-inv.d.clone()).sqrt();
            let half = Scalar::ratio(1, 2);
            let r1 = (&e - &s) * &half;
            let r2 = (&e + &s) * &half;
            let pt = |r: Scalar| DivisorPoint {
                v: r.to_f64(),
                v_exact: r.is_exact().then_some(r.clone()),
                multiplicity: 1,
            };
            Verdict::NotFakeSaddle { extra_divisor_singularities: vec![pt(r1), pt(r2)] }
        }
        Ordering::Equal => {
            let c_is_one = inv.c.approx_eq(&Scalar::one(), FLOAT_ZERO_TOL);
            let a_eq_b = inv.a.approx_eq(&inv.b, FLOAT_ZERO_TOL);
            let diff_sq = &inv.a * &inv.a - &inv.b * &inv.b;
            if c_is_one && a_eq_b {
                Verdict::SemiHyperbolicFakeSaddle
            } else if diff_sq.approx_eq(&Scalar::int(4), FLOAT_ZERO_TOL) {
                Verdict::BoundaryIndeterminate
            } else {
                let r = e * Scalar::ratio(1, 2);
                Verdict::NotFakeSaddle {
                    extra_divisor_singularities: vec![DivisorPoint {
                        v: r.to_f64(),
                        v_exact: r.is_exact().then_some(r.clone()),
                        multiplicity: 2,
                    }],
                }
            }
        }
    };
    Classification { verdict, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Scalar {
        Scalar::int(n)
    }

    #[test]
    fn figure3_field_decomposes() {
        let (x, y) = (Poly2::x(), Poly2::y());
        let p = &(&x.pow(2) + &y.pow(2)) + &(&x * &y);
        let qq = -(&(&x + &y) * &y);
        let nf = NormalFormField::validate_and_build(&PlanarField::new(p, qq)).unwrap();
        assert_eq!(nf.a, q(1));
        assert_eq!(nf.f1, Poly2::one());
        assert_eq!(nf.f2, Poly2::one());
        assert_eq!(nf.g1, Poly2::constant(q(-1)));
        assert_eq!(nf.g2, Poly2::constant(q(-1)));
        let inv = nf.invariants();
        assert_eq!((inv.b.clone(), inv.c.clone(), inv.d.clone()), (q(-1), q(-1), q(4)));
    }

    #[test]
    fn missing_y2_term_is_rejected() {
        let f = PlanarField::new(Poly2::x().pow(2), Poly2::zero());
        assert!(matches!(NormalFormField::validate_and_build(&f), Err(NormalFormError::F2NotNormalized(_))));
    }

    #[test]
    fn q_not_divisible_by_y_is_rejected() {
        let f = PlanarField::new(&Poly2::x().pow(2) + &Poly2::y().pow(2), Poly2::x().pow(2));
        assert_eq!(NormalFormField::validate_and_build(&f), Err(NormalFormError::QNotDivisibleByY));
    }

    #[test]
    fn linear_term_is_rejected() {
        let f = PlanarField::new(&Poly2::x() + &Poly2::y().pow(2), Poly2::zero());
        assert!(matches!(NormalFormField::validate_and_build(&f), Err(NormalFormError::LowOrderTerm(_))));
    }

    #[test]
    fn x_y_power_terms_go_to_f2() {
        // x y^3 ends up in f2 as x y.
        let (x, y) = (Poly2::x(), Poly2::y());
        let p = &(&(&x.pow(2) + &y.pow(2)) + &(&x * &y.pow(3))) + &x.pow(3);
        let nf = NormalFormField::validate_and_build(&PlanarField::new(p.clone(), Poly2::zero())).unwrap();
        assert_eq!(nf.f2, &Poly2::one() + &(&x * &y));
        assert_eq!(nf.f1, &Poly2::one() + &x);
        assert_eq!(nf.to_field().p, p);
    }

    #[test]
    fn invariants_examples() {
        assert_eq!(Invariants::new(q(1), q(-1), q(-1)).d, q(4));
        assert_eq!(Invariants::new(q(0), q(0), q(0)).d, q(4));
    }

    #[test]
    fn classify_examples() {
        let c = classify(&Invariants::new(q(1), q(-1), q(-1)));
        assert_eq!(c.verdict, Verdict::HyperbolicFakeSaddle { ratio: 2.0 });
        let c = classify(&Invariants::new(q(2), q(0), q(0)));
        assert_eq!(c.verdict, Verdict::BoundaryIndeterminate);
        let c = classify(&Invariants::new(q(0), q(0), q(2)));
        match c.verdict {
            Verdict::NotFakeSaddle { extra_divisor_singularities } => {
                let mut v: Vec<f64> = extra_divisor_singularities.iter().map(|p| p.v).collect();
                v.sort_by(f64::total_cmp);
                assert_eq!(v, vec![-1.0, 1.0]);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(classify(&Invariants::new(q(0), q(0), q(1))).verdict, Verdict::SemiHyperbolicFakeSaddle);
        // d = 0 off both special strata: one double point at (b-a)/2.
        let c = classify(&Invariants::new(q(0), q(2), q(0)));
        match c.verdict {
            Verdict::NotFakeSaddle { extra_divisor_singularities } => {
                assert_eq!(extra_divisor_singularities.len(), 1);
                assert_eq!(extra_divisor_singularities[0].v_exact, Some(q(1)));
                assert_eq!(extra_divisor_singularities[0].multiplicity, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn float_boundary_warns() {
        let inv = Invariants::from_f64(0.0, 0.0, 1.0 + 1e-14);
        let c = classify(&inv);
        assert!(!c.warnings.is_empty());
        assert_eq!(c.verdict, Verdict::SemiHyperbolicFakeSaddle);
    }

    #[test]
    fn mirror_flips_a_and_b() {
        let nf = NormalFormField::new(
            &Poly2::one() + &Poly2::y(),
            Poly2::one(),
            &Poly2::constant(q(3)) + &Poly2::y(),
            &Poly2::constant(q(2)) + &Poly2::y().pow(2),
            q(5),
        )
        .unwrap();
        let m = nf.mirror();
        let (i0, i1) = (nf.invariants(), m.invariants());
        assert_eq!(i1.a, -i0.a.clone());
        assert_eq!(i1.b, -i0.b.clone());
        assert_eq!(i1.c, i0.c);
        // the mirrored field is the pullback of the original under y -> -y
        let flipped = nf.to_field().pullback_affine(&crate::polyfield::AffineMap2::diagonal(q(1), q(-1))).unwrap();
        assert_eq!(m.to_field(), flipped);
    }

    #[test]
    fn json_round_trip() {
        let nf = NormalFormField::quadratic(q(1), q(-1), Scalar::ratio(-1, 3));
        let s = serde_json::to_string(&nf).unwrap();
        let back: NormalFormField = serde_json::from_str(&s).unwrap();
        assert_eq!(back, nf);
        let c = classify(&nf.invariants());
        let js = serde_json::to_value(&c).unwrap();
        assert_eq!(js["verdict"], "HyperbolicFakeSaddle");
    }
}
