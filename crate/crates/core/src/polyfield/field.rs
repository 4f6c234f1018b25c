use serde::{Deserialize, Serialize};

use super::affine::AffineMap2;
use super::poly2::Poly2;
use super::scalar::{CoeffMode, Scalar};
use super::PolyError;

/// Planar polynomial vector field `p ∂x + q ∂y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarField {
    pub p: Poly2,
    pub q: Poly2,
}

/// Which component of a field an error refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    P,
    Q,
}

impl std::fmt::Display for Component {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Component::P => write!(f, "p"),
            Component::Q => write!(f, "q"),
        }
    }
}

/// `c · u^i v^j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: Scalar,
    pub exponents: (u32, u32),
}

impl Monomial {
    pub fn to_poly(&self) -> Poly2 {
        Poly2::monomial(self.exponents.0, self.exponents.1, self.coeff.clone())
    }
}

/// Pullback of a field before clearing the Jacobian determinant: the true
/// components are `numerator / denominator`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalField {
    pub numerator: PlanarField,
    pub denominator: Monomial,
}

impl RationalField {
    /// Divides the shared denominator out when it divides both components.
    pub fn into_field(self) -> Result<PlanarField, PolyError> {
        self.numerator.divide_exact(&self.denominator.to_poly(), 1)
    }

    /// Divides by `denominator · divisor^power` in one step.
    pub fn divide(self, divisor: &Poly2, power: u32) -> Result<PlanarField, PolyError> {
        let total = &self.denominator.to_poly() * &divisor.pow(power);
        self.numerator.divide_exact(&total, 1)
    }
}

impl PlanarField {
    pub fn new(p: Poly2, q: Poly2) -> Self {
        PlanarField { p, q }
    }

    pub fn mode(&self) -> CoeffMode {
        self.p.mode().join(self.q.mode())
    }

    pub fn to_float(&self) -> Self {
        PlanarField::new(self.p.to_float(), self.q.to_float())
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> [f64; 2] {
        [self.p.eval_f64(x, y), self.q.eval_f64(x, y)]
    }

    /// Swaps the roles of the two coordinates (and components).
    pub fn swap_xy(&self) -> Self {
        PlanarField::new(self.q.swap_vars(), self.p.swap_vars())
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        PlanarField::new(self.p.scale(c), self.q.scale(c))
    }

    /// Pullback through the polynomial substitution `(x, y) = (sub_x, sub_y)`
    /// of new coordinates `(u, v)`. Solves `(ẋ, ẏ) = J (u̇, v̇)` with the
    /// adjugate of `J`; the determinant must be a monomial times a unit.
    pub fn substitute(&self, sub_x: &Poly2, sub_y: &Poly2) -> Result<RationalField, PolyError> {
        let j11 = sub_x.derivative_x();
        let j12 = sub_x.derivative_y();
        let j21 = sub_y.derivative_x();
        let j22 = sub_y.derivative_y();
        let det = &(&j11 * &j22) - &(&j12 * &j21);
        let mut it = det.terms();
        let denominator = match (it.next(), it.next()) {
            (Some((&e, c)), None) => Monomial { coeff: c.clone(), exponents: e },
            _ => return Err(PolyError::NonMonomialDenominator { determinant: det.to_string() }),
        };
        let xdot = self.p.compose(sub_x, sub_y);
        let ydot = self.q.compose(sub_x, sub_y);
        let udot = &(&j22 * &xdot) - &(&j12 * &ydot);
        let vdot = &(&j11 * &ydot) - &(&j21 * &xdot);
        Ok(RationalField { numerator: PlanarField::new(udot, vdot), denominator })
    }

    /// Componentwise exact division by `divisor^power`.
    pub fn divide_exact(&self, divisor: &Poly2, power: u32) -> Result<PlanarField, PolyError> {
        let d = divisor.pow(power);
        let p = self
            .p
            .div_exact(&d)
            .map_err(|rem| PolyError::NotDivisible { component: Component::P, remainder: rem.to_string() })?;
        let q = self
            .q
            .div_exact(&d)
            .map_err(|rem| PolyError::NotDivisible { component: Component::Q, remainder: rem.to_string() })?;
        Ok(PlanarField::new(p, q))
    }

    /// Conjugates the field by the affine change of coordinates
    /// `(x, y) = M (X, Y) + t`.
    pub fn pullback_affine(&self, map: &AffineMap2) -> Result<PlanarField, PolyError> {
        let inv = map.inverse_linear()?;
        let (sx, sy) = map.as_substitution();
        let xdot = self.p.compose(&sx, &sy);
        let ydot = self.q.compose(&sx, &sy);
        let p = &xdot.scale(&inv[0][0]) + &ydot.scale(&inv[0][1]);
        let q = &xdot.scale(&inv[1][0]) + &ydot.scale(&inv[1][1]);
        Ok(PlanarField::new(p, q))
    }

    /// Float-compiled copy for repeated evaluation inside integrators.
    pub fn compile(&self) -> CompiledField {
        CompiledField::new(self)
    }
}

/// Dense float evaluation tables for a polynomial field.
#[derive(Clone, Debug)]
pub struct CompiledField {
    p: Vec<(usize, usize, f64)>,
    q: Vec<(usize, usize, f64)>,
    max_x: usize,
    max_y: usize,
}

impl CompiledField {
    fn new(field: &PlanarField) -> Self {
        let grab = |poly: &Poly2| -> Vec<(usize, usize, f64)> {
            poly.terms().map(|(&(i, j), c)| (i as usize, j as usize, c.to_f64())).collect()
        };
        let p = grab(&field.p);
        let q = grab(&field.q);
        let max_x = p.iter().chain(&q).map(|t| t.0).max().unwrap_or(0);
        let max_y = p.iter().chain(&q).map(|t| t.1).max().unwrap_or(0);
        CompiledField { p, q, max_x, max_y }
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        let mut xp = [1.0f64; 16];
        let mut yp = [1.0f64; 16];
        if self.max_x < 16 && self.max_y < 16 {
            for k in 1..=self.max_x {
                xp[k] = xp[k - 1] * x;
            }
            for k in 1..=self.max_y {
                yp[k] = yp[k - 1] * y;
            }
            let sum = |terms: &[(usize, usize, f64)]| terms.iter().map(|&(i, j, c)| c * xp[i] * yp[j]).sum();
            [sum(&self.p), sum(&self.q)]
        } else {
            let sum = |terms: &[(usize, usize, f64)]| {
                terms.iter().map(|&(i, j, c)| c * x.powi(i as i32) * y.powi(j as i32)).sum()
            };
            [sum(&self.p), sum(&self.q)]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Poly2 {
        Poly2::x()
    }
    fn y() -> Poly2 {
        Poly2::y()
    }

    #[test]
    fn identity_substitution_is_noop() {
        let f = PlanarField::new((x() + y()).pow(2), y().pow(4));
        let g = f.substitute(&x(), &y()).unwrap().into_field().unwrap();
        assert_eq!(g, f);
    }

    #[test]
    fn x4_chart_v_uv() {
        // (x,y) = (v, uv) in coordinates (u, v), then divide by v.
        let x4 = PlanarField::new((x() + y()).pow(2), y().pow(4));
        let pulled = x4.substitute(&y(), &(&x() * &y())).unwrap();
        let y0 = pulled.divide(&y(), 1).unwrap();
        let u1 = x() + Poly2::one();
        let expected_p = &(&(-(&u1 * &u1)) + &(&x().pow(3) * &y().pow(2))) * &x();
        let expected_q = &(&u1 * &u1) * &y();
        assert_eq!(y0.p, expected_p);
        assert_eq!(y0.q, expected_q);
    }

    #[test]
    fn radial_field_under_directional_chart() {
        let radial = PlanarField::new(x(), y());
        let pulled = radial.substitute(&x(), &(&x() * &y())).unwrap();
        let g = pulled.into_field().unwrap().divide_exact(&x(), 0).unwrap();
        assert_eq!(g.p, x());
        assert!(g.q.is_zero());
    }

    #[test]
    fn non_monomial_jacobian_rejected() {
        let f = PlanarField::new(x(), y());
        let err = f.substitute(&(x() + y().pow(2)), &(y() + x().pow(2))).unwrap_err();
        assert!(matches!(err, PolyError::NonMonomialDenominator { .. }));
    }

    #[test]
    fn divide_exact_examples() {
        let f = PlanarField::new(&x().pow(2) * &y(), x().pow(2));
        let g = f.divide_exact(&x(), 2).unwrap();
        assert_eq!(g, PlanarField::new(y(), Poly2::one()));
        let err = PlanarField::new(x(), Poly2::zero()).divide_exact(&y(), 1).unwrap_err();
        assert!(matches!(err, PolyError::NotDivisible { component: Component::P, .. }));
    }

    #[test]
    fn affine_examples() {
        let f = PlanarField::new(x().pow(2), Poly2::zero());
        assert_eq!(f.pullback_affine(&AffineMap2::identity()).unwrap(), f);
        let scaled = f.pullback_affine(&AffineMap2::diagonal(Scalar::int(2), Scalar::int(2))).unwrap();
        assert_eq!(scaled, PlanarField::new(x().pow(2).scale(&Scalar::int(2)), Poly2::zero()));
        let singular = AffineMap2::diagonal(Scalar::int(0), Scalar::int(1));
        assert!(matches!(f.pullback_affine(&singular), Err(PolyError::SingularMap)));
    }

    #[test]
    fn compiled_matches_exact_evaluation() {
        let f = PlanarField::new(
            Poly2::from_ratios(&[(4, 0, 1, 27), (1, 1, 1, 1), (0, 2, 1, 1)]),
            Poly2::from_ratios(&[(1, 1, 1, 3), (0, 2, -1, 1), (3, 1, -1, 27)]),
        );
        let c = f.compile();
        let (xv, yv) = (0.7, -0.3);
        let a = c.eval(xv, yv);
        let b = f.eval_f64(xv, yv);
        assert!((a[0] - b[0]).abs() < 1e-15 && (a[1] - b[1]).abs() < 1e-15);
    }
}
