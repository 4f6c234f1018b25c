use super::poly2::Poly2;
use super::scalar::{CoeffMode, Scalar};
use super::PolyError;

/// Affine change of coordinates `(x, y) = M (X, Y) + t`.
///
/// Entries may be floats (irrational rescalings such as `1/√(6β)`); the
/// fields it produces then carry the float coefficient mode.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap2 {
    pub linear: [[Scalar; 2]; 2],
    pub translation: [Scalar; 2],
}

impl AffineMap2 {
    pub fn new(linear: [[Scalar; 2]; 2], translation: [Scalar; 2]) -> Self {
        AffineMap2 { linear, translation }
    }

    pub fn identity() -> Self {
        AffineMap2::diagonal(Scalar::one(), Scalar::one())
    }

    pub fn diagonal(sx: Scalar, sy: Scalar) -> Self {
        AffineMap2::new([[sx, Scalar::zero()], [Scalar::zero(), sy]], [Scalar::zero(), Scalar::zero()])
    }

    pub fn translation(tx: Scalar, ty: Scalar) -> Self {
        AffineMap2 { translation: [tx, ty], ..AffineMap2::identity() }
    }

    pub fn mode(&self) -> CoeffMode {
        self.linear
            .iter()
            .flatten()
            .chain(self.translation.iter())
            .fold(CoeffMode::Exact, |m, c| m.join(c.mode()))
    }

    pub fn determinant(&self) -> Scalar {
        let m = &self.linear;
        &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0]
    }

    pub(crate) fn inverse_linear(&self) -> Result<[[Scalar; 2]; 2], PolyError> {
        let det = self.determinant();
        if det.is_zero() || !det.to_f64().is_finite() {
            return Err(PolyError::SingularMap);
        }
        let m = &self.linear;
        Ok([
            [&m[1][1] / &det, -(&m[0][1] / &det)],
            [-(&m[1][0] / &det), &m[0][0] / &det],
        ])
    }

    /// Inverse affine map.
    pub fn inverse(&self) -> Result<AffineMap2, PolyError> {
        let inv = self.inverse_linear()?;
        let t = &self.translation;
        let tx = -(&inv[0][0] * &t[0] + &inv[0][1] * &t[1]);
        let ty = -(&inv[1][0] * &t[0] + &inv[1][1] * &t[1]);
        Ok(AffineMap2::new(inv, [tx, ty]))
    }

    /// The map written as polynomial substitutions in `(X, Y)`.
    pub fn as_substitution(&self) -> (Poly2, Poly2) {
        let row = |k: usize| {
            &(&Poly2::x().scale(&self.linear[k][0]) + &Poly2::y().scale(&self.linear[k][1]))
                + &Poly2::constant(self.translation[k].clone())
        };
        (row(0), row(1))
    }
}
