use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::scalar::{scalar_from_json, CoeffMode, Scalar};
use super::univariate::Poly1;

/// Exponent pair `(i, j)` of the monomial `x^i y^j`.
pub type Exponent = (u32, u32);

/// Relative size below which float-mode coefficients are treated as
/// cancellation noise during exact division.
const FLOAT_PRUNE: f64 = 1e-12;

/// Sparse bivariate polynomial. No stored coefficient is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly2 {
    terms: BTreeMap<Exponent, Scalar>,
    mode: CoeffMode,
}

impl Default for Poly2 {
    fn default() -> Self {
        Poly2::zero()
    }
}

impl Poly2 {
    pub fn zero() -> Self {
        Poly2 { terms: BTreeMap::new(), mode: CoeffMode::Exact }
    }

    pub fn constant(c: Scalar) -> Self {
        Poly2::monomial(0, 0, c)
    }

    pub fn one() -> Self {
        Poly2::constant(Scalar::one())
    }

    pub fn monomial(i: u32, j: u32, c: Scalar) -> Self {
        Poly2::from_terms([((i, j), c)])
    }

    /// The first variable (`x`, or `u` in chart coordinates).
    pub fn x() -> Self {
        Poly2::monomial(1, 0, Scalar::one())
    }

    /// The second variable.
    pub fn y() -> Self {
        Poly2::monomial(0, 1, Scalar::one())
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs; repeated
    /// exponents are summed and zero results dropped.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (Exponent, Scalar)>,
    {
        let mut p = Poly2::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    /// Convenience for tests and builders: integer-ratio coefficients.
    pub fn from_ratios(terms: &[(u32, u32, i64, i64)]) -> Self {
        Poly2::from_terms(terms.iter().map(|&(i, j, n, d)| ((i, j), Scalar::ratio(n, d))))
    }

    fn add_term(&mut self, e: Exponent, c: Scalar) {
        if c.mode() == CoeffMode::Float && self.mode == CoeffMode::Exact {
            self.promote();
        }
        let c = if self.mode == CoeffMode::Float { c.to_float() } else { c };
        let entry = self.terms.remove(&e);
        let sum = match entry {
            Some(old) => old + c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(e, sum);
        }
    }

    fn promote(&mut self) {
        self.mode = CoeffMode::Float;
        for c in self.terms.values_mut() {
            *c = c.to_float();
        }
    }

    pub fn mode(&self) -> CoeffMode {
        self.mode
    }

    pub fn to_float(&self) -> Self {
        let mut p = self.clone();
        p.promote();
        p.terms.retain(|_, c| !c.is_zero());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, i: u32, j: u32) -> Scalar {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Total degree; `None` stands for the zero polynomial's −∞.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| i + j).max()
    }

    pub fn degree_in_x(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, _)| i).max()
    }

    pub fn degree_in_y(&self) -> Option<u32> {
        self.terms.keys().map(|&(_, j)| j).max()
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Poly2::from_terms(self.terms.iter().map(|(&e, v)| (e, v * c)))
            .with_mode_at_least(self.mode.join(c.mode()))
    }

    fn with_mode_at_least(mut self, mode: CoeffMode) -> Self {
        if mode == CoeffMode::Float && self.mode == CoeffMode::Exact {
            self.promote();
        }
        self
    }

    /// Multiplies by `x^i y^j`.
    pub fn shift(&self, i: u32, j: u32) -> Self {
        Poly2 {
            terms: self.terms.iter().map(|(&(a, b), c)| ((a + i, b + j), c.clone())).collect(),
            mode: self.mode,
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Poly2::one().with_mode_at_least(self.mode);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Exact evaluation on exact inputs; float otherwise.
    pub fn eval(&self, x: &Scalar, y: &Scalar) -> Scalar {
        let dx = self.degree_in_x().unwrap_or(0) as usize;
        let dy = self.degree_in_y().unwrap_or(0) as usize;
        let xp = powers(x, dx);
        let yp = powers(y, dy);
        let mut acc = if self.mode == CoeffMode::Float { Scalar::float(0.0) } else { Scalar::zero() };
        for (&(i, j), c) in &self.terms {
            acc = acc + c * &xp[i as usize] * &yp[j as usize];
        }
        acc
    }

    /// Horner evaluation in `x` of each row of fixed `y` power.
    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        let mut total = 0.0;
        let mut ypow = 1.0;
        let mut cur_j = 0u32;
        let mut rows: BTreeMap<u32, Vec<(u32, f64)>> = BTreeMap::new();
        for (&(i, j), c) in &self.terms {
            rows.entry(j).or_default().push((i, c.to_f64()));
        }
        for (j, row) in rows {
            while cur_j < j {
                ypow *= y;
                cur_j += 1;
            }
            total += ypow * horner_sparse(&row, x);
        }
        total
    }

    pub fn derivative_x(&self) -> Self {
        Poly2::from_terms(
            self.terms
                .iter()
                .filter(|((i, _), _)| *i > 0)
                .map(|(&(i, j), c)| ((i - 1, j), c * Scalar::int(i as i64))),
        )
        .with_mode_at_least(self.mode)
    }

    pub fn derivative_y(&self) -> Self {
        Poly2::from_terms(
            self.terms
                .iter()
                .filter(|((_, j), _)| *j > 0)
                .map(|(&(i, j), c)| ((i, j - 1), c * Scalar::int(j as i64))),
        )
        .with_mode_at_least(self.mode)
    }

    /// Substitutes `x := sub_x`, `y := sub_y`.
    pub fn compose(&self, sub_x: &Poly2, sub_y: &Poly2) -> Self {
        let dx = self.degree_in_x().unwrap_or(0) as usize;
        let dy = self.degree_in_y().unwrap_or(0) as usize;
        let xp = poly_powers(sub_x, dx);
        let yp = poly_powers(sub_y, dy);
        let mut out = Poly2::zero().with_mode_at_least(self.mode);
        for (&(i, j), c) in &self.terms {
            let t = (&xp[i as usize] * &yp[j as usize]).scale(c);
            out = &out + &t;
        }
        out
    }

    /// Exchanges the two variables.
    pub fn swap_vars(&self) -> Self {
        Poly2 {
            terms: self.terms.iter().map(|(&(i, j), c)| ((j, i), c.clone())).collect(),
            mode: self.mode,
        }
    }

    /// Restriction to `y = 0` as a univariate polynomial in `x`.
    pub fn restrict_y0(&self) -> Poly1 {
        Poly1::from_terms(self.terms.iter().filter(|((_, j), _)| *j == 0).map(|(&(i, _), c)| (i, c.clone())))
            .with_mode_at_least(self.mode)
    }

    /// Restriction to `x = 0` as a univariate polynomial in `y`.
    pub fn restrict_x0(&self) -> Poly1 {
        Poly1::from_terms(self.terms.iter().filter(|((i, _), _)| *i == 0).map(|(&(_, j), c)| (j, c.clone())))
            .with_mode_at_least(self.mode)
    }

    /// Embeds a univariate polynomial as a polynomial in the first variable.
    pub fn from_poly1_x(p: &Poly1) -> Self {
        Poly2::from_terms(p.terms().map(|(i, c)| ((i, 0), c.clone()))).with_mode_at_least(p.mode())
    }

    /// Embeds a univariate polynomial as a polynomial in the second variable.
    pub fn from_poly1_y(p: &Poly1) -> Self {
        Poly2::from_terms(p.terms().map(|(j, c)| ((0, j), c.clone()))).with_mode_at_least(p.mode())
    }

    fn leading(&self) -> Option<(Exponent, &Scalar)> {
        // Lexicographic order on (i, j): the BTreeMap's last key.
        self.terms.iter().next_back().map(|(&e, c)| (e, c))
    }

    fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    /// Exact quotient `self / divisor`, or the remainder left when the
    /// division does not terminate cleanly.
    pub fn div_exact(&self, divisor: &Poly2) -> Result<Poly2, Poly2> {
        let (lead_e, lead_c) = match divisor.leading() {
            Some((e, c)) => (e, c.clone()),
            None => return Err(self.clone()),
        };
        let float = self.mode == CoeffMode::Float || divisor.mode == CoeffMode::Float;
        let prune = FLOAT_PRUNE * self.max_abs().max(f64::MIN_POSITIVE);
        let mut rem = self.clone();
        let mut quot = Poly2::zero();
        let mut guard = 0usize;
        loop {
            if float {
                rem.terms.retain(|_, c| c.to_f64().abs() > prune);
            }
            let Some(((ri, rj), rc)) = rem.leading().map(|(e, c)| (e, c.clone())) else {
                break;
            };
            if ri < lead_e.0 || rj < lead_e.1 {
                return Err(rem);
            }
            let t = Poly2::monomial(ri - lead_e.0, rj - lead_e.1, &rc / &lead_c);
            rem = &rem - &(&t * divisor);
            quot = &quot + &t;
            guard += 1;
            if guard > 100_000 {
                return Err(rem);
            }
        }
        Ok(if float { quot.to_float() } else { quot })
    }
}

fn horner_sparse(row: &[(u32, f64)], x: f64) -> f64 {
    // row is sorted by ascending exponent
    let mut acc = 0.0;
    let mut prev = match row.last() {
        Some(&(e, _)) => e,
        None => return 0.0,
    };
    for &(e, c) in row.iter().rev() {
        acc *= x.powi((prev - e) as i32);
        acc += c;
        prev = e;
    }
    acc * x.powi(prev as i32)
}

fn powers(v: &Scalar, n: usize) -> Vec<Scalar> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(Scalar::one());
    for k in 1..=n {
        let next = &out[k - 1] * v;
        out.push(next);
    }
    out
}

fn poly_powers(p: &Poly2, n: usize) -> Vec<Poly2> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(Poly2::one());
    for k in 1..=n {
        let next = &out[k - 1] * p;
        out.push(next);
    }
    out
}

impl Add<&Poly2> for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone().with_mode_at_least(rhs.mode);
        for (&e, c) in &rhs.terms {
            out.add_term(e, c.clone());
        }
        out
    }
}

impl Sub<&Poly2> for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone().with_mode_at_least(rhs.mode);
        for (&e, c) in &rhs.terms {
            out.add_term(e, -c);
        }
        out
    }
}

impl Mul<&Poly2> for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        let mut out = Poly2::zero().with_mode_at_least(self.mode.join(rhs.mode));
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &rhs.terms {
                out.add_term((i1 + i2, j1 + j2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        Poly2 { terms: self.terms.iter().map(|(&e, c)| (e, -c)).collect(), mode: self.mode }
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr<Poly2> for Poly2 {
            type Output = Poly2;
            fn $m(self, rhs: Poly2) -> Poly2 {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Poly2> for Poly2 {
            type Output = Poly2;
            fn $m(self, rhs: &Poly2) -> Poly2 {
                (&self).$m(rhs)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl Neg for Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        -(&self)
    }
}

impl fmt::Display for Poly2 {
    /// Terms by increasing total degree, e.g. `1 + x^2 + 2*x*y - y^3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by_key(|(&(i, j), _)| (i + j, std::cmp::Reverse(i)));
        for (k, (&(i, j), c)) in terms.into_iter().enumerate() {
            let text = c.to_string();
            let (neg, mag) = match text.strip_prefix('-') {
                Some(m) => (true, m.to_string()),
                None => (false, text),
            };
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut factors = vec![];
            if mag != "1" || (i, j) == (0, 0) {
                factors.push(if mag.contains('/') { format!("({mag})") } else { mag });
            }
            for (name, e) in [("x", i), ("y", j)] {
                match e {
                    0 => {}
                    1 => factors.push(name.to_string()),
                    e => factors.push(format!("{name}^{e}")),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct RawPoly {
    terms: Vec<(u32, u32, serde_json::Value)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mode: Option<CoeffMode>,
}

impl Serialize for Poly2 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let float = self.mode == CoeffMode::Float;
        let terms = self
            .terms
            .iter()
            .map(|(&(i, j), c)| {
                let v = if float {
                    serde_json::Value::from(c.to_f64())
                } else {
                    serde_json::Value::String(c.to_string())
                };
                (i, j, v)
            })
            .collect();
        RawPoly { terms, mode: float.then_some(CoeffMode::Float) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawPoly::deserialize(d)?;
        let float = raw.mode == Some(CoeffMode::Float);
        let mut p = Poly2::zero();
        if float {
            p.promote();
        }
        for (i, j, v) in raw.terms {
            let c = if float {
                v.as_f64().map(Scalar::float).ok_or_else(|| {
                    serde::de::Error::custom(format!("float-mode coefficient must be a number, got {v}"))
                })?
            } else {
                scalar_from_json(&v).map_err(serde::de::Error::custom)?
            };
            p.add_term((i, j), c);
        }
        Ok(p)
    }
}
