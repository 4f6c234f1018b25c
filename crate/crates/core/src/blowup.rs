//! Quadratic blow-up charts, divisor analysis and the saddle data of the two
//! corner saddles created by blowing up a fake saddle.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::normalform::{classify, NormalFormField, Verdict, FLOAT_ZERO_TOL};
use crate::polyfield::{PlanarField, Poly1, Poly2, PolyError, RationalFn1, Scalar};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BlowupError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("unsupported chart '{0}' (expected one of: u,uv | v,uv | pi+ | pi-)")]
    UnsupportedChart(String),
    #[error("origin is not a hyperbolic fake saddle ({0})")]
    NotAFakeSaddle(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChartKind {
    /// `(x, y) = (u, u·v)`, divisor `u = 0`.
    XDirectional,
    /// `(x, y) = (v, u·v)`, divisor `v = 0`.
    XDirectionalSwapped,
    /// `(x, y) = (u(1−v), u·v)`, divisor `u = 0`.
    PiPlus,
    /// `(x, y) = (−u(1−v), u·v)`, divisor `u = 0`.
    PiMinus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlowupChart {
    pub kind: ChartKind,
    pub divide_power: u32,
}

impl BlowupChart {
    pub fn new(kind: ChartKind, divide_power: u32) -> Self {
        BlowupChart { kind, divide_power }
    }

    /// `(x, y)` as polynomials in the chart coordinates `(u, v)`.
    pub fn substitution(&self) -> (Poly2, Poly2) {
        let (u, v) = (Poly2::x(), Poly2::y());
        let uv = &u * &v;
        match self.kind {
            ChartKind::XDirectional => (u, uv),
            ChartKind::XDirectionalSwapped => (v, uv),
            ChartKind::PiPlus => (&u - &uv, uv),
            ChartKind::PiMinus => (&uv - &u, uv),
        }
    }

    pub fn divisor(&self) -> Poly2 {
        match self.kind {
            ChartKind::XDirectionalSwapped => Poly2::y(),
            _ => Poly2::x(),
        }
    }
}

impl fmt::Display for ChartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ChartKind::XDirectional => "u,uv",
            ChartKind::XDirectionalSwapped => "v,uv",
            ChartKind::PiPlus => "pi+",
            ChartKind::PiMinus => "pi-",
        };
        f.write_str(s)
    }
}

impl FromStr for ChartKind {
    type Err = BlowupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| !c.is_whitespace() && !"()".contains(*c)).collect();
        match key.to_ascii_lowercase().as_str() {
            "u,uv" | "x,ux" | "xdirectional" | "x" => Ok(ChartKind::XDirectional),
            "v,uv" | "xdirectionalswapped" | "swapped" => Ok(ChartKind::XDirectionalSwapped),
            "pi+" | "piplus" | "u1-v,uv" => Ok(ChartKind::PiPlus),
            "pi-" | "piminus" | "-u1-v,uv" => Ok(ChartKind::PiMinus),
            _ => Err(BlowupError::UnsupportedChart(s.to_string())),
        }
    }
}

/// Blown-up field, with the `P·u∂u + Q·v∂v` factorization when it exists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlownUpField {
    pub field: PlanarField,
    pub factorization: Option<Factorization>,
}

/// `field = P·u ∂u + Q·v ∂v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    pub p: Poly2,
    pub q: Poly2,
}

/// Pulls `field` back through `chart` and divides by `divisor^divide_power`.
pub fn blow_up(field: &PlanarField, chart: &BlowupChart) -> Result<BlownUpField, BlowupError> {
    let (sx, sy) = chart.substitution();
    let pulled = field.substitute(&sx, &sy)?;
    let out = pulled.divide(&chart.divisor(), chart.divide_power)?;
    let factorization = match (out.p.div_exact(&Poly2::x()), out.q.div_exact(&Poly2::y())) {
        (Ok(p), Ok(q)) => Some(Factorization { p, q }),
        _ => None,
    };
    Ok(BlownUpField { field: out, factorization })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisorRoot {
    pub location: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<Scalar>,
    pub multiplicity: u32,
    /// Whether the linear part of the blown-up field at the root has a
    /// nonzero eigenvalue.
    pub nonzero_eigenvalue: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisorReport {
    pub q_on_divisor: Poly1,
    pub discriminant: Scalar,
    pub roots: Vec<DivisorRoot>,
    /// `(P(0,0), Q(0,0))` in the chart `(u, uv)`.
    pub origin_data: (Scalar, Scalar),
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Blow-up of a normal form in the chart `(u, uv)` restricted to the divisor.
pub fn divisor_report(nf: &NormalFormField) -> DivisorReport {
    let chart = BlowupChart::new(ChartKind::XDirectional, 1);
    let fac = blow_up(&nf.to_field(), &chart)
        .ok()
        .and_then(|b| b.factorization)
        .expect("a normal form always factors in the chart (u, uv)");
    let q0 = fac.q.restrict_x0();
    let (c0, c1, c2) = (q0.coeff(0), q0.coeff(1), q0.coeff(2));
    let discriminant = &c1 * &c1 - Scalar::int(4) * &c2 * &c0;
    debug_assert!(discriminant.approx_eq(&-nf.invariants().d, 1e-9));
    let mut warnings = Vec::new();
    let (sign, near) = discriminant.sign(FLOAT_ZERO_TOL);
    if near {
        warnings.push(format!("discriminant {:e} inside the dead zone, treated as 0", discriminant.to_f64()));
    }
    let two_a = Scalar::int(2) * &c2;
    let mut locs: Vec<(Scalar, u32)> = match sign {
        Ordering::Less => vec![],
        Ordering::Equal => vec![(-(&c1 / &two_a), 2)],
        Ordering::Greater => {
            let s = discriminant.sqrt();
            vec![(-(&c1 + &s) / two_a.clone(), 1), ((&s - &c1) / two_a, 1)]
        }
    };
    locs.sort_by(|a, b| a.0.to_f64().total_cmp(&b.0.to_f64()));
    let (pu, qv) = (fac.p.restrict_x0(), fac.q.restrict_x0().derivative());
    let roots = locs
        .into_iter()
        .map(|(r, multiplicity)| {
            let v = r.to_f64();
            let ev_u = pu.eval_f64(v);
            let ev_v = v * qv.eval_f64(v);
            DivisorRoot {
                location: v,
                exact: r.is_exact().then_some(r.clone()),
                multiplicity,
                nonzero_eigenvalue: ev_u.abs() > FLOAT_ZERO_TOL || ev_v.abs() > FLOAT_ZERO_TOL,
            }
        })
        .collect();
    DivisorReport {
        q_on_divisor: q0,
        discriminant,
        roots,
        origin_data: (fac.p.coeff(0, 0), fac.q.coeff(0, 0)),
        warnings,
    }
}

/// Corner saddle `x·P1 ∂x + y·P2 ∂y` at the origin of a π± chart, with its
/// restrictions to both axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerSaddle {
    pub p1: Poly2,
    pub p2: Poly2,
    /// `−P2(0,0)/P1(0,0)`.
    pub lambda: Scalar,
    /// `P1(·,0)`, `P2(·,0)`, `P1(0,·)`, `P2(0,·)`.
    pub p1_x: Poly1,
    pub p2_x: Poly1,
    pub p1_y: Poly1,
    pub p2_y: Poly1,
}

impl CornerSaddle {
    fn new(p1: Poly2, p2: Poly2) -> Self {
        let lambda = -(p2.coeff(0, 0) / p1.coeff(0, 0));
        CornerSaddle {
            p1_x: p1.restrict_y0(),
            p2_x: p2.restrict_y0(),
            p1_y: p1.restrict_x0(),
            p2_y: p2.restrict_x0(),
            p1,
            p2,
            lambda,
        }
    }

    /// `P1/P2 (0, y)`.
    pub fn r12(&self) -> RationalFn1 {
        RationalFn1::new(self.p1_y.clone(), self.p2_y.clone())
    }

    /// `P2/P1 (x, 0)`.
    pub fn r21(&self) -> RationalFn1 {
        RationalFn1::new(self.p2_x.clone(), self.p1_x.clone())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RFunctions {
    pub r12_minus: RationalFn1,
    pub r21_minus: RationalFn1,
    pub r12_plus: RationalFn1,
    pub r21_plus: RationalFn1,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SaddleData {
    pub lambda_plus: Scalar,
    pub lambda_minus: Scalar,
    pub minus: CornerSaddle,
    pub plus: CornerSaddle,
    /// R-functions read off the pullbacks.
    pub generic: RFunctions,
    /// The same functions from the closed expressions in `(a, b, c)`, `f1`, `g1`.
    pub closed_form: RFunctions,
}

impl SaddleData {
    pub fn lambda(&self) -> f64 {
        self.lambda_plus.to_f64()
    }
}

fn quad(c0: Scalar, c1: Scalar, c2: Scalar) -> Poly1 {
    Poly1::from_coeffs(vec![c0, c1, c2])
}

/// `R12+` and `R21−` as rational functions of `(a, b, c)`.
pub fn closed_form_r(a: &Scalar, b: &Scalar, c: &Scalar) -> (RationalFn1, RationalFn1) {
    let two = Scalar::int(2);
    let one = Scalar::one();
    let e = a - b;
    let r12p = RationalFn1::new(
        quad(one.clone(), a + c - &two, &two - &e - c),
        quad(c - &one, &two - &e - &two * c, &e + c - &two),
    );
    let r21m = RationalFn1::new(
        quad(-one.clone(), a - c + &two, c - &e - &two),
        quad(&one - c, &two * c - &two - &e, &e - c + &two),
    );
    (r12p, r21m)
}

/// `g1(s·x, 0)/f1(s·x, 0) − 1` for `s = ±1`.
fn g_over_f_minus_one(nf: &NormalFormField, s: i64) -> RationalFn1 {
    let (mut g, mut f) = (nf.g1.restrict_y0(), nf.f1.restrict_y0());
    if s < 0 {
        g = g.reflect();
        f = f.reflect();
    }
    RationalFn1::new(&g - &f, f)
}

/// Builds the two corner saddles of the π± charts.
pub fn saddle_data(nf: &NormalFormField) -> Result<SaddleData, BlowupError> {
    let inv = nf.invariants();
    let cls = classify(&inv);
    if !matches!(cls.verdict, Verdict::HyperbolicFakeSaddle { .. }) {
        return Err(BlowupError::NotAFakeSaddle(cls.verdict.name().to_string()));
    }
    let field = nf.to_field();
    let factor = |kind| -> Result<Factorization, BlowupError> {
        blow_up(&field, &BlowupChart::new(kind, 1))?.factorization.ok_or_else(|| {
            BlowupError::NotAFakeSaddle(format!("chart {kind} does not factor as P·u∂u + Q·v∂v"))
        })
    };
    let fp = factor(ChartKind::PiPlus)?;
    let fm = factor(ChartKind::PiMinus)?;
    let plus = CornerSaddle::new(fp.p, fp.q);
    let minus = CornerSaddle::new(fm.q.swap_vars(), fm.p.swap_vars());
    let generic = RFunctions {
        r12_minus: minus.r12(),
        r21_minus: minus.r21(),
        r12_plus: plus.r12(),
        r21_plus: plus.r21(),
    };
    let (r12p, r21m) = closed_form_r(&inv.a, &inv.b, &inv.c);
    let closed_form = RFunctions {
        r12_minus: g_over_f_minus_one(nf, -1),
        r21_minus: r21m,
        r12_plus: r12p,
        r21_plus: g_over_f_minus_one(nf, 1),
    };
    Ok(SaddleData {
        lambda_plus: plus.lambda.clone(),
        lambda_minus: minus.lambda.clone(),
        minus,
        plus,
        generic,
        closed_form,
    })
}
