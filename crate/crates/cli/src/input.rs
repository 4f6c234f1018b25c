use std::path::PathBuf;

use clap::Args;
use fsl_core::blowup::{blow_up, BlowupChart, ChartKind};
use fsl_core::casebook::{build_example6, build_xn, build_z, printed_y1, rescaled_x_mu};
use fsl_core::normalform::{NormalFormError, NormalFormField};
use fsl_core::polyfield::{PlanarField, Scalar};
use serde_json::Value;

use crate::error::CliError;

pub const CASES: [&str; 7] = ["example6", "figure3", "x3", "x4", "xn", "y1", "z-family"];

/// Exactly one of `--case`, `--file`, `--json`.
#[derive(Args, Debug, Clone)]
#[group(id = "input", required = true, multiple = false)]
pub struct InputArgs {
    /// Built-in case: example6, figure3, x3, x4, xn, y1, z-family.
    #[arg(long, group = "input")]
    pub case: Option<String>,
    /// JSON file holding a planar field `{p, q}`, a normal form
    /// `{f1, f2, g1, g2, a}`, or quadratic invariants `{a, b, c}`.
    #[arg(long, group = "input")]
    pub file: Option<PathBuf>,
    /// Inline JSON in any of the `--file` formats.
    #[arg(long, group = "input")]
    pub json: Option<String>,
    #[command(flatten)]
    pub params: CaseParams,
}

#[derive(Args, Debug, Clone)]
pub struct CaseParams {
    /// Invariant `a` for example6.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub a: f64,
    /// Invariant `b` for example6.
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub b: f64,
    /// Invariant `c` for example6.
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub c: f64,
    /// Parameter alpha of the z-family.
    #[arg(long = "alpha-param", default_value_t = 1.0, allow_hyphen_values = true)]
    pub alpha_param: f64,
    /// Parameter beta of the z-family.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub beta: f64,
    /// Exponent for the xn case.
    #[arg(long, default_value_t = 4)]
    pub n: u32,
}

/// A resolved input: the field to integrate and, when it exists, the
/// normal form the analytic commands work on.
pub struct Resolved {
    pub label: String,
    /// Field used by `return` and `portrait`; for the z-family this is the
    /// original field, while the normal form is the rescaled blow-up.
    pub field: PlanarField,
    pub normal_form: Result<NormalFormField, NormalFormError>,
    /// Z-family parameters, which unlock the closed forms.
    pub z_params: Option<(f64, f64)>,
}

impl Resolved {
    fn from_field(label: String, field: PlanarField) -> Self {
        let normal_form = NormalFormField::validate_and_build(&field);
        Resolved { label, field, normal_form, z_params: None }
    }

    fn from_normal_form(label: String, nf: NormalFormField) -> Self {
        Resolved { label, field: nf.to_field(), normal_form: Ok(nf), z_params: None }
    }

    pub fn nf(&self) -> Result<&NormalFormField, CliError> {
        self.normal_form.as_ref().map_err(|e| e.clone().into())
    }
}

fn z_family(alpha: f64, beta: f64) -> Result<Resolved, CliError> {
    if beta.is_nan() || beta <= 0.0 || !alpha.is_finite() {
        return Err(CliError::parse(format!("z-family needs finite alpha and beta > 0, got ({alpha}, {beta})")));
    }
    let z = build_z(alpha, beta);
    let y_mu = blow_up(&z, &BlowupChart::new(ChartKind::XDirectionalSwapped, 2))?.field;
    let normal_form = rescaled_x_mu(&y_mu, beta).map_err(CliError::from)?;
    Ok(Resolved {
        label: format!("z-family(alpha={alpha}, beta={beta})"),
        field: z,
        normal_form: Ok(normal_form),
        z_params: Some((alpha, beta)),
    })
}

fn from_case(id: &str, p: &CaseParams) -> Result<Resolved, CliError> {
    match id {
        "example6" => Ok(Resolved::from_normal_form(
            format!("example6(a={}, b={}, c={})", p.a, p.b, p.c),
            build_example6(p.a, p.b, p.c),
        )),
        "figure3" => Ok(Resolved::from_normal_form("figure3".into(), build_example6(1.0, -1.0, -1.0))),
        "x3" => Ok(Resolved::from_field("x3".into(), build_xn(3))),
        "x4" => Ok(Resolved::from_field("x4".into(), build_xn(4))),
        "xn" if p.n >= 3 => Ok(Resolved::from_field(format!("x{}", p.n), build_xn(p.n))),
        "xn" => Err(CliError::parse(format!("xn needs n >= 3, got {}", p.n))),
        "y1" => Ok(Resolved::from_field("y1".into(), printed_y1())),
        "z-family" => z_family(p.alpha_param, p.beta),
        other => Err(CliError::parse(format!("unknown case `{other}`; known: {}", CASES.join(", ")))),
    }
}

fn from_json(label: String, text: &str) -> Result<Resolved, CliError> {
    let v: Value = serde_json::from_str(text).map_err(|e| CliError::parse(format!("invalid JSON: {e}")))?;
    let obj = v.as_object().ok_or_else(|| CliError::parse("input JSON must be an object"))?;
    if obj.contains_key("f1") {
        let nf: NormalFormField =
            serde_json::from_value(v.clone()).map_err(|e| CliError::parse(format!("normal form: {e}")))?;
        // re-check the normalization the deserializer does not see
        let nf = NormalFormField::new(nf.f1, nf.f2, nf.g1, nf.g2, nf.a)?;
        return Ok(Resolved::from_normal_form(label, nf));
    }
    if obj.contains_key("p") {
        let field: PlanarField =
            serde_json::from_value(v.clone()).map_err(|e| CliError::parse(format!("planar field: {e}")))?;
        return Ok(Resolved::from_field(label, field));
    }
    if ["a", "b", "c"].iter().all(|k| obj.contains_key(*k)) {
        let get = |k: &str| -> Result<Scalar, CliError> {
            serde_json::from_value(obj[k].clone()).map_err(|e| CliError::parse(format!("invariant {k}: {e}")))
        };
        return Ok(Resolved::from_normal_form(label, NormalFormField::quadratic(get("a")?, get("b")?, get("c")?)));
    }
    Err(CliError::parse("expected a planar field {p, q}, a normal form {f1, f2, g1, g2, a}, or invariants {a, b, c}"))
}

pub fn resolve(args: &InputArgs) -> Result<Resolved, CliError> {
    if let Some(id) = &args.case {
        return from_case(id, &args.params);
    }
    if let Some(path) = &args.file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
        return from_json(path.display().to_string(), &text);
    }
    match &args.json {
        Some(text) => from_json("inline".into(), text),
        None => Err(CliError::parse("no input given")),
    }
}
