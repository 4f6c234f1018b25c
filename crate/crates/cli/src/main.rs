mod error;
mod input;
mod portrait;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fsl_core::asymptotics::{gamma0, gamma_pm, pv_integral_sym_infinite, transition_report, SectionPair, Sections};
use fsl_core::casebook::{self, z_gamma_closed, z_return_closed, CaseResult};
use fsl_core::flow::{
    return_slope, transition_slope, transition_slope_field, ReturnSection, Side, SlopeConfig, SlopeEstimate,
};
use fsl_core::normalform::{classify, Verdict};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{exit, CliError};

/// `println!` that exits quietly when the reader has gone away.
macro_rules! outln {
    ($($t:tt)*) => {
        emit(format_args!($($t)*))
    };
}
use crate::input::{resolve, InputArgs};

#[derive(Parser, Debug)]
#[command(name = "fsl", version, about = "Fake-saddle singularities of planar vector fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SideArg {
    Plus,
    Minus,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SectionArg {
    PositiveX,
    PositiveY,
}

#[derive(clap::Args, Debug)]
struct NumericArgs {
    /// Comma-separated positive offsets, strictly decreasing.
    #[arg(long, value_delimiter = ',')]
    offsets: Option<Vec<f64>>,
    /// Integrator relative tolerance; overrides FSL_TOL.
    #[arg(long)]
    rel_tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Invariants (a, b, c, d) and fake-saddle verdict.
    Classify {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Principal value, gamma_0 and gamma_+/- of the transition map.
    Gamma {
        #[command(flatten)]
        input: InputArgs,
        /// Entry section `{x = alpha}`, alpha < 0.
        #[arg(long, allow_hyphen_values = true, requires = "omega", conflicts_with = "infinite")]
        alpha: Option<f64>,
        /// Exit section `{x = omega}`, omega > 0.
        #[arg(long, allow_hyphen_values = true, requires = "alpha")]
        omega: Option<f64>,
        /// Symmetric sections at minus and plus infinity.
        #[arg(long)]
        infinite: bool,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Empirical transition slope across the fiber y = 0.
    Transit {
        #[command(flatten)]
        input: InputArgs,
        /// Entry section `{x = alpha}`, alpha < 0.
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        /// Exit section `{x = omega}`, omega > 0.
        #[arg(long, allow_hyphen_values = true)]
        omega: f64,
        /// Side of the fiber to start from.
        #[arg(long, value_enum, default_value_t = SideArg::Both)]
        side: SideArg,
        #[command(flatten)]
        numeric: NumericArgs,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Empirical slope of the Poincaré return map around the origin.
    Return {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = SectionArg::PositiveY)]
        section: SectionArg,
        #[command(flatten)]
        numeric: NumericArgs,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Run casebook checks; exit 1 if any fails.
    Reproduce {
        /// Case group: example6, x3-script, x4-chain, z-chain.
        #[arg(required_unless_present = "all", conflicts_with = "all")]
        id: Option<String>,
        #[arg(long)]
        all: bool,
        /// Directory receiving one JSON file per case.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Orbit CSVs and a gnuplot script for a phase portrait.
    Portrait {
        #[command(flatten)]
        input: InputArgs,
        /// xmin xmax ymin ymax
        #[arg(long, num_args = 4, allow_hyphen_values = true, default_values_t = [-1.0, 1.0, -1.0, 1.0])]
        window: Vec<f64>,
        #[arg(long, default_value_t = 16)]
        orbits: usize,
        #[arg(long, default_value = "portrait")]
        out: PathBuf,
        #[arg(long)]
        rel_tol: Option<f64>,
    },
}

/// `--rel-tol`, else `FSL_TOL`, else the default.
fn rel_tol_override(flag: Option<f64>) -> Result<Option<f64>, CliError> {
    let tol = match flag {
        Some(t) => Some(t),
        None => match std::env::var("FSL_TOL") {
            Ok(s) => Some(s.trim().parse::<f64>().map_err(|_| CliError::parse(format!("FSL_TOL: cannot parse `{s}`")))?),
            Err(_) => None,
        },
    };
    match tol {
        Some(t) if !(t > 0.0 && t < 1.0) => Err(CliError::parse(format!("relative tolerance must be in (0, 1), got {t}"))),
        t => Ok(t),
    }
}

fn slope_config(mut cfg: SlopeConfig, numeric: &NumericArgs) -> Result<SlopeConfig, CliError> {
    if let Some(offsets) = &numeric.offsets {
        cfg.offsets = offsets.clone();
    }
    if let Some(t) = rel_tol_override(numeric.rel_tol)? {
        cfg.integrator.rel_tol = t;
    }
    Ok(cfg)
}

fn emit(line: std::fmt::Arguments) {
    if let Err(e) = writeln!(std::io::stdout().lock(), "{line}") {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        panic!("writing to stdout: {e}");
    }
}

fn print_json<T: Serialize>(v: &T) {
    outln!("{}", serde_json::to_string_pretty(v).expect("serializable report"));
}

fn rel_dev(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs()
}

fn cmd_classify(input: &InputArgs, format: Format) -> Result<(), CliError> {
    let r = resolve(input)?;
    let nf = r.nf()?;
    let inv = nf.invariants();
    let cls = classify(&inv);
    match format {
        Format::Json => print_json(&json!({ "input": r.label, "invariants": inv, "classification": cls })),
        Format::Csv => {
            let (a, b, c, d) = inv.as_f64();
            outln!("a,b,c,d,verdict");
            outln!("{a},{b},{c},{d},{}", cls.verdict.name());
        }
        Format::Human => {
            outln!("input: {}", r.label);
            outln!("a = {}  b = {}  c = {}  d = {}", inv.a, inv.b, inv.c, inv.d);
            match &cls.verdict {
                Verdict::HyperbolicFakeSaddle { ratio } => outln!("verdict: {} (ratio {ratio})", cls.verdict.name()),
                Verdict::NotFakeSaddle { extra_divisor_singularities } => {
                    let pts: Vec<String> = extra_divisor_singularities.iter().map(|p| format!("{}", p.v)).collect();
                    outln!("verdict: {} (extra divisor singularities at v = {})", cls.verdict.name(), pts.join(", "));
                }
                v => outln!("verdict: {}", v.name()),
            }
            for w in &cls.warnings {
                outln!("warning: {w}");
            }
        }
    }
    Ok(())
}

fn cmd_gamma(input: &InputArgs, alpha: Option<f64>, omega: Option<f64>, infinite: bool, format: Format) -> Result<(), CliError> {
    let r = resolve(input)?;
    let nf = r.nf()?;
    let closed = r.z_params.map(|(a, b)| z_gamma_closed(a, b));
    let report: Value = if infinite {
        let (gp, gm) = gamma_pm(nf, &Sections::Infinite)?;
        json!({
            "sections": { "kind": "Infinite" },
            "pv": pv_integral_sym_infinite(nf)?,
            "gamma0": gamma0(&nf.invariants())?,
            "gamma_plus": gp,
            "gamma_minus": gm,
        })
    } else {
        let (Some(alpha), Some(omega)) = (alpha, omega) else {
            return Err(CliError::new(exit::BAD_SECTION, "give --alpha and --omega, or --infinite"));
        };
        serde_json::to_value(transition_report(nf, &SectionPair::new(alpha, omega))?).expect("serializable report")
    };
    let mut report = report;
    if let Some((cp, cm)) = closed {
        report["closed_form"] = json!({ "gamma_plus": cp, "gamma_minus": cm });
    }
    match format {
        Format::Json => print_json(&json!({ "input": r.label, "report": report })),
        Format::Csv => {
            outln!("quantity,value");
            for k in ["pv", "gamma0", "gamma_plus", "gamma_minus", "delta00_closed", "delta00_via_l"] {
                if let Some(v) = report.get(k) {
                    outln!("{k},{v}");
                }
            }
        }
        Format::Human => {
            outln!("input: {}", r.label);
            for k in ["pv", "gamma0", "gamma_plus", "gamma_minus", "delta00_closed", "delta00_via_l"] {
                if let Some(v) = report.get(k) {
                    outln!("{k:>15} = {v}");
                }
            }
            if let Some((cp, cm)) = closed {
                outln!("{:>15} = {cp}  (closed form)", "gamma_plus");
                outln!("{:>15} = {cm}  (closed form)", "gamma_minus");
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SlopeRow {
    side: String,
    estimate: SlopeEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    relative_deviation: Option<f64>,
}

impl SlopeRow {
    fn new(side: &str, estimate: SlopeEstimate, closed_form: Option<f64>) -> Self {
        let relative_deviation = closed_form.map(|c| rel_dev(estimate.value, c));
        SlopeRow { side: side.into(), estimate, closed_form, relative_deviation }
    }
}

fn print_slopes(label: &str, rows: &[SlopeRow], format: Format) {
    match format {
        Format::Json => print_json(&json!({ "input": label, "slopes": rows })),
        Format::Csv => {
            outln!("side,offset,slope");
            for r in rows {
                for (o, s) in r.estimate.offsets_used.iter().zip(&r.estimate.slopes) {
                    outln!("{},{o:e},{s}", r.side);
                }
            }
        }
        Format::Human => {
            outln!("input: {label}");
            outln!("{:>6} {:>18} {:>18} {:>12} {:>12}", "side", "empirical", "closed form", "rel. dev.", "residual");
            for r in rows {
                let cf = r.closed_form.map_or("-".to_string(), |c| format!("{c:.10}"));
                let dev = r.relative_deviation.map_or("-".to_string(), |d| format!("{d:.2e}"));
                outln!("{:>6} {:>18.10} {:>18} {:>12} {:>12.2e}", r.side, r.estimate.value, cf, dev, r.estimate.residual);
            }
        }
    }
}

fn cmd_transit(input: &InputArgs, alpha: f64, omega: f64, side: SideArg, numeric: &NumericArgs, format: Format) -> Result<(), CliError> {
    if !(alpha < 0.0 && omega > 0.0) {
        return Err(CliError::new(exit::BAD_SECTION, format!("need alpha < 0 < omega, got ({alpha}, {omega})")));
    }
    let r = resolve(input)?;
    let cfg = slope_config(SlopeConfig::transit(), numeric)?;
    let closed = match &r.normal_form {
        Ok(nf) if matches!(classify(&nf.invariants()).verdict, Verdict::HyperbolicFakeSaddle { .. }) => {
            gamma_pm(nf, &Sections::Finite(SectionPair::new(alpha, omega))).ok()
        }
        _ => None,
    };
    let sides: Vec<Side> = match side {
        SideArg::Plus => vec![Side::Plus],
        SideArg::Minus => vec![Side::Minus],
        SideArg::Both => vec![Side::Plus, Side::Minus],
    };
    let mut rows = vec![];
    for s in sides {
        let est = match &r.normal_form {
            Ok(nf) => transition_slope(nf, alpha, omega, s, &cfg)?,
            Err(_) => transition_slope_field(&r.field, alpha, omega, s, &cfg)?,
        };
        let cf = closed.map(|(gp, gm)| if s == Side::Plus { gp.exp() } else { gm.exp() });
        rows.push(SlopeRow::new(if s == Side::Plus { "+" } else { "-" }, est, cf));
    }
    print_slopes(&r.label, &rows, format);
    Ok(())
}

fn cmd_return(input: &InputArgs, section: SectionArg, numeric: &NumericArgs, format: Format) -> Result<(), CliError> {
    let r = resolve(input)?;
    let cfg = slope_config(SlopeConfig::return_map(), numeric)?;
    let section = match section {
        SectionArg::PositiveX => ReturnSection::PositiveX,
        SectionArg::PositiveY => ReturnSection::PositiveY,
    };
    let est = return_slope(&r.field, section, &cfg)?;
    let closed = r.z_params.filter(|&(_, b)| b > 0.25).map(|(a, b)| z_return_closed(a, b));
    print_slopes(&r.label, &[SlopeRow::new("return", est, closed)], format);
    Ok(())
}

fn cmd_reproduce(id: Option<&str>, out: Option<&PathBuf>, format: Format) -> Result<bool, CliError> {
    let results: Vec<CaseResult> = match id {
        None => casebook::run_all(),
        Some(id) => {
            let mut r = casebook::run_case(id)?;
            r.sort_by(|a, b| a.id.cmp(&b.id));
            r
        }
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        for r in &results {
            let name: String = r.id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
            std::fs::write(dir.join(format!("{name}.json")), serde_json::to_string_pretty(r).expect("serializable case"))?;
        }
    }
    match format {
        Format::Json => print_json(&results),
        Format::Csv => {
            outln!("case,check,passed,computed,expected");
            for r in &results {
                for c in &r.checks {
                    let q = |v: &Value| v.to_string().replace('"', "'");
                    outln!("{},\"{}\",{},\"{}\",\"{}\"", r.id, c.name, c.passed, q(&c.computed), q(&c.expected));
                }
            }
        }
        Format::Human => {
            for r in &results {
                outln!("{} {}", if r.passed() { "PASS" } else { "FAIL" }, r.id);
                for c in &r.checks {
                    outln!("    [{}] {}: computed {} expected {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.computed, c.expected);
                }
            }
            let failed = results.iter().filter(|r| !r.passed()).count();
            outln!("{} cases, {} failed", results.len(), failed);
        }
    }
    Ok(results.iter().all(CaseResult::passed))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Classify { input, format } => cmd_classify(&input, format)?,
        Command::Gamma { input, alpha, omega, infinite, format } => cmd_gamma(&input, alpha, omega, infinite, format)?,
        Command::Transit { input, alpha, omega, side, numeric, format } => {
            cmd_transit(&input, alpha, omega, side, &numeric, format)?
        }
        Command::Return { input, section, numeric, format } => cmd_return(&input, section, &numeric, format)?,
        Command::Reproduce { id, all, out, format } => {
            let id = if all { None } else { id.as_deref() };
            if !cmd_reproduce(id, out.as_ref(), format)? {
                return Ok(exit::FAILED_CHECKS);
            }
        }
        Command::Portrait { input, window, orbits, out, rel_tol } => {
            let r = resolve(&input)?;
            let tol = rel_tol_override(rel_tol)?;
            let bundle = portrait::write_portrait(&r, [window[0], window[1], window[2], window[3]], orbits, &out, tol)?;
            outln!("{}", serde_json::to_string_pretty(&bundle).expect("serializable manifest"));
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
