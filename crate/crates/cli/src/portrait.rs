use std::f64::consts::PI;
use std::path::Path;

use fsl_core::casebook::build_example6;
use fsl_core::flow::{
    conservation_check, figure3_first_integral, integrate, IntegratorConfig, Parametrization, StopCondition, Trajectory,
};
use fsl_core::polyfield::{PlanarField, Scalar};
use serde::Serialize;

use crate::error::{exit, CliError};
use crate::input::Resolved;

#[derive(Serialize)]
pub struct OrbitEntry {
    pub index: usize,
    pub start: [f64; 2],
    pub files: Vec<String>,
    /// Stop reason of the forward and backward halves.
    pub stops: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_integral_drift: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

#[derive(Serialize)]
pub struct Bundle {
    pub input: String,
    pub window: [f64; 4],
    pub script: String,
    pub orbits: Vec<OrbitEntry>,
}

fn half(field: &PlanarField, start: [f64; 2], window: [f64; 4], cfg: &IntegratorConfig) -> Result<Trajectory, String> {
    let [x0, x1, y0, y1] = window;
    let scale = (x1 - x0).max(y1 - y0);
    let stops = [
        StopCondition::XReaches(x0),
        StopCondition::XReaches(x1),
        StopCondition::YReaches(y0),
        StopCondition::YReaches(y1),
        StopCondition::EntersDisk(1e-9 * scale),
        StopCondition::ArclengthReaches(20.0 * scale),
    ];
    integrate(field, start, &stops, cfg).map_err(|e| e.to_string())
}

/// Integrates `orbits` orbits forward and backward from a ring inside the
/// window and writes one CSV per half plus a gnuplot script.
pub fn write_portrait(r: &Resolved, window: [f64; 4], orbits: usize, out: &Path, rel_tol: Option<f64>) -> Result<Bundle, CliError> {
    let [x0, x1, y0, y1] = window;
    if !window.iter().all(|v| v.is_finite()) || !(x0 < x1 && y0 < y1) {
        return Err(CliError::new(exit::BAD_SECTION, format!("window needs xmin < xmax and ymin < ymax, got {window:?}")));
    }
    std::fs::create_dir_all(out)?;
    let mut cfg = IntegratorConfig::default().with_parametrization(Parametrization::Arclength);
    if let Some(t) = rel_tol {
        cfg.rel_tol = t;
    }
    let forward = r.field.clone();
    let backward = r.field.scale(&Scalar::int(-1));
    let figure3 = matches!(&r.normal_form, Ok(nf) if *nf == build_example6(1.0, -1.0, -1.0));
    let h = figure3_first_integral();
    let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let radius = 0.25 * (x1 - x0).min(y1 - y0);

    let mut entries = vec![];
    for k in 0..orbits {
        let th = 2.0 * PI * (k as f64 + 0.5) / orbits as f64;
        let start = [cx + radius * th.cos(), cy + radius * th.sin()];
        let mut entry = OrbitEntry { index: k, start, files: vec![], stops: vec![], first_integral_drift: None, errors: vec![] };
        for (dir, field) in [("forward", &forward), ("backward", &backward)] {
            match half(field, start, window, &cfg) {
                Ok(tr) => {
                    let name = format!("orbit_{k:03}_{dir}.csv");
                    std::fs::write(out.join(&name), tr.to_csv())?;
                    entry.files.push(name);
                    entry.stops.push(tr.stop_event().map_or("none".into(), |e| e.kind.clone()));
                    if figure3 {
                        let d = conservation_check(&h, &tr).map_err(CliError::from)?;
                        entry.first_integral_drift = Some(entry.first_integral_drift.unwrap_or(0.0).max(d));
                    }
                }
                Err(e) => entry.errors.push(format!("{dir}: {e}")),
            }
        }
        entries.push(entry);
    }

    let files: Vec<String> = entries.iter().flat_map(|e| e.files.iter().cloned()).collect();
    let mut script = String::from("set datafile separator ','\nset key off\nset size ratio -1\n");
    script += &format!("set xrange [{x0}:{x1}]\nset yrange [{y0}:{y1}]\n");
    if files.is_empty() {
        script += "plot NaN\n";
    } else {
        script += &format!("files = \"{}\"\nplot for [f in files] f skip 1 using 2:3 with lines\n", files.join(" "));
    }
    std::fs::write(out.join("plot.gp"), script)?;
    Ok(Bundle { input: r.label.clone(), window, script: "plot.gp".into(), orbits: entries })
}
