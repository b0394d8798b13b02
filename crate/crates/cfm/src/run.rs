//! Executes a prepared experiment and writes its artifacts.

use std::fmt;
use std::fs;
use std::path::PathBuf;

use cfm_core::conformal::{modulus_pair, ModulusPair};
use cfm_core::isolines::extract_isolines;
use cfm_core::mercator::{discrepancy_profile, mercator_validate, MercatorErrors};
use cfm_core::multiply::optimize_potentials;
use cfm_core::ModulusReport;

use crate::config::{ConfigError, Experiment, Mode};
use crate::report::{isolines_csv, modulus_record, num, profile_csv};

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Compute(cfm_core::Error),
    Io(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Compute(e) => write!(f, "computation failed: {e}"),
            RunError::Io(e) => write!(f, "write failed: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<cfm_core::Error> for RunError {
    fn from(e: cfm_core::Error) -> Self {
        RunError::Compute(e)
    }
}

#[derive(Debug, Clone)]
pub struct MercatorRecord {
    pub p: u32,
    pub l2_error: f64,
    pub h1_semi_error: f64,
    pub modulus: f64,
    pub exact_modulus: f64,
    pub dofs: usize,
}

/// Results of a run, plus the rendered artifacts not yet written.
#[derive(Debug, Default)]
pub struct Outcome {
    pub reports: Vec<ModulusReport>,
    pub mercator: Vec<MercatorRecord>,
    pub profile: Vec<(f64, f64)>,
    pub corner_deviation: Option<f64>,
    pub initial_reci: Option<f64>,
    pub report_text: String,
    pub files: Vec<(PathBuf, String)>,
}

pub fn execute(exp: &Experiment) -> Result<Outcome, RunError> {
    let cfg = &exp.config;
    let out = &cfg.output;
    let mut o = Outcome::default();
    let last = *exp.degrees.last().expect("schedule is never empty");
    let mut text = format!("# case={} mode={}\n", cfg.name, cfg.mode);
    let mesh_text: Option<String>;
    match cfg.mode {
        Mode::Modulus | Mode::Convergence | Mode::Map => {
            let q = exp.quad.as_ref().expect("checked by prepare");
            let schedule: &[u32] = if cfg.mode == Mode::Convergence { &exp.degrees } else { &[last] };
            let mut final_pair: Option<ModulusPair> = None;
            for &p in schedule {
                let pair = modulus_pair(q, &exp.recipe, p)?;
                text.push_str(&modulus_record(&pair.report));
                text.push('\n');
                o.reports.push(pair.report.clone());
                final_pair = Some(pair);
            }
            let pair = final_pair.expect("schedule is never empty");
            mesh_text = out.mesh.as_ref().map(|_| pair.primal.field.mesh().export_text());
            if cfg.mode == Mode::Map {
                let map = pair.map(q)?;
                text.push_str(&format!("corner_deviation={}\n", num(map.corner_deviation)));
                o.corner_deviation = Some(map.corner_deviation);
                if let Some(path) = &out.isolines {
                    let lines = extract_isolines(&map, &q.surface, out.n_u, out.n_v);
                    o.files.push((path.clone(), isolines_csv(&lines)));
                }
            }
        }
        Mode::Multiholes => {
            let q = exp.quad.as_ref().expect("checked by prepare");
            let tol = cfg.multiholes.as_ref().map_or(1e-14, |m| m.tol);
            let run = optimize_potentials(q, &exp.recipe, last, tol)?;
            text.push_str(&modulus_record(&run.report));
            text.push_str(&format!("\ninitial_reci={}\n", num(run.initial_reci)));
            o.initial_reci = Some(run.initial_reci);
            o.reports.push(run.report.clone());
            mesh_text = out.mesh.as_ref().map(|_| run.primal.field.mesh().export_text());
        }
        Mode::Mercator => {
            let m = cfg.mercator.as_ref().expect("checked by prepare");
            let mut final_run: Option<MercatorErrors> = None;
            for &p in &exp.degrees {
                let r = mercator_validate(&exp.surface, m.eps, &exp.recipe, p)?;
                let rec = MercatorRecord {
                    p,
                    l2_error: r.l2,
                    h1_semi_error: r.h1_semi,
                    modulus: r.modulus,
                    exact_modulus: r.exact_modulus,
                    dofs: r.dofs,
                };
                text.push_str(&format!(
                    "l2_error={} h1_semi_error={} M={} M_sphere={} dofs={} p={}\n",
                    num(rec.l2_error),
                    num(rec.h1_semi_error),
                    num(rec.modulus),
                    num(rec.exact_modulus),
                    rec.dofs,
                    rec.p
                ));
                o.mercator.push(rec);
                final_run = Some(r);
            }
            let r = final_run.expect("schedule is never empty");
            o.profile = discrepancy_profile(&r.field, m.eps, m.profile_points)?;
            let worst = o.profile.iter().map(|d| d.1.abs()).fold(0.0, f64::max);
            text.push_str(&format!("max_profile_discrepancy={}\n", num(worst)));
            if let Some(path) = &out.profile {
                o.files.push((path.clone(), profile_csv(&o.profile)));
            }
            mesh_text = out.mesh.as_ref().map(|_| r.field.mesh().export_text());
        }
    }
    if let (Some(path), Some(m)) = (&out.mesh, mesh_text) {
        o.files.push((path.clone(), m));
    }
    if let Some(path) = &out.report {
        o.files.push((path.clone(), text.clone()));
    }
    o.report_text = text;
    Ok(o)
}

/// Writes every artifact or none: each goes to a temporary sibling first and
/// is renamed into place only once all of them have been written.
pub fn write_files(files: &[(PathBuf, String)]) -> Result<(), RunError> {
    let mut staged = Vec::new();
    let cleanup = |staged: &[PathBuf]| {
        for t in staged {
            let _ = fs::remove_file(t);
        }
    };
    for (path, text) in files {
        let tmp = path.with_extension(match path.extension() {
            Some(e) => format!("{}.partial", e.to_string_lossy()),
            None => "partial".to_string(),
        });
        let written = match path.parent().filter(|d| !d.as_os_str().is_empty()) {
            Some(dir) => fs::create_dir_all(dir).and_then(|_| fs::write(&tmp, text)),
            None => fs::write(&tmp, text),
        };
        if let Err(e) = written {
            cleanup(&staged);
            return Err(RunError::Io(format!("{}: {e}", path.display())));
        }
        staged.push(tmp);
    }
    for ((path, _), tmp) in files.iter().zip(&staged) {
        if let Err(e) = fs::rename(tmp, path) {
            cleanup(&staged);
            return Err(RunError::Io(format!("{}: {e}", path.display())));
        }
    }
    Ok(())
}
