//! Text renderings: report records, isoline CSV, profiles.

use std::fmt::Write;

use cfm_core::isolines::Polyline;
use cfm_core::ModulusReport;

/// 17 significant digits, enough to round-trip an `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// One `key=value` record per line.
pub fn modulus_record(r: &ModulusReport) -> String {
    let mut s = format!(
        "M_Q={} M_conj={} reci={} est_err_Q={} est_err_conj={} dofs={} p={}",
        num(r.m_q),
        num(r.m_conj),
        num(r.reci),
        num(r.est_err_q),
        num(r.est_err_conj),
        r.dofs,
        r.p
    );
    if let Some(v) = &r.hole_potentials {
        let list: Vec<String> = v.iter().map(|&x| num(x)).collect();
        write!(s, " hole_potentials={}", list.join(",")).unwrap();
    }
    if let Some(n) = r.objective_evals {
        write!(s, " objective_evals={n}").unwrap();
    }
    s
}

/// Parses a record back into `(key, value)` pairs.
pub fn parse_record(line: &str) -> Vec<(&str, &str)> {
    line.split_whitespace().filter_map(|kv| kv.split_once('=')).collect()
}

pub fn isolines_csv(lines: &[Polyline]) -> String {
    let mut s = String::from("iso_kind,level,seq_id,param_u,param_v,x,y,z\n");
    for (id, l) in lines.iter().enumerate() {
        for (p, x) in l.params.iter().zip(&l.images) {
            writeln!(
                s,
                "{},{},{id},{},{},{},{},{}",
                l.kind.label(),
                num(l.level),
                num(p[0]),
                num(p[1]),
                num(x[0]),
                num(x[1]),
                num(x[2])
            )
            .unwrap();
        }
    }
    s
}

pub fn profile_csv(profile: &[(f64, f64)]) -> String {
    let mut s = String::from("phi,discrepancy\n");
    for &(phi, d) in profile {
        writeln!(s, "{},{}", num(phi), num(d)).unwrap();
    }
    s
}
