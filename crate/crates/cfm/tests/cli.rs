use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cfm::report::parse_record;

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn cfm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfm")).current_dir(dir).args(args).output().unwrap()
}

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(files_under(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn catalog_lists_surfaces_and_domains() {
    let dir = tempfile::tempdir().unwrap();
    let o = cfm(dir.path(), &["catalog"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("seashell") && text.contains("hypquad") && text.contains("disk_two_holes"));
}

#[test]
fn square_report_is_written_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("square.toml");
    let o = cfm(dir.path(), &["modulus", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = fs::read(dir.path().join("out/square.txt")).unwrap();
    assert_eq!(first, o.stdout);
    let text = String::from_utf8(first.clone()).unwrap();
    let record = text.lines().find(|l| !l.starts_with('#')).unwrap();
    let keys: Vec<&str> = parse_record(record).iter().map(|kv| kv.0).collect();
    assert_eq!(keys, ["M_Q", "M_conj", "reci", "est_err_Q", "est_err_conj", "dofs", "p"]);
    let m: f64 = parse_record(record)[0].1.parse().unwrap();
    assert!((m - 1.0).abs() < 1e-12);
    assert!(cfm(dir.path(), &["modulus", "--config", cfg.to_str().unwrap()]).status.success());
    assert_eq!(fs::read(dir.path().join("out/square.txt")).unwrap(), first);
}

#[test]
fn convergence_writes_one_line_per_degree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("helicoid_general.toml");
    let o = cfm(dir.path(), &["convergence", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("out/helicoid_general.txt")).unwrap();
    let ps: Vec<u32> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| parse_record(l).iter().find(|kv| kv.0 == "p").unwrap().1.parse().unwrap())
        .collect();
    assert_eq!(ps, (2..=10).collect::<Vec<_>>());
    let o = cfm(dir.path(), &["convergence", "--config", cfg.to_str().unwrap(), "--p", "3"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains("p=3")).count(), 1);
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn map_exports_isolines_and_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("schwarz_map.toml")).unwrap().replace("p = [8]", "p = [4]");
    fs::write(dir.path().join("c.toml"), text).unwrap();
    let o = cfm(dir.path(), &["map", "--config", "c.toml"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("out/schwarz_isolines.csv")).unwrap();
    let mut rows = csv.lines();
    assert_eq!(rows.next().unwrap(), "iso_kind,level,seq_id,param_u,param_v,x,y,z");
    let mut kinds = std::collections::BTreeSet::new();
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f.len(), 8);
        kinds.insert(f[0].to_string());
        let x: Vec<f64> = f[5..].iter().map(|s| s.parse().unwrap()).collect();
        // images lie on the unit sphere
        assert!((x.iter().map(|c| c * c).sum::<f64>() - 1.0).abs() < 1e-12);
    }
    assert_eq!(kinds.into_iter().collect::<Vec<_>>(), ["u", "v"]);
    assert!(dir.path().join("out/schwarz_mesh.txt").exists());
}

#[test]
fn unknown_key_is_rejected_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("square.toml")).unwrap().replace("[surface]", "[surface]\ncolour = 3");
    fs::write(dir.path().join("c.toml"), text).unwrap();
    let o = cfm(dir.path(), &["modulus", "--config", "c.toml"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("colour"), "{err}");
    assert_eq!(files_under(dir.path()), [dir.path().join("c.toml")]);
}

#[test]
fn invalid_values_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let base = fs::read_to_string(configs().join("square.toml")).unwrap();
    for (from, to) in [
        ("name = \"plane\"", "name = \"torus\""),
        ("p = [1]", "p = []"),
        ("mode = \"modulus\"", "mode = \"mercator\""),
        ("params = [0.0, 1.0, 0.0, 1.0]", "params = [0.0, 1.0, 0.0]"),
    ] {
        fs::write(dir.path().join("c.toml"), base.replace(from, to)).unwrap();
        let verb = if to.contains("mercator") { "mercator" } else { "modulus" };
        let o = cfm(dir.path(), &[verb, "--config", "c.toml"]);
        assert_eq!(o.status.code(), Some(2), "{to}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = cfm(dir.path(), &["map", "--config", configs().join("square.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn failed_write_leaves_no_partial_files() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("catenoid.toml"))
        .unwrap()
        .replace("report = \"out/catenoid.txt\"", "report = \"blocker/report.txt\"");
    fs::write(dir.path().join("c.toml"), text).unwrap();
    // a file where the report directory should be
    fs::write(dir.path().join("blocker"), "").unwrap();
    let o = cfm(dir.path(), &["map", "--config", "c.toml"]);
    assert_eq!(o.status.code(), Some(1));
    let mut left = files_under(dir.path());
    left.sort();
    assert_eq!(left, [dir.path().join("blocker"), dir.path().join("c.toml")]);
}

#[test]
fn compute_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    // refinement toward a point that is not a mesh vertex
    let text = fs::read_to_string(configs().join("square.toml"))
        .unwrap()
        .replace("[degrees]", "[[mesh.refine]]\nkind = \"corner\"\npoint = [0.3, 0.3]\ngrading = 0.2\n\n[degrees]");
    fs::write(dir.path().join("c.toml"), text).unwrap();
    let o = cfm(dir.path(), &["modulus", "--config", "c.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("computation failed"));
    assert!(!dir.path().join("out").exists());
}
