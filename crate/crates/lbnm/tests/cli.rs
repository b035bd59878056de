use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const DISK: &str = "\
[domain]
kind = disk
[wavenumber]
k_r = 5
sigma = 0
[basis]
half_order = 20
[solve]
n = 88
[output]
grid_h = 0.05
";

fn lbnm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lbnm")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn run_ok(args: &[&str]) {
    let o = lbnm(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

/// `x, y, re, im` columns of a field dump.
fn field_columns(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').take(4).collect::<Vec<_>>().join(","))
        .collect()
}

#[test]
fn solve_on_the_disk_is_accurate() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(t.path(), "disk.cfg", DISK);
    let out = t.path().join("o");
    run_ok(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let s = summary(&out);
    let e = s["result"]["error"].as_f64().unwrap();
    assert!(e <= 1e-10, "{e:e}");
    assert!(s["result"]["offline_seconds"].as_f64().unwrap() >= 0.0);
    let lines = fs::read_to_string(out.join("field.csv")).unwrap();
    assert!(lines.starts_with("x,y,re,im,abs_err,valid\n"));
}

#[test]
fn zero_data_gives_a_zero_field() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(t.path(), "z.cfg", &format!("{DISK}[field]\nkind = constant\nre = 0\nim = 0\n"));
    let out = t.path().join("o");
    run_ok(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    for line in field_columns(&out.join("field.csv")) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!((v[2], v[3]), (0.0, 0.0));
    }
}

#[test]
fn runs_are_deterministic_and_the_embedded_config_reproduces_them() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(t.path(), "d.cfg", &format!("{DISK}[field]\nkind = dipole\noffset = 0.8\n"));
    let (a, b, c) = (t.path().join("a"), t.path().join("b"), t.path().join("c"));
    run_ok(&["solve", "--config", &cfg, "--out", a.to_str().unwrap(), "--threads", "1"]);
    run_ok(&["solve", "--config", &cfg, "--out", b.to_str().unwrap(), "--threads", "3"]);
    assert_eq!(fs::read(a.join("field.csv")).unwrap(), fs::read(b.join("field.csv")).unwrap());

    let embedded = summary(&a)["config"].as_str().unwrap().to_string();
    let cfg2 = write(t.path(), "embedded.cfg", &embedded);
    run_ok(&["solve", "--config", &cfg2, "--out", c.to_str().unwrap()]);
    assert_eq!(fs::read(a.join("field.csv")).unwrap(), fs::read(c.join("field.csv")).unwrap());
    assert_eq!(summary(&a)["result"]["error"], summary(&c)["result"]["error"]);
    assert_eq!(summary(&a)["config"], summary(&c)["config"]);
}

#[test]
fn export_then_apply_matches_solve_bit_for_bit() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(t.path(), "k.cfg", &DISK.replace("sigma = 0", "sigma = 0.4"));
    let (e, a, s) = (t.path().join("e"), t.path().join("a"), t.path().join("s"));
    run_ok(&["export", "--config", &cfg, "--out", e.to_str().unwrap()]);
    run_ok(&["solve", "--config", &cfg, "--out", s.to_str().unwrap()]);
    run_ok(&[
        "apply",
        "--operator",
        e.join("operator.txt").to_str().unwrap(),
        "--boundary",
        e.join("boundary.csv").to_str().unwrap(),
        "--targets",
        e.join("targets.csv").to_str().unwrap(),
        "--out",
        a.to_str().unwrap(),
        "--repeat",
        "5",
    ]);
    let applied = field_columns(&a.join("field.csv"));
    assert!(!applied.is_empty());
    assert_eq!(applied, field_columns(&s.join("field.csv")));
    assert_eq!(applied, field_columns(&e.join("field.csv")));
    assert!(summary(&a)["result"]["seconds_per_solve"].as_f64().unwrap() >= 0.0);
}

#[test]
fn apply_rejects_wrong_length_data() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(t.path(), "k.cfg", DISK);
    let e = t.path().join("e");
    run_ok(&["export", "--config", &cfg, "--out", e.to_str().unwrap()]);
    let short = write(t.path(), "short.csv", "re,im\n1,0\n0,1\n");
    let o = lbnm(&[
        "apply",
        "--operator",
        e.join("operator.txt").to_str().unwrap(),
        "--boundary",
        &short,
        "--targets",
        e.join("targets.csv").to_str().unwrap(),
        "--out",
        t.path().join("a").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dimension"));
}

#[test]
fn config_errors_exit_2_with_the_line() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(t.path(), "bad.cfg", "[domain]\nkind = kite\n[solve]\nn = many\n");
    let o = lbnm(&["solve", "--config", &cfg, "--out", t.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.cfg:4"));
    let o = lbnm(&["solve", "--config", t.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_3() {
    // J_400(k rho) underflows: the basis cannot be normalized
    let t = tempfile::tempdir().unwrap();
    let cfg = write(t.path(), "u.cfg", &DISK.replace("half_order = 20", "half_order = 400"));
    let o = lbnm(&["solve", "--config", &cfg, "--out", t.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn empty_sweep_writes_an_empty_table() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("o");
    run_ok(&["stability-sweep", "--ratios", "", "--out", out.to_str().unwrap()]);
    let text = fs::read_to_string(out.join("stability.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
}

#[test]
fn single_m_convergence_has_no_slope() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(t.path(), "c.cfg", &format!("{DISK}[convergence]\nm_values = 41\nfs_radius = 1.5\n"));
    let out = t.path().join("o");
    run_ok(&["convergence", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let text = fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
    let s = summary(&out);
    assert!(s["result"]["bb_slope"].is_null() && s["result"]["fs_slope"].is_null());
}

#[test]
fn one_center_multicenter_equals_single_center() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(
        t.path(),
        "m.cfg",
        "[domain]\nkind = c_shape\n[wavenumber]\nk_r = 10\nsigma = 0.4\n[solve]\nn = 160\n\
         [output]\ngrid_h = 0.1\n[multicenter]\ncenters = -1, 0\nm_total = 61\nreference_m_total = 81\n",
    );
    let out = t.path().join("o");
    run_ok(&["multicenter", "--config", &cfg, "--out", out.to_str().unwrap()]);
    for field in ["pulse", "constant"] {
        let a = fs::read(out.join(format!("profile_{field}_single.csv"))).unwrap();
        let b = fs::read(out.join(format!("profile_{field}_multi.csv"))).unwrap();
        assert_eq!(a, b, "{field}");
    }
    let s = summary(&out);
    assert_eq!(s["result"].as_array().unwrap().len(), 2);
}

#[test]
fn gcv_curve_covers_the_grid() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(t.path(), "g.cfg", DISK);
    let out = t.path().join("o");
    run_ok(&["gcv-curve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let text = fs::read_to_string(out.join("gcv.csv")).unwrap();
    assert_eq!(text.lines().count(), 122);
    let chosen = summary(&out)["result"]["alpha"].as_f64().unwrap();
    assert!(chosen > 0.0);
}

#[test]
fn polyline_domains_are_read_from_disk() {
    let t = tempfile::tempdir().unwrap();
    let mut poly = String::from("# octagon\n");
    for j in 0..8 {
        let a = std::f64::consts::TAU * j as f64 / 8.0;
        poly.push_str(&format!("{} {}\n", 0.8 * a.cos(), 0.8 * a.sin()));
    }
    write(t.path(), "oct.txt", &poly);
    let cfg = write(
        t.path(),
        "p.cfg",
        "[domain]\nkind = polyline\nfile = oct.txt\n[wavenumber]\nk_r = 4\nsigma = 0.2\n\
         [basis]\nhalf_order = 30\n[solve]\nn = 160\n[output]\ngrid_h = 0.1\n",
    );
    let out = t.path().join("o");
    run_ok(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let e = summary(&out)["result"]["error"].as_f64().unwrap();
    assert!(e < 1e-3, "{e:e}");

    write(t.path(), "bow.txt", "0 0\n1 1\n1 0\n0 1\n");
    let bad = write(t.path(), "b.cfg", "[domain]\nkind = polyline\nfile = bow.txt\n");
    let o = lbnm(&["solve", "--config", &bad, "--out", out.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
}
