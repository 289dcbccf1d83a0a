use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use speclab_core::ltsum::{TheoremWeight, WeightId};
use speclab_core::Complex64;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_speclab"));
    c.env_remove("SPECLAB_THREADS");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().expect("spawn speclab")
}

fn summary(out: &Path) -> Vec<(String, String)> {
    fs::read_to_string(out.join("summary.txt"))
        .unwrap()
        .lines()
        .map(|l| {
            let (k, v) = l.split_once('=').unwrap();
            (k.to_string(), v.to_string())
        })
        .collect()
}

fn value(out: &Path, key: &str) -> String {
    summary(out).into_iter().find(|(k, _)| k == key).unwrap_or_else(|| panic!("no {key}")).1
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.conf");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn free_spectrum_is_empty() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["spectrum"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&tmp.path().join("spectrum.csv"));
    assert_eq!(header, ["re", "im", "multiplicity", "distance", "w_Eq01"]);
    assert!(rows.is_empty());
    assert_eq!(value(tmp.path(), "discrete_count"), "0");
}

#[test]
fn det_zeros_match_eigenvalues_for_the_shift() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("gamma_shift.conf");
    let o = run(&["det-zeros", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, zeros) = csv_rows(&tmp.path().join("zeros.csv"));
    let (_, eigs) = csv_rows(&tmp.path().join("eigenvalues.csv"));
    let total: usize = zeros.iter().map(|r| r[2].parse::<usize>().unwrap()).sum();
    assert_eq!(total, eigs.len());
    assert!(!eigs.is_empty());
    for r in &eigs {
        assert!((r[1].parse::<f64>().unwrap() + 0.3).abs() < 1e-9);
    }
    assert_eq!(value(tmp.path(), "multiset_match"), "pass");
}

#[test]
fn det_zeros_random_seed_from_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("random.conf");
    let o = run(&["det-zeros", "--config", cfg.to_str().unwrap(), "--seed", "1"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(value(tmp.path(), "seed"), "1");
    assert!(value(tmp.path(), "worst_distance").parse::<f64>().unwrap() <= 1e-6);
}

#[test]
fn sweep_slope_within_bound() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("gamma_shift.conf");
    let o = run(&["sweep", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&tmp.path().join("slopes.csv"));
    assert_eq!(header, ["weight", "slope", "bound", "points", "status"]);
    for r in rows {
        let (slope, bound) = (r[1].parse::<f64>().unwrap(), r[2].parse::<f64>().unwrap());
        assert_eq!(bound, 2.3);
        assert!(slope <= bound, "{r:?}");
        assert_eq!(r[4], "pass");
    }
}

#[test]
fn sweep_reports_failure_with_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("gamma_shift.conf")).unwrap() + "\n[sweep]\nslope_margin = -1.9\n";
    let cfg = write_config(tmp.path(), &text);
    let o = run(&["sweep", "--config", cfg.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(value(&tmp.path().join("out"), "status"), "fail");
}

#[test]
fn config_errors_exit_two_with_line_and_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[operator]\nd = 1\nN = 33\n");
    let o = run(&["spectrum", "--config", cfg.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("operator.N"), "{err}");

    let cfg = write_config(tmp.path(), "[potential]\nsource = generator\ngenerator = nope\n");
    let o = run(&["spectrum", "--config", cfg.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("potential.generator"));

    let o = bin().args(["spectrum", "--threads", "0", "--out"]).arg(tmp.path().join("out")).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().env("SPECLAB_THREADS", "many").arg("spectrum").arg("--out").arg(tmp.path().join("out")).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn outputs_are_bit_identical_across_runs_and_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("random.conf");
    let cfg = cfg.to_str().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let c = tmp.path().join("c");
    assert!(run(&["sweep", "--config", cfg, "--threads", "1"], &a).status.success());
    assert!(run(&["sweep", "--config", cfg, "--threads", "3"], &b).status.success());
    let o = bin().env("SPECLAB_THREADS", "2").args(["sweep", "--config", cfg, "--out"]).arg(&c).output().unwrap();
    assert!(o.status.success());
    assert_eq!(read_all(&a), read_all(&b));
    assert_eq!(read_all(&a), read_all(&c));
}

#[test]
fn potential_file_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("random.conf");
    let first = tmp.path().join("first");
    assert!(run(&["spectrum", "--config", cfg.to_str().unwrap()], &first).status.success());

    let text = "[operator]\nkind = dirac\nd = 1\nN = 32\nm = 1\n[potential]\nsource = file\nfile = first/potential.txt\n";
    let cfg2 = write_config(tmp.path(), text);
    let second = tmp.path().join("second");
    let o = run(&["spectrum", "--config", cfg2.to_str().unwrap()], &second);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(first.join("potential.txt")).unwrap(), fs::read(second.join("potential.txt")).unwrap());
    assert_eq!(fs::read(first.join("spectrum.csv")).unwrap(), fs::read(second.join("spectrum.csv")).unwrap());

    // Wrong grid for the file.
    let cfg3 = write_config(tmp.path(), &text.replace("N = 32", "N = 16"));
    let o = run(&["spectrum", "--config", cfg3.to_str().unwrap()], &tmp.path().join("third"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn eigenvalue_rows_revalidate_weights() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("gamma_shift.conf");
    assert!(run(&["lt-sum", "--config", cfg.to_str().unwrap()], tmp.path()).status.success());
    let (header, rows) = csv_rows(&tmp.path().join("spectrum.csv"));
    assert_eq!(header[4..], ["w_Eq01", "w_Eq011"]);
    let tau = 0.25;
    let w01 = TheoremWeight::new(WeightId::Eq01, 1.0, 2.0, tau, 1).unwrap();
    let w011 = TheoremWeight::new(WeightId::Eq011, 1.0, 2.0, tau, 1).unwrap();
    let mut total = 0.0;
    for r in &rows {
        let l = Complex64::new(r[0].parse().unwrap(), r[1].parse().unwrap());
        let k: f64 = r[2].parse().unwrap();
        assert_eq!(r[4].parse::<f64>().unwrap(), w01.weight(l).unwrap());
        assert_eq!(r[5].parse::<f64>().unwrap(), w011.weight(l).unwrap());
        total += k * w01.weight(l).unwrap();
    }
    let (_, sums) = csv_rows(&tmp.path().join("lt_sum.csv"));
    assert_eq!(sums[0][0], "Eq01");
    assert!((sums[0][4].parse::<f64>().unwrap() - total).abs() <= 1e-14 * total);
}

#[test]
fn remaining_subcommands_pass_on_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    for (cmd, cfg) in [
        ("clifford-check", None),
        ("conformal-check", None),
        ("resolvent-bound", Some("gamma_shift.conf")),
        ("bgk-check", Some("bgk.conf")),
    ] {
        let out = tmp.path().join(cmd);
        let mut args = vec![cmd.to_string()];
        if let Some(c) = cfg {
            args.push("--config".into());
            args.push(configs().join(c).to_string_lossy().into_owned());
        }
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = run(&args, &out);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&o.stdout));
        assert_eq!(value(&out, "command"), cmd);
    }
    let out = tmp.path().join("bgk-check");
    assert_eq!(value(&out, "declared"), value(&out, "counted"));
}
