use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_fockspin");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

/// CSV rows as header-keyed maps.
fn read_csv(path: &Path) -> Vec<std::collections::HashMap<String, String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            headers.iter().zip(r.iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect()
        })
        .collect()
}

fn num(row: &std::collections::HashMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap_or_else(|_| panic!("{key} = {:?}", row[key]))
}

const SINGLET_GRID: &str = "model = \"eprb4\"\n[eprb4]\ngamma = 0.7853981633974483\nanalyzer_grid = 30\n";

#[test]
fn verify_algebra_passes_and_reports_each_check() {
    let o = run(&["verify", "algebra"], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("PASS [algebra] 12-mode {a, a+} = delta"), "{out}");
    assert!(!out.contains("FAIL"));
}

#[test]
fn verify_eprb_writes_machine_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.jsonl");
    let o = run(&["verify", "eprb", "--output", out.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(rows.iter().any(|r| r["check"] == "Fock and first-quantized correlations agree" && r["passed"] == true));
    assert!(rows.iter().all(|r| r["measured"].as_f64().unwrap() <= r["tolerance"].as_f64().unwrap()));
}

#[test]
fn unknown_suite_and_missing_config_are_usage_errors() {
    assert_eq!(code(&run(&["verify", "everything"], &[])), 2);
    assert_eq!(code(&run(&["correlate"], &[])), 2);
    assert_eq!(code(&run(&["frobnicate"], &[])), 2);
}

#[test]
fn correlate_then_fit_recovers_the_singlet() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SINGLET_GRID);
    let data = dir.path().join("samples.csv");
    let o = run(&["correlate", "--config", cfg.to_str().unwrap(), "--output", data.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = read_csv(&data);
    assert_eq!(rows.len(), 30);
    for r in &rows {
        let dot: f64 = (0..3).map(|k| num(r, ["n1x", "n1y", "n1z"][k]) * num(r, ["n2x", "n2y", "n2z"][k])).sum();
        assert!((num(r, "correlation") + dot).abs() < 1e-12);
    }
    let report = dir.path().join("fit.csv");
    let o = run(&["fit", data.to_str().unwrap(), "--output", report.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let fit = read_csv(&report);
    assert!((num(&fit[0], "two_gamma") - 1.0).abs() < 1e-10);
    assert_eq!(num(&fit[0], "samples"), 30.0);
}

#[test]
fn fit_rejects_empty_malformed_and_rank_deficient_input() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.csv", "");
    let o = run(&["fit", empty.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("estimation"), "{}", stderr(&o));

    let bad = write(dir.path(), "bad.csv", "n1x,n1y,n1z,n2x,n2y,n2z,correlation\n0,0,1,0,0,1,-1\n0,0,1,0,0,1,oops\n");
    let o = run(&["fit", bad.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    // Both directions along z: the two regressors coincide.
    let flat = write(
        dir.path(),
        "flat.csv",
        "n1x,n1y,n1z,n2x,n2y,n2z,correlation\n0,0,1,0,0,1,-1\n0,0,1,0,0,-1,1\n0,0,-1,0,0,1,1\n",
    );
    let o = run(&["fit", flat.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("do not determine"), "{}", stderr(&o));
}

#[test]
fn output_is_deterministic_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let text = "model = \"eprb4\"\nseed = 11\n[eprb4]\ngamma = 0.2\nanalyzer_grid = 5\nnoise = 0.01\n\
                [[sweep]]\nparameter = \"gamma\"\nstart = 0.0\nstop = 0.7\nsteps = 6\n";
    let cfg = write(dir.path(), "n.toml", text);
    let outs: Vec<Vec<u8>> = [["--jobs", "1"], ["--jobs", "1"], ["--jobs", "4"]]
        .iter()
        .map(|j| {
            let o = run(&["sweep", "--config", cfg.to_str().unwrap(), j[0], j[1]], &[]);
            assert_eq!(code(&o), 0, "{}", stderr(&o));
            o.stdout
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
    assert_eq!(outs[0], outs[2]);
    let other = run(&["sweep", "--config", cfg.to_str().unwrap(), "--seed", "12"], &[]);
    assert_ne!(outs[0], other.stdout);
}

#[test]
fn emitted_rows_reparse_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let cont = configs().join("continuum.toml");
    let csv_out = dir.path().join("c.csv");
    let jsonl_out = dir.path().join("c.jsonl");
    for out in [&csv_out, &jsonl_out] {
        let o = run(&["correlate", "--config", cont.to_str().unwrap(), "--output", out.to_str().unwrap()], &[]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let rows = read_csv(&csv_out);
    let json: Vec<serde_json::Map<String, serde_json::Value>> =
        fs::read_to_string(&jsonl_out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(json.len(), 4);
    for (r, j) in rows.iter().zip(&json) {
        assert_eq!(r.len(), j.len());
        assert_eq!(num(r, "schema_version"), 1.0);
        assert_eq!(num(r, "l"), j["l"].as_f64().unwrap());
        // The input echo is itself JSON and carries the swept value.
        let echo: serde_json::Value = serde_json::from_str(&r["input"]).unwrap();
        assert_eq!(echo["wp1"]["center"][1].as_f64().unwrap(), num(r, "sweep.wp1.center.1"));
        assert!(num(r, "l_rel_spread") <= 1e-4);
    }
}

#[test]
fn zero_coupling_through_the_environment() {
    let cont = configs().join("continuum.toml");
    let env = [
        ("FOCKSPIN_CONTINUUM__COUPLING__PROFILE__VALUE", "0.0"),
        ("FOCKSPIN_CONTINUUM__ANALYZERS__N2", "[0.6, 0.0, 0.8]"),
    ];
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("z.csv");
    let o = run(&["correlate", "--config", cont.to_str().unwrap(), "--output", out.to_str().unwrap()], &env);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for r in read_csv(&out) {
        assert_eq!(num(&r, "correlation"), -0.8);
    }
}

#[test]
fn entangle_rejects_the_spin_model() {
    let cfg = configs().join("eprb4.toml");
    assert_eq!(code(&run(&["entangle", "--config", cfg.to_str().unwrap()], &[])), 2);
}

#[test]
fn lattice_compare_default_and_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lc.csv");
    let o = run(&["lattice-compare", "--output", out.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("log-log slope"));
    let rows = read_csv(&out);
    assert_eq!(rows.len(), 4);
    assert!(num(&rows[0], "slope").is_finite());

    let o = run(&["lattice-compare", "--output", out.to_str().unwrap()], &[("FOCKSPIN_LATTICE_COMPARE__EPSILONS", "[0.0]")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("slope unavailable"));
    let rows = read_csv(&out);
    assert!(num(&rows[0], "residual") <= 1e-12);
    assert_eq!(rows[0]["slope"], "");

    let o = run(&["lattice-compare"], &[("FOCKSPIN_LATTICE__SITES", "40")]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn config_errors_point_at_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "model = \"lattice\"\n[lattice]\nsites = \"eight\"\n");
    let o = run(&["correlate", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn timing_adds_a_column() {
    let cfg = configs().join("eprb4.toml");
    let o = run(&["correlate", "--config", cfg.to_str().unwrap(), "--timing"], &[]);
    assert_eq!(code(&o), 0);
    let header = String::from_utf8(o.stdout).unwrap().lines().next().unwrap().to_string();
    assert!(header.ends_with(",elapsed_ms"), "{header}");
}
