use std::path::Path;
use std::process::Command;

fn horotomo(dir: &Path, args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_horotomo"))
        .args(args)
        .env("HOROTOMO_THREADS", "1")
        .current_dir(dir)
        .output()
        .unwrap();
    out.status.code().unwrap()
}

fn column(csv_path: &Path, name: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(csv_path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[idx].parse().unwrap()).collect()
}

#[test]
fn fubini_suite_passes_and_summary_matches_csv() {
    let dir = tempfile::tempdir().unwrap();
    let code = horotomo(dir.path(), &["validate", "--suite", "fubini", "--n", "3", "--d", "1", "--output", "fub.csv"]);
    assert_eq!(code, 0);
    let errs = column(&dir.path().join("fub.csv"), "abs_error");
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("fub.json")).unwrap()).unwrap();
    let sup = errs.iter().cloned().fold(0.0, f64::max);
    assert_eq!(summary["sup_error"].as_f64().unwrap(), sup);
    assert!(sup < 1e-4);
    assert_eq!(summary["pass"], true);
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| ["forward", "--n", "3", "--d", "1", "--probes", "-0.5,0,0.7", "--seed", "7", "--output", out];
    assert_eq!(horotomo(dir.path(), &args("a.csv")), 0);
    assert_eq!(horotomo(dir.path(), &args("b.csv")), 0);
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
}

#[test]
fn invalid_configurations() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(horotomo(dir.path(), &["invert-mv", "--probes", "", "--output", "x.csv"]), 2);
    assert_eq!(horotomo(dir.path(), &["invert-mv", "--n", "3", "--d", "3"]), 2);
    assert_eq!(horotomo(dir.path(), &["forward", "--field", "wave:2"]), 2);
    assert_eq!(horotomo(dir.path(), &["forward", "--output", "missing/dir/out.csv"]), 4);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"n": 3, "d": 1, "field": "zonal-exp:1.0", "probes": [1.0, 1.3]}"#).unwrap();
    let code = horotomo(dir.path(), &["invert-mv", "--config", "c.json", "--d", "2", "--output", "mv.csv"]);
    assert_eq!(code, 0);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("mv.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["d"], 2);
    assert!(summary["sup_error"].as_f64().unwrap() < 1e-2);
}

#[test]
fn plot_columns() {
    let dir = tempfile::tempdir().unwrap();
    let code = horotomo(dir.path(), &["emit-plot", "--field", "zero", "--probes", "1,1.5,2", "--output", "z.csv"]);
    assert_eq!(code, 0);
    assert!(column(&dir.path().join("z.csv"), "f_reconstructed").iter().all(|v| *v == 0.0));
    let code = horotomo(
        dir.path(),
        &["emit-plot", "--mode", "sharpness", "--n", "3", "--d", "2", "--p", "2", "--cutoffs", "1e2,1e3,1e4", "--output", "s.csv"],
    );
    assert_eq!(code, 0);
    let v = column(&dir.path().join("s.csv"), "truncated_integral");
    assert!(v.windows(2).all(|w| w[1] > w[0]), "{v:?}");
}
