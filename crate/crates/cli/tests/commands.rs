use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sld-correl")).args(args).output().expect("binary runs")
}

fn ok_csv(args: &[&str]) -> (Vec<String>, Vec<Vec<String>>) {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let header = reader.headers().unwrap().iter().map(str::to_string).collect();
    let rows = reader.records().map(|r| r.unwrap().iter().map(str::to_string).collect()).collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let k = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

#[test]
fn approx_headline_value() {
    let (h, rows) = ok_csv(&["approx", "--scenario", "spherical-centered", "--n", "20", "--c", "0.5"]);
    let p = column(&h, &rows, "prob")[0];
    assert!((p / 1.34e-2 - 1.0).abs() < 1e-3);
    let lp = column(&h, &rows, "log_prob")[0];
    let parts = column(&h, &rows, "leading_exponent")[0] + column(&h, &rows, "log_prefactor")[0];
    assert!((lp - parts).abs() < 1e-15);
}

#[test]
fn precondition_violations_exit_2() {
    let out = run(&["approx", "--scenario", "gaussian", "--rho", "0.9", "--c", "0.95"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("0.8474865"));
    let out = run(&["approx", "--c", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("(0, 1)"));
    assert_eq!(run(&["bahadur", "--rho", "0"]).status.code(), Some(2));
    assert_eq!(run(&["approx", "--scenario", "gaussian", "--c", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["mc", "--c", "0.5", "--samples", "10", "--n", "4"]).status.code(), Some(2));
}

#[test]
fn compare_ratio_tends_to_one() {
    let (h, rows) = ok_csv(&["compare", "--scenario", "spherical-centered", "--c", "0.5", "--n-list", "20,40,80,160"]);
    let ratio = column(&h, &rows, "ratio");
    assert!((1.05..=1.12).contains(&ratio[0]));
    assert!(ratio.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs()));
    assert!(!h.iter().any(|c| c == "mc_p_hat"));
    let (h, _) = ok_csv(&["compare", "--c", "0.5", "--n-list", "20", "--samples", "1000"]);
    assert!(h.iter().any(|c| c == "mc_p_hat"));
}

#[test]
fn json_mirrors_csv() {
    let args = ["compare", "--scenario", "gaussian", "--rho", "0.3", "--c", "0.6", "--n-list", "20,40"];
    let (h, rows) = ok_csv(&args);
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let out = run(&json_args);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), rows.len());
    for (obj, row) in arr.iter().zip(&rows) {
        let obj = obj.as_object().unwrap();
        let keys: Vec<&String> = obj.keys().collect();
        assert_eq!(keys, h.iter().collect::<Vec<_>>());
        for (k, cell) in h.iter().zip(row) {
            let want: f64 = cell.parse().unwrap();
            assert_eq!(obj[k].as_f64().unwrap(), want, "{k}");
        }
    }
}

#[test]
fn rate_figures() {
    let min_d2 = |fig: &str| {
        let (h, rows) = ok_csv(&["rate", "--figure", fig]);
        column(&h, &rows, "second_derivative").into_iter().fold(f64::INFINITY, f64::min)
    };
    assert!(min_d2("below") >= 0.0);
    assert!(min_d2("above") < 0.0);
    let (h, rows) = ok_csv(&["rate", "--rho", "0.3", "--points", "11"]);
    let ys = column(&h, &rows, "y");
    let rates = column(&h, &rows, "rate");
    let k = ys.iter().position(|&y| y == 0.3).expect("row at y = rho");
    assert_eq!(rates[k], 0.0);
    assert!(ys.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn bahadur_values() {
    let (h, rows) = ok_csv(&["bahadur", "--rho", "0.5"]);
    let slope = column(&h, &rows, "slope")[0];
    assert!((slope - 0.287_682_1).abs() < 1e-7);
    assert!((column(&h, &rows, "two_j")[0] - slope).abs() < 1e-12);
    let (h, rows) = ok_csv(&["bahadur", "--rho", "0.5", "--n", "20", "--r-obs", "0.5"]);
    assert!((column(&h, &rows, "p_sld")[0] / 1.34e-2 - 1.0).abs() < 2e-3);
    assert!((column(&h, &rows, "p_exact")[0] / 1.24e-2 - 1.0).abs() < 2e-3);
}

#[test]
fn mc_is_reproducible() {
    let args = ["mc", "--scenario", "spherical-centered", "--n", "20", "--c", "0.5", "--samples", "200000", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let dir = std::env::temp_dir().join(format!("sld-correl-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("mc.csv");
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let c = run(&with_out);
    assert!(c.status.success() && c.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), a.stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exact_and_laplace_demo() {
    let (h, rows) = ok_csv(&["exact", "--n", "20", "--c", "0.5"]);
    assert!((column(&h, &rows, "prob")[0] / 1.2377e-2 - 1.0).abs() < 1e-3);
    let (h, rows) = ok_csv(&["laplace-demo", "--order", "1"]);
    let c = column(&h, &rows, "coefficient");
    let root = (2.0 * std::f64::consts::PI).sqrt();
    assert_eq!(c.len(), 2);
    assert!((c[0] - root).abs() < 1e-14 && (c[1] - 2.0 * root).abs() < 1e-13);
}

#[test]
fn identical_flags_identical_output() {
    for args in [
        &["approx", "--scenario", "gaussian", "--rho", "0.5", "--c", "0.7", "--n", "50"][..],
        &["rate", "--rho", "0.6", "--points", "101", "--format", "json"][..],
    ] {
        assert_eq!(run(args).stdout, run(args).stdout);
    }
}
