use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resurgamma"))
        .args(args)
        .env_remove("RESURGAMMA_DEFAULT_PRECISION")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn coeffs_polynomial_as_json() {
    let o = run(&["coeffs", "--n", "3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["polynomial"], "-6λ³ + 8λ² - λ");
    assert_eq!(v["coefficients"], serde_json::json!(["0", "-1", "8", "-6"]));
}

#[test]
fn table1_has_twelve_rows_and_is_deterministic() {
    let a = run(&["table1", "--precision", "512"]);
    let b = run(&["table1", "--precision", "512"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut r = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), ["lambda", "K", "quantity", "value", "bound_source"]);
    let rows: Vec<_> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 12);
    assert_eq!(&rows[4][3], "0.732252465623483776580694573188048575042344276e184");
}

#[test]
fn sector_error_exits_one() {
    let o = run(&["expand", "--a-re", "-10", "--lambda", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sector"));
}

#[test]
fn unknown_flag_is_an_error() {
    let o = run(&["coeffs", "--n", "3", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_quick_bounds_passes() {
    let o = run(&["verify", "--suite", "bounds", "--quick"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("PASS"));
}

#[test]
fn stokes_sweep_rows() {
    let o = run(&["stokes-sweep", "--w-abs", "25", "--steps", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<_> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 5);
    for row in rows {
        let d: f64 = row[5].parse().unwrap();
        let e: f64 = row[6].parse().unwrap();
        assert!(d <= e);
    }
}

#[test]
fn precision_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_resurgamma"))
        .args(["coeffs", "--n", "2", "--lambda", "1/3", "--format", "csv"])
        .env("RESURGAMMA_DEFAULT_PRECISION", "64")
        .output()
        .unwrap();
    assert!(o.status.success());
    let o2 = run(&["coeffs", "--n", "2", "--lambda", "1/3", "--format", "csv"]);
    assert_ne!(o.stdout, o2.stdout);
}

#[test]
fn json_output_to_file() {
    let dir = std::env::temp_dir().join(format!("resurgamma-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("t.json");
    let o = run(&["terminant", "--p", "10.5", "--w-abs", "10", "--w-arg", "5.1", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["sector"], "CONTINUED");
    std::fs::remove_dir_all(dir).unwrap();
}
