use std::path::Path;
use std::process::{Command, Output};

fn signlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_signlab"))
        .current_dir(dir)
        .env_remove("SIGNLAB_THREADS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn rho_prints_all_ones_value() {
    let d = tempfile::tempdir().unwrap();
    let o = signlab(d.path(), &["rho", "--vector", "1,1,1,1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "0.375");
    let csv = std::fs::read_to_string(d.path().join("signlab-out/rho.csv")).unwrap();
    assert_eq!(csv, "vector,eps,rho\n1;1;1;1,0,0.375\n");
}

#[test]
fn exhaustive_curve_csv_and_manifest() {
    let d = tempfile::tempdir().unwrap();
    let o = signlab(d.path(), &["singularity-curve", "--n", "2..5", "--method", "exhaustive"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(d.path().join("signlab-out/curve.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[1], "2,exhaustive,4,8,0.5,0.5,0.5,,8");
    assert!(lines[4].starts_with("5,exhaustive,15872,32768,"));

    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("signlab-out/singularity-curve.manifest.json")).unwrap()).unwrap();
    let outputs: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(outputs, ["signlab-out/curve.csv"]);
    assert_eq!(m["config"]["curve.n"], "2..5");
    assert_eq!(m["exit_status"], 0);
}

#[test]
fn cos_approx_holds() {
    let d = tempfile::tempdir().unwrap();
    let o = signlab(d.path(), &["lemma-suite", "--only", "cos-approx"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(d.path().join("signlab-out/lemmas.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    assert!(row.starts_with("cos-approx,lab,holds,"), "{row}");
}

#[test]
fn usage_errors_exit_64() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(signlab(d.path(), &["no-such-command"]).status.code(), Some(64));
    assert_eq!(signlab(d.path(), &["rho", "--vector", "1", "--bogus"]).status.code(), Some(64));
    assert_eq!(signlab(d.path(), &["rho", "--set", "nope=1", "--vector", "1"]).status.code(), Some(64));
    assert_eq!(signlab(d.path(), &["singularity-curve", "--method", "guess"]).status.code(), Some(64));
    assert_eq!(signlab(d.path(), &["lemma-suite", "--only", "not-a-lemma"]).status.code(), Some(64));
    assert_eq!(signlab(d.path(), &[]).status.code(), Some(64));
}

#[test]
fn config_file_then_flags() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("lab.conf"), "# test\ncurve.n = 3..4\nout = from-file\nseed = 5\n").unwrap();
    let o = signlab(d.path(), &["singularity-curve", "--config", "lab.conf", "--n", "2..3"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(d.path().join("from-file/curve.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("2,"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn plot_is_deterministic() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(signlab(d.path(), &["singularity-curve", "--n", "1..5"]).status.code(), Some(0));
    let csv = "signlab-out/curve.csv";
    assert_eq!(signlab(d.path(), &["plot", csv, "-o", "a.svg"]).status.code(), Some(0));
    assert_eq!(signlab(d.path(), &["plot", csv, "-o", "b.svg"]).status.code(), Some(0));
    let a = std::fs::read(d.path().join("a.svg")).unwrap();
    assert_eq!(a, std::fs::read(d.path().join("b.svg")).unwrap());
    assert!(String::from_utf8(a).unwrap().contains("fitted log-slope"));
}

#[test]
fn empty_csv_plot_fails_without_output() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("empty.csv"), "").unwrap();
    let o = signlab(d.path(), &["plot", "empty.csv"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(!d.path().join("empty.svg").exists());
}

#[test]
fn monte_carlo_bytes_do_not_depend_on_threads() {
    let d = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for t in ["1", "4"] {
        let dir = format!("t{t}");
        let o = signlab(d.path(), &["singularity-curve", "--n", "6..7", "--method", "monte-carlo", "--budget", "20000", "--threads", t, "--out", &dir]);
        assert_eq!(o.status.code(), Some(0));
        outs.push(std::fs::read(d.path().join(dir).join("curve.csv")).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
}
