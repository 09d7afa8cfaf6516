use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TREATMENT: &str = "[treatment]\nplayers = 4\ncost_x = 1\ndelta = \"3/4\"\npi0 = 11\ndelta_pi = 9\n";

const SESSION: &str = "\n[session]\nsubjects = 24\nsupergames = 20\nseed = 5\nmode = \"static\"\ngrim_probability = 0.5\n";

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coopbasin"))
        .args(args)
        .current_dir(dir)
        .env_remove("COOPBASIN_OUT")
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn setup(files: &[(&str, &str)]) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in files {
        fs::write(dir.path().join(name), text).unwrap();
    }
    dir
}

#[test]
fn basin_table_and_json() {
    let dir = setup(&[("t.toml", TREATMENT)]);
    let o = run(dir.path(), &["basin", "t.toml"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("3^(-1/3)"));
    let o = run(dir.path(), &["basin", "t.toml", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["p_star_ind"].as_f64().unwrap() - 3f64.powf(-1.0 / 3.0)).abs() < 1e-12);
    assert_eq!(v["grim_is_spe"], true);
}

#[test]
fn malformed_config_names_the_field() {
    let bad = TREATMENT.replace("players = 4", "players = \"four\"");
    let dir = setup(&[("t.toml", &bad)]);
    let o = run(dir.path(), &["basin", "t.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("players"), "{}", stderr(&o));

    let unknown = format!("{TREATMENT}colour = 1\n");
    let dir = setup(&[("t.toml", &unknown)]);
    let o = run(dir.path(), &["basin", "t.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = setup(&[]);
    let o = run(dir.path(), &["basin", "nope.toml"]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("nope.toml"));
}

#[test]
fn bad_usage_exits_with_two() {
    let dir = setup(&[]);
    let o = run(dir.path(), &["design", "--target", "1/3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn infeasible_design_exits_with_three() {
    let dir = setup(&[]);
    // Q⋆ = 1/3 at x = 1, δ = 3/4: a target below it would need N < 2.
    let o = run(dir.path(), &["design", "--target", "1/4", "--delta", "3/4", "--cost", "1", "-o", "out"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn design_writes_a_usable_treatment() {
    let dir = setup(&[]);
    let o = run(dir.path(), &["design", "--target", "1/3", "--delta", "3/4", "--players", "4", "-o", "d"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(dir.path(), &["basin", "d/treatment.toml", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["cost_x"], "1/9");
    assert!((v["p_star_ind"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn near_knife_edge_warns() {
    let dir = setup(&[]);
    let o = run(dir.path(), &["design", "--target", "0.995", "--delta", "3/4", "--players", "4"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("knife edge"));
}

#[test]
fn simulate_writes_outputs_and_manifest() {
    let config = format!("{TREATMENT}{SESSION}");
    let dir = setup(&[("s.toml", &config)]);
    let o = run(dir.path(), &["simulate", "s.toml", "-o", "out"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    for f in [
        "session.csv",
        "session.json",
        "stats.json",
        "stats.txt",
        "observations_initial.csv",
        "observations_ongoing.csv",
        "manifest.json",
    ] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "simulate");
    assert_eq!(m["seed"], 5);
    assert_eq!(m["started_at"], 1_700_000_000);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 6);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 16);
}

#[test]
fn out_directory_from_environment() {
    let config = format!("{TREATMENT}{SESSION}");
    let dir = setup(&[("s.toml", &config)]);
    let o = Command::new(env!("CARGO_BIN_EXE_coopbasin"))
        .args(["simulate", "s.toml"])
        .current_dir(dir.path())
        .env("COOPBASIN_OUT", "from-env")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("from-env/stats.json").exists());
}

#[test]
fn schedule_from_reuses_lengths() {
    let config = format!("{TREATMENT}{SESSION}");
    let other = config.replace("cost_x = 1", "cost_x = \"1/9\"");
    let dir = setup(&[("a.toml", &config), ("b.toml", &other)]);
    assert!(run(dir.path(), &["simulate", "a.toml", "-o", "a"]).status.success());
    let o = run(dir.path(), &["simulate", "b.toml", "--seed", "99", "--schedule-from", "a/session.json", "-o", "b"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lengths = |d: &str| {
        let v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(d).join("session.json")).unwrap()).unwrap();
        v["lengths"].clone()
    };
    assert_eq!(lengths("a"), lengths("b"));

    let o = run(dir.path(), &["simulate", "b.toml", "--supergames", "10", "--schedule-from", "a/session.json", "-o", "c"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("supergame"));
    assert!(!dir.path().join("c").exists());
}

#[test]
fn simulate_without_session_table_needs_flags() {
    let dir = setup(&[("t.toml", TREATMENT)]);
    let o = run(dir.path(), &["simulate", "t.toml", "-o", "out"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("[session]"));
    assert!(!dir.path().join("out").exists());
    let o = run(dir.path(), &["simulate", "t.toml", "--subjects", "8", "--grim-probability", "1", "-o", "out"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn fit_reports_schema_errors_without_writing() {
    let dir = setup(&[("d.csv", "cooperated,p_star,cluster_id\n1,0.3,a\nyes,0.3,b\n")]);
    let o = run(dir.path(), &["fit", "d.csv", "-o", "out"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 3"), "{}", stderr(&o));
    assert!(stderr(&o).contains("cooperated"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn separation_is_an_estimation_failure() {
    let dir = setup(&[("d.csv", "cooperated,p_star,cluster_id\n1,0.1,a\n1,0.4,b\n1,0.8,c\n")]);
    let o = run(dir.path(), &["fit", "d.csv", "-o", "out"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn missing_cell_is_an_estimation_failure() {
    let csv = "cooperated,corr_decrease,ind_increase,cluster_id\n1,0,0,a\n0,0,1,b\n1,1,0,c\n";
    let dir = setup(&[("c.csv", csv)]);
    let o = run(dir.path(), &["decompose", "--initial", "c.csv", "-o", "out"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("corr_decrease=1,ind_increase=1"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn fit_then_predict() {
    let mut csv = String::from("cooperated,p_star,cluster_id\n");
    // Deterministic pattern with cooperation falling in p*.
    for i in 0..600 {
        let p = [0.1, 0.3, 0.45, 0.6, 0.9][i % 5];
        let y = (i * 7919 % 100) as f64 / 100.0 < 0.9 - 0.7 * p;
        csv.push_str(&format!("{},{p},c{}\n", u8::from(y), i % 30));
    }
    let dir = setup(&[("d.csv", &csv)]);
    let o = run(dir.path(), &["fit", "d.csv", "-o", "fit"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(dir.path(), &["predict", "fit/fit.json", "--at", "1/3,0.69", "--points", "20", "-o", "pred"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let pred = fs::read_to_string(dir.path().join("pred/predictions.csv")).unwrap();
    assert_eq!(pred.lines().count(), 3);
    let curve = fs::read_to_string(dir.path().join("pred/curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 21);
    let svg = fs::read_to_string(dir.path().join("pred/curve.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}
