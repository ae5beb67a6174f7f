use std::fs;
use std::path::Path;

use rwre::cli::{main_with_args, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};

fn run(dir: &Path, command: &str, config: &str, extra: &[&str]) -> i32 {
    let cfg = dir.join(format!("{command}.json"));
    fs::write(&cfg, config).unwrap();
    let prefix = format!("{}/", dir.display());
    let mut args = vec!["rwre", command, "--config", cfg.to_str().unwrap(), "--out", &prefix];
    args.extend_from_slice(extra);
    main_with_args(args)
}

/// Data rows of a CSV written by the CLI, split into fields.
fn rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let body = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, body)
}

#[test]
fn simulate_without_seed_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(dir.path(), "simulate", r#"{"fixture": "d1-twopoint", "gamma": 0.1}"#, &[]);
    assert_eq!(code, EXIT_USAGE);
    assert!(!dir.path().join("simulate.csv").exists());
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), "expand", r#"{"fixture": "d1-twopoint", "gamm": 0.1}"#, &[]), EXIT_USAGE);
    assert_eq!(main_with_args(["rwre", "no-such-command"]), EXIT_USAGE);
}

#[test]
fn short_series_horizon_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), "oracle", r#"{"fixture": "drifted-2d", "horizon": 10}"#, &[]), EXIT_NUMERICAL);
}

#[test]
fn header_records_the_inline_model() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(dir.path(), "expand", r#"{"fixture": "skewed-1d", "gammas": [0.1, 0.05], "order": 3}"#, &[]),
        EXIT_OK
    );
    let text = fs::read_to_string(dir.path().join("expansion.csv")).unwrap();
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("# config: "));
    let json: serde_json::Value = serde_json::from_str(&first["# config: ".len()..]).unwrap();
    assert_eq!(json["command"], "expand");
    assert!(json["config"]["model"]["atoms"].is_array());
    let (_, body) = rows(&dir.path().join("expansion.csv"));
    assert_eq!(body.len(), 2 * 4);
}

#[test]
fn degenerate_law_has_zero_second_order_residual() {
    let dir = tempfile::tempdir().unwrap();
    let model = r#"{"model": {"d": 1, "p0": {"+1": 0.6, "-1": 0.4}, "kappa0": 0.05, "gamma_max": 0.3,
        "atoms": [{"U": {"+1": 0.5, "-1": -0.5}, "weight": 1.0}]}, "gamma": 0.1}"#;
    assert_eq!(run(dir.path(), "kalikow", model, &[]), EXIT_OK);
    let (header, body) = rows(&dir.path().join("kalikow_lemma2.csv"));
    let col = header.iter().position(|h| h == "residual").unwrap();
    assert!(!body.is_empty());
    for r in &body {
        assert_eq!(r[col].parse::<f64>().unwrap(), 0.0, "{r:?}");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"fixture": "drifted-2d", "gamma": 0.08, "n_steps": 3000, "n_replicates": 48, "master_seed": 5}"#;
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let sub = dir.path().join(threads);
        fs::create_dir(&sub).unwrap();
        assert_eq!(run(&sub, "simulate", config, &["--threads", threads]), EXIT_OK);
        outputs.push(fs::read(sub.join("simulate.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn fixture_flag_overrides_the_config_model() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(dir.path(), "expand", r#"{"fixture": "d1-twopoint", "gamma": 0.05}"#, &["--fixture", "drifted-2d"]);
    assert_eq!(code, EXIT_OK);
    let (header, _) = rows(&dir.path().join("expansion.csv"));
    assert!(header.iter().any(|h| h == "v2"));
}

fn column(path: &Path, name: &str) -> Vec<String> {
    let (header, body) = rows(path);
    let col = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"));
    body.into_iter().map(|mut r| r.swap_remove(col)).collect()
}

#[test]
fn line_expansion_reports_the_exact_speed() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), "expand", r#"{"fixture": "d1-twopoint", "gamma": 0.1}"#, &[]), EXIT_OK);
    let path = dir.path().join("expansion.csv");
    let order = column(&path, "order");
    let v = column(&path, "v1");
    let exact = column(&path, "solomon");
    let i = order.iter().position(|o| o == "2").unwrap();
    let (v2, s): (f64, f64) = (v[i].parse().unwrap(), exact[i].parse().unwrap());
    assert!((v2 - s).abs() < 1e-12, "{v2} vs {s}");
}

#[test]
fn speedup_report_flags_a_positive_second_order_term() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(dir.path(), "expand", r#"{"fixture": "speedup-s2", "gamma": 0.05}"#, &[]);
    assert_eq!(code, EXIT_OK);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("expansion.json")).unwrap()).unwrap();
    assert_eq!(json["flags"][0]["d2_e2_positive"], true);

    let config = r#"{"fixture": "speedup-s2", "n_steps": 5000, "n_replicates": 200, "master_seed": 1}"#;
    assert_eq!(run(dir.path(), "speedup", config, &[]), EXIT_OK);
    let path = dir.path().join("speedup.csv");
    for name in ["d0_e2", "d2_e2", "v_hat_e2", "margin_stderr"] {
        let v: f64 = column(&path, name)[0].parse().unwrap();
        assert!(v.is_finite(), "{name} = {v}");
    }
}

#[test]
fn simulation_records_agreement_with_the_exact_speed() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"fixture": "d1-twopoint", "gamma": 0.1, "n_steps": 20000, "n_replicates": 100, "master_seed": 3}"#;
    assert_eq!(run(dir.path(), "simulate", config, &[]), EXIT_OK);
    assert_eq!(column(&dir.path().join("simulate.csv"), "within_3_stderr"), vec!["true"]);
}

#[test]
fn default_decay_run_fits_the_expected_exponent() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), "lemma4", "{}", &[]), EXIT_OK);
    let fitted: f64 = column(&dir.path().join("lemma4.csv"), "fitted_exponent")[0].parse().unwrap();
    assert!(fitted <= -0.45, "{fitted}");
}
