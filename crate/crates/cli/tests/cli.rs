use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const FAST_COMPARE: &str = "[compare]\nhidden_sizes = [1, 2]\n[compare.forest]\nn_trees = 20\n\
[compare.backprop]\nmax_epochs = 30\n[compare.rprop]\nmax_epochs = 30\n";

fn debtlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_debtlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = debtlab(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn fast_config(dir: &Path) -> PathBuf {
    let p = dir.join("fast.toml");
    std::fs::write(&p, FAST_COMPARE).unwrap();
    p
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn gen_writes_four_variants_with_stable_checksums() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        ok(&["gen", "--rows", "300", "--seed", "7", "--out", s(d)]);
    }
    let (ma, mb) = (manifest(&a), manifest(&b));
    let names: Vec<&String> = ma["artifacts"].as_object().unwrap().keys().collect();
    assert_eq!(names, ["variant_A.csv", "variant_B.csv", "variant_C.csv", "variant_D.csv"]);
    assert_eq!(ma["artifacts"], mb["artifacts"]);
    assert_eq!(ma["config"], mb["config"]);
    for n in names {
        assert_eq!(std::fs::read(a.join(n)).unwrap(), std::fs::read(b.join(n)).unwrap());
    }
    assert_eq!(ma["command"], "gen");
    assert_eq!(ma["seed"], 7);
    assert_eq!(ma["config"]["generator"]["n_rows"], 300);
}

#[test]
fn usage_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = s(tmp.path());
    assert_eq!(debtlab(&["gen", "--rows", "0", "--out", out]).status.code(), Some(2));
    assert_eq!(debtlab(&["compare", "--models", "nope", "--out", out]).status.code(), Some(2));
    assert_eq!(debtlab(&["compare", "--variant", "E", "--out", out]).status.code(), Some(2));
    assert_eq!(debtlab(&["frobnicate"]).status.code(), Some(2));
    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "seed = \"seven\"\n").unwrap();
    assert_eq!(debtlab(&["gen", "--config", s(&bad), "--out", out]).status.code(), Some(2));
}

#[test]
fn unwritable_output_is_runtime_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("plain");
    std::fs::write(&file, "x").unwrap();
    let out = debtlab(&["gen", "--rows", "50", "--out", s(&file.join("sub"))]);
    assert_eq!(out.status.code(), Some(1));
    let missing = debtlab(&["gen", "--data", s(&tmp.path().join("none.csv")), "--out", s(tmp.path())]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn compare_filters_and_records_folds() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = fast_config(tmp.path());
    let full = tmp.path().join("full");
    let out = ok(&["compare", "--rows", "300", "--config", s(&cfg), "--out", s(&full)]);
    assert_eq!(csv_rows(&full.join("comparison.csv")).len(), 16);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("Resilient"));

    let lin = tmp.path().join("lin");
    ok(&["compare", "--rows", "300", "--models", "linreg", "--folds", "5", "--config", s(&cfg), "--out", s(&lin)]);
    let rows = csv_rows(&lin.join("comparison.csv"));
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[0] == "Linear Regression" && r[6] == "5"));
    let m = manifest(&lin);
    assert_eq!(m["config"]["compare"]["n_folds"], 5);
    assert_eq!(csv_rows(&lin.join("folds.csv")).len(), 20);
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, r#"{"seed": 3, "compare": {"n_folds": 4, "models": ["Linear"]}}"#).unwrap();
    let a = tmp.path().join("a");
    ok(&["compare", "--rows", "200", "--config", s(&cfg), "--variant", "B", "--out", s(&a)]);
    let m = manifest(&a);
    assert_eq!(m["seed"], 3);
    assert_eq!(m["config"]["generator"]["seed"], 3);
    assert_eq!(m["config"]["compare"]["n_folds"], 4);
    let b = tmp.path().join("b");
    ok(&["compare", "--rows", "200", "--config", s(&cfg), "--variant", "B", "--seed", "5", "--folds", "2", "--out", s(&b)]);
    let m = manifest(&b);
    assert_eq!(m["seed"], 5);
    assert_eq!(m["config"]["compare"]["n_folds"], 2);
    assert_eq!(csv_rows(&b.join("comparison.csv")).len(), 1);
}

#[test]
fn topdnn_reports_both_networks_and_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("t.toml");
    std::fs::write(&cfg, "[topdnn]\nn_folds = 3\n[topdnn.factor]\nn_sims = 40\n[topdnn.train]\nmax_epochs = 80\n").unwrap();

    let full = tmp.path().join("full");
    let out = ok(&["topdnn", "--rows", "2000", "--config", s(&cfg), "--out", s(&full)]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("factors: 3"), "{text}");
    let m = manifest(&full);
    assert_eq!(m["summary"]["n_factors"], 3);
    let hidden: Vec<&Value> = m["summary"]["variants"].as_array().unwrap().iter().map(|v| &v["hidden_sizes"]).collect();
    assert_eq!(hidden, [&serde_json::json!([3]), &serde_json::json!([3, 8])]);
    assert_eq!(m["summary"]["init"], "random");
    for f in ["scree.csv", "loadings.csv", "topdnn.txt", "topdnn.json", "network_factors.json", "network_factors_classes.json"] {
        assert!(m["artifacts"][f].is_string(), "{f}");
    }
    let net: Value = serde_json::from_str(&std::fs::read_to_string(full.join("network_factors_classes.json")).unwrap()).unwrap();
    assert_eq!(net["layer_sizes"], serde_json::json!([9, 3, 8, 1]));

    let single = tmp.path().join("single");
    ok(&["topdnn", "--rows", "2000", "--no-class-layer", "--config", s(&cfg), "--out", s(&single)]);
    let m = manifest(&single);
    assert_eq!(m["summary"]["variants"].as_array().unwrap().len(), 1);
    assert!(!single.join("network_factors_classes.json").exists());

    let init = tmp.path().join("init");
    ok(&["topdnn", "--rows", "2000", "--loading-init", "--config", s(&cfg), "--out", s(&init)]);
    let m = manifest(&init);
    assert_eq!(m["summary"]["init"], "loadings");
    assert_eq!(m["config"]["topdnn"]["loading_init"], true);
    assert!(m["summary"]["convergence"]["mean_epochs_random"].as_f64().unwrap() > 0.0);
    assert!(m["summary"]["convergence"]["mean_epochs_loading"].as_f64().unwrap() > 0.0);
}

#[test]
fn diagnose_outputs_reload_orthogonal() {
    let tmp = tempfile::tempdir().unwrap();
    let (g, d) = (tmp.path().join("g"), tmp.path().join("d"));
    ok(&["gen", "--rows", "800", "--seed", "11", "--out", s(&g)]);
    ok(&["diagnose", "--rows", "800", "--seed", "11", "--variant", "D", "--partial", "housingfactor", "--out", s(&d)]);
    let names: Vec<String> = manifest(&d)["artifacts"].as_object().unwrap().keys().cloned().collect();
    assert_eq!(names, ["partial_housingfactor.csv", "qq.csv", "residuals.csv"]);

    let res = csv_rows(&d.join("residuals.csv"));
    let fitted: Vec<f64> = res.iter().map(|r| r[0].parse().unwrap()).collect();
    let resid: Vec<f64> = res.iter().map(|r| r[1].parse().unwrap()).collect();
    let scale = resid.iter().map(|r| r * r).sum::<f64>().sqrt();
    let dot = |a: &[f64]| a.iter().zip(&resid).map(|(x, r)| x * r).sum::<f64>();
    assert!(resid.iter().sum::<f64>().abs() < 1e-8 * scale * 800f64.sqrt());
    assert!(dot(&fitted).abs() < 1e-8 * scale * fitted.iter().map(|f| f * f).sum::<f64>().sqrt());

    // Residuals are orthogonal to every numeric predictor of the variant they came from.
    let mut reader = csv::Reader::from_path(g.join("variant_D.csv")).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    let rows: Vec<Vec<f64>> = reader
        .records()
        .map(|r| r.unwrap().iter().map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), resid.len());
    for (j, name) in header.iter().enumerate() {
        if name == "udebt" || name == "class" {
            continue;
        }
        let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(dot(&col).abs() < 1e-8 * scale * norm, "{name}");
    }
    let partial = csv_rows(&d.join("partial_housingfactor.csv"));
    assert_eq!(partial.len(), 800);

    // The same table supplied with --data gives the same diagnostics.
    let from_file = tmp.path().join("f");
    ok(&["diagnose", "--data", s(&g.join("variant_D.csv")), "--seed", "11", "--out", s(&from_file)]);
    let mf = manifest(&from_file);
    assert_eq!(mf["artifacts"], manifest(&d)["artifacts"]);
    assert!(mf["input_sha256"].is_string());
}

#[test]
fn unknown_partial_lists_predictors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = debtlab(&["diagnose", "--rows", "200", "--partial", "nosuchcol", "--out", s(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("nosuchcol") && err.contains("housingfactor") && err.contains("Leisure"), "{err}");
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = fast_config(tmp.path());
    let mut sums = Vec::new();
    for t in ["1", "0", "3"] {
        let d = tmp.path().join(format!("t{t}"));
        ok(&["compare", "--rows", "300", "--threads", t, "--config", s(&cfg), "--out", s(&d)]);
        sums.push(manifest(&d)["artifacts"].clone());
    }
    assert_eq!(sums[0], sums[1]);
    assert_eq!(sums[0], sums[2]);
}
