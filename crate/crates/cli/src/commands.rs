use std::path::PathBuf;
use std::str::FromStr;

use anyhow::Context;
use debtlab::dataset::{generate, load_csv, make_variant_with, write_csv, CLASS_COLUMN, RESPONSE_COLUMN};
use debtlab::evalcv::{compare_models, ModelKind};
use debtlab::linreg::{diagnostics_with, fit_ols, partial_residuals, write_partial_csv, DiagnosticsConfig};
use debtlab::topdnn::{network_structure, run_topdnn};
use debtlab::{par, DatasetVariant, Table};
use serde_json::json;

use crate::args::{Cli, Command, Common};
use crate::config::RunConfig;
use crate::manifest::{sha256_file, Outputs, RunManifest};
use crate::Failure;

pub fn run(cli: Cli) -> Result<(), Failure> {
    let (name, common) = match &cli.command {
        Command::Gen(c) => ("gen", c),
        Command::Compare(a) => ("compare", &a.common),
        Command::Topdnn(a) => ("topdnn", &a.common),
        Command::Diagnose(a) => ("diagnose", &a.common),
    };
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    apply_common(&mut cfg, common);
    match &cli.command {
        Command::Gen(_) => {}
        Command::Compare(a) => {
            if let Some(f) = a.folds {
                cfg.compare.n_folds = f as usize;
            }
            if let Some(ms) = &a.models {
                cfg.compare.models = parse_list::<ModelKind>(ms)?;
            }
            if let Some(vs) = &a.variant {
                cfg.compare.variants = parse_list::<DatasetVariant>(vs)?;
            }
        }
        Command::Topdnn(a) => {
            if let Some(f) = a.folds {
                cfg.topdnn.n_folds = f as usize;
            }
            if a.no_class_layer {
                cfg.topdnn.include_class_layer = false;
            }
            if a.loading_init {
                cfg.topdnn.loading_init = true;
            }
        }
        Command::Diagnose(a) => {
            if let Some(v) = &a.variant {
                cfg.diagnose.variant = DatasetVariant::from_str(v).map_err(|e| Failure::Usage(e.to_string()))?;
            }
            if let Some(p) = &a.partial {
                cfg.diagnose.partial = p.clone();
            }
        }
    }

    let out_dir = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("runs/{name}-{}", cfg.seed)));
    let data_path = common.data.clone();
    let threads = common.threads;
    let command = cli.command;
    par::with_threads(threads, move || {
        let mut out = Outputs::create(out_dir)?;
        let data = load_data(data_path.as_ref(), &cfg)?;
        let summary = match &command {
            Command::Gen(_) => gen(&data, &cfg, &mut out)?,
            Command::Compare(_) => compare(&data, &cfg, &mut out)?,
            Command::Topdnn(_) => topdnn(&data, &cfg, &mut out)?,
            Command::Diagnose(_) => diagnose(&data, &cfg, &mut out)?,
        };
        let manifest = RunManifest {
            command: name.to_string(),
            seed: cfg.seed,
            output_dir: out.dir.display().to_string(),
            data_source: data_path
                .as_ref()
                .map_or_else(|| "generated".to_string(), |p| p.display().to_string()),
            input_sha256: data_path.as_ref().map(|p| sha256_file(p)).transpose()?,
            config: cfg,
            artifacts: out.artifacts.clone(),
            summary,
        };
        out.write_manifest(&manifest)?;
        println!("wrote {} artifacts and manifest.json to {}", out.artifacts.len(), out.dir.display());
        Ok(())
    })
}

fn apply_common(cfg: &mut RunConfig, c: &Common) {
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(r) = c.rows {
        cfg.generator.n_rows = r as usize;
    }
    // One seed drives the whole run.
    cfg.generator.seed = cfg.seed;
}

fn parse_list<T: FromStr<Err = debtlab::Error>>(items: &[String]) -> Result<Vec<T>, Failure> {
    let parsed = items
        .iter()
        .map(|s| T::from_str(s))
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    if parsed.is_empty() {
        return Err(Failure::Usage("empty list".into()));
    }
    Ok(parsed)
}

fn load_data(path: Option<&PathBuf>, cfg: &RunConfig) -> Result<Table, Failure> {
    match path {
        Some(p) => load_csv(p, RESPONSE_COLUMN, Some(CLASS_COLUMN))
            .with_context(|| format!("loading {}", p.display()))
            .map_err(Failure::Runtime),
        None => Ok(generate(&cfg.generator)?),
    }
}

fn class_counts(t: &Table) -> serde_json::Value {
    let labels = t.class_labels().unwrap_or_default();
    let counts: std::collections::BTreeMap<String, usize> = t
        .class_levels()
        .into_iter()
        .map(|k| (k.to_string(), labels.iter().filter(|&&l| l == k).count()))
        .collect();
    json!(counts)
}

fn gen(data: &Table, cfg: &RunConfig, out: &mut Outputs) -> Result<serde_json::Value, Failure> {
    for v in DatasetVariant::ALL {
        let t = make_variant_with(data, v, cfg.seed, &cfg.compare.expand)?;
        let name = format!("variant_{}.csv", v.tag());
        write_csv(&t, out.path(&name))?;
        out.record(&name)?;
        println!("variant {}: {} rows, {} columns", v.tag(), t.n_rows(), t.n_cols());
    }
    Ok(json!({ "n_rows": data.n_rows(), "class_counts": class_counts(data) }))
}

fn compare(data: &Table, cfg: &RunConfig, out: &mut Outputs) -> Result<serde_json::Value, Failure> {
    let table = compare_models(data, &cfg.compare, cfg.seed)?;
    table.write_csv(out.path("comparison.csv"))?;
    out.record("comparison.csv")?;
    let text = table.to_text();
    out.write("comparison.txt", &text)?;
    print!("{text}");

    let mut folds = String::from("model,dataset,fold,n_train,n_test,rmse,r2,epochs\n");
    let mut cells = Vec::new();
    for row in &table.rows {
        match &row.report {
            Some(r) => {
                for f in &r.per_fold {
                    folds.push_str(&format!(
                        "{},{},{},{},{},{},{},{}\n",
                        row.model.tag(),
                        row.dataset.tag(),
                        f.fold,
                        f.n_train,
                        f.n_test,
                        f.rmse,
                        f.r2,
                        f.epochs.map_or(String::new(), |e| e.to_string())
                    ));
                }
                cells.push(json!({
                    "model": row.model.tag(), "dataset": row.dataset.tag(),
                    "rmse": r.rmse_mean, "r2": r.r2_mean, "hidden": r.selected_hyper,
                }));
            }
            None => cells.push(json!({
                "model": row.model.tag(), "dataset": row.dataset.tag(), "error": row.error,
            })),
        }
    }
    out.write("folds.csv", folds)?;
    Ok(json!({ "n_rows": data.n_rows(), "plan_digest": table.plan_digest, "cells": cells }))
}

fn topdnn(data: &Table, cfg: &RunConfig, out: &mut Outputs) -> Result<serde_json::Value, Failure> {
    let report = run_topdnn(data, &cfg.topdnn, cfg.seed)?;
    let text = report.to_text();
    out.write("topdnn.txt", &text)?;
    print!("{text}");
    out.write("topdnn.json", serde_json::to_string_pretty(&report).context("serializing report")?)?;
    report.evidence.scree.write_csv(out.path("scree.csv"))?;
    out.record("scree.csv")?;
    report.factor_model.write_csv(out.path("loadings.csv"))?;
    out.record("loadings.csv")?;
    let file_names = ["network_factors.json", "network_factors_classes.json"];
    for (v, file) in report.variants.iter().zip(file_names) {
        let s = network_structure(&v.network, &v.input_names, &v.label);
        out.write(file, serde_json::to_string_pretty(&s).context("serializing structure")?)?;
    }
    let variants: Vec<_> = report
        .variants
        .iter()
        .map(|v| {
            json!({
                "label": v.label, "hidden_sizes": v.hidden_sizes,
                "rmse": v.report.rmse_mean, "r2": v.report.r2_mean,
                "mean_epochs": v.report.mean_epochs(),
            })
        })
        .collect();
    Ok(json!({
        "n_factors": report.plan.n_factors,
        "n_classes": report.plan.n_classes,
        "scree_suggested": report.evidence.scree.suggested,
        "init": if report.plan.loading_init { "loadings" } else { "random" },
        "variants": variants,
        "convergence": report.convergence,
    }))
}

fn diagnose(data: &Table, cfg: &RunConfig, out: &mut Outputs) -> Result<serde_json::Value, Failure> {
    let d = &cfg.diagnose;
    let t = make_variant_with(data, d.variant, cfg.seed, &cfg.compare.expand)?;
    let available = t.predictor_names();
    if !available.iter().any(|n| *n == d.partial) {
        return Err(Failure::Usage(format!(
            "unknown predictor '{}' for --partial (available: {})",
            d.partial,
            available.join(", ")
        )));
    }
    let model = fit_ols(&t)?;
    let bundle = diagnostics_with(
        &model,
        &DiagnosticsConfig {
            hetero_threshold: d.hetero_threshold,
        },
    )?;
    bundle.write_residuals_csv(out.path("residuals.csv"))?;
    out.record("residuals.csv")?;
    bundle.write_qq_csv(out.path("qq.csv"))?;
    out.record("qq.csv")?;
    let partial_name = format!("partial_{}.csv", d.partial);
    write_partial_csv(&partial_residuals(&model, &t, &d.partial)?, out.path(&partial_name))?;
    out.record(&partial_name)?;
    println!(
        "variant {}: R2 {:.4}, residual-variance R2 {:.4}{}",
        d.variant,
        model.r_squared(),
        bundle.breusch_pagan_r2,
        if bundle.heteroscedastic { " (non-constant variance)" } else { "" }
    );
    let coefficients: std::collections::BTreeMap<_, _> =
        model.predictor_names.iter().cloned().zip(model.coefficients.iter().copied()).collect();
    Ok(json!({
        "variant": d.variant.tag(),
        "r2": model.r_squared(),
        "intercept": model.intercept,
        "coefficients": coefficients,
        "breusch_pagan_r2": bundle.breusch_pagan_r2,
        "heteroscedastic": bundle.heteroscedastic,
    }))
}
