//! The four batch commands. Every file they write lands under `cfg.out`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use paraboost_core::dataset::load_manifest;
use paraboost_core::features::{dump_features, write_feature_dump_file, FeatureExtractor, FeatureId};
use paraboost_core::paraboost::{
    cross_validate, fusion_table_csv, progressive_fusion_report, train, CvConfig, ParaboostModel, ScorerSpec, SkipEntry,
};
use paraboost_core::{Error, Sample};

use crate::config::RunConfig;
use crate::CliError;

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::runtime(format!("writing {}: {e}", path.display())))?;
    log::info!("wrote {}", path.display());
    Ok(path)
}

fn prepare_out(cfg: &RunConfig, command: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(&cfg.out)
        .map_err(|e| CliError::runtime(format!("creating {}: {e}", cfg.out.display())))?;
    let resolved = serde_json::to_string_pretty(cfg).expect("config serializes");
    log::info!("{command}: resolved configuration\n{resolved}");
    write(&cfg.out, "run_config.json", &format!("{resolved}\n"))?;
    Ok(())
}

fn skip_csv(skipped: &[SkipEntry]) -> String {
    let mut out = String::from("sample_id,reason\n");
    for s in skipped {
        let _ = writeln!(out, "{},\"{}\"", s.sample_id, s.reason.replace('"', "'"));
    }
    out
}

fn load(cfg: &RunConfig) -> Result<Vec<Sample>, CliError> {
    let samples = load_manifest(cfg.manifest()?)?;
    log::info!("loaded {} samples from {}", samples.len(), cfg.manifest()?.display());
    Ok(samples)
}

pub fn train_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    prepare_out(cfg, "train")?;
    if cfg.model.is_some() {
        log::warn!("--model is ignored by train; the bundle is written to {}", cfg.out.join("model").display());
    }
    let samples = load(cfg)?;
    let out = train(&samples, &cfg.pipeline)?;
    let bundle = cfg.out.join("model");
    out.model.save(&bundle)?;
    log::info!("saved bundle with scorers {:?} to {}", out.model.scorer_ids(), bundle.display());
    write(&cfg.out, "training_log.csv", &out.log.grid_table_csv())?;
    let mut fitted = String::from("sample_id,predicted_mos\n");
    for (id, v) in &out.fitted {
        let _ = writeln!(fitted, "{id},{v}");
    }
    write(&cfg.out, "fitted.csv", &fitted)?;
    write(&cfg.out, "skipped.csv", &skip_csv(&out.skipped))?;
    if !out.skipped.is_empty() {
        log::warn!("{} samples skipped during training", out.skipped.len());
    }
    Ok(())
}

pub fn predict_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    prepare_out(cfg, "predict")?;
    let model_dir = cfg.model.as_deref().ok_or_else(|| CliError::config("--model is required"))?;
    let model = ParaboostModel::load(model_dir)?;
    let samples = load(cfg)?;
    if samples.is_empty() {
        log::warn!("manifest has no samples; writing an empty prediction file");
    }
    let extractor = model.extractor()?;
    let mut csv = String::from("sample_id,predicted_mos\n");
    let mut skipped = Vec::new();
    for s in &samples {
        model.check_profile(s)?;
        match model.predict(s, &extractor) {
            Ok(v) => {
                let _ = writeln!(csv, "{},{v}", s.id);
            }
            Err(e) => {
                log::warn!("skipping sample '{}': {e}", s.id);
                skipped.push(SkipEntry {
                    sample_id: s.id.clone(),
                    reason: e.to_string(),
                });
            }
        }
    }
    write(&cfg.out, "predictions.csv", &csv)?;
    write(&cfg.out, "skipped.csv", &skip_csv(&skipped))?;
    Ok(())
}

pub fn crossval_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    prepare_out(cfg, "crossval")?;
    let samples = load(cfg)?;
    let cv = CvConfig {
        folds: cfg.folds,
        policy: cfg.fold_policy,
        seed: cfg.seed,
    };
    let out = cross_validate(&samples, &cfg.pipeline, &cv)?;
    write(&cfg.out, "report.csv", &out.report.to_csv())?;
    write(&cfg.out, "predictions.csv", &out.predictions_csv())?;
    write(&cfg.out, "skipped.csv", &skip_csv(&out.skipped))?;

    let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
    let dataset = cfg
        .manifest()?
        .parent()
        .and_then(|p| p.file_name())
        .map_or_else(|| "dataset".to_string(), |n| n.to_string_lossy().into_owned());
    let mut table = String::from("dataset,stage,n,pcc,srocc,rmse\n");
    let _ = writeln!(table, "{dataset},fused,{},{},{},{}", out.report.n, opt(out.report.pcc), opt(out.report.srocc), out.report.rmse);
    for (id, r) in &out.scorer_reports {
        let name = ScorerSpec::standard(*id).map(|s| s.name).unwrap_or_default();
        let _ = writeln!(table, "{dataset},scorer_{id}_{name},{},{},{},{}", r.n, opt(r.pcc), opt(r.srocc), r.rmse);
    }
    write(&cfg.out, "performance_table.csv", &table)?;

    if let Some(order) = &cfg.progressive {
        let rows = progressive_fusion_report(&samples, order, &cfg.pipeline, &cv)?;
        write(&cfg.out, "fusion_table.csv", &fusion_table_csv(&rows))?;
    }
    println!("{}", out.report);
    Ok(())
}

pub fn features_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    prepare_out(cfg, "features")?;
    let ids: Vec<FeatureId> = match (&cfg.feature_names, &cfg.pipeline.scorers) {
        (Some(names), _) => names.iter().map(|n| FeatureId::from_str(n)).collect::<Result<_, Error>>()?,
        (None, Some(scorers)) => {
            let mut ids = Vec::new();
            for &id in scorers {
                for f in ScorerSpec::standard(id)?.features {
                    if !ids.contains(&f) {
                        ids.push(f);
                    }
                }
            }
            ids
        }
        (None, None) => FeatureId::ALL.to_vec(),
    };
    if ids.is_empty() {
        return Err(CliError::config("no features selected"));
    }
    let samples = load(cfg)?;
    let extractor = FeatureExtractor::new(cfg.pipeline.features.clone())?;
    let records = dump_features(&extractor, &samples, &ids)?;
    let path = cfg.out.join("features.csv");
    write_feature_dump_file(&path, &records)?;
    log::info!("wrote {} feature rows to {}", records.len(), path.display());
    Ok(())
}
