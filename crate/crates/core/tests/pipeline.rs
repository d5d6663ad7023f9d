mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Mutex;

use common::fixtures::{fast_config, small_dataset};
use paraboost_core::dataset::load_manifest;
use paraboost_core::depth::ExternalScorer;
use paraboost_core::features::{dump_features, write_feature_dump, FeatureExtractor, FeatureId};
use paraboost_core::paraboost::{
    cross_validate, cross_validate_observed, train, CvConfig, FoldPolicy, ParaboostModel, PipelineObserver, TrainingStage,
};
use paraboost_core::synth::write_dataset;
use paraboost_core::Error;

#[derive(Default)]
struct Recorder {
    fits: Mutex<Vec<(Option<usize>, TrainingStage, Vec<String>)>>,
}

impl PipelineObserver for Recorder {
    fn on_fit(&self, fold: Option<usize>, stage: TrainingStage, ids: &[&str]) {
        let ids = ids.iter().map(|s| s.to_string()).collect();
        self.fits.lock().unwrap().push((fold, stage, ids));
    }
}

fn cv(policy: FoldPolicy) -> CvConfig {
    CvConfig { folds: 4, policy, seed: 9 }
}

#[test]
fn pooled_predictions_cover_every_sample_once() {
    let samples = small_dataset(false);
    let out = cross_validate(&samples, &fast_config(&[3, 4]), &cv(FoldPolicy::Random)).unwrap();
    let ids: Vec<&str> = out.predictions.iter().map(|p| p.sample_id.as_str()).collect();
    let want: Vec<&str> = samples.iter().map(|s| s.id.as_str()).collect();
    assert_eq!(ids, want);
    let mut seen = BTreeSet::new();
    for (k, fold) in out.plan.folds.iter().enumerate() {
        for &i in fold {
            assert!(seen.insert(i));
            assert_eq!(out.predictions[i].fold, k);
        }
    }
    assert_eq!(seen.len(), samples.len());
    assert_eq!(out.report.n, samples.len());
}

#[test]
fn content_disjoint_folds_never_leak_sources() {
    let samples = small_dataset(false);
    let tag_of: BTreeMap<&str, &str> = samples.iter().map(|s| (s.id.as_str(), s.source_tag.as_str())).collect();
    let rec = Recorder::default();
    let out = cross_validate_observed(&samples, &fast_config(&[3, 4]), &cv(FoldPolicy::ContentDisjoint), &rec).unwrap();
    let fits = rec.fits.into_inner().unwrap();
    assert!(!fits.is_empty());
    for (fold, stage, ids) in &fits {
        let k = fold.expect("cross-validation fits carry a fold");
        let test_tags: BTreeSet<&str> = out.plan.folds[k].iter().map(|&i| samples[i].source_tag.as_str()).collect();
        for id in ids {
            assert!(!test_tags.contains(tag_of[id.as_str()]), "{stage:?} in fold {k} trained on {id}");
        }
    }
    let stages: BTreeSet<String> = fits.iter().map(|f| format!("{:?}", f.1)).collect();
    assert_eq!(stages.len(), 3);
}

#[test]
fn fixed_seed_gives_bit_identical_reports() {
    let samples = small_dataset(false);
    let cfg = fast_config(&[1, 3]);
    let a = cross_validate(&samples, &cfg, &cv(FoldPolicy::Random)).unwrap();
    let b = cross_validate(&samples, &cfg, &cv(FoldPolicy::Random)).unwrap();
    assert_eq!(a.report.to_csv(), b.report.to_csv());
    assert_eq!(a.report.pcc.map(f64::to_bits), b.report.pcc.map(f64::to_bits));
    assert_eq!(a.report.rmse.to_bits(), b.report.rmse.to_bits());
    assert_eq!(a.predictions_csv(), b.predictions_csv());
}

#[test]
fn bundle_round_trip_preserves_predictions() {
    let samples = small_dataset(true);
    let trained = train(&samples, &fast_config(&[3, 8])).unwrap();
    let dir = tempfile::tempdir().unwrap();
    trained.model.save(dir.path()).unwrap();
    let loaded = ParaboostModel::load(dir.path()).unwrap();
    assert_eq!(loaded, trained.model);
    let (ex1, ex2) = (trained.model.extractor().unwrap(), loaded.extractor().unwrap());
    for s in &samples {
        let (p, q) = (trained.model.predict(s, &ex1).unwrap(), loaded.predict(s, &ex2).unwrap());
        assert!((p - q).abs() <= 1e-15, "{}: {p} vs {q}", s.id);
    }
}

#[test]
fn manifest_and_feature_dump_are_byte_stable() {
    let samples = small_dataset(true);
    let dir = tempfile::tempdir().unwrap();
    let written = write_dataset(dir.path(), &samples[..6]).unwrap();
    let manifest = std::fs::read(dir.path().join("manifest.csv")).unwrap();
    write_dataset(dir.path(), &samples[..6]).unwrap();
    assert_eq!(manifest, std::fs::read(dir.path().join("manifest.csv")).unwrap());
    let header = String::from_utf8(manifest.clone()).unwrap().lines().next().unwrap().to_string();
    assert_eq!(
        header,
        "id,source_tag,distortion_tag,mos,ref_tex_1,ref_tex_2,dist_tex_1,dist_tex_2,ref_depth_1,ref_depth_2,dist_depth_1,dist_depth_2"
    );

    let reloaded = load_manifest(dir.path().join("manifest.csv")).unwrap();
    assert_eq!(reloaded.len(), written.len());
    let ex = FeatureExtractor::new(Default::default()).unwrap();
    let dump = |s| {
        let mut buf = Vec::new();
        write_feature_dump(&mut buf, &dump_features(&ex, s, &FeatureId::ALL).unwrap()).unwrap();
        buf
    };
    let first = dump(&reloaded);
    assert_eq!(first, dump(&reloaded));
    let again = load_manifest(dir.path().join("manifest.csv")).unwrap();
    assert_eq!(first, dump(&again));
    let text = String::from_utf8(first).unwrap();
    assert_eq!(text.lines().next(), Some("sample_id,view_index,feature_name,value"));
    assert_eq!(text.lines().count(), 1 + 6 * 2 * FeatureId::ALL.len());
}

#[cfg(unix)]
fn script(dir: &std::path::Path, name: &str, body: &str) -> ExternalScorer {
    use std::os::unix::fs::PermissionsExt;
    let path = dir.join(name);
    std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
    std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
    ExternalScorer::new(path)
}

#[cfg(unix)]
#[test]
fn external_scorer_joins_and_failures_skip_samples() {
    let data = tempfile::tempdir().unwrap();
    let samples = write_dataset(data.path(), &small_dataset(false)).unwrap();
    let bin = tempfile::tempdir().unwrap();

    let mut cfg = fast_config(&[3, 9]);
    cfg.external = Some(script(bin.path(), "half.sh", "echo 0.5"));
    let out = train(&samples, &cfg).unwrap();
    assert_eq!(out.model.scorer_ids(), vec![3, 9]);
    assert!(out.skipped.is_empty());

    // fails on every sample of the first content
    cfg.external = Some(script(bin.path(), "picky.sh", "case \"$1\" in *s0_*) exit 3;; esac\necho 7.5"));
    let out = train(&samples, &cfg).unwrap();
    assert_eq!(out.skipped.len(), 9);
    assert!(out.skipped.iter().all(|s| s.sample_id.starts_with("s0_")));
    assert_eq!(out.fitted.len(), samples.len() - 9);
}

#[test]
fn depth_scorer_requires_depth_maps() {
    let err = train(&small_dataset(false), &fast_config(&[8])).unwrap_err();
    assert!(matches!(err, Error::ProfileMismatch(_)), "{err}");
}

#[test]
fn too_few_samples_is_an_error() {
    let samples = small_dataset(false);
    let err = train(&samples[..8], &fast_config(&[3])).unwrap_err();
    assert!(matches!(err, Error::InsufficientData(_)), "{err}");
}
