//! Training, cross-validation and progressive-fusion drivers.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::{FoldPlan, FoldPolicy};
use super::model::{DatasetProfile, MosNormalization, ParaboostModel, ScoreVector};
use super::scorer::{clamp_score, extract_scorer_features, ScorerSpec, DEPTH_SCORER_ID, EXTERNAL_SCORER_ID};
use crate::dataset::Sample;
use crate::depth::ExternalScorer;
use crate::error::{Error, Result};
use crate::eval::{evaluate, performance_gain, EvalReport};
use crate::features::{FeatureConfig, FeatureExtractor};
use crate::svr::{fit_svr, fold_assignment, train_with_search, GridResult, SvrConfig, SvrModel, SvrParams};

/// Smallest training set a scorer or fuser is fit on.
pub const MIN_TRAINING_SAMPLES: usize = 10;

/// Which stage-I outputs the fuser is trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FuserInput {
    /// Scorer predictions on their own training samples.
    #[default]
    InSample,
    /// Scorer predictions from an inner k-fold split of the training set,
    /// each made by a model that did not see the sample.
    OutOfFold { folds: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParaboostConfig {
    pub features: FeatureConfig,
    pub scorer_svr: SvrConfig,
    pub fuser_svr: SvrConfig,
    /// Active scorer ids; `None` selects 1-7, plus 8 with depth maps and 9
    /// with an external command.
    pub scorers: Option<Vec<u8>>,
    pub external: Option<ExternalScorer>,
    pub fuser_input: FuserInput,
    pub seed: u64,
}

impl Default for ParaboostConfig {
    fn default() -> Self {
        ParaboostConfig {
            features: FeatureConfig::default(),
            scorer_svr: SvrConfig::default(),
            fuser_svr: SvrConfig::default(),
            scorers: None,
            external: None,
            fuser_input: FuserInput::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrainingStage {
    Scorer(u8),
    Fuser,
}

/// Sees the sample ids behind every model fit (scaling, grid search and
/// final fit all use exactly these samples).
pub trait PipelineObserver: Sync {
    fn on_fit(&self, fold: Option<usize>, stage: TrainingStage, sample_ids: &[&str]);
}

pub struct NoObserver;

impl PipelineObserver for NoObserver {
    fn on_fit(&self, _: Option<usize>, _: TrainingStage, _: &[&str]) {}
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipEntry {
    pub sample_id: String,
    pub reason: String,
}

/// Scorer specs for a dataset profile, validated against it.
pub fn resolve_scorers(profile: DatasetProfile, cfg: &ParaboostConfig) -> Result<Vec<ScorerSpec>> {
    let mut ids = cfg.scorers.clone().unwrap_or_else(|| {
        let mut d: Vec<u8> = (1..=7).collect();
        if profile.has_depth {
            d.push(DEPTH_SCORER_ID);
        }
        if cfg.external.is_some() {
            d.push(EXTERNAL_SCORER_ID);
        }
        d
    });
    ids.sort_unstable();
    ids.dedup();
    if ids.is_empty() {
        return Err(Error::InvalidParameter("no scorers selected".into()));
    }
    if ids.contains(&DEPTH_SCORER_ID) && !profile.has_depth {
        return Err(Error::ProfileMismatch(
            "scorer 8 needs depth maps but the dataset has no depth columns".into(),
        ));
    }
    if ids.contains(&EXTERNAL_SCORER_ID) && cfg.external.is_none() {
        return Err(Error::InvalidParameter("scorer 9 needs an external scorer command".into()));
    }
    ids.into_iter().map(ScorerSpec::standard).collect()
}

fn mix_seed(base: u64, fold: u64, stage: u64) -> u64 {
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(fold.wrapping_mul(0x0001_0000_0001))
        .wrapping_add(stage)
}

/// Stage-I inputs for the usable samples: per spec, the feature vector
/// (learned scorers) or the single clamped external score.
struct FeatureCache {
    usable: Vec<usize>,
    inputs: Vec<Vec<Vec<f64>>>,
    skipped: Vec<SkipEntry>,
}

fn build_cache(samples: &[Sample], specs: &[ScorerSpec], extractor: &FeatureExtractor, external: Option<&ExternalScorer>) -> FeatureCache {
    let per_sample: Vec<std::result::Result<Vec<Vec<f64>>, String>> = samples
        .par_iter()
        .map(|sample| {
            specs
                .iter()
                .map(|spec| {
                    if spec.is_learned() {
                        extract_scorer_features(spec, sample, extractor)
                    } else {
                        let ext = external.expect("resolve_scorers requires a command for scorer 9");
                        ext.score(sample).map(|v| vec![clamp_score(v)])
                    }
                })
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.to_string())
        })
        .collect();
    let mut cache = FeatureCache {
        usable: Vec::new(),
        inputs: Vec::new(),
        skipped: Vec::new(),
    };
    for (i, r) in per_sample.into_iter().enumerate() {
        match r {
            Ok(v) => {
                cache.usable.push(i);
                cache.inputs.push(v);
            }
            Err(reason) => {
                log::warn!("skipping sample '{}': {reason}", samples[i].id);
                cache.skipped.push(SkipEntry {
                    sample_id: samples[i].id.clone(),
                    reason,
                });
            }
        }
    }
    cache
}

struct StageOne {
    norm: MosNormalization,
    /// Aligned with the specs; `None` for the external scorer.
    models: Vec<Option<(SvrModel, GridResult)>>,
    /// Fuser training inputs, one row per training position.
    train_scores: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

struct Ctx<'a> {
    samples: &'a [Sample],
    specs: &'a [ScorerSpec],
    cache: &'a FeatureCache,
    cfg: &'a ParaboostConfig,
    observer: &'a dyn PipelineObserver,
}

impl Ctx<'_> {
    fn sample(&self, pos: usize) -> &Sample {
        &self.samples[self.cache.usable[pos]]
    }

    fn ids(&self, positions: &[usize]) -> Vec<&str> {
        positions.iter().map(|&p| self.sample(p).id.as_str()).collect()
    }

    /// Fits every scorer on `train` (cache positions).
    fn fit_stage_one(&self, train: &[usize], fold: Option<usize>) -> Result<StageOne> {
        if train.len() < MIN_TRAINING_SAMPLES {
            return Err(Error::InsufficientData(format!(
                "{} training samples, need at least {MIN_TRAINING_SAMPLES}",
                train.len()
            )));
        }
        let mos: Vec<f64> = train.iter().map(|&p| self.sample(p).mos).collect();
        let norm = MosNormalization::fit(&mos)?;
        let targets: Vec<f64> = mos.iter().map(|&m| norm.to_unit(m)).collect();
        let ids = self.ids(train);
        let fold_tag = fold.map_or(u64::MAX, |f| f as u64);
        let fitted: Vec<(Option<(SvrModel, GridResult)>, Vec<f64>)> = self
            .specs
            .par_iter()
            .enumerate()
            .map(|(j, spec)| {
                let rows: Vec<Vec<f64>> = train.iter().map(|&p| self.cache.inputs[p][j].clone()).collect();
                if !spec.is_learned() {
                    return Ok((None, rows.iter().map(|r| r[0]).collect()));
                }
                self.observer.on_fit(fold, TrainingStage::Scorer(spec.id), &ids);
                let seed = mix_seed(self.cfg.seed, fold_tag, spec.id as u64);
                let (model, grid) = train_with_search(&rows, &targets, &self.cfg.scorer_svr, seed)?;
                let column = match self.cfg.fuser_input {
                    FuserInput::InSample => rows
                        .iter()
                        .map(|r| model.predict(r).map(clamp_score))
                        .collect::<Result<Vec<_>>>()?,
                    FuserInput::OutOfFold { folds } => {
                        let params = SvrParams {
                            c: grid.best.c,
                            gamma: grid.best.gamma,
                            nu: self.cfg.scorer_svr.nu,
                            solver: self.cfg.scorer_svr.solver,
                        };
                        self.out_of_fold(&rows, &targets, train, folds, &params, fold, spec.id, seed)?
                    }
                };
                Ok((Some((model, grid)), column))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut train_scores = vec![Vec::with_capacity(self.specs.len()); train.len()];
        let mut models = Vec::with_capacity(self.specs.len());
        for (model, column) in fitted {
            for (row, v) in train_scores.iter_mut().zip(column) {
                row.push(v);
            }
            models.push(model);
        }
        Ok(StageOne {
            norm,
            models,
            train_scores,
            targets,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn out_of_fold(
        &self,
        rows: &[Vec<f64>],
        targets: &[f64],
        train: &[usize],
        folds: usize,
        params: &SvrParams,
        fold: Option<usize>,
        id: u8,
        seed: u64,
    ) -> Result<Vec<f64>> {
        if folds < 2 || folds > rows.len() {
            return Err(Error::InvalidParameter(format!(
                "out-of-fold fuser input needs 2..={} folds, got {folds}",
                rows.len()
            )));
        }
        let assign = fold_assignment(rows.len(), folds, seed ^ 0x5151);
        let mut out = vec![0.0; rows.len()];
        for k in 0..folds {
            let inner: Vec<usize> = (0..rows.len()).filter(|&i| assign[i] != k).collect();
            let inner_pos: Vec<usize> = inner.iter().map(|&i| train[i]).collect();
            self.observer.on_fit(fold, TrainingStage::Scorer(id), &self.ids(&inner_pos));
            let x: Vec<Vec<f64>> = inner.iter().map(|&i| rows[i].clone()).collect();
            let y: Vec<f64> = inner.iter().map(|&i| targets[i]).collect();
            let model = fit_svr(&x, &y, params)?;
            for i in (0..rows.len()).filter(|&i| assign[i] == k) {
                out[i] = clamp_score(model.predict(&rows[i])?);
            }
        }
        Ok(out)
    }

    /// Stage-I outputs of a fitted stage on arbitrary cache positions.
    fn scores(&self, stage: &StageOne, positions: &[usize]) -> Result<Vec<Vec<f64>>> {
        positions
            .iter()
            .map(|&p| {
                stage
                    .models
                    .iter()
                    .enumerate()
                    .map(|(j, m)| match m {
                        Some((model, _)) => model.predict(&self.cache.inputs[p][j]).map(clamp_score),
                        None => Ok(self.cache.inputs[p][j][0]),
                    })
                    .collect()
            })
            .collect()
    }

    fn fit_fuser(&self, stage: &StageOne, columns: &[usize], train: &[usize], fold: Option<usize>) -> Result<(SvrModel, GridResult)> {
        self.observer.on_fit(fold, TrainingStage::Fuser, &self.ids(train));
        let rows: Vec<Vec<f64>> = stage
            .train_scores
            .iter()
            .map(|r| columns.iter().map(|&c| r[c]).collect())
            .collect();
        let seed = mix_seed(self.cfg.seed, fold.map_or(u64::MAX, |f| f as u64), 1000);
        train_with_search(&rows, &stage.targets, &self.cfg.fuser_svr, seed)
    }
}

/// Grid-search tables from a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub scorer_grids: BTreeMap<u8, GridResult>,
    pub fuser_grid: GridResult,
}

impl TrainingLog {
    /// `stage,C,gamma,cv_mse,selected` rows for every evaluated cell.
    pub fn grid_table_csv(&self) -> String {
        let mut out = String::from("stage,C,gamma,cv_mse,selected\n");
        let stages = self
            .scorer_grids
            .iter()
            .map(|(id, g)| (format!("scorer_{id}"), g))
            .chain(std::iter::once(("fuser".to_string(), &self.fuser_grid)));
        for (name, g) in stages {
            for cell in &g.cells {
                let selected = cell.c == g.best.c && cell.gamma == g.best.gamma;
                let _ = writeln!(out, "{name},{},{},{},{}", cell.c, cell.gamma, cell.cv_mse, selected as u8);
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ParaboostModel,
    pub log: TrainingLog,
    pub skipped: Vec<SkipEntry>,
    /// `(sample id, predicted MOS)` for every training sample.
    pub fitted: Vec<(String, f64)>,
}

/// Trains all scorers and the fuser on every usable sample.
pub fn train(samples: &[Sample], cfg: &ParaboostConfig) -> Result<TrainOutcome> {
    train_observed(samples, cfg, &NoObserver)
}

pub fn train_observed(samples: &[Sample], cfg: &ParaboostConfig, observer: &dyn PipelineObserver) -> Result<TrainOutcome> {
    let profile = DatasetProfile::of_dataset(samples)?;
    let specs = resolve_scorers(profile, cfg)?;
    let extractor = FeatureExtractor::new(cfg.features.clone())?;
    let cache = build_cache(samples, &specs, &extractor, cfg.external.as_ref());
    let ctx = Ctx {
        samples,
        specs: &specs,
        cache: &cache,
        cfg,
        observer,
    };
    let all: Vec<usize> = (0..cache.usable.len()).collect();
    let stage = ctx.fit_stage_one(&all, None)?;
    let columns: Vec<usize> = (0..specs.len()).collect();
    let (fuser, fuser_grid) = ctx.fit_fuser(&stage, &columns, &all, None)?;
    let in_sample = ctx.scores(&stage, &all)?;
    let fitted = all
        .iter()
        .zip(&in_sample)
        .map(|(&p, s)| Ok((ctx.sample(p).id.clone(), stage.norm.from_unit(fuser.predict(s)?))))
        .collect::<Result<Vec<_>>>()?;
    let mut scorer_models = BTreeMap::new();
    let mut scorer_grids = BTreeMap::new();
    for (spec, m) in specs.iter().zip(stage.models) {
        if let Some((model, grid)) = m {
            scorer_models.insert(spec.id, model);
            scorer_grids.insert(spec.id, grid);
        }
    }
    Ok(TrainOutcome {
        model: ParaboostModel {
            profile,
            scorers: specs,
            scorer_models,
            fuser,
            mos_normalization: stage.norm,
            features: cfg.features.clone(),
            external: cfg.external.clone(),
        },
        log: TrainingLog {
            scorer_grids,
            fuser_grid,
        },
        skipped: cache.skipped,
        fitted,
    })
}

/// Trains the fuser on precomputed score vectors and raw MOS targets
/// (normalized internally to `[0, 1]`).
pub fn train_fuser(score_vectors: &[ScoreVector], mos: &[f64], svr: &SvrConfig, seed: u64) -> Result<(SvrModel, MosNormalization, GridResult)> {
    if score_vectors.len() < MIN_TRAINING_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "{} score vectors, need at least {MIN_TRAINING_SAMPLES}",
            score_vectors.len()
        )));
    }
    let norm = MosNormalization::fit(mos)?;
    let targets: Vec<f64> = mos.iter().map(|&m| norm.to_unit(m)).collect();
    let rows: Vec<Vec<f64>> = score_vectors.iter().map(|v| v.scores.clone()).collect();
    let (model, grid) = train_with_search(&rows, &targets, svr, seed)?;
    Ok((model, norm, grid))
}

/// Trains one scorer on raw samples (MOS normalized internally).
pub fn train_scorer(spec: &ScorerSpec, samples: &[Sample], extractor: &FeatureExtractor, svr: &SvrConfig, seed: u64) -> Result<(SvrModel, MosNormalization, GridResult)> {
    if !spec.is_learned() {
        return Err(Error::InvalidParameter(format!("scorer {} is not trainable", spec.id)));
    }
    if samples.len() < MIN_TRAINING_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "{} samples, need at least {MIN_TRAINING_SAMPLES}",
            samples.len()
        )));
    }
    let rows = samples
        .par_iter()
        .map(|s| extract_scorer_features(spec, s, extractor))
        .collect::<Result<Vec<_>>>()?;
    let mos: Vec<f64> = samples.iter().map(|s| s.mos).collect();
    let norm = MosNormalization::fit(&mos)?;
    let targets: Vec<f64> = mos.iter().map(|&m| norm.to_unit(m)).collect();
    let (model, grid) = train_with_search(&rows, &targets, svr, seed)?;
    Ok((model, norm, grid))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub policy: FoldPolicy,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 10,
            policy: FoldPolicy::Random,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvPrediction {
    pub sample_id: String,
    pub fold: usize,
    pub mos: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    /// Pooled test predictions in dataset order.
    pub predictions: Vec<CvPrediction>,
    pub report: EvalReport,
    /// Pooled test outputs of each scorer alone, evaluated against MOS.
    pub scorer_reports: BTreeMap<u8, EvalReport>,
    pub skipped: Vec<SkipEntry>,
    /// Folds over the usable samples, as indices into `predictions`.
    pub plan: FoldPlan,
}

pub const PREDICTIONS_HEADER: &str = "sample_id,fold,mos,predicted_mos";

impl CvOutcome {
    pub fn predictions_csv(&self) -> String {
        let mut out = format!("{PREDICTIONS_HEADER}\n");
        for p in &self.predictions {
            let _ = writeln!(out, "{},{},{},{}", p.sample_id, p.fold, p.mos, p.predicted);
        }
        out
    }
}

struct CvRun {
    usable: Vec<Sample>,
    plan: FoldPlan,
    fold_of: Vec<usize>,
    /// Pooled denormalized fused predictions, one vector per column subset.
    fused: Vec<Vec<f64>>,
    /// Pooled denormalized scorer outputs, one vector per spec.
    scorer_outputs: Vec<Vec<f64>>,
    specs: Vec<ScorerSpec>,
    skipped: Vec<SkipEntry>,
}

fn run_cv(samples: &[Sample], cfg: &ParaboostConfig, cv: &CvConfig, subsets: &dyn Fn(&[ScorerSpec]) -> Result<Vec<Vec<usize>>>, observer: &dyn PipelineObserver) -> Result<CvRun> {
    let profile = DatasetProfile::of_dataset(samples)?;
    let specs = resolve_scorers(profile, cfg)?;
    let subsets = subsets(&specs)?;
    let extractor = FeatureExtractor::new(cfg.features.clone())?;
    let cache = build_cache(samples, &specs, &extractor, cfg.external.as_ref());
    let usable: Vec<Sample> = cache.usable.iter().map(|&i| samples[i].clone()).collect();
    let plan = FoldPlan::new(&usable, cv.folds, cv.policy, cv.seed)?;
    let fold_cfg = ParaboostConfig {
        seed: mix_seed(cfg.seed, cv.seed, 7),
        ..cfg.clone()
    };
    let ctx = Ctx {
        samples,
        specs: &specs,
        cache: &cache,
        cfg: &fold_cfg,
        observer,
    };
    type FoldResult = (Vec<Vec<f64>>, Vec<Vec<f64>>);
    let per_fold: Vec<FoldResult> = (0..plan.len())
        .into_par_iter()
        .map(|k| {
            let train = plan.training(k);
            let test = &plan.folds[k];
            log::info!("fold {}/{}: {} train, {} test", k + 1, plan.len(), train.len(), test.len());
            let stage = ctx.fit_stage_one(&train, Some(k))?;
            let test_scores = ctx.scores(&stage, test)?;
            let fused = subsets
                .iter()
                .map(|cols| {
                    let (fuser, _) = ctx.fit_fuser(&stage, cols, &train, Some(k))?;
                    test_scores
                        .iter()
                        .map(|s| {
                            let x: Vec<f64> = cols.iter().map(|&c| s[c]).collect();
                            fuser.predict(&x).map(|v| stage.norm.from_unit(v))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let scorer = test_scores
                .iter()
                .map(|s| s.iter().map(|&v| stage.norm.from_unit(v)).collect())
                .collect();
            Ok((fused, scorer))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = usable.len();
    let mut fused = vec![vec![0.0; n]; subsets.len()];
    let mut scorer_outputs = vec![vec![0.0; n]; specs.len()];
    let mut fold_of = vec![0; n];
    for (k, (f, s)) in per_fold.into_iter().enumerate() {
        for (t, &i) in plan.folds[k].iter().enumerate() {
            fold_of[i] = k;
            for (q, column) in f.iter().enumerate() {
                fused[q][i] = column[t];
            }
            for (j, v) in s[t].iter().enumerate() {
                scorer_outputs[j][i] = *v;
            }
        }
    }
    Ok(CvRun {
        usable,
        plan,
        fold_of,
        fused,
        scorer_outputs,
        specs,
        skipped: cache.skipped,
    })
}

/// k-fold cross-validation of the full two-stage pipeline.
pub fn cross_validate(samples: &[Sample], cfg: &ParaboostConfig, cv: &CvConfig) -> Result<CvOutcome> {
    cross_validate_observed(samples, cfg, cv, &NoObserver)
}

pub fn cross_validate_observed(samples: &[Sample], cfg: &ParaboostConfig, cv: &CvConfig, observer: &dyn PipelineObserver) -> Result<CvOutcome> {
    let all = |specs: &[ScorerSpec]| Ok(vec![(0..specs.len()).collect()]);
    let run = run_cv(samples, cfg, cv, &all, observer)?;
    let mos: Vec<f64> = run.usable.iter().map(|s| s.mos).collect();
    let mut report = evaluate(&run.fused[0], &mos)?;
    report.skipped = run.skipped.len();
    let mut scorer_reports = BTreeMap::new();
    for (spec, outputs) in run.specs.iter().zip(&run.scorer_outputs) {
        let mut r = evaluate(outputs, &mos)?;
        r.skipped = run.skipped.len();
        scorer_reports.insert(spec.id, r);
    }
    let predictions = run
        .usable
        .iter()
        .enumerate()
        .map(|(i, s)| CvPrediction {
            sample_id: s.id.clone(),
            fold: run.fold_of[i],
            mos: s.mos,
            predicted: run.fused[0][i],
        })
        .collect();
    Ok(CvOutcome {
        predictions,
        report,
        scorer_reports,
        skipped: run.skipped,
        plan: run.plan,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionRow {
    pub scorer_id: u8,
    pub scorer: String,
    pub pcc: Option<f64>,
    /// Percent change of PCC against the previous row; `None` on the
    /// first row or when either PCC is undefined or the previous is 0.
    pub gain: Option<f64>,
}

pub const FUSION_HEADER: &str = "scorer_id,scorer,pcc,gain_percent";

pub fn fusion_table_csv(rows: &[FusionRow]) -> String {
    let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
    let mut out = format!("{FUSION_HEADER}\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.scorer_id, r.scorer, opt(r.pcc), opt(r.gain));
    }
    out
}

/// Cross-validated PCC of the fuser over growing prefixes of `order`.
pub fn progressive_fusion_report(samples: &[Sample], order: &[u8], cfg: &ParaboostConfig, cv: &CvConfig) -> Result<Vec<FusionRow>> {
    if order.is_empty() {
        return Err(Error::InvalidParameter("progressive fusion needs at least one scorer".into()));
    }
    let mut unique = order.to_vec();
    unique.sort_unstable();
    unique.dedup();
    if unique.len() != order.len() {
        return Err(Error::InvalidParameter("scorer order contains duplicates".into()));
    }
    let cfg = ParaboostConfig {
        scorers: Some(unique),
        ..cfg.clone()
    };
    let order_vec = order.to_vec();
    let prefixes = move |specs: &[ScorerSpec]| {
        let pos: Vec<usize> = order_vec
            .iter()
            .map(|id| specs.iter().position(|s| s.id == *id).expect("order ids are the active set"))
            .collect();
        Ok((1..=pos.len()).map(|m| pos[..m].to_vec()).collect())
    };
    let run = run_cv(samples, &cfg, cv, &prefixes, &NoObserver)?;
    let mos: Vec<f64> = run.usable.iter().map(|s| s.mos).collect();
    let mut rows: Vec<FusionRow> = Vec::with_capacity(order.len());
    for (m, &id) in order.iter().enumerate() {
        let pcc = evaluate(&run.fused[m], &mos)?.pcc;
        let gain = match (rows.last().and_then(|r| r.pcc), pcc) {
            (Some(prev), Some(curr)) if m > 0 => performance_gain(prev, curr),
            _ => None,
        };
        let name = run.specs.iter().find(|s| s.id == id).map(|s| s.name.clone()).unwrap_or_default();
        rows.push(FusionRow {
            scorer_id: id,
            scorer: name,
            pcc,
            gain,
        });
    }
    Ok(rows)
}
