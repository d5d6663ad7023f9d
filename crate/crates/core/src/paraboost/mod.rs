//! Two-stage pipeline: distortion-targeted scorers fused by a second
//! regressor, with k-fold cross-validation.

mod folds;
mod model;
mod pipeline;
mod scorer;

pub use folds::{FoldPlan, FoldPolicy};
pub use model::{DatasetProfile, MosNormalization, ParaboostModel, ScoreVector, BUNDLE_MANIFEST, FUSER_FILE};
pub use pipeline::{
    cross_validate, cross_validate_observed, fusion_table_csv, progressive_fusion_report, resolve_scorers, train,
    train_fuser, train_observed, train_scorer, CvConfig, CvOutcome, CvPrediction, FuserInput, FusionRow, NoObserver,
    ParaboostConfig, PipelineObserver, SkipEntry, TrainOutcome, TrainingLog, TrainingStage, FUSION_HEADER,
    MIN_TRAINING_SAMPLES, PREDICTIONS_HEADER,
};
pub use scorer::{
    clamp_score, extract_scorer_features, score, score_features, InputSource, ScorerSpec, DEPTH_SCORER_ID,
    EXTERNAL_SCORER_ID,
};
