//! Small datasets and fast configurations for pipeline tests.

use paraboost_core::paraboost::ParaboostConfig;
use paraboost_core::svr::{GridSearchSpec, SvrConfig};
use paraboost_core::synth::{synthetic_dataset, SyntheticSpec};
use paraboost_core::Sample;

pub fn small_grid() -> SvrConfig {
    SvrConfig {
        grid: GridSearchSpec {
            c_grid: vec![1.0, 16.0],
            gamma_grid: vec![0.25, 2.0],
            folds: 3,
        },
        ..SvrConfig::default()
    }
}

pub fn fast_config(scorers: &[u8]) -> ParaboostConfig {
    ParaboostConfig {
        scorer_svr: small_grid(),
        fuser_svr: small_grid(),
        scorers: Some(scorers.to_vec()),
        seed: 5,
        ..ParaboostConfig::default()
    }
}

/// 4 contents x 3 families x 3 levels.
pub fn small_dataset(depth: bool) -> Vec<Sample> {
    synthetic_dataset(&SyntheticSpec {
        sources: 4,
        levels: 3,
        depth,
        ..SyntheticSpec::default()
    })
    .unwrap()
}
