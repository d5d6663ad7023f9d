//! Partitions of a dataset into cross-validation chunks.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Sample;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FoldPolicy {
    /// Samples shuffled and dealt round-robin.
    #[default]
    Random,
    /// Whole source contents dealt to folds, so no reference content is
    /// shared between a training and a test chunk.
    ContentDisjoint,
}

impl std::str::FromStr for FoldPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(FoldPolicy::Random),
            "content-disjoint" => Ok(FoldPolicy::ContentDisjoint),
            other => Err(Error::InvalidParameter(format!(
                "unknown fold policy '{other}', expected random or content-disjoint"
            ))),
        }
    }
}

/// `folds[k]` lists the indices (into the sample slice) of chunk `k`, each
/// in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Vec<usize>>,
    pub policy: FoldPolicy,
    pub seed: u64,
}

impl FoldPlan {
    pub fn new(samples: &[Sample], k: usize, policy: FoldPolicy, seed: u64) -> Result<Self> {
        let n = samples.len();
        if k < 2 {
            return Err(Error::FoldPlan(format!("need at least 2 folds, got {k}")));
        }
        if n < k {
            return Err(Error::FoldPlan(format!("{n} samples cannot fill {k} folds")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut folds = vec![Vec::new(); k];
        match policy {
            FoldPolicy::Random => {
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(&mut rng);
                for (pos, i) in order.into_iter().enumerate() {
                    folds[pos % k].push(i);
                }
            }
            FoldPolicy::ContentDisjoint => {
                let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
                for (i, s) in samples.iter().enumerate() {
                    groups.entry(s.source_tag.as_str()).or_default().push(i);
                }
                if groups.len() < k {
                    let counts: Vec<String> = groups.iter().map(|(t, v)| format!("{t}: {}", v.len())).collect();
                    return Err(Error::FoldPlan(format!(
                        "content-disjoint split into {k} folds needs at least {k} distinct source tags, found {} ({})",
                        groups.len(),
                        counts.join(", ")
                    )));
                }
                let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
                groups.shuffle(&mut rng);
                // Largest groups first, each to the currently smallest fold.
                groups.sort_by_key(|g| std::cmp::Reverse(g.len()));
                for g in groups {
                    let target = (0..k).min_by_key(|&f| (folds[f].len(), f)).expect("k >= 2");
                    folds[target].extend(g);
                }
            }
        }
        for f in &mut folds {
            f.sort_unstable();
        }
        Ok(FoldPlan { folds, policy, seed })
    }

    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }

    /// Indices outside chunk `k`, ascending.
    pub fn training(&self, k: usize) -> Vec<usize> {
        let mut t: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|&(f, _)| f != k)
            .flat_map(|(_, v)| v.iter().copied())
            .collect();
        t.sort_unstable();
        t
    }
}
